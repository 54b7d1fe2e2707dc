//! Univariate lifetime models on the nonnegative reals.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_pieces, IntegralResult, QuadratureSpec};
use crate::special::{gamma_p, gamma_q, normal_cdf, normal_log_sf, normal_pdf, normal_quantile, normal_sf};

/// A distribution on [0, ∞) seen through its survival function.
pub trait Lifetime: Send + Sync {
    fn sf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.sf(x)
    }
    /// Density of the absolutely continuous part.
    fn pdf(&self, x: f64) -> f64;
    fn log_sf(&self, x: f64) -> f64 {
        self.sf(x).ln()
    }
    fn quantile(&self, u: f64) -> f64;
    fn support(&self) -> (f64, f64);
    /// Points where sf or pdf is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    /// Point masses as (location, probability).
    fn atoms(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    fn is_absolutely_continuous(&self) -> bool {
        self.atoms().is_empty()
    }
}

/// Upper end used for integrals over [0, ∞): twice the (1 − tail_mass) quantile,
/// capped by the support.
pub fn upper_cut(m: &dyn Lifetime, spec: &QuadratureSpec) -> f64 {
    let (lo, hi) = m.support();
    let q = m.quantile(1.0 - spec.tail_mass);
    let cut = if q.is_finite() { 2.0 * q } else { hi };
    cut.min(hi).max(lo)
}

/// Integration nodes [0, breakpoints..., cut] for functionals of `m`.
pub fn integration_points(m: &dyn Lifetime, cut: f64, extra: &[f64]) -> Vec<f64> {
    let (lo, _) = m.support();
    let mut pts = vec![0.0, cut];
    pts.extend(std::iter::once(lo).chain(m.breakpoints()).chain(m.atoms().into_iter().map(|a| a.0)).chain(extra.iter().copied()));
    pts.retain(|p| p.is_finite() && *p >= 0.0 && *p <= cut);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// E[g(X)], summing atoms exactly and integrating the continuous part.
pub fn expectation(m: &dyn Lifetime, g: &dyn Fn(f64) -> f64, spec: &QuadratureSpec, extra_breaks: &[f64]) -> Result<IntegralResult> {
    let atoms = m.atoms();
    let atom_mass: f64 = atoms.iter().map(|a| a.1).sum();
    let mut total = IntegralResult::zero();
    for (x, p) in &atoms {
        let v = g(*x);
        if !v.is_finite() {
            return Err(Error::Integrand { x: *x });
        }
        total.value += p * v;
    }
    if atom_mass < 1.0 - 1e-12 {
        let cut = upper_cut(m, spec);
        let (lo, _) = m.support();
        let mut pts = integration_points(m, cut, extra_breaks);
        pts.retain(|p| *p >= lo);
        if pts.len() >= 2 {
            let f = |x: f64| {
                let d = m.pdf(x);
                if d == 0.0 {
                    0.0
                } else {
                    d * g(x)
                }
            };
            let r = integrate_pieces(&f, &pts, spec)?;
            total = total.combine(r, 1.0);
            total.truncation_point = Some(cut);
        }
    }
    Ok(total)
}

/// Sorted, finite, nonnegative, nonempty sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return domain("sample is empty");
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return domain(format!("sample entry {bad} is not a finite nonnegative number"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// #{x_i ≤ x}
    fn count_le(&self, x: f64) -> usize {
        self.0.partition_point(|v| *v <= x)
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnivariateModel {
    Uniform { a: f64, b: f64 },
    Exponential { lambda: f64 },
    /// Survival exp(−(λt)^q).
    Weibull { lambda: f64, q: f64 },
    /// Normal(μ, σ) censored at 0: the survival function is the untruncated one on [0, ∞).
    Gaussian { mu: f64, sigma: f64 },
    /// Shape k, scale θ.
    Gamma { k: f64, theta: f64 },
    Empirical { sample: Sample },
    Mixture { weights: Vec<f64>, components: Vec<UnivariateModel> },
    /// Law of X + Y for independent X and Y.
    Convolution {
        x: Box<UnivariateModel>,
        y: Box<UnivariateModel>,
        #[serde(default)]
        spec: QuadratureSpec,
    },
}

impl UnivariateModel {
    pub fn uniform(a: f64, b: f64) -> Self {
        Self::Uniform { a, b }
    }

    pub fn exponential(lambda: f64) -> Self {
        Self::Exponential { lambda }
    }

    pub fn weibull(lambda: f64, q: f64) -> Self {
        Self::Weibull { lambda, q }
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Self {
        Self::Gaussian { mu, sigma }
    }

    pub fn gamma(k: f64, theta: f64) -> Self {
        Self::Gamma { k, theta }
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        Ok(Self::Empirical { sample: Sample::new(values)? })
    }

    pub fn point_mass(c: f64) -> Result<Self> {
        Self::empirical(vec![c])
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Exponential { .. } => "exponential",
            Self::Weibull { .. } => "weibull",
            Self::Gaussian { .. } => "gaussian",
            Self::Gamma { .. } => "gamma",
            Self::Empirical { .. } => "empirical",
            Self::Mixture { .. } => "mixture",
            Self::Convolution { .. } => "convolution",
        }
    }

    /// The censored Gaussian carries an atom at 0 that the literal formula ignores.
    pub fn improper_on_nonnegative_reals(&self) -> bool {
        match self {
            Self::Gaussian { .. } => true,
            Self::Mixture { components, .. } => components.iter().any(Self::improper_on_nonnegative_reals),
            Self::Convolution { x, y, .. } => x.improper_on_nonnegative_reals() || y.improper_on_nonnegative_reals(),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                domain(format!("{} parameter {name} = {v} must be positive and finite", self.family()))
            }
        };
        match self {
            Self::Uniform { a, b } => {
                if !(*a >= 0.0 && a < b && b.is_finite()) {
                    return domain(format!("uniform needs 0 ≤ a < b < ∞, got a = {a}, b = {b}"));
                }
                Ok(())
            }
            Self::Exponential { lambda } => positive("lambda", *lambda),
            Self::Weibull { lambda, q } => positive("lambda", *lambda).and(positive("q", *q)),
            Self::Gaussian { mu, sigma } => {
                if !mu.is_finite() {
                    return domain("gaussian mean must be finite");
                }
                positive("sigma", *sigma)
            }
            Self::Gamma { k, theta } => positive("k", *k).and(positive("theta", *theta)),
            Self::Empirical { sample } => {
                if sample.is_empty() {
                    domain("empirical sample is empty")
                } else {
                    Ok(())
                }
            }
            Self::Mixture { weights, components } => {
                if weights.is_empty() || weights.len() != components.len() {
                    return domain("mixture needs one weight per component");
                }
                if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                    return domain("mixture weights must be nonnegative");
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return domain(format!("mixture weights sum to {total}, not 1"));
                }
                components.iter().try_for_each(Self::validate)
            }
            Self::Convolution { x, y, spec } => {
                x.validate()?;
                y.validate()?;
                spec.validate()?;
                if !x.is_absolutely_continuous() && !y.is_absolutely_continuous() {
                    return domain("convolution needs at least one absolutely continuous summand");
                }
                Ok(())
            }
        }
    }

    /// Summands of a convolution ordered so the first is absolutely continuous.
    fn summands<'a>(x: &'a UnivariateModel, y: &'a UnivariateModel) -> (&'a UnivariateModel, &'a UnivariateModel) {
        if x.is_absolutely_continuous() {
            (x, y)
        } else {
            (y, x)
        }
    }

    fn convolution_sf(x: &UnivariateModel, y: &UnivariateModel, spec: &QuadratureSpec, w: f64) -> f64 {
        let (cont, other) = Self::summands(x, y);
        let (lo, hi) = cont.support();
        if w < lo + other.support().0 {
            return 1.0;
        }
        let mut breaks: Vec<f64> = cont.breakpoints().into_iter().chain([lo, hi]).map(|b| w - b).collect();
        breaks.push(w);
        match expectation(other, &|t| cont.sf(w - t), spec, &breaks) {
            Ok(r) => r.value.clamp(0.0, 1.0),
            Err(_) => f64::NAN,
        }
    }

    fn bisect_quantile(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        let mut b = if hi.is_finite() { hi } else { lo.max(1.0) };
        while hi.is_infinite() && self.cdf(b) < u {
            b *= 2.0;
            if b > 1e300 {
                return f64::INFINITY;
            }
        }
        let mut a = lo;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if self.cdf(mid) < u {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-15 * b.abs().max(1e-300) {
                break;
            }
        }
        b
    }
}

impl Lifetime for UnivariateModel {
    fn sf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { a, b } => {
                if x < *a {
                    1.0
                } else if x >= *b {
                    0.0
                } else {
                    (b - x) / (b - a)
                }
            }
            Self::Exponential { lambda } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-lambda * x).exp()
                }
            }
            Self::Weibull { lambda, q } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(lambda * x).powf(*q)).exp()
                }
            }
            Self::Gaussian { mu, sigma } => {
                if x < 0.0 {
                    1.0
                } else {
                    normal_sf((x - mu) / sigma)
                }
            }
            Self::Gamma { k, theta } => gamma_q(*k, x / theta),
            Self::Empirical { sample } => (sample.len() - sample.count_le(x)) as f64 / sample.len() as f64,
            Self::Mixture { weights, components } => weights.iter().zip(components).map(|(w, c)| w * c.sf(x)).sum(),
            Self::Convolution { x: a, y: b, spec } => Self::convolution_sf(a, b, spec, x),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { .. } | Self::Convolution { .. } => 1.0 - self.sf(x),
            Self::Exponential { lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            Self::Weibull { lambda, q } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(lambda * x).powf(*q)).exp_m1()
                }
            }
            Self::Gaussian { mu, sigma } => {
                if x < 0.0 {
                    0.0
                } else {
                    normal_cdf((x - mu) / sigma)
                }
            }
            Self::Gamma { k, theta } => gamma_p(*k, x / theta),
            Self::Empirical { sample } => sample.count_le(x) as f64 / sample.len() as f64,
            Self::Mixture { weights, components } => weights.iter().zip(components).map(|(w, c)| w * c.cdf(x)).sum(),
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { a, b } => {
                if x >= *a && x <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Self::Exponential { lambda } => {
                if x < 0.0 {
                    0.0
                } else {
                    lambda * (-lambda * x).exp()
                }
            }
            Self::Weibull { lambda, q } => {
                if x <= 0.0 {
                    if x == 0.0 && *q == 1.0 {
                        *lambda
                    } else {
                        0.0
                    }
                } else {
                    let z = (lambda * x).powf(*q);
                    q * z / x * (-z).exp()
                }
            }
            Self::Gaussian { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_pdf((x - mu) / sigma) / sigma
                }
            }
            Self::Gamma { k, theta } => {
                if x <= 0.0 {
                    0.0
                } else {
                    ((k - 1.0) * x.ln() - x / theta - ln_gamma(*k) - k * theta.ln()).exp()
                }
            }
            Self::Empirical { .. } => 0.0,
            Self::Mixture { weights, components } => weights.iter().zip(components).map(|(w, c)| w * c.pdf(x)).sum(),
            Self::Convolution { x: a, y: b, spec } => {
                let (cont, other) = Self::summands(a, b);
                let (lo, hi) = cont.support();
                let breaks: Vec<f64> = cont.breakpoints().into_iter().chain([lo, hi]).map(|t| x - t).collect();
                expectation(other, &|t| cont.pdf(x - t), spec, &breaks).map(|r| r.value).unwrap_or(f64::NAN)
            }
        }
    }

    fn log_sf(&self, x: f64) -> f64 {
        match self {
            Self::Exponential { lambda } => -lambda * x.max(0.0),
            Self::Weibull { lambda, q } => -(lambda * x.max(0.0)).powf(*q),
            Self::Gaussian { mu, sigma } if x >= 0.0 => normal_log_sf((x - mu) / sigma),
            _ => self.sf(x).ln(),
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        match self {
            Self::Uniform { a, b } => a + u * (b - a),
            Self::Exponential { lambda } => -(-u).ln_1p() / lambda,
            Self::Weibull { lambda, q } => (-(-u).ln_1p()).powf(1.0 / q) / lambda,
            Self::Gaussian { mu, sigma } => {
                if u <= normal_cdf(-mu / sigma) {
                    0.0
                } else {
                    (mu + sigma * normal_quantile(u)).max(0.0)
                }
            }
            Self::Gamma { k, theta } => theta * gamma_quantile(*k, u),
            Self::Empirical { sample } => {
                let n = sample.len();
                let idx = ((u * n as f64).ceil() as usize).clamp(1, n) - 1;
                sample.values()[idx]
            }
            Self::Mixture { .. } | Self::Convolution { .. } => self.bisect_quantile(u),
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform { a, b } => (*a, *b),
            Self::Exponential { .. } | Self::Weibull { .. } | Self::Gaussian { .. } | Self::Gamma { .. } => (0.0, f64::INFINITY),
            Self::Empirical { sample } => (sample.values()[0], *sample.values().last().unwrap()),
            Self::Mixture { weights, components } => weights
                .iter()
                .zip(components)
                .filter(|(w, _)| **w > 0.0)
                .map(|(_, c)| c.support())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, s| (acc.0.min(s.0), acc.1.max(s.1))),
            Self::Convolution { x, y, .. } => {
                let (a, b) = (x.support(), y.support());
                (a.0 + b.0, a.1 + b.1)
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Uniform { a, b } => vec![*a, *b],
            Self::Empirical { sample } => sample.values().to_vec(),
            Self::Mixture { components, .. } => {
                let mut all: Vec<f64> = components.iter().flat_map(|c| {
                    let (lo, hi) = c.support();
                    c.breakpoints().into_iter().chain([lo, hi])
                }).filter(|x| x.is_finite()).collect();
                all.sort_by(f64::total_cmp);
                all.dedup();
                all
            }
            Self::Convolution { x, y, .. } => {
                let bx: Vec<f64> = x.breakpoints().into_iter().chain([x.support().0]).collect();
                let by: Vec<f64> = y.breakpoints().into_iter().chain([y.support().0]).collect();
                let mut all: Vec<f64> = bx.iter().flat_map(|a| by.iter().map(move |b| a + b)).filter(|v| v.is_finite()).collect();
                all.sort_by(f64::total_cmp);
                all.dedup();
                all
            }
            _ => Vec::new(),
        }
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Gaussian { mu, sigma } => {
                let mass = normal_cdf(-mu / sigma);
                if mass > 0.0 {
                    vec![(0.0, mass)]
                } else {
                    Vec::new()
                }
            }
            Self::Empirical { sample } => {
                let n = sample.len() as f64;
                let mut out: Vec<(f64, f64)> = Vec::new();
                for &v in sample.values() {
                    match out.last_mut() {
                        Some(last) if last.0 == v => last.1 += 1.0 / n,
                        _ => out.push((v, 1.0 / n)),
                    }
                }
                out
            }
            Self::Mixture { weights, components } => {
                let mut out: Vec<(f64, f64)> = weights
                    .iter()
                    .zip(components)
                    .flat_map(|(w, c)| c.atoms().into_iter().map(move |(x, p)| (x, w * p)))
                    .filter(|a| a.1 > 0.0)
                    .collect();
                out.sort_by(|a, b| a.0.total_cmp(&b.0));
                out
            }
            _ => Vec::new(),
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            Self::Gamma { k, theta } => {
                let dist = rand_distr::Gamma::new(*k, *theta).expect("validated gamma parameters");
                rng.sample(dist)
            }
            Self::Empirical { sample } => sample.values()[rng.gen_range(0..sample.len())],
            Self::Mixture { weights, components } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (w, c) in weights.iter().zip(components) {
                    acc += w;
                    if u < acc {
                        return c.sample(rng);
                    }
                }
                components.last().expect("validated mixture").sample(rng)
            }
            Self::Convolution { x, y, .. } => x.sample(rng) + y.sample(rng),
            _ => self.quantile(rng.gen::<f64>()),
        }
    }
}

/// Inverse of the regularized lower incomplete gamma function in x.
fn gamma_quantile(k: f64, u: f64) -> f64 {
    let (mut a, mut b) = (0.0_f64, k.max(1.0));
    while gamma_p(k, b) < u {
        a = b;
        b *= 2.0;
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..300 {
        let f = gamma_p(k, x) - u;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let density = ((k - 1.0) * x.ln() - x - ln_gamma(k)).exp();
        let newton = x - f / density;
        let next = if density > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || b - a <= 4.0 * f64::EPSILON * b {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn families() -> Vec<UnivariateModel> {
        vec![
            UnivariateModel::uniform(0.0, 1.0),
            UnivariateModel::uniform(0.5, 2.0),
            UnivariateModel::exponential(1.0),
            UnivariateModel::exponential(2.5),
            UnivariateModel::weibull(1.0, 2.0),
            UnivariateModel::weibull(0.7, 0.6),
            UnivariateModel::gaussian(1.0, 0.5),
            UnivariateModel::gamma(2.0, 0.5),
            UnivariateModel::gamma(0.5, 2.0),
            UnivariateModel::Mixture {
                weights: vec![0.3, 0.7],
                components: vec![UnivariateModel::exponential(1.0), UnivariateModel::uniform(0.0, 2.0)],
            },
        ]
    }

    #[test]
    fn sf_cdf_complement_and_monotone() {
        let mut models = families();
        models.push(UnivariateModel::empirical(vec![0.3, 1.0, 1.0, 2.5]).unwrap());
        for m in &models {
            m.validate().unwrap();
            let mut prev = f64::INFINITY;
            for i in 0..400 {
                let x = i as f64 * 0.02;
                let (s, c) = (m.sf(x), m.cdf(x));
                assert!((s + c - 1.0).abs() < 1e-12, "{m:?} at {x}");
                assert!(s <= prev + 1e-15);
                prev = s;
            }
            assert!(m.sf(0.0) <= 1.0);
        }
    }

    #[test]
    fn quantile_inverts_cdf_in_interior() {
        for m in families() {
            for i in 1..40 {
                let u = i as f64 / 40.0;
                let x = m.quantile(u);
                if x > 0.0 && m.pdf(x) > 1e-3 {
                    let back = m.quantile(m.cdf(x));
                    assert!((back - x).abs() < 1e-8, "{m:?}: {x} -> {back}");
                }
            }
        }
    }

    fn ks_statistic(m: &UnivariateModel, draws: &mut [f64]) -> f64 {
        draws.sort_by(f64::total_cmp);
        let n = draws.len() as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < draws.len() {
            let x = draws[i];
            let j = draws.partition_point(|v| *v <= x);
            let left = m.cdf(x - 1e-12 * x.abs().max(1e-9));
            d = d.max((j as f64 / n - m.cdf(x)).abs()).max((i as f64 / n - left).abs());
            i = j;
        }
        d
    }

    #[test]
    fn samplers_pass_kolmogorov() {
        let mut models = families();
        models.push(UnivariateModel::empirical(vec![0.3, 1.0, 1.0, 2.5]).unwrap());
        let critical = (-(1e-3f64 / 2.0).ln() / 2.0).sqrt() / 100.0;
        for (k, m) in models.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let mut draws: Vec<f64> = (0..10_000).map(|_| m.sample(&mut rng)).collect();
            assert!(draws.iter().all(|x| x.is_finite() && *x >= 0.0));
            let d = ks_statistic(m, &mut draws);
            assert!(d < critical, "{m:?}: D = {d}");
        }
    }

    #[test]
    fn expectation_of_atoms_and_density() {
        let spec = QuadratureSpec::default();
        let m = UnivariateModel::gaussian(0.0, 1.0);
        // E[max(Z,0)] = 1/√(2π)
        let e = expectation(&m, &|x| x, &spec, &[]).unwrap().value;
        assert!((e - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
        let p = expectation(&m, &|_| 1.0, &spec, &[]).unwrap().value;
        assert!((p - 1.0).abs() < 1e-10);
        let emp = UnivariateModel::empirical(vec![1.0, 3.0]).unwrap();
        assert_eq!(expectation(&emp, &|x| x * x, &spec, &[]).unwrap().value, 5.0);
    }

    #[test]
    fn convolution_examples() {
        let spec = QuadratureSpec::default();
        let sum = UnivariateModel::Convolution {
            x: Box::new(UnivariateModel::exponential(1.0)),
            y: Box::new(UnivariateModel::exponential(1.0)),
            spec,
        };
        for w in [0.0, 1.0, 2.0] {
            assert!((sum.sf(w) - (1.0 + w) * (-w as f64).exp()).abs() < 1e-10);
        }
        let shifted = UnivariateModel::Convolution {
            x: Box::new(UnivariateModel::exponential(1.0)),
            y: Box::new(UnivariateModel::point_mass(0.0).unwrap()),
            spec,
        };
        for w in [0.0, 0.5, 3.0] {
            assert!((shifted.sf(w) - (-w as f64).exp()).abs() < 1e-14);
        }
        let tri = UnivariateModel::Convolution {
            x: Box::new(UnivariateModel::uniform(0.0, 1.0)),
            y: Box::new(UnivariateModel::uniform(0.0, 1.0)),
            spec,
        };
        assert!((tri.sf(1.0) - 0.5).abs() < 1e-10);
        assert!((tri.sf(1.5) - 0.125).abs() < 1e-10);
        assert!((tri.pdf(0.5) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(UnivariateModel::uniform(1.0, 1.0).validate().is_err());
        assert!(UnivariateModel::exponential(-1.0).validate().is_err());
        assert!(UnivariateModel::empirical(vec![-1.0]).is_err());
        assert!(serde_json::from_str::<UnivariateModel>(r#"{"family":"empirical","sample":[]}"#).is_err());
        let m: UnivariateModel = serde_json::from_str(r#"{"family":"empirical","sample":[2,1]}"#).unwrap();
        assert_eq!(m.quantile(0.5), 1.0);
    }
}
