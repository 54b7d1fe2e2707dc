//! Bivariate and trivariate lifetime models: independent products, componentwise
//! censored Gaussians, and FGM-type copulas written at the survival level.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{Lifetime, UnivariateModel};
use crate::quadrature::{integrate_pieces, QuadratureSpec};
use crate::special::{bvn_upper, normal_pdf, normal_sf};

/// Joint law of a nonnegative random vector of dimension 2 or 3.
///
/// The copula families are parametrised through the joint survival function,
/// e.g. F̄(x₁, x₂) = F̄₁F̄₂(1 + θF₁F₂).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MultivariateModel {
    IndependentProduct {
        components: Vec<UnivariateModel>,
    },
    /// max(N(mean, cov), 0) taken componentwise.
    Gaussian {
        mean: Vec<f64>,
        cov: Vec<Vec<f64>>,
    },
    FgmCopula {
        theta: f64,
        marginals: Vec<UnivariateModel>,
    },
    /// F̄ = F̄₁F̄₂F̄₃(1 + θ₁₂F₁F₂)(1 + θ₂₃F₂F₃): two FGM pairs sharing the middle
    /// coordinate, so that F̄·F̄₂ = F̄₁₂·F̄₂₃.
    FgmChain {
        theta_12: f64,
        theta_23: f64,
        marginals: Vec<UnivariateModel>,
    },
    /// F̄ = ∏F̄ᵢ(1 + Σθᵢⱼ FᵢFⱼ + θ₁₂₃F₁F₂F₃).
    Fgm3 {
        theta_12: f64,
        theta_13: f64,
        theta_23: f64,
        #[serde(default)]
        theta_123: f64,
        marginals: Vec<UnivariateModel>,
    },
}

impl MultivariateModel {
    pub fn independent(components: Vec<UnivariateModel>) -> Self {
        Self::IndependentProduct { components }
    }

    pub fn fgm(theta: f64, first: UnivariateModel, second: UnivariateModel) -> Self {
        Self::FgmCopula { theta, marginals: vec![first, second] }
    }

    pub fn fgm_chain(theta_12: f64, theta_23: f64, marginals: [UnivariateModel; 3]) -> Self {
        Self::FgmChain { theta_12, theta_23, marginals: marginals.into() }
    }

    pub fn gaussian(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Self {
        Self::Gaussian { mean, cov }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::IndependentProduct { .. } => "independent_product",
            Self::Gaussian { .. } => "gaussian",
            Self::FgmCopula { .. } => "fgm_copula",
            Self::FgmChain { .. } => "fgm_chain",
            Self::Fgm3 { .. } => "fgm3",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::IndependentProduct { components } => components.len(),
            Self::Gaussian { mean, .. } => mean.len(),
            Self::FgmCopula { marginals, .. } | Self::FgmChain { marginals, .. } | Self::Fgm3 { marginals, .. } => marginals.len(),
        }
    }

    pub fn is_independent(&self) -> bool {
        match self {
            Self::IndependentProduct { .. } => true,
            Self::FgmCopula { theta, .. } => *theta == 0.0,
            Self::FgmChain { theta_12, theta_23, .. } => *theta_12 == 0.0 && *theta_23 == 0.0,
            Self::Fgm3 { theta_12, theta_13, theta_23, theta_123, .. } => [theta_12, theta_13, theta_23, theta_123].iter().all(|t| **t == 0.0),
            Self::Gaussian { cov, .. } => (0..cov.len()).all(|i| (0..cov.len()).all(|j| i == j || cov[i][j] == 0.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        let want = |k: usize| -> Result<()> {
            if n == k {
                Ok(())
            } else {
                domain(format!("{} model needs {k} coordinates, got {n}", self.family()))
            }
        };
        match self {
            Self::IndependentProduct { components } => {
                if !(2..=3).contains(&n) {
                    return domain(format!("independent product needs 2 or 3 components, got {n}"));
                }
                components.iter().try_for_each(|c| c.validate())
            }
            Self::Gaussian { mean, cov } => {
                if !(1..=3).contains(&n) {
                    return domain(format!("gaussian model needs 1 to 3 coordinates, got {n}"));
                }
                if mean.iter().any(|m| !m.is_finite()) {
                    return domain("gaussian mean must be finite");
                }
                check_covariance(cov, n).map(|_| ())
            }
            Self::FgmCopula { theta, marginals } => {
                want(2)?;
                if !(-1.0..=1.0).contains(theta) {
                    return domain(format!("FGM parameter {theta} outside [-1, 1]"));
                }
                marginals.iter().try_for_each(|c| c.validate())
            }
            Self::FgmChain { theta_12, theta_23, marginals } => {
                want(3)?;
                let (a, b) = (theta_12.abs(), theta_23.abs());
                if !(1.0 - a - b - a * b >= 0.0) {
                    return domain(format!("FGM chain parameters ({theta_12}, {theta_23}) do not give a density"));
                }
                marginals.iter().try_for_each(|c| c.validate())
            }
            Self::Fgm3 { theta_12, theta_13, theta_23, theta_123, marginals } => {
                want(3)?;
                let total = theta_12.abs() + theta_13.abs() + theta_23.abs() + theta_123.abs();
                if !(total <= 1.0) {
                    return domain(format!("trivariate FGM parameters sum to {total} in absolute value, above 1"));
                }
                marginals.iter().try_for_each(|c| c.validate())
            }
        }
    }

    /// Marginal law of coordinate `i` (zero-based).
    pub fn marginal(&self, i: usize) -> UnivariateModel {
        match self {
            Self::IndependentProduct { components } => components[i].clone(),
            Self::FgmCopula { marginals, .. } | Self::FgmChain { marginals, .. } | Self::Fgm3 { marginals, .. } => marginals[i].clone(),
            Self::Gaussian { mean, cov } => UnivariateModel::gaussian(mean[i], cov[i][i].sqrt()),
        }
    }

    /// Sub-vector law on the listed coordinates, in the given order.
    pub fn sub_model(&self, coords: &[usize]) -> Result<SubModel> {
        if coords.is_empty() || coords.iter().any(|c| *c >= self.dim()) {
            return domain(format!("coordinates {coords:?} out of range for dimension {}", self.dim()));
        }
        Ok(SubModel { parent: self.clone(), coords: coords.to_vec() })
    }

    /// Joint sf given the coordinates `x` and the marginal survival values `s`
    /// at those coordinates. Setting sᵢ = 1 marginalises coordinate i for the
    /// copula families; the Gaussian family reads `x` only.
    pub fn sf_from_marginals(&self, x: &[f64], s: &[f64]) -> f64 {
        match self {
            Self::IndependentProduct { .. } => s.iter().product(),
            Self::FgmCopula { theta, .. } => {
                let prod = s[0] * s[1];
                if prod == 0.0 {
                    0.0
                } else {
                    prod * (1.0 + theta * (1.0 - s[0]) * (1.0 - s[1]))
                }
            }
            Self::FgmChain { theta_12, theta_23, .. } => {
                let prod = s[0] * s[1] * s[2];
                if prod == 0.0 {
                    return 0.0;
                }
                let f = [1.0 - s[0], 1.0 - s[1], 1.0 - s[2]];
                prod * (1.0 + theta_12 * f[0] * f[1]) * (1.0 + theta_23 * f[1] * f[2])
            }
            Self::Fgm3 { theta_12, theta_13, theta_23, theta_123, .. } => {
                let prod = s[0] * s[1] * s[2];
                if prod == 0.0 {
                    return 0.0;
                }
                let f = [1.0 - s[0], 1.0 - s[1], 1.0 - s[2]];
                prod * (1.0 + theta_12 * f[0] * f[1] + theta_13 * f[0] * f[2] + theta_23 * f[1] * f[2] + theta_123 * f[0] * f[1] * f[2])
            }
            Self::Gaussian { mean, cov } => gaussian_upper(mean, cov, x),
        }
    }

    /// Survival function of the sub-vector on `coords` at the parent point `x`
    /// with parent marginal sfs `s`. An empty set gives 1.
    pub fn sf_of(&self, coords: &[usize], x: &[f64], s: &[f64]) -> f64 {
        let n = s.len();
        if coords.is_empty() {
            return 1.0;
        }
        if coords.len() == 1 {
            return s[coords[0]];
        }
        if coords.len() == n {
            return self.sf_from_marginals(x, s);
        }
        match self {
            Self::Gaussian { mean, cov } => {
                let mut m = [0.0; 3];
                let mut xs = [0.0; 3];
                let mut c = vec![vec![0.0; coords.len()]; coords.len()];
                for (a, i) in coords.iter().enumerate() {
                    m[a] = mean[*i];
                    xs[a] = x[*i];
                    for (b, j) in coords.iter().enumerate() {
                        c[a][b] = cov[*i][*j];
                    }
                }
                gaussian_upper(&m[..coords.len()], &c, &xs[..coords.len()])
            }
            _ => {
                let mut masked = [1.0; 3];
                for i in coords {
                    masked[*i] = s[*i];
                }
                self.sf_from_marginals(x, &masked[..n])
            }
        }
    }

    /// P(X > x) componentwise.
    pub fn sf(&self, x: &[f64]) -> f64 {
        let s: Vec<f64> = x.iter().enumerate().map(|(i, xi)| self.marginal(i).sf(*xi)).collect();
        self.sf_from_marginals(x, &s)
    }

    /// P(X ≤ x) componentwise.
    pub fn cdf(&self, x: &[f64]) -> f64 {
        match self {
            Self::IndependentProduct { components } => components.iter().zip(x).map(|(c, xi)| c.cdf(*xi)).product(),
            Self::Gaussian { mean, cov } => {
                if x.iter().any(|v| *v < 0.0) {
                    return 0.0;
                }
                let neg_mean: Vec<f64> = mean.iter().map(|m| -m).collect();
                let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
                gaussian_upper(&neg_mean, cov, &neg_x)
            }
            _ => {
                let s: Vec<f64> = x.iter().enumerate().map(|(i, xi)| self.marginal(i).sf(*xi)).collect();
                self.cdf_from_marginals(x, &s)
            }
        }
    }

    /// Inclusion–exclusion over the sub-vector survival functions.
    pub fn cdf_from_marginals(&self, x: &[f64], s: &[f64]) -> f64 {
        if let Self::Gaussian { .. } = self {
            return self.cdf(x);
        }
        if let Self::IndependentProduct { .. } = self {
            return s.iter().map(|v| 1.0 - v).product();
        }
        let n = s.len();
        let mut total = 0.0;
        let mut masked = vec![1.0; n];
        for mask in 0u32..(1 << n) {
            for (i, m) in masked.iter_mut().enumerate() {
                *m = if mask & (1 << i) != 0 { s[i] } else { 1.0 };
            }
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * if mask == 0 { 1.0 } else { self.sf_from_marginals(x, &masked) };
        }
        total.clamp(0.0, 1.0)
    }

    /// F̄(x) / F̄ᵢ(xᵢ), the survival function of the vector given Xᵢ > xᵢ.
    pub fn conditional_sf(&self, x: &[f64], given: usize) -> f64 {
        let denom = self.marginal(given).sf(x[given]);
        if denom <= 0.0 {
            0.0
        } else {
            (self.sf(x) / denom).min(1.0)
        }
    }

    /// Law of coordinate `target` given X_`given` = t, for bivariate products
    /// and FGM copulas.
    pub fn conditional_law(&self, target: usize, given: usize, t: f64) -> Result<ConditionalLaw> {
        if self.dim() != 2 || target == given || target > 1 || given > 1 {
            return domain("conditional laws are available for bivariate models only");
        }
        let tilt = match self {
            Self::IndependentProduct { .. } => 0.0,
            Self::FgmCopula { theta, marginals } => theta * (2.0 * marginals[given].cdf(t) - 1.0),
            _ => return domain(format!("no closed-form conditional law for the {} family", self.family())),
        };
        Ok(ConditionalLaw { marginal: self.marginal(target), tilt })
    }

    /// Joint density of a bivariate product or FGM model.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        match self {
            Self::IndependentProduct { components } => Ok(components.iter().zip(x).map(|(c, v)| c.pdf(*v)).product()),
            Self::FgmCopula { theta, marginals } => {
                let base = marginals[0].pdf(x[0]) * marginals[1].pdf(x[1]);
                let (a, b) = (1.0 - 2.0 * marginals[0].cdf(x[0]), 1.0 - 2.0 * marginals[1].cdf(x[1]));
                Ok(base * (1.0 + theta * a * b))
            }
            _ => domain(format!("density not provided for the {} family", self.family())),
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        match self {
            Self::IndependentProduct { components } => components.iter().map(|c| c.sample(rng)).collect(),
            Self::Gaussian { mean, cov } => {
                let l = check_covariance(cov, mean.len()).expect("validated covariance");
                let z: Vec<f64> = (0..mean.len()).map(|_| rng.sample(StandardNormal)).collect();
                (0..mean.len())
                    .map(|i| (mean[i] + (0..=i).map(|j| l[i][j] * z[j]).sum::<f64>()).max(0.0))
                    .collect()
            }
            _ => {
                let n = self.dim();
                let bound = self.copula_density_bound();
                loop {
                    let s: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                    if rng.gen::<f64>() * bound <= self.copula_density(&s) {
                        return s.iter().enumerate().map(|(i, si)| self.marginal(i).quantile(1.0 - si)).collect();
                    }
                }
            }
        }
    }

    /// Density of the survival copula at survival ranks `s`.
    fn copula_density(&self, s: &[f64]) -> f64 {
        let b: Vec<f64> = s.iter().map(|v| 1.0 - 2.0 * v).collect();
        match self {
            Self::FgmCopula { theta, .. } => 1.0 + theta * b[0] * b[1],
            Self::FgmChain { theta_12, theta_23, .. } => {
                1.0 + theta_12 * b[0] * b[1] + theta_23 * b[1] * b[2] + theta_12 * theta_23 * b[0] * b[2] * (1.0 - s[1]) * (1.0 - 3.0 * s[1])
            }
            Self::Fgm3 { theta_12, theta_13, theta_23, theta_123, .. } => {
                1.0 + theta_12 * b[0] * b[1] + theta_13 * b[0] * b[2] + theta_23 * b[1] * b[2] + theta_123 * b[0] * b[1] * b[2]
            }
            _ => 1.0,
        }
    }

    fn copula_density_bound(&self) -> f64 {
        match self {
            Self::FgmCopula { theta, .. } => 1.0 + theta.abs(),
            Self::FgmChain { theta_12, theta_23, .. } => 1.0 + theta_12.abs() + theta_23.abs() + (theta_12 * theta_23).abs(),
            Self::Fgm3 { theta_12, theta_13, theta_23, theta_123, .. } => 1.0 + theta_12.abs() + theta_13.abs() + theta_23.abs() + theta_123.abs(),
            _ => 1.0,
        }
    }
}

/// The law of a sub-vector, evaluated through the parent model.
#[derive(Debug, Clone)]
pub struct SubModel {
    parent: MultivariateModel,
    coords: Vec<usize>,
}

impl SubModel {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Joint sf of the sub-vector given parent-length marginal sfs `s`; the other
    /// coordinates are marginalised.
    pub fn sf_from_parent(&self, x: &[f64], s: &[f64]) -> f64 {
        match &self.parent {
            MultivariateModel::Gaussian { mean, cov } => {
                let m: Vec<f64> = self.coords.iter().map(|i| mean[*i]).collect();
                let c: Vec<Vec<f64>> = self.coords.iter().map(|i| self.coords.iter().map(|j| cov[*i][*j]).collect()).collect();
                let xs: Vec<f64> = self.coords.iter().map(|i| x[*i]).collect();
                gaussian_upper(&m, &c, &xs)
            }
            p => p.sf_of(&self.coords, x, s),
        }
    }
}

/// Law of one FGM coordinate given the other equals t:
/// P(X > x | ·) = F̄(x)(1 + c·F(x)).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalLaw {
    pub marginal: UnivariateModel,
    pub tilt: f64,
}

impl ConditionalLaw {
    fn lift(&self, v: f64) -> f64 {
        v * (1.0 - self.tilt + self.tilt * v)
    }
}

impl Lifetime for ConditionalLaw {
    fn sf(&self, x: f64) -> f64 {
        let s = self.marginal.sf(x);
        s * (1.0 + self.tilt * (1.0 - s))
    }

    fn cdf(&self, x: f64) -> f64 {
        self.lift(self.marginal.cdf(x))
    }

    fn pdf(&self, x: f64) -> f64 {
        self.marginal.pdf(x) * (1.0 + self.tilt * (2.0 * self.marginal.cdf(x) - 1.0))
    }

    fn log_sf(&self, x: f64) -> f64 {
        self.marginal.log_sf(x) + (self.tilt * self.marginal.cdf(x)).ln_1p()
    }

    fn quantile(&self, u: f64) -> f64 {
        let c = self.tilt;
        let v = if c.abs() < 1e-12 {
            u
        } else {
            let b = 1.0 - c;
            // root of c·v² + (1 − c)·v − u in [0, 1], written to avoid cancellation
            2.0 * u / (b + (b * b + 4.0 * c * u).sqrt())
        };
        self.marginal.quantile(v.clamp(0.0, 1.0))
    }

    fn support(&self) -> (f64, f64) {
        self.marginal.support()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.marginal.breakpoints()
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        self.marginal
            .atoms()
            .into_iter()
            .map(|(x, p)| {
                let hi = self.marginal.cdf(x);
                (x, self.lift(hi) - self.lift((hi - p).max(0.0)))
            })
            .collect()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.gen();
        self.quantile(u)
    }

    fn is_absolutely_continuous(&self) -> bool {
        self.marginal.is_absolutely_continuous()
    }
}

/// Cholesky factor of a symmetric positive definite matrix of size n.
pub fn check_covariance(cov: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    if cov.len() != n || cov.iter().any(|r| r.len() != n) {
        return domain(format!("covariance must be {n}x{n}"));
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (cov[i][j], cov[j][i]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return domain(format!("covariance is not symmetric at ({i}, {j})"));
            }
        }
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = cov[i][i] - s;
                if !(d > 0.0) || !d.is_finite() {
                    return domain("covariance is not positive definite");
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (cov[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

pub fn determinant(cov: &[Vec<f64>]) -> Result<f64> {
    let l = check_covariance(cov, cov.len())?;
    Ok((0..cov.len()).map(|i| l[i][i] * l[i][i]).product())
}

/// P(Z > x) for Z ~ N(mean, cov) in dimension 1 to 3 (no censoring).
pub fn gaussian_upper(mean: &[f64], cov: &[Vec<f64>], x: &[f64]) -> f64 {
    let n = mean.len();
    let sd: Vec<f64> = (0..n).map(|i| cov[i][i].sqrt()).collect();
    let h: Vec<f64> = (0..n).map(|i| (x[i] - mean[i]) / sd[i]).collect();
    let r = |i: usize, j: usize| cov[i][j] / (sd[i] * sd[j]);
    match n {
        1 => normal_sf(h[0]),
        2 => bvn_upper(h[0], h[1], r(0, 1)),
        _ => trivariate_upper(&h, r(0, 1), r(0, 2), r(1, 2)).unwrap_or(f64::NAN),
    }
}

/// Standardised trivariate orthant: ∫_{h₁}^∞ φ(z) P(Z₂ > h₂, Z₃ > h₃ | Z₁ = z) dz.
fn trivariate_upper(h: &[f64], r12: f64, r13: f64, r23: f64) -> Result<f64> {
    let s2 = (1.0 - r12 * r12).sqrt();
    let s3 = (1.0 - r13 * r13).sqrt();
    let rc = (r23 - r12 * r13) / (s2 * s3);
    if !rc.is_finite() || rc.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain("degenerate trivariate correlation".into()));
    }
    let rc = rc.clamp(-1.0, 1.0);
    let lo = h[0].max(-9.0);
    let hi = lo.max(0.0) + 9.0;
    let f = |z: f64| normal_pdf(z) * bvn_upper((h[1] - r12 * z) / s2, (h[2] - r13 * z) / s3, rc);
    let spec = QuadratureSpec { rel_tol: 1e-11, abs_tol: 1e-300, ..Default::default() };
    let mut pts = vec![lo, hi];
    if lo < 0.0 && hi > 0.0 {
        pts.insert(1, 0.0);
    }
    Ok(integrate_pieces(&f, &pts, &spec)?.value.clamp(0.0, 1.0))
}
