//! Univariate functionals: WCRE, WCE, the integral means, relative WCRE and the
//! quantities entering the lower and upper bounds.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::OnceLock;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::model::{expectation, integration_points, upper_cut, Lifetime, UnivariateModel};
use crate::quadrature::{envelope_cut, integrate_pieces, IntegralResult, QuadratureSpec};
use crate::rng;
use crate::weight::WeightFunction;

/// −s·ln s with the convention that the term vanishes for s ≤ 0, s ≥ 1 and on underflow.
pub fn neg_s_log_s(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 || s < f64::MIN_POSITIVE {
        0.0
    } else {
        -s * s.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub quadrature: IntegralResult,
    /// Outcome of the finiteness certificate, when one was requested.
    pub finite: Option<bool>,
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub draws: usize,
}

fn points_for(m: &dyn Lifetime, phi: &WeightFunction, cut: f64) -> Vec<f64> {
    integration_points(m, cut, &phi.breakpoints())
}

/// Integral of `f` over [0, cut] plus a divergence probe on [cut, 10·cut].
fn integrate_with_tail_probe(f: &dyn Fn(f64) -> f64, points: &[f64], spec: &QuadratureSpec, what: &str) -> Result<IntegralResult> {
    let mut r = integrate_pieces(f, points, spec)?;
    let cut = *points.last().unwrap();
    if cut > 0.0 {
        let tail = integrate_pieces(f, &[cut, 10.0 * cut], spec).map_err(|e| match e {
            Error::Integrand { .. } | Error::Convergence { .. } => Error::Divergent(format!("{what}: tail beyond {cut} is not integrable")),
            other => other,
        })?;
        let threshold = spec.abs_tol.max(spec.rel_tol * r.value.abs()) * 1e3;
        if tail.value.abs() > threshold {
            return Err(Error::Divergent(format!(
                "{what}: extending the cut from {cut} to {} adds {}",
                10.0 * cut,
                tail.value
            )));
        }
    }
    r.truncation_point = Some(cut);
    Ok(r)
}

fn entropy(r: IntegralResult) -> EntropyValue {
    EntropyValue { value: r.value, quadrature: r, finite: None }
}

/// WCRE: −∫ φ F̄ log F̄.
pub fn wcre(m: &dyn Lifetime, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<EntropyValue> {
    phi.validate()?;
    let f = |x: f64| {
        let s = m.sf(x);
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let t = -s * m.log_sf(x);
        if t == 0.0 || !t.is_finite() && s < f64::MIN_POSITIVE {
            0.0
        } else {
            phi.value(x) * t
        }
    };
    let cut = upper_cut(m, spec);
    integrate_with_tail_probe(&f, &points_for(m, phi, cut), spec, "wcre").map(entropy)
}

/// WCE: −∫ φ F log F.
pub fn wce(m: &dyn Lifetime, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<EntropyValue> {
    phi.validate()?;
    let f = |x: f64| {
        let t = neg_s_log_s(m.cdf(x));
        if t == 0.0 {
            0.0
        } else {
            phi.value(x) * t
        }
    };
    let cut = upper_cut(m, spec);
    integrate_with_tail_probe(&f, &points_for(m, phi, cut), spec, "wce").map(entropy)
}

/// WCRE with the finiteness certificate attached; a failed certificate is an error.
pub fn wcre_certified(m: &UnivariateModel, phi: &WeightFunction, cert: &CertificateParams, spec: &QuadratureSpec) -> Result<EntropyValue> {
    let c = finiteness_certificate(m, phi, cert, spec)?;
    if !c.finite {
        return Err(Error::Divergent("finiteness certificate failed".into()));
    }
    let mut v = wcre(m, phi, spec)?;
    v.finite = Some(true);
    Ok(v)
}

/// (1/F̄(t)) ∫_t^∞ φ F̄ — the integral mean over [t, ∞).
pub fn residual_integral_mean(m: &dyn Lifetime, phi: &WeightFunction, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let st = m.sf(t);
    if !(st > 0.0) {
        return domain(format!("survival function vanishes at t = {t}"));
    }
    let log_st = m.log_sf(t);
    let ratio = |x: f64| {
        let s = m.sf(x);
        if s <= 0.0 {
            0.0
        } else if st > 1e-250 {
            s / st
        } else {
            (m.log_sf(x) - log_st).exp()
        }
    };
    let cut = envelope_cut(t, &ratio, spec.tail_mass)?;
    let mut pts = integration_points(m, cut, &phi.breakpoints());
    pts.retain(|p| *p > t);
    pts.insert(0, t);
    if pts.len() < 2 {
        return Ok(0.0);
    }
    Ok(integrate_pieces(&|x| phi.value(x) * ratio(x), &pts, spec)?.value)
}

/// (1/F(t)) ∫_0^t φ F — the integral mean over [0, t].
pub fn past_integral_mean(m: &dyn Lifetime, phi: &WeightFunction, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let ft = m.cdf(t);
    if !(ft > 0.0) {
        return domain(format!("distribution function vanishes at t = {t}"));
    }
    let mut pts = integration_points(m, t, &phi.breakpoints());
    pts.retain(|p| *p <= t);
    if pts.len() < 2 {
        return Ok(0.0);
    }
    Ok(integrate_pieces(&|x| phi.value(x) * m.cdf(x) / ft, &pts, spec)?.value)
}

fn nested(m: &dyn Lifetime, inner: &(dyn Fn(f64) -> Result<f64> + Sync), spec: &QuadratureSpec) -> Result<f64> {
    let failure = OnceLock::new();
    let g = |t: f64| match inner(t) {
        Ok(v) => v,
        Err(e) => {
            let _ = failure.set(e);
            0.0
        }
    };
    let r = expectation(m, &g, spec, &[])?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// E[residual_integral_mean(X)], the mean-value route to the WCRE.
pub fn wcre_via_mean(m: &dyn Lifetime, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<f64> {
    nested(
        m,
        &|t| if m.sf(t) > 0.0 { residual_integral_mean(m, phi, t, spec) } else { Ok(0.0) },
        spec,
    )
}

/// E[past_integral_mean(X)], the mean-value route to the WCE.
pub fn wce_via_mean(m: &dyn Lifetime, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<f64> {
    nested(m, &|t| if m.cdf(t) > 0.0 { past_integral_mean(m, phi, t, spec) } else { Ok(0.0) }, spec)
}

/// ∫ φ F̄ log(F̄/Ḡ).
pub fn relative_wcre(f: &dyn Lifetime, g: &dyn Lifetime, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<f64> {
    phi.validate()?;
    let offending = AtomicU64::new(f64::NAN.to_bits());
    let integrand = |x: f64| {
        let sf = f.sf(x);
        if sf <= 0.0 {
            return 0.0;
        }
        let lg = g.log_sf(x);
        if !lg.is_finite() {
            offending.store(x.to_bits(), Ordering::Relaxed);
            return 0.0;
        }
        let diff = f.log_sf(x) - lg;
        if diff == 0.0 {
            0.0
        } else {
            phi.value(x) * sf * diff
        }
    };
    let cut = upper_cut(f, spec);
    let mut extra = phi.breakpoints();
    extra.extend(g.breakpoints());
    extra.extend([g.support().0, g.support().1]);
    let pts = integration_points(f, cut, &extra);
    let r = integrate_pieces(&integrand, &pts, spec)?;
    let x = f64::from_bits(offending.load(Ordering::Relaxed));
    if !x.is_nan() {
        return domain(format!("second survival function vanishes at x = {x} where the first is positive"));
    }
    Ok(r.value)
}

/// ∫₀¹ log(x|log x|) dx, evaluated once by quadrature.
pub fn log_x_abs_log_x_constant() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let spec = QuadratureSpec { rel_tol: 1e-13, abs_tol: 1e-15, ..Default::default() };
        integrate_pieces(&|x: f64| (x * (-x.ln())).ln(), &[0.0, 0.5, 1.0], &spec)
            .expect("fixed integral converges")
            .value
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPhi {
    pub value: f64,
    /// E[log φ(X)]; −∞ when φ vanishes with positive probability.
    pub mean_log_weight: f64,
    pub degenerate: bool,
}

/// α_φ = exp(E[log φ(X)] + ∫₀¹ log(x|log x|) dx).
pub fn alpha_phi(m: &dyn Lifetime, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<AlphaPhi> {
    phi.validate()?;
    let zero_hit = AtomicBool::new(false);
    let g = |x: f64| {
        let w = phi.value(x);
        if w <= 0.0 {
            zero_hit.store(true, Ordering::Relaxed);
            0.0
        } else {
            w.ln()
        }
    };
    let mean_log = expectation(m, &g, spec, &phi.breakpoints())?.value;
    if zero_hit.load(Ordering::Relaxed) {
        return Ok(AlphaPhi { value: 0.0, mean_log_weight: f64::NEG_INFINITY, degenerate: true });
    }
    Ok(AlphaPhi { value: (mean_log + log_x_abs_log_x_constant()).exp(), mean_log_weight: mean_log, degenerate: false })
}

/// Differential entropy −∫ f log f.
pub fn shannon_entropy(m: &dyn Lifetime, spec: &QuadratureSpec) -> Result<f64> {
    if !m.is_absolutely_continuous() {
        return domain("Shannon entropy needs a density");
    }
    let cut = upper_cut(m, spec);
    let pts = integration_points(m, cut, &[]);
    let f = |x: f64| {
        let d = m.pdf(x);
        if d > 0.0 && d.is_finite() {
            -d * d.ln()
        } else {
            0.0
        }
    };
    Ok(integrate_pieces(&f, &pts, spec)?.value)
}

fn mc_mean(seed: u64, n: usize, draw: &(dyn Fn(&mut dyn RngCore) -> f64 + Sync)) -> McEstimate {
    let parts = rng::chunked(seed, n, |r, len| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..len {
            let v = draw(r);
            s += v;
            s2 += v * v;
        }
        (s, s2)
    });
    let (s, s2) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let nf = n as f64;
    let mean = s / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0).max(1.0)).max(0.0);
    McEstimate { value: mean, std_error: (var / nf).sqrt(), draws: n }
}

fn check_mc_size(n_mc: usize) -> Result<()> {
    if n_mc < 1000 {
        return domain(format!("Monte Carlo size {n_mc} is below 1000"));
    }
    Ok(())
}

fn psi_or_nan(phi: &WeightFunction, x: f64) -> f64 {
    phi.psi(x).unwrap_or(f64::NAN)
}

/// E|ψ(X) − ψ(Y)| for independent copies X, Y, by Monte Carlo.
pub fn gini_psi_statistic(m: &UnivariateModel, phi: &WeightFunction, n_mc: usize, seed: u64) -> Result<McEstimate> {
    check_mc_size(n_mc)?;
    phi.validate()?;
    let est = mc_mean(seed, n_mc, &|r| (psi_or_nan(phi, m.sample(r)) - psi_or_nan(phi, m.sample(r))).abs());
    finite_estimate(est)
}

/// E|ψ(X) − Eψ(X)| by Monte Carlo around the quadrature mean.
pub fn psi_mean_deviation(m: &UnivariateModel, phi: &WeightFunction, spec: &QuadratureSpec, n_mc: usize, seed: u64) -> Result<McEstimate> {
    check_mc_size(n_mc)?;
    let centre = expectation(m, &|x| psi_or_nan(phi, x), spec, &phi.breakpoints())?.value;
    finite_estimate(mc_mean(seed, n_mc, &|r| (psi_or_nan(phi, m.sample(r)) - centre).abs()))
}

fn finite_estimate(e: McEstimate) -> Result<McEstimate> {
    if e.value.is_finite() {
        Ok(e)
    } else {
        Err(Error::Integrand { x: f64::NAN })
    }
}

/// 2·E[|D| log |D|] + 4/e with D = ψ(X) − Eψ(X); the expectation is a Monte Carlo mean.
pub fn fenchel_upper_bound(m: &UnivariateModel, phi: &WeightFunction, spec: &QuadratureSpec, n_mc: usize, seed: u64) -> Result<McEstimate> {
    check_mc_size(n_mc)?;
    let centre = expectation(m, &|x| psi_or_nan(phi, x), spec, &phi.breakpoints())?.value;
    let inner = finite_estimate(mc_mean(seed, n_mc, &|r| {
        let d = (psi_or_nan(phi, m.sample(r)) - centre).abs();
        -neg_s_log_s_unbounded(d)
    }))?;
    Ok(McEstimate {
        value: 2.0 * inner.value + 4.0 / std::f64::consts::E,
        std_error: 2.0 * inner.std_error,
        draws: n_mc,
    })
}

/// −d·ln d for any d ≥ 0, zero at 0.
fn neg_s_log_s_unbounded(d: f64) -> f64 {
    if d <= 0.0 {
        0.0
    } else {
        -d * d.ln()
    }
}

/// E[(ψ(0) − ψ(X))(1 + log F̄(X))].
pub fn survival_identity_value(m: &dyn Lifetime, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<f64> {
    let psi0 = phi.psi(0.0)?;
    let g = |x: f64| {
        let dpsi = psi0 - psi_or_nan(phi, x);
        if dpsi == 0.0 {
            0.0
        } else {
            dpsi * (1.0 + m.log_sf(x))
        }
    };
    Ok(expectation(m, &g, spec, &phi.breakpoints())?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPlusBound {
    pub lhs: f64,
    pub rhs: f64,
    /// ψ⁻¹(1)
    pub threshold: f64,
    /// E[ψ(X)·1(X > ψ⁻¹(1))]
    pub tail_moment: f64,
}

/// Both sides of E[ψ log⁺ψ] ≤ WCRE + J·log(e·J), J = E[ψ(X)·1(X > ψ⁻¹(1))].
pub fn log_plus_moment_bound(m: &UnivariateModel, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<LogPlusBound> {
    let cut = upper_cut(m, spec).max(1.0);
    let mut hi = cut;
    while phi.psi(hi)? < 1.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return domain("ψ never reaches 1, so ψ⁻¹(1) is undefined");
        }
    }
    let threshold = phi.psi_inverse(1.0, hi)?;
    let mut breaks = phi.breakpoints();
    breaks.push(threshold);
    let lhs = expectation(
        m,
        &|x| {
            let p = psi_or_nan(phi, x);
            if p > 1.0 {
                p * p.ln()
            } else {
                0.0
            }
        },
        spec,
        &breaks,
    )?
    .value;
    let tail_moment = expectation(m, &|x| if x > threshold { psi_or_nan(phi, x) } else { 0.0 }, spec, &breaks)?.value;
    let w = wcre(m, phi, spec)?.value;
    let rhs = w + if tail_moment > 0.0 { tail_moment * (1.0 + tail_moment.ln()) } else { 0.0 };
    Ok(LogPlusBound { lhs, rhs, threshold, tail_moment })
}

/// Law of X + Y for independent X and Y.
pub fn convolution_model(x: &UnivariateModel, y: &UnivariateModel, spec: &QuadratureSpec) -> Result<UnivariateModel> {
    let m = UnivariateModel::Convolution { x: Box::new(x.clone()), y: Box::new(y.clone()), spec: *spec };
    m.validate()?;
    Ok(m)
}

/// Knots used when tabulating derived weights.
pub const SHIFTED_WEIGHT_KNOTS: usize = 1024;

/// ψ_Y(x) = E[φ(x + Y)] tabulated on [0, extent] with knots clustered near 0.
pub fn shifted_weight(phi: &WeightFunction, y: &UnivariateModel, extent: f64, spec: &QuadratureSpec) -> Result<WeightFunction> {
    phi.validate()?;
    if let Some(c) = phi.as_constant() {
        return Ok(WeightFunction::constant(c));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return domain(format!("shifted weight extent {extent} must be positive"));
    }
    let knots = (0..=SHIFTED_WEIGHT_KNOTS)
        .map(|i| {
            let x = extent * (i as f64 / SHIFTED_WEIGHT_KNOTS as f64).powi(2);
            let breaks: Vec<f64> = phi.breakpoints().into_iter().map(|k| k - x).collect();
            expectation(y, &|t| phi.value(x + t), spec, &breaks).map(|r| (x, r.value))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightFunction::Tabulated { knots })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateParams {
    pub p: f64,
    pub alpha: f64,
    pub a: f64,
}

impl Default for CertificateParams {
    fn default() -> Self {
        Self { p: 2.0, alpha: 0.9, a: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub finite: bool,
    /// E[X^p]
    pub moment: f64,
    /// ψ(a) − ψ(0)
    pub near: f64,
    /// ∫_a^∞ φ(x) x^(−pα) dx, infinite when the truncation test fails.
    pub tail: f64,
}

/// Log-scale range used for the tail integral ∫_a^∞ φ(x) x^(−pα) dx, x = a·e^u.
const CERTIFICATE_LOG_RANGE: f64 = 40.0;

/// Sufficient condition for a finite WCRE: E[X^p] < ∞, ψ(a) − ψ(0) < ∞ and
/// ∫_a^∞ φ(x) x^(−pα) dx < ∞, the last judged by stability under a 10× longer range.
pub fn finiteness_certificate(m: &UnivariateModel, phi: &WeightFunction, params: &CertificateParams, spec: &QuadratureSpec) -> Result<Certificate> {
    let CertificateParams { p, alpha, a } = *params;
    if !(p >= 0.0 && (0.0..1.0).contains(&alpha) && a > 0.0) {
        return domain(format!("certificate needs p ≥ 0, α ∈ [0, 1), a > 0; got p = {p}, α = {alpha}, a = {a}"));
    }
    let moment = expectation(m, &|x| x.powf(p), spec, &[]).map(|r| r.value).unwrap_or(f64::INFINITY);
    let near = phi.psi(a)? - phi.psi(0.0)?;
    let exponent = 1.0 - p * alpha;
    let g = |u: f64| {
        let x = a * u.exp();
        let w = phi.value(x);
        if w == 0.0 {
            0.0
        } else {
            (w.ln() + exponent * x.ln()).exp()
        }
    };
    let base = integrate_pieces(&g, &[0.0, CERTIFICATE_LOG_RANGE], spec);
    let extended = integrate_pieces(&g, &[0.0, 10.0 * CERTIFICATE_LOG_RANGE], spec);
    let tail = match (base, extended) {
        (Ok(b), Ok(e)) => {
            let threshold = spec.abs_tol.max(spec.rel_tol * b.value.abs()) * 1e3;
            if (e.value - b.value).abs() <= threshold {
                b.value
            } else {
                f64::INFINITY
            }
        }
        _ => f64::INFINITY,
    };
    Ok(Certificate { finite: moment.is_finite() && near.is_finite() && tail.is_finite(), moment, near, tail })
}

/// Closed-form WCRE for exponential and Weibull models under constant or power weights.
pub fn family_closed_form_wcre(m: &UnivariateModel, phi: &WeightFunction) -> Result<f64> {
    let (c, a) = match phi {
        WeightFunction::Constant { c } => (*c, 0.0),
        WeightFunction::Power { a } => (1.0, *a),
        WeightFunction::ScaledPower { c, a } => (*c, *a),
        _ => return domain("closed forms cover constant and power weights only"),
    };
    phi.validate()?;
    match m {
        // λ∫ c·x^(a+1) e^(−λx) dx
        UnivariateModel::Exponential { lambda } => Ok(c * gamma(a + 2.0) / lambda.powf(a + 1.0)),
        // λ^q (E[ψ*_q(X)] − ψ*_q(0)) with E[X^s] = Γ(1 + s/q)/λ^s
        UnivariateModel::Weibull { lambda, q } => {
            let s = q + a + 1.0;
            Ok(lambda.powf(*q) * c / s * gamma(1.0 + s / q) / lambda.powf(s))
        }
        _ => domain(format!("no closed form for the {} family", m.family())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_1d, Upper};
    use std::f64::consts::{E, PI};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn exp1() -> UnivariateModel {
        UnivariateModel::exponential(1.0)
    }

    fn unif() -> UnivariateModel {
        UnivariateModel::uniform(0.0, 1.0)
    }

    fn oracle(f: &dyn Fn(f64) -> f64, hi: f64) -> f64 {
        let s = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-14, ..spec() };
        integrate_1d(f, 0.0, Upper::Finite(hi), &s).unwrap().value
    }

    #[test]
    fn wcre_examples() {
        let one = oracle(&|x| x * (-x).exp(), 60.0);
        assert!((wcre(&exp1(), &WeightFunction::unit(), &spec()).unwrap().value - one).abs() < 1e-9);
        let two = oracle(&|x| x * x * (-x).exp(), 80.0);
        assert!((wcre(&exp1(), &WeightFunction::power(1.0), &spec()).unwrap().value - two).abs() < 1e-8);
        let pm = UnivariateModel::point_mass(2.0).unwrap();
        assert_eq!(wcre(&pm, &WeightFunction::power(1.0), &spec()).unwrap().value, 0.0);
        // antiderivative: −∫(1−x)log(1−x) = 1/4
        let quarter = {
            let anti = |x: f64| { let s: f64 = 1.0 - x; if s == 0.0 { 0.0 } else { s * s * s.ln() / 2.0 - s * s / 4.0 } };
            anti(1.0) - anti(0.0)
        };
        assert!((wcre(&unif(), &WeightFunction::unit(), &spec()).unwrap().value - quarter).abs() < 1e-10);
    }

    #[test]
    fn wce_examples() {
        let quarter = oracle(&|x: f64| -x * x.ln(), 1.0);
        assert!((wce(&unif(), &WeightFunction::unit(), &spec()).unwrap().value - quarter).abs() < 1e-10);
        // series: −∫(1−e^−x)log(1−e^−x)dx = Σ 1/(k(k+1)) · ... summed as Σ_{k≥1} 1/k² − 1
        let series: f64 = (1..200_000).map(|k| 1.0 / (k as f64 * k as f64)).sum::<f64>() - 1.0;
        let got = wce(&exp1(), &WeightFunction::unit(), &spec()).unwrap().value;
        assert!((got - series).abs() < 1e-5);
        assert!((got - (PI * PI / 6.0 - 1.0)).abs() < 1e-8);
        let pm = UnivariateModel::point_mass(1.5).unwrap();
        assert_eq!(wce(&pm, &WeightFunction::unit(), &spec()).unwrap().value, 0.0);
    }

    #[test]
    fn integral_means() {
        let w = WeightFunction::unit();
        assert!((residual_integral_mean(&exp1(), &w, 0.0, &spec()).unwrap() - oracle(&|x| (-x).exp(), 60.0)).abs() < 1e-9);
        let e2 = UnivariateModel::exponential(2.0);
        for t in [0.0, 1.0, 3.0] {
            let o = oracle(&|x| (-2.0 * x).exp(), 40.0);
            assert!((residual_integral_mean(&e2, &w, t, &spec()).unwrap() - o).abs() < 1e-9);
        }
        assert_eq!(residual_integral_mean(&exp1(), &WeightFunction::constant(0.0), 1.0, &spec()).unwrap(), 0.0);
        assert!(residual_integral_mean(&unif(), &w, 1.0, &spec()).is_err());
        assert!((past_integral_mean(&unif(), &w, 1.0, &spec()).unwrap() - oracle(&|x| x, 1.0)).abs() < 1e-12);
        assert!((past_integral_mean(&unif(), &w, 0.5, &spec()).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(past_integral_mean(&unif(), &WeightFunction::constant(0.0), 0.5, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn mean_routes_agree() {
        let w1 = WeightFunction::unit();
        let wp = WeightFunction::power(1.0);
        assert!((wcre_via_mean(&exp1(), &w1, &spec()).unwrap() - 1.0).abs() < 1e-7);
        assert!((wcre_via_mean(&unif(), &w1, &spec()).unwrap() - 0.25).abs() < 1e-7);
        assert!((wcre_via_mean(&exp1(), &wp, &spec()).unwrap() - 2.0).abs() < 1e-7);
        assert!((wce_via_mean(&unif(), &w1, &spec()).unwrap() - 0.25).abs() < 1e-7);
        assert!((wce_via_mean(&exp1(), &w1, &spec()).unwrap() - (PI * PI / 6.0 - 1.0)).abs() < 1e-7);
        let pm = UnivariateModel::point_mass(1.0).unwrap();
        assert_eq!(wce_via_mean(&pm, &w1, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn relative_examples() {
        let w = WeightFunction::unit();
        assert_eq!(relative_wcre(&exp1(), &exp1(), &w, &spec()).unwrap(), 0.0);
        let e2 = UnivariateModel::exponential(2.0);
        let one = oracle(&|x| x * (-x).exp(), 60.0);
        assert!((relative_wcre(&exp1(), &e2, &w, &spec()).unwrap() - one).abs() < 1e-9);
        let quarter = oracle(&|x| x * (-2.0 * x).exp(), 40.0);
        assert!((relative_wcre(&e2, &exp1(), &w, &spec()).unwrap() + quarter).abs() < 1e-9);
        let err = relative_wcre(&UnivariateModel::uniform(0.0, 2.0), &unif(), &w, &spec()).unwrap_err();
        assert!(matches!(err, Error::Domain(msg) if msg.contains("x =")));
    }

    #[test]
    fn alpha_phi_examples() {
        let c = oracle(&|x: f64| (x * (-x.ln())).ln(), 1.0);
        assert!((log_x_abs_log_x_constant() - c).abs() < 1e-8);
        let a1 = alpha_phi(&exp1(), &WeightFunction::unit(), &spec()).unwrap().value;
        assert!((a1 - c.exp()).abs() < 1e-9);
        assert!((a1 - 0.2065).abs() < 1e-4);
        let a3 = alpha_phi(&exp1(), &WeightFunction::constant(3.0), &spec()).unwrap().value;
        assert!((a3 - 3.0 * a1).abs() < 1e-9);
        // E[log X] for exponential(1) by quadrature
        let elog = oracle(&|x: f64| x.ln() * (-x).exp(), 60.0);
        let ap = alpha_phi(&exp1(), &WeightFunction::power(1.0), &spec()).unwrap().value;
        assert!((ap - (elog + c).exp()).abs() < 1e-8);
        let degenerate = alpha_phi(&UnivariateModel::gaussian(0.0, 1.0), &WeightFunction::power(1.0), &spec()).unwrap();
        assert!(degenerate.degenerate && degenerate.value == 0.0);
    }

    #[test]
    fn shannon_examples() {
        let h = shannon_entropy(&exp1(), &spec()).unwrap();
        assert!((h - oracle(&|x| x * (-x).exp(), 60.0)).abs() < 1e-9);
        assert_eq!(shannon_entropy(&unif(), &spec()).unwrap(), 0.0);
        assert!((shannon_entropy(&UnivariateModel::uniform(0.0, 2.0), &spec()).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_statistics() {
        let w = WeightFunction::unit();
        let g = gini_psi_statistic(&exp1(), &w, 100_000, 3).unwrap();
        assert!((g.value - 1.0).abs() < 4.0 * g.std_error);
        let gu = gini_psi_statistic(&unif(), &w, 100_000, 3).unwrap();
        // E|U − V| = 2∫∫_{u>v}(u − v) = 1/3
        let double = oracle(&|u| u * u, 1.0);
        assert!((gu.value - double).abs() < 4.0 * gu.std_error);
        let pm = UnivariateModel::point_mass(1.0).unwrap();
        assert_eq!(gini_psi_statistic(&pm, &w, 1000, 0).unwrap().value, 0.0);
        assert!(gini_psi_statistic(&pm, &w, 10, 0).is_err());
        let fb = fenchel_upper_bound(&pm, &w, &spec(), 1000, 0).unwrap();
        assert!((fb.value - 4.0 / E).abs() < 1e-15);
        assert!(fenchel_upper_bound(&exp1(), &w, &spec(), 100_000, 1).unwrap().value >= 1.0);
        assert!(fenchel_upper_bound(&unif(), &w, &spec(), 100_000, 1).unwrap().value >= 0.25);
    }

    #[test]
    fn survival_identity_examples() {
        let w = WeightFunction::unit();
        assert!((survival_identity_value(&exp1(), &w, &spec()).unwrap() - 1.0).abs() < 1e-8);
        assert!((survival_identity_value(&unif(), &w, &spec()).unwrap() - 0.25).abs() < 1e-8);
        assert!((survival_identity_value(&exp1(), &WeightFunction::power(1.0), &spec()).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn log_plus_examples() {
        let w = WeightFunction::unit();
        let b = log_plus_moment_bound(&exp1(), &w, &spec()).unwrap();
        let lhs = oracle(&|x: f64| if x > 1.0 { x * x.ln() * (-x).exp() } else { 0.0 }, 60.0);
        assert!((b.threshold - 1.0).abs() < 1e-10);
        assert!((b.lhs - lhs).abs() < 1e-8);
        assert!(b.lhs <= b.rhs);
        let pm = UnivariateModel::point_mass(0.5).unwrap();
        let b = log_plus_moment_bound(&pm, &w, &spec()).unwrap();
        assert_eq!(b.lhs, 0.0);
        assert!(b.lhs <= b.rhs);
        let b = log_plus_moment_bound(&unif(), &w, &spec()).unwrap();
        assert_eq!(b.lhs, 0.0);
        assert!((b.rhs - 0.25).abs() < 1e-9);
    }

    #[test]
    fn shifted_weight_examples() {
        let y = exp1();
        assert_eq!(shifted_weight(&WeightFunction::unit(), &y, 10.0, &spec()).unwrap(), WeightFunction::unit());
        let lin = shifted_weight(&WeightFunction::power(1.0), &y, 10.0, &spec()).unwrap();
        let WeightFunction::Tabulated { knots } = &lin else { panic!() };
        for (x, v) in knots {
            assert!((v - (x + 1.0)).abs() < 1e-9);
        }
        let ex = shifted_weight(&WeightFunction::exponential(1.0), &y, 10.0, &spec()).unwrap();
        let WeightFunction::Tabulated { knots } = &ex else { panic!() };
        // Laplace transform E[e^−Y] = 1/2
        for (x, v) in knots {
            assert!((v - (-x as f64).exp() / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn certificate_examples() {
        let s = spec();
        let yes = finiteness_certificate(&exp1(), &WeightFunction::unit(), &CertificateParams::default(), &s).unwrap();
        assert!(yes.finite);
        assert!((yes.tail - 1.0 / 0.8).abs() < 1e-6);
        let no = finiteness_certificate(&exp1(), &WeightFunction::unit(), &CertificateParams { p: 1.0, alpha: 0.5, a: 1.0 }, &s).unwrap();
        assert!(!no.finite);
        for (p, alpha) in [(0.0, 0.0), (1.0, 0.3), (3.0, 0.99)] {
            let c = finiteness_certificate(&exp1(), &WeightFunction::exponential(1.0), &CertificateParams { p, alpha, a: 1.0 }, &s).unwrap();
            assert!(c.finite);
        }
        let heavy = finiteness_certificate(&exp1(), &WeightFunction::exponential(-2.0), &CertificateParams::default(), &s).unwrap();
        assert!(!heavy.finite);
        assert!(matches!(wcre(&exp1(), &WeightFunction::exponential(-2.0), &s), Err(Error::Divergent(_))));
    }

    #[test]
    fn closed_forms() {
        let two = oracle(&|x| x * x * (-x).exp(), 80.0);
        assert!((family_closed_form_wcre(&exp1(), &WeightFunction::power(1.0)).unwrap() - two).abs() < 1e-10);
        assert!((family_closed_form_wcre(&UnivariateModel::exponential(2.0), &WeightFunction::unit()).unwrap() - 0.5).abs() < 1e-14);
        assert!((family_closed_form_wcre(&UnivariateModel::weibull(1.0, 1.0), &WeightFunction::unit()).unwrap() - 1.0).abs() < 1e-14);
        for (lambda, q, a) in [(1.0, 2.0, 0.0), (0.7, 1.5, 1.0), (2.0, 0.8, 0.5)] {
            let m = UnivariateModel::weibull(lambda, q);
            let w = WeightFunction::power(a);
            let closed = family_closed_form_wcre(&m, &w).unwrap();
            let numeric = wcre(&m, &w, &spec()).unwrap().value;
            assert!((closed - numeric).abs() < 1e-8 * closed.max(1.0), "{lambda} {q} {a}: {closed} vs {numeric}");
        }
    }

    #[test]
    fn convolution_sum_bound() {
        let s = spec();
        let x = exp1();
        let y = UnivariateModel::uniform(0.0, 1.0);
        let phi = WeightFunction::power(1.0);
        let sum = convolution_model(&x, &y, &s).unwrap();
        let whole = wcre(&sum, &phi, &s).unwrap().value;
        let extent = upper_cut(&sum, &s);
        let wx = wcre(&x, &shifted_weight(&phi, &y, extent, &s).unwrap(), &s).unwrap().value;
        let wy = wcre(&y, &shifted_weight(&phi, &x, extent, &s).unwrap(), &s).unwrap().value;
        assert!(whole >= wx.max(wy) - 1e-6, "{whole} vs {wx} {wy}");
    }
}
