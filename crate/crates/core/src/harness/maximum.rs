//! Maximum-entropy checks.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::joint::{determinant, MultivariateModel};
use crate::model::{Lifetime, UnivariateModel};
use crate::multivariate::{gaussian_normaliser, gaussian_rho, log_ratio_term, screen_axes, Field};
use crate::quadrature::QuadratureSpec;
use crate::univariate::{neg_s_log_s, wcre};
use crate::weight::WeightFunction;

use super::univariate::score_violation;
use super::{unimodality_violation, weighted_integral, weighted_sf_integral, Assessment, CheckInstance, Sign, GRID_TOL, QUADRATURE_TOL};

pub(super) fn generic(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(2)?;
    let (f, fm) = (inst.univariate(0)?, inst.univariate(1)?);
    let (phi, spec) = (&inst.weight, &inst.spec);
    let h1 = weighted_integral(&[f, fm], phi, spec, &|x| f.sf(x) - fm.sf(x))?;
    let h2 = weighted_integral(&[f, fm], phi, spec, &|x| {
        let gap = f.sf(x) - fm.sf(x);
        if gap == 0.0 {
            0.0
        } else {
            gap * fm.log_sf(x)
        }
    })?;
    // where F̄ᵐ vanishes but F̄ does not, the log constraint is −∞
    let uncovered = fm.support().1 < f.support().1;
    let (e, em) = (wcre(f, phi, spec)?, wcre(fm, phi, spec)?);
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.hypothesis("weighted_sf_gap", h1.value, Sign::NonNegative)
        .hypothesis("weighted_log_gap", h2.value, Sign::NonNegative)
        .condition("support_covered", !uncovered)
        .error("weighted_sf_gap", &h1)
        .error("weighted_log_gap", &h2)
        .error("wcre", &e.quadrature)
        .error("wcre_maximiser", &em.quadrature)
        .at_most("maximiser", e.value, em.value, QUADRATURE_TOL);
    Ok(a)
}

pub(super) fn gaussian(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(2)?;
    let (f, reference) = (inst.univariate(0)?, inst.univariate(1)?);
    let sigma = match reference {
        UnivariateModel::Gaussian { sigma, .. } => *sigma,
        other => return Err(Error::Input(format!("{} needs a gaussian reference, got {}", inst.check_id, other.family()))),
    };
    let (phi, spec) = (&inst.weight, &inst.spec);
    let log_norm = ((2.0 * std::f64::consts::PI).sqrt() * sigma).ln();
    let log_alpha = |x: f64| log_norm + reference.log_sf(x);
    let h1 = weighted_integral(&[f, reference], phi, spec, &|x| f.sf(x) - reference.sf(x))?;
    let h_log = weighted_integral(&[f, reference], phi, spec, &|x| {
        let gap = f.sf(x) - reference.sf(x);
        if gap == 0.0 {
            0.0
        } else {
            gap * log_alpha(x)
        }
    })?;
    let mass = weighted_sf_integral(reference, phi, spec)?;
    let tilt = weighted_integral(&[reference], phi, spec, &|x| {
        let s = reference.sf(x);
        if s == 0.0 {
            0.0
        } else {
            s * log_alpha(x)
        }
    })?;
    let e = wcre(f, phi, spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.hypothesis("weighted_sf_gap", h1.value, Sign::NonNegative)
        .hypothesis("weighted_log_gap", log_norm * h1.value - h_log.value, Sign::NonPositive)
        .error("weighted_sf_gap", &h1)
        .error("weighted_log_gap", &h_log)
        .error("wcre", &e.quadrature)
        .value("wcre_reference", wcre(reference, phi, spec)?.value)
        .at_most("gaussian_maximiser", e.value, log_norm * mass.value - tilt.value, QUADRATURE_TOL);
    Ok(a)
}

pub(super) fn exponential(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let f = inst.univariate(0)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let m = weighted_sf_integral(f, phi, spec)?;
    if !(m.value > 0.0) {
        return Err(Error::Domain("∫ φ F̄ vanishes, the exponential reference is undefined".into()));
    }
    let lambda = 1.0 / m.value;
    let reference = UnivariateModel::exponential(lambda);
    let e_ref = |x: f64| (-lambda * x).exp();
    let h1 = weighted_integral(&[f, &reference], phi, spec, &|x| x * (f.sf(x) - e_ref(x)))?;
    let h2 = weighted_integral(&[f, &reference], phi, spec, &|x| f.sf(x) - e_ref(x))?;
    let rhs = weighted_integral(&[&reference], phi, spec, &|x| x * e_ref(x))?;
    let e = wcre(f, phi, spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.hypothesis("weighted_first_moment_gap", h1.value, Sign::NonPositive)
        .hypothesis("weighted_sf_gap", h2.value, Sign::NonNegative)
        .value("lambda", lambda)
        .error("weighted_first_moment_gap", &h1)
        .error("weighted_sf_gap", &h2)
        .error("wcre", &e.quadrature)
        .at_most("exponential_maximiser", e.value, lambda * rhs.value, QUADRATURE_TOL);
    Ok(a)
}

fn centred(cov: &[Vec<f64>]) -> MultivariateModel {
    MultivariateModel::gaussian(vec![0.0; cov.len()], cov.to_vec())
}

fn covariance_dim(inst: &CheckInstance, cov: &[Vec<f64>]) -> Result<usize> {
    let n = cov.len();
    if !(2..=3).contains(&n) {
        return Err(Error::Input(format!("{} needs a 2×2 or 3×3 covariance, got {n}×{n}", inst.check_id)));
    }
    Ok(n)
}

pub(super) fn ky_fan(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(2)?;
    let (c1, c2) = (inst.covariance(0)?, inst.covariance(1)?);
    let n = covariance_dim(inst, c1)?;
    if c2.len() != n {
        return Err(Error::Input("covariances must share their dimension".into()));
    }
    let l = inst.param_or("lambda1", 0.5);
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::Domain(format!("lambda1 = {l} must lie in [0, 1]")));
    }
    let entropy_form = match inst.variant.as_deref() {
        None => false,
        Some("wcre") => true,
        Some(v) => return Err(Error::Input(format!("KY_FAN has no variant {v:?}"))),
    };
    let c: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| l * c1[i][j] + (1.0 - l) * c2[i][j]).collect()).collect();
    let (m1, m2, mc) = (centred(c1), centred(c2), centred(&c));
    for m in [&m1, &m2, &mc] {
        m.validate()?;
    }
    let w = inst.product_weight(n)?;
    let spec = &inst.spec;
    screen_axes(&mc, &w, spec, true)?;
    let log_norm = gaussian_normaliser(&c)?.ln();
    let r = Field::new(&[&m1, &m2, &mc], &w, spec)?.integrate(&|p| {
        let sc = p.sf_in(2);
        let gap = l * p.sf_in(0) + (1.0 - l) * p.sf_in(1) - sc;
        [
            gap,
            if sc > 0.0 && gap != 0.0 { gap * (log_norm + sc.ln()) } else { 0.0 },
            neg_s_log_s(p.sf_in(0)),
            neg_s_log_s(p.sf_in(1)),
            neg_s_log_s(sc),
        ]
    })?;
    let score = (0..n).map(|i| score_violation(&mc.marginal(i), &w.0[i])).fold(f64::NEG_INFINITY, f64::max);
    let unimodal = w.0.iter().map(unimodality_violation).fold(0.0, f64::max);
    let origin = vec![0.0; n];
    let rho = |cov: &[Vec<f64>]| gaussian_rho(&origin, cov, &origin);
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.hypothesis("weight_unimodal_violation", unimodal, Sign::NonPositive)
        .hypothesis("score_condition", score, Sign::NonPositive)
        .hypothesis("mixture_sf_gap", r[0].value, Sign::NonNegative)
        .hypothesis("mixture_log_gap", log_norm * r[0].value - r[1].value, Sign::NonPositive)
        .error("mixture_sf_gap", &r[0])
        .error("mixture_log_gap", &r[1]);
    if entropy_form {
        // Gaussian WCREs: concavity and the Gaussian maximum bound order exactly these
        for (k, name) in [(2, "wcre_c1"), (3, "wcre_c2"), (4, "wcre_c")] {
            a.value(name, r[k].value).error(name, &r[k]);
        }
        a.at_most("ky_fan_wcre", l * r[2].value + (1.0 - l) * r[3].value, r[4].value, GRID_TOL);
    } else {
        a.note("ρ is evaluated at the mean vector x = 0")
            .at_most("ky_fan", l * rho(c1)? + (1.0 - l) * rho(c2)?, rho(&c)?, QUADRATURE_TOL);
    }
    Ok(a)
}

pub(super) fn hadamard(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let cov = inst.covariance(0)?;
    let n = covariance_dim(inst, cov)?;
    let m = centred(cov);
    m.validate()?;
    let w = inst.product_weight(n)?;
    let spec = &inst.spec;
    screen_axes(&m, &w, spec, true)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let diag: f64 = (0..n).map(|i| cov[i][i]).product();
    // log(α*/∏α*ᵢ) = log(Nrm/∏√(2πCᵢᵢ)) + log(F̄/∏F̄ᵢ)
    let shift = gaussian_normaliser(cov)?.ln() - (0..n).map(|i| 0.5 * (two_pi * cov[i][i]).ln()).sum::<f64>();
    let singles: Vec<[usize; 1]> = (0..n).map(|i| [i]).collect();
    let den: Vec<&[usize]> = singles.iter().map(|s| s.as_slice()).collect();
    let all: Vec<usize> = (0..n).collect();
    let r = Field::new(&[&m], &w, spec)?.integrate(&|p| {
        let s = p.sf();
        [
            s - (0..n).map(|i| p.marginal_sf(i)).product::<f64>(),
            s,
            s * shift + log_ratio_term(p, 0, &[&all], &den),
        ]
    })?;
    let alpha = r[1].value;
    let a_term = 0.5 * alpha * (diag / determinant(cov)?).ln();
    let mut a = Assessment::new(GRID_TOL);
    a.hypothesis("dependence_gap", r[0].value, Sign::NonNegative)
        .value("alpha", alpha)
        .error("dependence_gap", &r[0])
        .error("log_ratio", &r[2])
        .at_most("hadamard", 0.0, a_term + r[2].value, GRID_TOL);
    Ok(a)
}

/// Smallest root of a decreasing-or-increasing `g` on a log-spaced bracket.
fn log_bisect(g: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Option<f64>> {
    let (mut lo, mut hi) = (lo.ln(), hi.ln());
    let (mut glo, ghi) = (g(lo.exp())?, g(hi.exp())?);
    if glo == 0.0 {
        return Ok(Some(lo.exp()));
    }
    if glo.signum() == ghi.signum() {
        return Ok(None);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid.exp())?;
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(Some((0.5 * (lo + hi)).exp()))
}

/// A candidate family with one shape and one scale parameter.
struct Family {
    name: &'static str,
    shape: (f64, f64),
    build: fn(f64, f64) -> UnivariateModel,
}

const FAMILIES: [Family; 2] = [
    Family { name: "gamma", shape: (0.2, 20.0), build: |k, scale| UnivariateModel::gamma(k, scale) },
    Family { name: "uniform", shape: (0.0, 0.999), build: |xi, scale| UnivariateModel::uniform(xi * scale, scale) },
];

struct Moments<'a> {
    phi: &'a WeightFunction,
    p: f64,
    spec: &'a QuadratureSpec,
}

impl Moments<'_> {
    fn mass(&self, m: &dyn Lifetime) -> Result<f64> {
        Ok(weighted_sf_integral(m, self.phi, self.spec)?.value)
    }

    fn tail(&self, m: &dyn Lifetime) -> Result<f64> {
        Ok(weighted_integral(&[m], self.phi, self.spec, &|t| t.powf(self.p) * m.sf(t))?.value)
    }

    /// Scale giving ∫ φ F̄ = `target` for the given shape.
    fn scale_for(&self, fam: &Family, shape: f64, target: f64) -> Result<Option<f64>> {
        log_bisect(&|s| Ok(self.mass(&(fam.build)(shape, s))? - target), 1e-6, 1e6)
    }

    /// Member of `fam` sharing both weighted moments with the target.
    fn matched(&self, fam: &Family, mass: f64, tail: f64) -> Result<Option<UnivariateModel>> {
        let mismatch = |shape: f64| -> Result<Option<f64>> {
            Ok(match self.scale_for(fam, shape, mass)? {
                Some(s) => Some(self.tail(&(fam.build)(shape, s))? - tail),
                None => None,
            })
        };
        let grid: Vec<f64> = (0..=24).map(|i| fam.shape.0 + (fam.shape.1 - fam.shape.0) * (i as f64 / 24.0).powi(2)).collect();
        let mut prev: Option<(f64, f64)> = None;
        for x in grid {
            let Some(d) = mismatch(x)? else { continue };
            if let Some((x0, d0)) = prev {
                if d0.signum() != d.signum() {
                    let (mut lo, mut hi, mut dlo) = (x0, x, d0);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let Some(dm) = mismatch(mid)? else { break };
                        if dm.signum() == dlo.signum() {
                            lo = mid;
                            dlo = dm;
                        } else {
                            hi = mid;
                        }
                        if hi - lo < 1e-12 * hi.abs().max(1.0) {
                            break;
                        }
                    }
                    let shape = 0.5 * (lo + hi);
                    return Ok(self.scale_for(fam, shape, mass)?.map(|s| (fam.build)(shape, s)));
                }
            }
            prev = Some((x, d));
        }
        Ok(None)
    }
}

pub(super) fn weibull(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let f = inst.univariate(0)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let p = inst.param_or("p", 2.0);
    if !(p > 0.0) {
        return Err(Error::Domain(format!("p = {p} must be positive")));
    }
    let mom = Moments { phi, p, spec };
    let (mass, tail) = (mom.mass(f)?, mom.tail(f)?);
    if !(mass > 0.0) {
        return Err(Error::Domain("∫ φ F̄ vanishes".into()));
    }
    let bound = (gamma(1.0 + 1.0 / p) / mass).powf(p) * tail;

    let mut a = Assessment::new(QUADRATURE_TOL);
    a.condition("weight_at_most_one", phi.supremum() <= 1.0).value("bound", bound);
    let lambda = log_bisect(&|l| Ok(l.powf(p) * mom.tail(&UnivariateModel::weibull(l, p))? - bound), 1e-8, 1e8)?;
    match lambda {
        Some(l) => {
            a.value("lambda", l).value("wcre_weibull", wcre(&UnivariateModel::weibull(l, p), phi, spec)?.value);
        }
        None => {
            a.note("no Weibull scale reproduces the bound");
        }
    }

    let e = wcre(f, phi, spec)?;
    a.error("wcre", &e.quadrature).at_most("target", e.value, bound, QUADRATURE_TOL);
    for fam in &FAMILIES {
        match mom.matched(fam, mass, tail)? {
            Some(c) => {
                let ec = wcre(&c, phi, spec)?;
                a.value(&format!("{}_mismatch", fam.name), (mom.tail(&c)? - tail).abs() / tail.abs().max(1e-300))
                    .at_most(&format!("candidate_{}", fam.name), ec.value, bound, QUADRATURE_TOL);
            }
            None => {
                a.note(format!("no {} law matches both weighted moments", fam.name));
            }
        }
    }
    let wrong = inst.param_or("wrong_shape", 1.5);
    let probe = Family { name: "weibull", shape: (wrong, wrong), build: |q, s| UnivariateModel::weibull(1.0 / s, q) };
    if let Some(s) = mom.scale_for(&probe, wrong, mass)? {
        let c = (probe.build)(wrong, s);
        let gap = (mom.tail(&c)? - tail) / tail.abs().max(1e-300);
        a.value("wrong_shape_tail_mismatch", gap);
        if gap.abs() <= 1e-6 {
            let ec = wcre(&c, phi, spec)?;
            a.at_most("candidate_weibull_wrong_shape", ec.value, bound, QUADRATURE_TOL);
        } else {
            a.note(format!("a Weibull law of shape {wrong} matches only the first weighted moment; skipped"));
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::super::{run_check, CheckId, ModelInput, Verdict};
    use super::*;

    fn uni(m: UnivariateModel) -> ModelInput {
        ModelInput::Univariate(m)
    }

    #[test]
    fn weibull_bound_is_attained_by_the_weibull_law() {
        let r = run_check(&CheckInstance::new(CheckId::MaxWeibull, vec![uni(UnivariateModel::weibull(1.0, 2.0))])).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let half_sqrt_pi = std::f64::consts::PI.sqrt() / 4.0;
        assert!((r.diagnostics.values["bound"] - half_sqrt_pi).abs() < 1e-8);
        assert!((r.diagnostics.values["lambda"] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn weibull_candidates_match_both_moments() {
        let r = run_check(&CheckInstance::new(CheckId::MaxWeibull, vec![uni(UnivariateModel::gamma(2.0, 0.5))])).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!(r.diagnostics.values["gamma_mismatch"] < 1e-6);
        assert!(r.conclusions.iter().any(|c| c.name == "candidate_gamma"));
    }

    #[test]
    fn hadamard_is_tight_for_diagonal_covariance() {
        let inst = CheckInstance::new(CheckId::Hadamard, vec![ModelInput::Covariance(vec![vec![1.0, 0.0], vec![0.0, 2.0]])]);
        let r = run_check(&inst).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.slack.unwrap().abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn ky_fan_is_tight_at_the_endpoints() {
        let c1 = vec![vec![1.0, 0.3], vec![0.3, 2.0]];
        let c2 = vec![vec![1.5, -0.2], vec![-0.2, 1.0]];
        let inst = CheckInstance::new(CheckId::KyFan, vec![ModelInput::Covariance(c1), ModelInput::Covariance(c2)]).with_param("lambda1", 1.0);
        let r = run_check(&inst).unwrap();
        assert!(r.slack.unwrap().abs() < 1e-12);
        assert_ne!(r.verdict, Verdict::Fail);
    }

    fn ky_fan_counterexample() -> CheckInstance {
        let c1 = vec![vec![3.972, 1.192], vec![1.192, 0.634]];
        let c2 = vec![vec![3.051, -1.237], vec![-1.237, 4.029]];
        CheckInstance::new(CheckId::KyFan, vec![ModelInput::Covariance(c1), ModelInput::Covariance(c2)])
    }

    #[test]
    fn ky_fan_orthant_form_can_fail_under_its_hypotheses() {
        // ρ at 0 is 1/4 + arcsin(r)/2π, not concave in C; the integral hypotheses do not rescue it
        let r = run_check(&ky_fan_counterexample()).unwrap();
        assert!(r.hypothesis_met, "{:?}", r.hypothesis_values);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.slack.unwrap() < -0.03);
    }

    #[test]
    fn ky_fan_entropy_form_holds_on_the_same_pair() {
        let r = run_check(&ky_fan_counterexample().with_variant("wcre")).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!(r.slack.unwrap() > 0.0);
    }

    #[test]
    fn gaussian_bound_equals_reference_entropy() {
        let g = UnivariateModel::gaussian(5.0, 1.0);
        let r = run_check(&CheckInstance::new(CheckId::MaxGauss, vec![uni(g.clone()), uni(g)])).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.rhs.unwrap() - r.diagnostics.values["wcre_reference"]).abs() < 1e-8);
        assert!(r.slack.unwrap().abs() < 1e-8);
    }
}
