//! Checks on one or two univariate laws.

use crate::error::{Error, Result};
use crate::kernel::data_processing_sides;
use crate::model::{integration_points, upper_cut, Lifetime, UnivariateModel};
use crate::quadrature::{integrate_pieces, QuadratureSpec};
use crate::univariate::{
    alpha_phi, convolution_model, fenchel_upper_bound as fenchel_bound, finiteness_certificate, gini_psi_statistic, log_plus_moment_bound,
    psi_mean_deviation, relative_wcre, shannon_entropy, shifted_weight, survival_identity_value, wcre, CertificateParams,
};
use crate::empirical::{convergence_experiment, is_nonincreasing};
use crate::weight::WeightFunction;

use super::{
    unimodality_violation, weighted_integral, weighted_sf_integral, Assessment, CheckInstance, Sign, Verdict, IDENTITY_TOL, MC_STD_ERRORS,
    QUADRATURE_TOL,
};

const DEFAULT_MC_DRAWS: f64 = 1e5;

pub(super) fn gibbs(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(2)?;
    let (f, g) = (inst.univariate(0)?, inst.univariate(1)?);
    let (phi, spec) = (&inst.weight, &inst.spec);
    let h = weighted_integral(&[f, g], phi, spec, &|x| f.sf(x) - g.sf(x))?;
    let d = relative_wcre(f, g, phi, spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.hypothesis("weighted_sf_gap", h.value, Sign::NonNegative)
        .error("weighted_sf_gap", &h)
        .at_most("relative_wcre_nonnegative", 0.0, d, QUADRATURE_TOL);
    Ok(a)
}

pub(super) fn uniform_discrete(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let probs = inst.discrete(0)?;
    if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Input("discrete law needs nonnegative probabilities summing to 1".into()));
    }
    let cum: Vec<f64> = probs.iter().scan(0.0, |s, p| {
        *s += p;
        Some(*s)
    }).collect();
    let beta = match inst.params.get("beta") {
        Some(b) => *b,
        None => cum.iter().enumerate().map(|(i, c)| c / (i + 1) as f64).fold(f64::INFINITY, f64::min),
    };
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("β = {beta} must lie in (0, 1]")));
    }
    let (mut h, mut lhs, mut mass, mut log_i) = (0.0, 0.0, 0.0, 0.0);
    for (k, c) in cum.iter().enumerate() {
        let i = (k + 1) as f64;
        let w = inst.weight.value(i);
        h += w * (c - beta * i);
        if *c > 0.0 {
            lhs -= w * c * c.ln();
        }
        mass += w * c;
        log_i += w * c * i.ln();
    }
    let rhs = -beta.ln() * mass - log_i;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.hypothesis("weighted_cumulative_gap", h, Sign::NonNegative)
        .value("beta", beta)
        .at_most("discrete_entropy_bound", lhs, rhs, QUADRATURE_TOL);
    Ok(a)
}

pub(super) fn uniform_continuous(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let f = inst.univariate(0)?;
    let (alpha, beta) = (inst.param("alpha")?, inst.param("beta")?);
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Domain(format!("the line α − βx needs α > 0 and β > 0, got α = {alpha}, β = {beta}")));
    }
    let (phi, spec) = (&inst.weight, &inst.spec);
    let root = alpha / beta;
    if f.sf(root) > 0.0 {
        return Err(Error::Domain(format!("the survival function is positive at {root}, where α − βx vanishes")));
    }
    let mut pts = integration_points(f, root, &phi.breakpoints());
    if pts.last() != Some(&root) {
        pts.push(root);
    }
    let line = |x: f64| alpha - beta * x;
    let h = integrate_pieces(&|x| phi.value(x) * (f.sf(x) - line(x)), &pts, spec)?;
    let rhs = integrate_pieces(
        &|x| {
            let s = f.sf(x);
            if s == 0.0 {
                0.0
            } else {
                -phi.value(x) * s * line(x).ln()
            }
        },
        &pts,
        spec,
    )?;
    let lhs = wcre(f, phi, spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.hypothesis("weighted_gap_to_line", h.value, Sign::NonNegative)
        .error("weighted_gap_to_line", &h)
        .error("line_bound", &rhs)
        .at_most("line_bound", lhs.value, rhs.value, QUADRATURE_TOL);
    Ok(a)
}

fn mixture(lambda: f64, a: &UnivariateModel, b: &UnivariateModel) -> UnivariateModel {
    UnivariateModel::Mixture { weights: vec![lambda, 1.0 - lambda], components: vec![a.clone(), b.clone()] }
}

fn mixing_weight(inst: &CheckInstance) -> Result<f64> {
    let l = inst.param_or("lambda1", 0.5);
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::Domain(format!("mixing weight {l} must lie in [0, 1]")));
    }
    Ok(l)
}

pub(super) fn relative_convexity(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(4)?;
    let (f1, g1, f2, g2) = (inst.univariate(0)?, inst.univariate(1)?, inst.univariate(2)?, inst.univariate(3)?);
    let lambda = mixing_weight(inst)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let d1 = relative_wcre(f1, g1, phi, spec)?;
    let d2 = relative_wcre(f2, g2, phi, spec)?;
    let mixed = relative_wcre(&mixture(lambda, f1, f2), &mixture(lambda, g1, g2), phi, spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.value("first_pair", d1)
        .value("second_pair", d2)
        .at_most("convexity", mixed, lambda * d1 + (1.0 - lambda) * d2, QUADRATURE_TOL);
    Ok(a)
}

pub(super) fn relative_data_processing(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(3)?;
    let (f, g, k) = (inst.univariate(0)?, inst.univariate(1)?, inst.kernel(2)?);
    let (before, after) = data_processing_sides(f, g, &inst.weight, k, &inst.spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.at_most("data_processing", after, before, QUADRATURE_TOL);
    Ok(a)
}

/// max over probes u of φ''(t) − (f'(t)/f(t))·φ'(t) at t = F̄⁻¹(u), by central
/// differences; zero for constant φ.
pub(super) fn score_violation(m: &dyn Lifetime, phi: &WeightFunction) -> f64 {
    if phi.as_constant().is_some() {
        return 0.0;
    }
    let mut worst = f64::NEG_INFINITY;
    for k in 1..100 {
        let t = m.quantile(1.0 - k as f64 / 100.0);
        let d = m.pdf(t);
        if !(d > 0.0 && t.is_finite()) {
            continue;
        }
        let h = 1e-4 * t.max(1e-2);
        let t0 = t.max(h);
        let (lo, mid, hi) = (t0 - h, t0, t0 + h);
        let d1 = (phi.value(hi) - phi.value(lo)) / (2.0 * h);
        let d2 = (phi.value(hi) - 2.0 * phi.value(mid) + phi.value(lo)) / (h * h);
        let score = (m.pdf(hi) - m.pdf(lo)) / (2.0 * h * d);
        let v = d2 - score * d1;
        if v.is_finite() {
            worst = worst.max(v);
        }
    }
    if worst.is_finite() {
        worst
    } else {
        0.0
    }
}

pub(super) fn concavity(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(2)?;
    let (f1, f2) = (inst.univariate(0)?, inst.univariate(1)?);
    let (phi, spec) = (&inst.weight, &inst.spec);
    let lambdas = match inst.params.get("lambda1") {
        Some(_) => vec![mixing_weight(inst)?],
        None => vec![0.25, 0.5, 0.75],
    };
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.hypothesis("weight_unimodal_violation", unimodality_violation(phi), Sign::NonPositive).hypothesis(
        "score_condition",
        score_violation(f1, phi).max(score_violation(f2, phi)),
        Sign::NonPositive,
    );
    let (e1, e2) = (wcre(f1, phi, spec)?.value, wcre(f2, phi, spec)?.value);
    for l in lambdas {
        let mixed = wcre(&mixture(l, f1, f2), phi, spec)?.value;
        a.at_most(&format!("concavity_at_{l}"), l * e1 + (1.0 - l) * e2, mixed, QUADRATURE_TOL);
    }
    Ok(a)
}

pub(super) fn finiteness(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let f = inst.univariate(0)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let params = CertificateParams {
        p: inst.param_or("p", CertificateParams::default().p),
        alpha: inst.param_or("alpha", CertificateParams::default().alpha),
        a: inst.param_or("a", CertificateParams::default().a),
    };
    let cert = finiteness_certificate(f, phi, &params, spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.condition("certificate", cert.finite).value("moment", cert.moment).value("near", cert.near).value("tail", cert.tail);
    match (cert.finite, wcre(f, phi, spec)) {
        (true, Ok(v)) => {
            let bound = (-1.0f64).exp() / (1.0 - params.alpha) * (cert.near + cert.moment.powf(params.alpha) * cert.tail);
            a.error("wcre", &v.quadrature).at_most("certificate_bound", v.value, bound, QUADRATURE_TOL);
        }
        (true, Err(Error::Divergent(msg))) => {
            a.note(format!("certificate holds but the entropy diverges: {msg}")).force(Verdict::Fail);
        }
        (false, Err(Error::Divergent(msg))) => {
            a.note(msg).force(Verdict::Divergent);
        }
        (false, Ok(v)) => {
            a.value("wcre", v.value).note("certificate fails on a law with finite entropy");
        }
        (_, Err(e)) => return Err(e),
    }
    Ok(a)
}

pub(super) fn convergence(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let target = inst.univariate(0)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let cert = finiteness_certificate(target, phi, &CertificateParams::default(), spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.condition("target_certificate", cert.finite);
    if inst.variant_is("empirical") {
        let first = inst.param_or("n_min", 100.0) as usize;
        let steps = inst.param_or("steps", 3.0) as u32;
        let sizes: Vec<usize> = (0..steps).map(|k| first * 10usize.pow(k)).collect();
        let reps = inst.param_or("replications", 50.0) as usize;
        let rows = convergence_experiment(target, phi, &sizes, reps, inst.seed, spec)?;
        a.condition("sample_sizes_increase", sizes.len() >= 2);
        let rise = rows.windows(2).map(|w| w[1].mean_abs_err - w[0].mean_abs_err - w[0].sd.max(w[1].sd)).fold(f64::NEG_INFINITY, f64::max);
        for r in &rows {
            a.value(&format!("mean_abs_err_n{}", r.n), r.mean_abs_err).std_error(&format!("mean_abs_err_n{}", r.n), r.sd / (reps as f64).sqrt());
        }
        if !is_nonincreasing(&rows) {
            a.note("error ladder has more than one inversion");
        }
        a.at_most("error_rise_beyond_one_sd", rise.max(-f64::MAX), 0.0, 0.0).at_most(
            "final_error_below_first",
            rows.last().unwrap().mean_abs_err,
            rows[0].mean_abs_err,
            0.0,
        );
        return Ok(a);
    }
    if inst.variant.is_some() {
        return inst.unknown_variant();
    }
    let (lambda, q) = match target {
        UnivariateModel::Exponential { lambda } => (*lambda, 1.0),
        UnivariateModel::Weibull { lambda, q } => (*lambda, *q),
        _ => return Err(Error::Input("the parametric sequence needs an exponential or Weibull target".into())),
    };
    let reference = wcre(target, phi, spec)?.value;
    let terms = inst.param_or("terms", 7.0) as u32;
    let p = inst.param_or("p", 2.0);
    let mut errors = Vec::new();
    let mut sup_moment: f64 = 0.0;
    for j in 0..terms {
        let k = 2f64.powi(j as i32);
        let xk = UnivariateModel::weibull(lambda, q * (1.0 + 1.0 / k));
        sup_moment = sup_moment.max(crate::model::expectation(&xk, &|x| x.powf(p), spec, &[])?.value);
        let e = (wcre(&xk, phi, spec)?.value - reference).abs();
        a.value(&format!("error_k{k}"), e);
        errors.push(e);
    }
    a.condition("bounded_in_lp", sup_moment.is_finite()).value("sup_moment", sup_moment);
    let rise = errors.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    a.at_most("errors_nonincreasing", rise, 0.0, QUADRATURE_TOL).at_most("final_error_below_first", errors[errors.len() - 1], errors[0], QUADRATURE_TOL);
    Ok(a)
}

pub(super) fn sum_of_independent(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(2)?;
    let (x, y) = (inst.univariate(0)?, inst.univariate(1)?);
    let (phi, spec) = (&inst.weight, &inst.spec);
    let sum = wcre(&convolution_model(x, y, spec)?, phi, spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.error("sum", &sum.quadrature);
    for (name, m, other) in [("shifted_first", x, y), ("shifted_second", y, x)] {
        let extent = upper_cut(m, spec).max(f64::MIN_POSITIVE);
        let w = shifted_weight(phi, other, extent, spec)?;
        let e = wcre(m, &w, spec)?.value;
        a.at_most(name, e, sum.value, QUADRATURE_TOL);
    }
    Ok(a)
}

fn entropy_bound(a: &mut Assessment, name: &str, m: &dyn Lifetime, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<()> {
    let ap = alpha_phi(m, phi, spec)?;
    let h = shannon_entropy(m, spec)?;
    let e = wcre(m, phi, spec)?;
    a.condition(&format!("{name}_log_weight_finite"), !ap.degenerate)
        .value(&format!("{name}_shannon"), h)
        .value(&format!("{name}_alpha"), ap.value)
        .error(name, &e.quadrature)
        .at_most(name, ap.value * h.exp(), e.value, QUADRATURE_TOL);
    Ok(())
}

pub(super) fn entropy_lower_bound(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let mut a = Assessment::new(QUADRATURE_TOL);
    if inst.variant_is("conditional") {
        let m = inst.multivariate(0)?;
        let given = m.marginal(1);
        for q in [0.25, 0.5, 0.75] {
            let y = given.quantile(q);
            let law = m.conditional_law(0, 1, y)?;
            entropy_bound(&mut a, &format!("given_quantile_{q}"), &law, phi, spec)?;
        }
        return Ok(a);
    }
    if inst.variant.is_some() {
        return inst.unknown_variant();
    }
    entropy_bound(&mut a, "bound", inst.univariate(0)?, phi, spec)?;
    Ok(a)
}

pub(super) fn weighted_entropy_relation(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let f = inst.univariate(0)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let unit = WeightFunction::unit();
    let mean = weighted_sf_integral(f, &unit, spec)?.value;
    let m = weighted_sf_integral(f, phi, spec)?.value;
    let e = wcre(f, phi, spec)?.value;
    let theta = weighted_integral(&[f], &unit, spec, &|x| {
        let w = phi.value(x);
        if w > 0.0 {
            w * w.ln() * f.sf(x)
        } else {
            0.0
        }
    })?
    .value;
    if !(mean > 0.0 && m > 0.0) {
        return Err(Error::Domain("the normalising integrals must be positive".into()));
    }
    let neg_log = |g: f64| if g > 0.0 { -g * g.ln() } else { 0.0 };
    let we = weighted_integral(&[f], phi, spec, &|x| neg_log(f.sf(x) / mean))?.value;
    let h = weighted_integral(&[f], &unit, spec, &|x| neg_log(phi.value(x) * f.sf(x) / m))?.value;
    let mut a = Assessment::new(IDENTITY_TOL);
    a.hypothesis("psi_at_zero", phi.psi(0.0)?, Sign::Zero)
        .value("mean", mean)
        .value("weighted_mass", m)
        .value("theta", theta)
        .equal("weighted_entropy", we, e / mean + m / mean * mean.ln(), IDENTITY_TOL)
        .equal("shannon_entropy", h, e / m - theta / m + m.ln(), IDENTITY_TOL);
    Ok(a)
}

pub(super) fn gini_lower_bound(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let f = inst.univariate(0)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let n = inst.param_or("n_mc", DEFAULT_MC_DRAWS) as usize;
    let e = wcre(f, phi, spec)?.value;
    let gini = gini_psi_statistic(f, phi, n, inst.seed)?;
    let dev = psi_mean_deviation(f, phi, spec, n, inst.seed.wrapping_add(1))?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.std_error("pair_difference", gini.std_error)
        .std_error("mean_deviation", dev.std_error)
        .at_most("pair_difference", gini.value, 2.0 * e, MC_STD_ERRORS * gini.std_error)
        .at_most("mean_deviation", dev.value, 2.0 * e, MC_STD_ERRORS * dev.std_error);
    Ok(a)
}

pub(super) fn survival_identity(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let f = inst.univariate(0)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let e = wcre(f, phi, spec)?;
    let v = survival_identity_value(f, phi, spec)?;
    let mut a = Assessment::new(IDENTITY_TOL);
    a.error("wcre", &e.quadrature).equal("survival_identity", e.value, v, IDENTITY_TOL);
    Ok(a)
}

pub(super) fn fenchel_upper_bound(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let f = inst.univariate(0)?;
    let (phi, spec) = (&inst.weight, &inst.spec);
    let n = inst.param_or("n_mc", DEFAULT_MC_DRAWS) as usize;
    let e = wcre(f, phi, spec)?.value;
    let bound = fenchel_bound(f, phi, spec, n, inst.seed)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.std_error("bound", bound.std_error).at_most("fenchel", e, bound.value, MC_STD_ERRORS * bound.std_error);
    Ok(a)
}

pub(super) fn log_plus(inst: &CheckInstance) -> Result<Assessment> {
    inst.arity(1)?;
    let b = log_plus_moment_bound(inst.univariate(0)?, &inst.weight, &inst.spec)?;
    let mut a = Assessment::new(QUADRATURE_TOL);
    a.value("threshold", b.threshold).value("tail_moment", b.tail_moment).at_most("log_plus", b.lhs, b.rhs, QUADRATURE_TOL);
    Ok(a)
}
