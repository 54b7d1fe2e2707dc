//! Checks on random vectors, evaluated on tensor grids.

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::joint::MultivariateModel;
use crate::model::{expectation, integration_points, upper_cut, Lifetime};
use crate::multivariate::{independent_decomposition, joint_wcre, log_ratio_term, screen_axes, Field, GridPoint, ProductWeight};
use crate::quadrature::{integrate_nd, integrate_pieces, Axis, IntegralResult, QuadratureSpec};
use crate::univariate::{alpha_phi, log_x_abs_log_x_constant, neg_s_log_s, shannon_entropy, wcre};

use super::{Assessment, CheckInstance, Sign, GRID_TOL, QUADRATURE_TOL};

fn terms<const K: usize>(
    m: &MultivariateModel,
    w: &ProductWeight,
    spec: &QuadratureSpec,
    f: &(dyn Fn(&GridPoint) -> [f64; K] + Sync),
) -> Result<[IntegralResult; K]> {
    screen_axes(m, w, spec, true)?;
    Field::new(&[m], w, spec)?.integrate(f)
}

/// −F̄ log F̄_S at a node.
fn neg_log_sub(p: &GridPoint, coords: &[usize]) -> f64 {
    -log_ratio_term(p, 0, &[coords], &[])
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        0.0
    }
}

fn model_of_dim<'a>(inst: &'a CheckInstance, dims: &[usize]) -> Result<(&'a MultivariateModel, ProductWeight)> {
    inst.arity(1)?;
    let m = inst.multivariate(0)?;
    m.validate()?;
    if !dims.contains(&m.dim()) {
        return Err(Error::Input(format!("{} needs a vector of dimension {dims:?}, got {}", inst.check_id, m.dim())));
    }
    Ok((m, inst.product_weight(m.dim())?))
}

fn record(a: &mut Assessment, names: &[&str], r: &[IntegralResult]) {
    for (n, v) in names.iter().zip(r) {
        a.error(n, v);
    }
}

pub(super) fn conditional_nonnegative(inst: &CheckInstance) -> Result<Assessment> {
    let (m, w) = model_of_dim(inst, &[2, 3])?;
    let given: &[usize] = if m.dim() == 2 { &[1] } else { &[1, 2] };
    let all: Vec<usize> = (0..m.dim()).collect();
    let r = terms(m, &w, &inst.spec, &|p| {
        let s = p.sf();
        [s * (ratio(s, p.sub_sf(given)) - 1.0), neg_log_sub(p, &all), neg_log_sub(p, given)]
    })?;
    let mut a = Assessment::new(GRID_TOL);
    record(&mut a, &["hypothesis", "joint", "given"], &r);
    // joint − given is the conditional entropy of X₁ given the rest
    a.hypothesis("conditional_sf_gap", r[0].value, Sign::NonPositive)
        .value("joint", r[1].value)
        .value("given", r[2].value)
        .at_most("conditional_nonnegative", 0.0, r[1].value - r[2].value, GRID_TOL);
    if m.dim() == 3 {
        a.note("the trivariate hypothesis integral is read with the sign ≤ 0");
    }
    Ok(a)
}

pub(super) fn subadditivity(inst: &CheckInstance) -> Result<Assessment> {
    let (m, w) = model_of_dim(inst, &[2])?;
    let r = terms(m, &w, &inst.spec, &|p| {
        [
            p.sf() - p.marginal_sf(0) * p.marginal_sf(1),
            neg_log_sub(p, &[0, 1]),
            neg_log_sub(p, &[0]),
            neg_log_sub(p, &[1]),
            log_ratio_term(p, 0, &[&[0, 1]], &[&[0], &[1]]),
        ]
    })?;
    let mut a = Assessment::new(GRID_TOL);
    record(&mut a, &["hypothesis", "joint", "first", "second", "mutual"], &r);
    a.hypothesis("dependence_gap", r[0].value, Sign::NonNegative)
        .at_most("joint_below_sum", r[1].value, r[2].value + r[3].value, GRID_TOL)
        .at_most("mutual_nonnegative", 0.0, r[4].value, GRID_TOL);
    Ok(a)
}

pub(super) fn subadditivity_chain(inst: &CheckInstance) -> Result<Assessment> {
    let (m, w) = model_of_dim(inst, &[3])?;
    let r = terms(m, &w, &inst.spec, &|p| {
        let s = p.sf();
        [
            s * (1.0 - ratio(p.marginal_sf(0) * p.marginal_sf(1), p.sub_sf(&[0, 1]))),
            -log_ratio_term(p, 0, &[&[0, 1]], &[&[1]]),
            neg_log_sub(p, &[0]),
        ]
    })?;
    let mut a = Assessment::new(GRID_TOL);
    record(&mut a, &["hypothesis", "conditional", "marginal"], &r);
    a.hypothesis("pair_dependence_gap", r[0].value, Sign::NonNegative).at_most("conditioning_reduces", r[1].value, r[2].value, GRID_TOL);
    Ok(a)
}

pub(super) fn strong_subadditivity(inst: &CheckInstance) -> Result<Assessment> {
    let (m, w) = model_of_dim(inst, &[3])?;
    let r = terms(m, &w, &inst.spec, &|p| {
        [
            p.sf() - ratio(p.sub_sf(&[0, 1]) * p.sub_sf(&[1, 2]), p.marginal_sf(1)),
            neg_log_sub(p, &[0, 1, 2]),
            neg_log_sub(p, &[1]),
            neg_log_sub(p, &[0, 1]),
            neg_log_sub(p, &[1, 2]),
        ]
    })?;
    let mut a = Assessment::new(GRID_TOL);
    record(&mut a, &["hypothesis", "joint", "middle", "first_pair", "second_pair"], &r);
    a.hypothesis("markov_gap", r[0].value, Sign::NonNegative).at_most(
        "strong_subadditivity",
        r[1].value + r[2].value,
        r[3].value + r[4].value,
        GRID_TOL,
    );
    Ok(a)
}

/// Conditional independence of X₁ and X₃ given X₂ is realised by construction.
fn markov_chain(inst: &CheckInstance) -> Result<(&MultivariateModel, ProductWeight)> {
    let (m, w) = model_of_dim(inst, &[3])?;
    match *m {
        MultivariateModel::FgmChain { .. } | MultivariateModel::IndependentProduct { .. } => Ok((m, w)),
        _ => Err(Error::Input(format!("{} needs a chain or independent model, got {}", inst.check_id, m.family()))),
    }
}

pub(super) fn conditional_data_processing(inst: &CheckInstance) -> Result<Assessment> {
    let (m, w) = markov_chain(inst)?;
    let mut a = Assessment::new(GRID_TOL);
    if inst.variant_is("factor_two") {
        let r = terms(m, &w, &inst.spec, &|p| {
            let s = p.sf();
            [s * (ratio(s, p.sub_sf(&[0, 2])) - 1.0), -log_ratio_term(p, 0, &[&[0, 2]], &[&[0]]), -log_ratio_term(p, 0, &[&[1, 2]], &[&[1]])]
        })?;
        record(&mut a, &["hypothesis", "given_first", "given_second"], &r);
        a.hypothesis("conditional_sf_gap", r[0].value, Sign::NonPositive)
            .note("hypothesis bracket read as the conditional sf of X₂ given (X₁, X₃) minus 1")
            .at_most("factor_two", r[1].value, 2.0 * r[2].value, GRID_TOL);
        return Ok(a);
    }
    if inst.variant.is_some() {
        return inst.unknown_variant();
    }
    let r = terms(m, &w, &inst.spec, &|p| {
        [
            p.sf() - ratio(p.sub_sf(&[0, 1]) * p.sub_sf(&[0, 2]), p.marginal_sf(0)),
            -log_ratio_term(p, 0, &[&[1, 2]], &[&[1]]),
            -log_ratio_term(p, 0, &[&[0, 2]], &[&[0]]),
        ]
    })?;
    record(&mut a, &["hypothesis", "given_second", "given_first"], &r);
    a.hypothesis("weight_gap", r[0].value, Sign::NonNegative).at_most("data_processing", r[1].value, r[2].value, GRID_TOL);
    Ok(a)
}

pub(super) fn mutual_data_processing(inst: &CheckInstance) -> Result<Assessment> {
    let (m, w) = markov_chain(inst)?;
    let r = terms(m, &w, &inst.spec, &|p| {
        [
            p.sf() - ratio(p.sub_sf(&[0, 2]) * p.sub_sf(&[1, 2]), p.marginal_sf(2)),
            log_ratio_term(p, 0, &[&[0, 2]], &[&[0], &[2]]),
            log_ratio_term(p, 0, &[&[0, 1]], &[&[0], &[1]]),
        ]
    })?;
    let mut a = Assessment::new(GRID_TOL);
    record(&mut a, &["hypothesis", "mutual_far", "mutual_near"], &r);
    a.hypothesis("weight_gap", r[0].value, Sign::NonNegative).at_most("data_processing", r[1].value, r[2].value, GRID_TOL);
    Ok(a)
}

pub(super) fn marginal_subadditivity(inst: &CheckInstance) -> Result<Assessment> {
    let (m, w) = model_of_dim(inst, &[2, 3])?;
    let n = m.dim();
    let r = terms(m, &w, &inst.spec, &|p| {
        let mut out = [0.0; 5];
        out[0] = p.sf() - (0..n).map(|i| p.marginal_sf(i)).product::<f64>();
        out[1] = neg_log_sub(p, &(0..n).collect::<Vec<_>>());
        for i in 0..n {
            out[2 + i] = neg_log_sub(p, &[i]);
        }
        out
    })?;
    let mut a = Assessment::new(GRID_TOL);
    record(&mut a, &["hypothesis", "joint"], &r);
    let sum: f64 = r[2..2 + n].iter().map(|v| v.value).sum();
    a.hypothesis("dependence_gap", r[0].value, Sign::NonNegative).at_most("joint_below_sum", r[1].value, sum, GRID_TOL);
    Ok(a)
}

pub(super) fn decomposition(inst: &CheckInstance) -> Result<Assessment> {
    let (m, w) = model_of_dim(inst, &[2, 3])?;
    let joint = joint_wcre(m, &w, &inst.spec)?;
    let d = independent_decomposition(m, &w, &inst.spec)?;
    let mut a = Assessment::new(GRID_TOL);
    for (i, part) in d.parts.iter().enumerate() {
        a.value(&format!("part_{i}"), *part);
    }
    a.error("joint", &joint.quadrature).equal("decomposition", joint.value, d.total, GRID_TOL);
    Ok(a)
}

/// −∫∫ c log c over the unit square for the FGM copula density
/// c(u, v) = 1 + θ(1 − 2u)(1 − 2v); zero for independence.
fn copula_entropy(m: &MultivariateModel, spec: &QuadratureSpec) -> Result<f64> {
    match m {
        MultivariateModel::IndependentProduct { .. } => Ok(0.0),
        MultivariateModel::FgmCopula { theta, .. } => {
            let axes = [Axis::finite(0.0, 1.0), Axis::finite(0.0, 1.0)];
            let r = integrate_nd(&|x| neg_s_log_s_unbounded(1.0 + theta * (1.0 - 2.0 * x[0]) * (1.0 - 2.0 * x[1])), &axes, spec)?;
            Ok(r.value)
        }
        _ => Err(Error::Input(format!("cross entropy needs a bivariate product or FGM model, got {}", m.family()))),
    }
}

fn neg_s_log_s_unbounded(c: f64) -> f64 {
    if c > 0.0 {
        -c * c.ln()
    } else {
        0.0
    }
}

pub(super) fn cross_lower_bound(inst: &CheckInstance) -> Result<Assessment> {
    let (m, w) = model_of_dim(inst, &[2])?;
    let spec = &inst.spec;
    let (phi1, phi2) = (&w.0[0], &w.0[1]);
    let (first, second) = (m.marginal(0), m.marginal(1));
    let h = shannon_entropy(&first, spec)? + shannon_entropy(&second, spec)? + copula_entropy(m, spec)?;
    let (l1, l2) = (alpha_phi(&first, phi1, spec)?, alpha_phi(&second, phi2, spec)?);
    let alpha_star = if l1.degenerate || l2.degenerate {
        0.0
    } else {
        (l1.mean_log_weight + l2.mean_log_weight + log_x_abs_log_x_constant()).exp()
    };

    let failure = Mutex::new(None);
    let keep = |r: Result<f64>| {
        r.unwrap_or_else(|e| {
            failure.lock().unwrap().get_or_insert(e);
            0.0
        })
    };
    let outer = |x: f64| {
        let w1 = phi1.value(x);
        if w1 == 0.0 {
            return 0.0;
        }
        let law = match m.conditional_law(1, 0, x) {
            Ok(l) => l,
            Err(e) => return keep(Err(e)),
        };
        let mean_w2 = match phi2.as_constant() {
            Some(c) => c,
            None => keep(expectation(&law, &|y| phi2.value(y), spec, &phi2.breakpoints()).map(|r| r.value)),
        };
        let d = first.pdf(x);
        let inner = if d > 0.0 { keep(wcre(&law, phi2, spec).map(|v| v.value)) } else { 0.0 };
        w1 * (mean_w2 * neg_s_log_s(first.sf(x)) + d * inner)
    };
    let pts = integration_points(&first, upper_cut(&first, spec), &phi1.breakpoints());
    let cross = integrate_pieces(&outer, &pts, spec)?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }

    let mut a = Assessment::new(QUADRATURE_TOL);
    a.hypothesis("weight_floor", phi1.infimum() * phi2.infimum() - 1.0, Sign::NonNegative)
        .value("joint_shannon", h)
        .value("alpha_star", alpha_star)
        .error("cross", &cross)
        .at_most("cross_bound", 2.0 * alpha_star * (h / 2.0).exp(), cross.value, QUADRATURE_TOL);
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::super::{run_check, CheckId, ModelInput, Verdict};
    use super::*;
    use crate::model::UnivariateModel;
    use crate::weight::WeightFunction;

    fn exp(l: f64) -> UnivariateModel {
        UnivariateModel::exponential(l)
    }

    fn chain(a: f64, b: f64) -> ModelInput {
        ModelInput::Multivariate(MultivariateModel::fgm_chain(a, b, [exp(1.0), exp(2.0), exp(1.0)]))
    }

    fn coarse() -> QuadratureSpec {
        QuadratureSpec::default().with_grid(64)
    }

    #[test]
    fn copula_entropy_matches_series() {
        // ∫∫ c log c = Σ_j θ^(2j) / (2j(2j−1)(2j+1)²) for the FGM density
        let theta: f64 = 0.8;
        let m = MultivariateModel::fgm(theta, exp(1.0), exp(1.0));
        let series: f64 = (1..40)
            .map(|j| {
                let k = (2 * j) as f64;
                theta.powi(2 * j) / (k * (k - 1.0) * (k + 1.0).powi(2))
            })
            .sum();
        assert!((copula_entropy(&m, &QuadratureSpec::default()).unwrap() + series).abs() < 1e-10);
    }

    #[test]
    fn chain_is_tight_for_strong_subadditivity() {
        let r = run_check(&CheckInstance::new(CheckId::StrongSubadd, vec![chain(0.5, 0.3)]).with_spec(coarse())).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.slack.unwrap().abs() < 1e-10);
    }

    #[test]
    fn data_processing_sign_follows_the_coupling() {
        let run = |id, a, b| run_check(&CheckInstance::new(id, vec![chain(a, b)]).with_spec(coarse())).unwrap().verdict;
        assert_eq!(run(CheckId::CondDpi, 0.4, 0.4), Verdict::Pass);
        assert_eq!(run(CheckId::CondDpi, 0.4, -0.4), Verdict::HypothesisNotMet);
        assert_eq!(run(CheckId::MutualDpi, 0.4, 0.4), Verdict::Pass);
        assert_eq!(run(CheckId::MutualDpi, -0.4, 0.4), Verdict::HypothesisNotMet);
    }

    #[test]
    fn data_processing_refuses_unstructured_vectors() {
        let m = MultivariateModel::Fgm3 { theta_12: 0.1, theta_13: 0.1, theta_23: 0.1, theta_123: 0.0, marginals: vec![exp(1.0); 3] };
        let e = run_check(&CheckInstance::new(CheckId::CondDpi, vec![ModelInput::Multivariate(m)])).unwrap_err();
        assert!(matches!(e, Error::Input(_)));
    }

    #[test]
    fn cross_bound_under_independence() {
        let m = MultivariateModel::independent(vec![exp(1.0), exp(1.0)]);
        let r = run_check(&CheckInstance::new(CheckId::CrossLb, vec![ModelInput::Multivariate(m.clone())])).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        // independent unit exponentials: the cross entropy is wcre(X) + wcre(Y) = 2
        assert!((r.rhs.unwrap() - 2.0).abs() < 1e-7);
        let r = run_check(
            &CheckInstance::new(CheckId::CrossLb, vec![ModelInput::Multivariate(m)]).with_axis_weights(vec![WeightFunction::power(1.0), WeightFunction::unit()]),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::HypothesisNotMet);
    }
}
