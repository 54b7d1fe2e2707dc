use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use wcre::harness::{default_catalog, run_check, run_suite, CheckId, CheckInstance, CheckReport, SuiteEntry, Verdict};
use wcre::WeightFunction;

fn reports() -> &'static Vec<(CheckInstance, CheckReport)> {
    static CELL: OnceLock<Vec<(CheckInstance, CheckReport)>> = OnceLock::new();
    CELL.get_or_init(|| {
        default_catalog()
            .into_iter()
            .map(|inst| {
                let r = run_check(&inst).unwrap_or_else(|e| panic!("{} {:?}: {e}", inst.check_id, inst.label));
                (inst, r)
            })
            .collect()
    })
}

fn find(id: CheckId, label: &str) -> &'static CheckReport {
    reports()
        .iter()
        .find(|(i, _)| i.check_id == id && i.label.as_deref() == Some(label))
        .map(|(_, r)| r)
        .unwrap_or_else(|| panic!("no catalog instance {id} {label}"))
}

#[test]
fn catalog_covers_every_implemented_check() {
    let seen: BTreeSet<CheckId> = default_catalog().iter().map(|i| i.check_id).collect();
    for id in CheckId::IMPLEMENTED {
        assert!(seen.contains(&id), "{id} has no instance");
    }
}

#[test]
fn catalog_has_no_failures() {
    for (inst, r) in reports() {
        assert_ne!(r.verdict, Verdict::Fail, "{} {:?}: {r:?}", inst.check_id, inst.label);
        if r.verdict == Verdict::Divergent {
            assert_eq!(inst.check_id, CheckId::Finiteness, "{:?}", inst.label);
        }
        if r.verdict == Verdict::Pass {
            assert!(r.conclusions.iter().all(|c| c.slack >= -c.tolerance), "{r:?}");
        }
    }
}

#[test]
fn equality_cases_are_tight() {
    use CheckId::*;
    let tight = [
        (Gibbs, "equal_laws"),
        (UniformEstDiscrete, "uniform"),
        (UniformEstCont, "uniform_0_1"),
        (CondNonneg, "vanishing_weight"),
        (Subadd, "independent"),
        (SubaddChain, "independent_pair"),
        (StrongSubadd, "chain"),
        (RelConvex, "shared_pair"),
        (RelDpi, "equal_laws"),
        (CondDpi, "independent_tail"),
        (MutualDpi, "independent_head"),
        (Concavity, "equal_laws"),
        (SumIndep, "point_mass"),
        (Decomp, "independent_pair"),
        (MaxGeneric, "equal_laws"),
        (MaxGauss, "equal_laws"),
        (MaxExp, "exponential"),
        (KyFan, "equal_covariances"),
        (KyFan, "endpoint"),
        (MarginalSubadd, "trivariate_independent"),
        (Hadamard, "diagonal"),
        (MaxWeibull, "weibull"),
        (WeRelation, "exponential_power"),
        (SurvIdentity, "weibull"),
    ];
    for (id, label) in tight {
        let r = find(id, label);
        assert_eq!(r.verdict, Verdict::Pass, "{id} {label}");
        assert!(r.slack.unwrap().abs() <= 10.0 * r.tolerance, "{id} {label}: slack {:?}", r.slack);
    }
}

#[test]
fn wrong_hypotheses_are_exercised() {
    let mut by_check: BTreeMap<CheckId, Vec<&CheckReport>> = BTreeMap::new();
    for (inst, r) in reports() {
        by_check.entry(inst.check_id).or_default().push(r);
    }
    // F̄ never exceeds a marginal sf and ψ(0) = 0 for every weight family,
    // so these two hypotheses cannot fail
    let always_met = [CheckId::CondNonneg, CheckId::WeRelation];
    for (id, rs) in by_check {
        if always_met.contains(&id) || rs.iter().all(|r| r.hypothesis_values.is_empty()) {
            continue;
        }
        assert!(rs.iter().any(|r| r.verdict == Verdict::HypothesisNotMet), "{id} never misses its hypothesis");
    }
}

#[test]
fn doubling_the_weight_keeps_verdicts() {
    // both checks bound φ by 1 or fix λ from ∫φF̄, so 2φ is a different question
    let skip = [CheckId::MaxExp, CheckId::MaxWeibull];
    for (inst, r) in reports() {
        if skip.contains(&inst.check_id) || matches!(inst.weight, WeightFunction::Exponential { .. }) {
            continue;
        }
        let Some(doubled) = inst.with_doubled_weight() else { continue };
        let d = run_check(&doubled).unwrap();
        assert_eq!(d.verdict, r.verdict, "{} {:?}", inst.check_id, inst.label);
    }
}

#[test]
fn duplicated_instances_give_identical_reports() {
    let inst = default_catalog().into_iter().find(|i| i.check_id == CheckId::GiniLb).unwrap();
    let entries = run_suite(&[inst.clone(), inst], 2).unwrap();
    let text: Vec<String> = entries.iter().map(|e| serde_json::to_string(e).unwrap()).collect();
    assert_eq!(text[0], text[1]);
    assert!(matches!(entries[0], SuiteEntry::Report(_)));
}
