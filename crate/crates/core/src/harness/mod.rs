//! Registry of numerical checks. Each check evaluates its hypothesis integrals,
//! and only when they have the required signs compares the two sides of its
//! conclusion, reporting the slack.

mod bivariate;
mod catalog;
mod maximum;
mod univariate;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::MultivariateModel;
use crate::kernel::StochasticKernel;
use crate::model::{integration_points, upper_cut, Lifetime, UnivariateModel};
use crate::multivariate::ProductWeight;
use crate::quadrature::{integrate_pieces, IntegralResult, QuadratureSpec};
use crate::weight::WeightFunction;

pub use catalog::default_catalog;

/// Absolute tolerance for identities.
pub const IDENTITY_TOL: f64 = 1e-6;
/// Absolute tolerance for inequalities whose sides are adaptive quadratures.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Absolute tolerance for tensor-grid quantities (n ≥ 2).
pub const GRID_TOL: f64 = 1e-5;
/// Monte Carlo sides are compared within this many standard errors.
pub const MC_STD_ERRORS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckId {
    Gibbs,
    UniformEstDiscrete,
    UniformEstCont,
    CondNonneg,
    Subadd,
    SubaddChain,
    StrongSubadd,
    RelConvex,
    RelDpi,
    CondDpi,
    MutualDpi,
    Concavity,
    Finiteness,
    Convergence,
    SumIndep,
    Decomp,
    EntropyLb,
    CrossLb,
    WeRelation,
    GiniLb,
    SurvIdentity,
    FenchelUb,
    Logplus,
    MaxGeneric,
    MaxGauss,
    MaxExp,
    KyFan,
    MarginalSubadd,
    Hadamard,
    MaxWeibull,
    ChainConditioningReduces,
    ChainPairConditional,
    ChainConditionalSubadd,
    ChainStrongSubadd,
}

impl CheckId {
    /// Checks with a working implementation, in registry order.
    pub const IMPLEMENTED: [CheckId; 30] = [
        Self::Gibbs,
        Self::UniformEstDiscrete,
        Self::UniformEstCont,
        Self::CondNonneg,
        Self::Subadd,
        Self::SubaddChain,
        Self::StrongSubadd,
        Self::RelConvex,
        Self::RelDpi,
        Self::CondDpi,
        Self::MutualDpi,
        Self::Concavity,
        Self::Finiteness,
        Self::Convergence,
        Self::SumIndep,
        Self::Decomp,
        Self::EntropyLb,
        Self::CrossLb,
        Self::WeRelation,
        Self::GiniLb,
        Self::SurvIdentity,
        Self::FenchelUb,
        Self::Logplus,
        Self::MaxGeneric,
        Self::MaxGauss,
        Self::MaxExp,
        Self::KyFan,
        Self::MarginalSubadd,
        Self::Hadamard,
        Self::MaxWeibull,
    ];

    pub fn name(&self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// One input of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelInput {
    Univariate(UnivariateModel),
    Multivariate(MultivariateModel),
    Kernel(StochasticKernel),
    /// Covariance matrix of a zero-mean Gaussian vector.
    Covariance(Vec<Vec<f64>>),
    /// Probabilities of the values 1, 2, ..., m.
    Discrete { probs: Vec<f64> },
}

impl ModelInput {
    fn kind(&self) -> &'static str {
        match self {
            Self::Univariate(_) => "univariate",
            Self::Multivariate(_) => "multivariate",
            Self::Kernel(_) => "kernel",
            Self::Covariance(_) => "covariance",
            Self::Discrete { .. } => "discrete",
        }
    }
}

fn default_weight() -> WeightFunction {
    WeightFunction::unit()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckInstance {
    pub check_id: CheckId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Selects an alternative form of the check, e.g. "conditional" or "factor_two".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default)]
    pub models: Vec<ModelInput>,
    #[serde(default = "default_weight")]
    pub weight: WeightFunction,
    /// Per-axis factors for multivariate checks; defaults to `weight` on the
    /// first axis and 1 elsewhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_weights: Option<ProductWeight>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub spec: QuadratureSpec,
    #[serde(default)]
    pub seed: u64,
}

impl CheckInstance {
    pub fn new(check_id: CheckId, models: Vec<ModelInput>) -> Self {
        Self {
            check_id,
            label: None,
            variant: None,
            models,
            weight: WeightFunction::unit(),
            axis_weights: None,
            params: BTreeMap::new(),
            spec: QuadratureSpec::default(),
            seed: 0,
        }
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = Some(label.to_owned());
        self
    }

    pub fn with_variant(mut self, variant: &str) -> Self {
        self.variant = Some(variant.to_owned());
        self
    }

    pub fn with_weight(mut self, weight: WeightFunction) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_axis_weights(mut self, w: Vec<WeightFunction>) -> Self {
        self.axis_weights = Some(ProductWeight(w));
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }

    pub fn with_spec(mut self, spec: QuadratureSpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The same instance with φ replaced by 2φ, when the weight allows it.
    pub fn with_doubled_weight(&self) -> Option<Self> {
        let mut out = self.clone();
        out.weight = self.weight.scaled(2.0)?;
        if let Some(w) = &self.axis_weights {
            out.axis_weights = Some(w.scaled(2.0)?);
        }
        Some(out)
    }

    fn input(&self, i: usize) -> Result<&ModelInput> {
        self.models
            .get(i)
            .ok_or_else(|| Error::Input(format!("{} needs at least {} model inputs, got {}", self.check_id, i + 1, self.models.len())))
    }

    fn wrong_kind<T>(&self, i: usize, want: &str) -> Result<T> {
        Err(Error::Input(format!("{}: input {i} must be {want}, got {}", self.check_id, self.models[i].kind())))
    }

    pub(crate) fn arity(&self, n: usize) -> Result<()> {
        if self.models.len() != n {
            return Err(Error::Input(format!("{} takes {n} model inputs, got {}", self.check_id, self.models.len())));
        }
        Ok(())
    }

    pub(crate) fn univariate(&self, i: usize) -> Result<&UnivariateModel> {
        match self.input(i)? {
            ModelInput::Univariate(m) => {
                m.validate()?;
                Ok(m)
            }
            _ => self.wrong_kind(i, "univariate"),
        }
    }

    pub(crate) fn multivariate(&self, i: usize) -> Result<&MultivariateModel> {
        match self.input(i)? {
            ModelInput::Multivariate(m) => {
                m.validate()?;
                Ok(m)
            }
            _ => self.wrong_kind(i, "multivariate"),
        }
    }

    pub(crate) fn kernel(&self, i: usize) -> Result<&StochasticKernel> {
        match self.input(i)? {
            ModelInput::Kernel(k) => {
                k.validate()?;
                Ok(k)
            }
            _ => self.wrong_kind(i, "a kernel"),
        }
    }

    pub(crate) fn covariance(&self, i: usize) -> Result<&[Vec<f64>]> {
        match self.input(i)? {
            ModelInput::Covariance(c) => Ok(c),
            _ => self.wrong_kind(i, "a covariance matrix"),
        }
    }

    pub(crate) fn discrete(&self, i: usize) -> Result<&[f64]> {
        match self.input(i)? {
            ModelInput::Discrete { probs } => Ok(probs),
            _ => self.wrong_kind(i, "a discrete law"),
        }
    }

    pub(crate) fn param(&self, name: &str) -> Result<f64> {
        self.params.get(name).copied().ok_or_else(|| Error::Input(format!("{} needs parameter `{name}`", self.check_id)))
    }

    pub(crate) fn param_or(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    pub(crate) fn product_weight(&self, n: usize) -> Result<ProductWeight> {
        let w = self.axis_weights.clone().unwrap_or_else(|| ProductWeight::broadcast(&self.weight, n));
        w.validate(n)?;
        Ok(w)
    }

    pub(crate) fn variant_is(&self, name: &str) -> bool {
        self.variant.as_deref() == Some(name)
    }

    pub(crate) fn unknown_variant<T>(&self) -> Result<T> {
        Err(Error::Input(format!("{} has no variant `{}`", self.check_id, self.variant.as_deref().unwrap_or(""))))
    }
}

/// Required sign of a hypothesis value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    NonNegative,
    NonPositive,
    Zero,
}

impl Sign {
    fn satisfied(self, v: f64, tol: f64) -> bool {
        match self {
            Self::NonNegative => v >= -tol,
            Self::NonPositive => v <= tol,
            Self::Zero => v.abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisValue {
    pub name: String,
    pub value: f64,
    pub required: Sign,
}

/// One asserted inequality lhs ≤ rhs (or identity lhs = rhs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConclusionValue {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
}

impl ConclusionValue {
    fn holds(&self) -> bool {
        self.slack >= -self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    HypothesisNotMet,
    Fail,
    Divergent,
    Unimplemented,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Error estimates of the quadratures behind each side.
    pub quadrature_errors: BTreeMap<String, f64>,
    pub mc_std_errors: BTreeMap<String, f64>,
    /// Auxiliary quantities (fitted parameters, cross-checks).
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: CheckId,
    pub label: Option<String>,
    pub variant: Option<String>,
    pub hypothesis_values: Vec<HypothesisValue>,
    pub hypothesis_met: bool,
    /// Sides of the binding conclusion; absent when nothing was evaluated.
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub tolerance: f64,
    pub conclusions: Vec<ConclusionValue>,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

/// What a check computes before a verdict is attached.
pub(crate) struct Assessment {
    tolerance: f64,
    hypotheses: Vec<HypothesisValue>,
    conclusions: Vec<ConclusionValue>,
    diagnostics: Diagnostics,
    forced: Option<Verdict>,
}

impl Assessment {
    pub(crate) fn new(tolerance: f64) -> Self {
        Self { tolerance, hypotheses: Vec::new(), conclusions: Vec::new(), diagnostics: Diagnostics::default(), forced: None }
    }

    pub(crate) fn hypothesis(&mut self, name: &str, value: f64, required: Sign) -> &mut Self {
        self.hypotheses.push(HypothesisValue { name: name.to_owned(), value: bounded(value), required });
        self
    }

    /// A qualitative hypothesis, recorded as +1 when it holds and −1 otherwise.
    pub(crate) fn condition(&mut self, name: &str, holds: bool) -> &mut Self {
        self.hypothesis(name, if holds { 1.0 } else { -1.0 }, Sign::NonNegative)
    }

    /// lhs ≤ rhs.
    pub(crate) fn at_most(&mut self, name: &str, lhs: f64, rhs: f64, tolerance: f64) -> &mut Self {
        self.conclusions.push(ConclusionValue { name: name.to_owned(), lhs, rhs, slack: rhs - lhs, tolerance });
        self
    }

    /// lhs = rhs.
    pub(crate) fn equal(&mut self, name: &str, lhs: f64, rhs: f64, tolerance: f64) -> &mut Self {
        self.conclusions.push(ConclusionValue { name: name.to_owned(), lhs, rhs, slack: -(rhs - lhs).abs(), tolerance });
        self
    }

    pub(crate) fn error(&mut self, name: &str, r: &IntegralResult) -> &mut Self {
        self.diagnostics.quadrature_errors.insert(name.to_owned(), r.abs_error_estimate);
        self
    }

    pub(crate) fn std_error(&mut self, name: &str, se: f64) -> &mut Self {
        self.diagnostics.mc_std_errors.insert(name.to_owned(), se);
        self
    }

    pub(crate) fn value(&mut self, name: &str, v: f64) -> &mut Self {
        self.diagnostics.values.insert(name.to_owned(), bounded(v));
        self
    }

    pub(crate) fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.diagnostics.notes.push(text.into());
        self
    }

    pub(crate) fn force(&mut self, verdict: Verdict) -> &mut Self {
        self.forced = Some(verdict);
        self
    }

    pub(crate) fn hypothesis_met(&self) -> bool {
        self.hypotheses.iter().all(|h| h.required.satisfied(h.value, self.tolerance))
    }

    fn into_report(self, inst: &CheckInstance) -> CheckReport {
        let met = self.hypothesis_met();
        let binding = self
            .conclusions
            .iter()
            .min_by(|a, b| (a.slack + a.tolerance).total_cmp(&(b.slack + b.tolerance)))
            .cloned();
        let verdict = self.forced.unwrap_or(if !met {
            Verdict::HypothesisNotMet
        } else if self.conclusions.iter().all(ConclusionValue::holds) {
            Verdict::Pass
        } else {
            Verdict::Fail
        });
        CheckReport {
            check_id: inst.check_id,
            label: inst.label.clone(),
            variant: inst.variant.clone(),
            hypothesis_values: self.hypotheses,
            hypothesis_met: met,
            lhs: binding.as_ref().map(|c| c.lhs),
            rhs: binding.as_ref().map(|c| c.rhs),
            slack: binding.as_ref().map(|c| c.slack),
            tolerance: binding.as_ref().map_or(self.tolerance, |c| c.tolerance),
            conclusions: self.conclusions,
            verdict,
            diagnostics: self.diagnostics,
        }
    }
}

/// ±∞ mapped to ±f64::MAX so reports stay valid JSON.
fn bounded(v: f64) -> f64 {
    if v.is_infinite() {
        v.signum() * f64::MAX
    } else {
        v
    }
}

fn bare_report(inst: &CheckInstance, verdict: Verdict, note: String) -> CheckReport {
    let mut a = Assessment::new(0.0);
    a.note(note).force(verdict);
    let mut r = a.into_report(inst);
    r.hypothesis_met = false;
    r
}

/// Evaluate one check. Divergent entropies give a DIVERGENT report; input and
/// quadrature failures are errors.
pub fn run_check(inst: &CheckInstance) -> Result<CheckReport> {
    inst.spec.validate()?;
    inst.weight.validate()?;
    use CheckId::*;
    let outcome = match inst.check_id {
        Gibbs => univariate::gibbs(inst),
        UniformEstDiscrete => univariate::uniform_discrete(inst),
        UniformEstCont => univariate::uniform_continuous(inst),
        RelConvex => univariate::relative_convexity(inst),
        RelDpi => univariate::relative_data_processing(inst),
        Concavity => univariate::concavity(inst),
        Finiteness => univariate::finiteness(inst),
        Convergence => univariate::convergence(inst),
        SumIndep => univariate::sum_of_independent(inst),
        EntropyLb => univariate::entropy_lower_bound(inst),
        WeRelation => univariate::weighted_entropy_relation(inst),
        GiniLb => univariate::gini_lower_bound(inst),
        SurvIdentity => univariate::survival_identity(inst),
        FenchelUb => univariate::fenchel_upper_bound(inst),
        Logplus => univariate::log_plus(inst),
        CondNonneg => bivariate::conditional_nonnegative(inst),
        Subadd => bivariate::subadditivity(inst),
        SubaddChain => bivariate::subadditivity_chain(inst),
        StrongSubadd => bivariate::strong_subadditivity(inst),
        CondDpi => bivariate::conditional_data_processing(inst),
        MutualDpi => bivariate::mutual_data_processing(inst),
        MarginalSubadd => bivariate::marginal_subadditivity(inst),
        Decomp => bivariate::decomposition(inst),
        CrossLb => bivariate::cross_lower_bound(inst),
        MaxGeneric => maximum::generic(inst),
        MaxGauss => maximum::gaussian(inst),
        MaxExp => maximum::exponential(inst),
        KyFan => maximum::ky_fan(inst),
        Hadamard => maximum::hadamard(inst),
        MaxWeibull => maximum::weibull(inst),
        ChainConditioningReduces | ChainPairConditional | ChainConditionalSubadd | ChainStrongSubadd => {
            return Ok(bare_report(
                inst,
                Verdict::Unimplemented,
                "hypotheses of this member of the inequality chain are stated only in an external reference".into(),
            ));
        }
    };
    match outcome {
        Ok(a) => Ok(a.into_report(inst)),
        Err(Error::Divergent(msg)) => Ok(bare_report(inst, Verdict::Divergent, msg)),
        Err(e) => Err(e),
    }
}

/// A suite entry: the report, or the error that stopped the check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SuiteEntry {
    Report(CheckReport),
    Failed { check_id: CheckId, label: Option<String>, error: String, error_kind: String },
}

impl SuiteEntry {
    pub fn report(&self) -> Option<&CheckReport> {
        match self {
            Self::Report(r) => Some(r),
            Self::Failed { .. } => None,
        }
    }
}

/// Run every instance, `jobs` at a time (0 uses all cores). Entries keep the
/// input order and do not depend on `jobs`.
pub fn run_suite(instances: &[CheckInstance], jobs: usize) -> Result<Vec<SuiteEntry>> {
    let one = |inst: &CheckInstance| match run_check(inst) {
        Ok(r) => SuiteEntry::Report(r),
        Err(e) => SuiteEntry::Failed { check_id: inst.check_id, label: inst.label.clone(), error: e.to_string(), error_kind: e.kind().into() },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Input(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(|| instances.par_iter().map(one).collect()))
}

/// Integration nodes covering every model in `models` and the kinks of φ.
pub(crate) fn common_points(models: &[&dyn Lifetime], phi: &WeightFunction, spec: &QuadratureSpec) -> Vec<f64> {
    let cut = models.iter().map(|m| upper_cut(*m, spec)).fold(0.0, f64::max);
    let mut pts = Vec::new();
    for m in models {
        pts.extend(integration_points(*m, cut, &phi.breakpoints()));
    }
    pts.push(0.0);
    pts.push(cut);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// ∫ φ(x)·g(x) dx over the range covering `models`.
pub(crate) fn weighted_integral(models: &[&dyn Lifetime], phi: &WeightFunction, spec: &QuadratureSpec, g: &dyn Fn(f64) -> f64) -> Result<IntegralResult> {
    let pts = common_points(models, phi, spec);
    if pts.len() < 2 || pts[pts.len() - 1] <= 0.0 {
        return Ok(IntegralResult::zero());
    }
    integrate_pieces(
        &|x| {
            let v = g(x);
            if v == 0.0 {
                0.0
            } else {
                phi.value(x) * v
            }
        },
        &pts,
        spec,
    )
}

/// ∫ φ F̄.
pub(crate) fn weighted_sf_integral(m: &dyn Lifetime, phi: &WeightFunction, spec: &QuadratureSpec) -> Result<IntegralResult> {
    weighted_integral(&[m], phi, spec, &|x| m.sf(x))
}

/// Largest violation of monotonicity of φ on a probe grid: nondecreasing on
/// [0, e⁻¹] and nonincreasing on [e⁻¹, 1].
pub(crate) fn unimodality_violation(phi: &WeightFunction) -> f64 {
    let peak = (-1.0f64).exp();
    let rise = (0..=100).map(|i| phi.value(peak * i as f64 / 100.0));
    let fall = (0..=100).map(|i| phi.value(peak + (1.0 - peak) * i as f64 / 100.0));
    // largest drop after a higher earlier value, and largest gain after a lower one
    let drop = |vals: &mut dyn Iterator<Item = f64>| {
        let (mut top, mut worst) = (f64::NEG_INFINITY, 0.0f64);
        for v in vals {
            top = top.max(v);
            worst = worst.max(top - v);
        }
        worst
    };
    drop(&mut rise.into_iter()).max(drop(&mut fall.map(|v| -v)))
}
