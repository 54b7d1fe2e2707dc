//! The built-in suite of check instances.

use crate::joint::MultivariateModel;
use crate::kernel::StochasticKernel;
use crate::model::UnivariateModel;
use crate::weight::WeightFunction;

use super::{CheckId, CheckInstance, ModelInput};

fn exp(l: f64) -> UnivariateModel {
    UnivariateModel::exponential(l)
}

fn u(m: UnivariateModel) -> ModelInput {
    ModelInput::Univariate(m)
}

fn mv(m: MultivariateModel) -> ModelInput {
    ModelInput::Multivariate(m)
}

fn cov(c: &[[f64; 2]; 2]) -> ModelInput {
    ModelInput::Covariance(c.iter().map(|r| r.to_vec()).collect())
}

fn fgm(theta: f64) -> ModelInput {
    mv(MultivariateModel::fgm(theta, exp(1.0), exp(2.0)))
}

fn chain(a: f64, b: f64) -> ModelInput {
    mv(MultivariateModel::fgm_chain(a, b, [exp(1.0), exp(2.0), exp(1.5)]))
}

fn fgm3(theta_13: f64) -> ModelInput {
    mv(MultivariateModel::Fgm3 { theta_12: 0.3, theta_13, theta_23: 0.3, theta_123: 0.0, marginals: vec![exp(1.0), exp(2.0), exp(1.5)] })
}

fn inst(id: CheckId, label: &str, models: Vec<ModelInput>) -> CheckInstance {
    CheckInstance::new(id, models).labelled(label)
}

fn unit_power() -> WeightFunction {
    WeightFunction::power(1.0)
}

/// One or more instances of every implemented check, covering passing,
/// tight and hypothesis-violating cases.
pub fn default_catalog() -> Vec<CheckInstance> {
    use CheckId::*;
    let tabulated_ramp = WeightFunction::Tabulated { knots: vec![(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)] };
    let floor_weight = WeightFunction::Tabulated { knots: vec![(0.0, 1.0), (1.0, 1.5), (3.0, 2.0)] };
    let smoothing = ModelInput::Kernel(StochasticKernel::GaussianSmoothing { bandwidth: 0.5 });
    let grid_kernel = ModelInput::Kernel(StochasticKernel::GridMatrix {
        edges: vec![0.0, 0.5, 1.0, 2.0, 4.0],
        matrix: vec![vec![0.7, 0.2, 0.1, 0.0], vec![0.1, 0.7, 0.1, 0.1], vec![0.0, 0.2, 0.6, 0.2], vec![0.0, 0.0, 0.3, 0.7]],
    });
    let trivariate_independent = mv(MultivariateModel::independent(vec![exp(1.0), exp(2.0), exp(1.5)]));

    vec![
        inst(Gibbs, "exp1_vs_exp2", vec![u(exp(1.0)), u(exp(2.0))]),
        inst(Gibbs, "equal_laws", vec![u(exp(1.5)), u(exp(1.5))]),
        inst(Gibbs, "reversed", vec![u(exp(2.0)), u(exp(1.0))]),
        inst(Gibbs, "exp1_vs_exp2_power", vec![u(exp(1.0)), u(exp(2.0))]).with_weight(unit_power()),
        inst(UniformEstDiscrete, "increasing", vec![ModelInput::Discrete { probs: vec![0.1, 0.2, 0.3, 0.4] }]),
        inst(UniformEstDiscrete, "uniform", vec![ModelInput::Discrete { probs: vec![0.25; 4] }]),
        inst(UniformEstDiscrete, "beta_one", vec![ModelInput::Discrete { probs: vec![0.1, 0.2, 0.3, 0.4] }]).with_param("beta", 1.0),
        inst(UniformEstCont, "uniform_0_2", vec![u(UnivariateModel::uniform(0.0, 2.0))]).with_param("alpha", 0.9).with_param("beta", 0.45),
        inst(UniformEstCont, "uniform_0_1", vec![u(UnivariateModel::uniform(0.0, 1.0))]).with_param("alpha", 1.0).with_param("beta", 1.0),
        inst(UniformEstCont, "steep_line", vec![u(UnivariateModel::uniform(0.0, 2.0))]).with_param("alpha", 1.2).with_param("beta", 0.5),
        inst(CondNonneg, "fgm_positive", vec![fgm(0.5)]),
        inst(CondNonneg, "fgm_negative", vec![fgm(-0.5)]),
        inst(CondNonneg, "chain", vec![chain(0.5, 0.3)]),
        inst(CondNonneg, "vanishing_weight", vec![fgm(0.5)]).with_axis_weights(vec![WeightFunction::constant(0.0), WeightFunction::unit()]),
        inst(Subadd, "fgm_positive", vec![fgm(0.5)]),
        inst(Subadd, "fgm_negative", vec![fgm(-0.5)]),
        inst(Subadd, "independent", vec![fgm(0.0)]),
        inst(SubaddChain, "positive", vec![chain(0.5, 0.3)]),
        inst(SubaddChain, "negative", vec![chain(-0.5, 0.3)]),
        inst(SubaddChain, "independent_pair", vec![chain(0.0, 0.3)]),
        inst(StrongSubadd, "chain", vec![chain(0.5, 0.3)]),
        inst(StrongSubadd, "fgm3_positive", vec![fgm3(0.4)]),
        inst(StrongSubadd, "fgm3_negative", vec![fgm3(-0.4)]),
        inst(RelConvex, "exponential_pairs", vec![u(exp(1.0)), u(exp(2.0)), u(exp(0.5)), u(exp(1.5))]).with_param("lambda1", 0.3),
        inst(RelConvex, "gamma_weibull", vec![u(UnivariateModel::gamma(2.0, 0.5)), u(exp(1.0)), u(UnivariateModel::weibull(1.0, 2.0)), u(exp(2.0))])
            .with_weight(unit_power()),
        inst(RelConvex, "shared_pair", vec![u(exp(1.0)), u(exp(2.0)), u(exp(1.0)), u(exp(2.0))]),
        inst(RelDpi, "smoothing", vec![u(exp(1.0)), u(exp(2.0)), smoothing]),
        inst(RelDpi, "grid_kernel", vec![u(exp(1.0)), u(UnivariateModel::gamma(2.0, 0.5)), grid_kernel]),
        inst(RelDpi, "equal_laws", vec![u(exp(1.0)), u(exp(1.0)), ModelInput::Kernel(StochasticKernel::GaussianSmoothing { bandwidth: 0.5 })]),
        inst(CondDpi, "positive", vec![chain(0.4, 0.4)]),
        inst(CondDpi, "negative", vec![chain(0.4, -0.4)]),
        inst(CondDpi, "independent_tail", vec![chain(0.4, 0.0)]),
        inst(CondDpi, "factor_two", vec![chain(0.5, 0.3)]).with_variant("factor_two"),
        inst(MutualDpi, "positive", vec![chain(0.4, 0.4)]),
        inst(MutualDpi, "negative", vec![chain(-0.4, 0.4)]),
        inst(MutualDpi, "independent_head", vec![chain(0.0, 0.4)]),
        inst(Concavity, "constant_weight", vec![u(exp(1.0)), u(UnivariateModel::gamma(2.0, 0.5))]),
        inst(Concavity, "power_weight", vec![u(exp(1.0)), u(exp(2.0))]).with_weight(unit_power()),
        inst(Concavity, "equal_laws", vec![u(exp(1.0)), u(exp(1.0))]),
        inst(Finiteness, "exponential", vec![u(exp(1.0))]),
        inst(Finiteness, "growing_weight", vec![u(exp(1.0))]).with_weight(WeightFunction::exponential(-2.0)),
        inst(Finiteness, "power_weight", vec![u(exp(1.0))]).with_weight(unit_power()),
        inst(Convergence, "weibull_shapes", vec![u(exp(1.0))]),
        inst(Convergence, "weibull_shapes_power", vec![u(exp(1.0))]).with_weight(unit_power()),
        inst(Convergence, "empirical", vec![u(exp(1.0))]).with_variant("empirical"),
        inst(SumIndep, "exp_gamma", vec![u(exp(1.0)), u(UnivariateModel::gamma(2.0, 0.5))]),
        inst(SumIndep, "exp_gamma_power", vec![u(exp(1.0)), u(UnivariateModel::gamma(2.0, 0.5))]).with_weight(unit_power()),
        inst(SumIndep, "point_mass", vec![u(exp(1.0)), u(UnivariateModel::point_mass(0.0).expect("valid point mass"))]),
        inst(Decomp, "independent_pair", vec![fgm(0.0)]),
        inst(Decomp, "independent_pair_power", vec![mv(MultivariateModel::independent(vec![exp(1.0), UnivariateModel::gamma(2.0, 0.5)]))])
            .with_weight(unit_power()),
        inst(EntropyLb, "exponential", vec![u(exp(1.0))]),
        inst(EntropyLb, "gamma_power", vec![u(UnivariateModel::gamma(2.0, 0.5))]).with_weight(unit_power()),
        inst(EntropyLb, "weibull", vec![u(UnivariateModel::weibull(1.0, 2.0))]),
        inst(EntropyLb, "uniform_power", vec![u(UnivariateModel::uniform(0.0, 2.0))]).with_weight(WeightFunction::power(0.5)),
        inst(EntropyLb, "vanishing_weight", vec![u(exp(1.0))]).with_weight(tabulated_ramp),
        inst(EntropyLb, "conditional", vec![fgm(0.5)]).with_variant("conditional"),
        inst(CrossLb, "fgm", vec![fgm(0.3)]),
        inst(CrossLb, "fgm_weight_above_one", vec![fgm(0.3)]).with_weight(floor_weight),
        inst(CrossLb, "power_weight", vec![fgm(0.3)]).with_weight(unit_power()),
        inst(WeRelation, "exponential_power", vec![u(exp(1.0))]).with_weight(unit_power()),
        inst(WeRelation, "gamma_square", vec![u(UnivariateModel::gamma(2.0, 0.5))]).with_weight(WeightFunction::power(2.0)),
        inst(WeRelation, "weibull_constant", vec![u(UnivariateModel::weibull(1.0, 2.0))]).with_weight(WeightFunction::constant(2.0)),
        inst(GiniLb, "exponential", vec![u(exp(1.0))]),
        inst(GiniLb, "gamma_power", vec![u(UnivariateModel::gamma(2.0, 0.5))]).with_weight(unit_power()),
        inst(SurvIdentity, "exponential_power", vec![u(exp(1.0))]).with_weight(unit_power()),
        inst(SurvIdentity, "weibull", vec![u(UnivariateModel::weibull(1.0, 2.0))]),
        inst(SurvIdentity, "uniform_square", vec![u(UnivariateModel::uniform(0.0, 2.0))]).with_weight(WeightFunction::power(2.0)),
        inst(FenchelUb, "exponential", vec![u(exp(1.0))]),
        inst(FenchelUb, "gamma_power", vec![u(UnivariateModel::gamma(2.0, 0.5))]).with_weight(unit_power()),
        inst(Logplus, "exponential_power", vec![u(exp(1.0))]).with_weight(unit_power()),
        inst(Logplus, "gamma_power", vec![u(UnivariateModel::gamma(2.0, 0.5))]).with_weight(unit_power()),
        inst(MaxGeneric, "uniform_vs_exponential", vec![u(UnivariateModel::uniform(0.0, 2.1)), u(exp(1.0))]),
        inst(MaxGeneric, "exp2_vs_exp1", vec![u(exp(2.0)), u(exp(1.0))]),
        inst(MaxGeneric, "equal_laws", vec![u(exp(1.0)), u(exp(1.0))]),
        inst(MaxGauss, "narrow_gaussian", vec![u(UnivariateModel::gaussian(5.1, 0.8)), u(UnivariateModel::gaussian(5.0, 1.0))]),
        inst(MaxGauss, "exponential", vec![u(exp(0.2)), u(UnivariateModel::gaussian(5.0, 1.0))]),
        inst(MaxGauss, "equal_laws", vec![u(UnivariateModel::gaussian(5.0, 1.0)), u(UnivariateModel::gaussian(5.0, 1.0))]),
        inst(MaxExp, "uniform", vec![u(UnivariateModel::uniform(0.0, 2.0))]),
        inst(MaxExp, "weibull", vec![u(UnivariateModel::weibull(1.0, 2.0))]),
        inst(MaxExp, "gamma", vec![u(UnivariateModel::gamma(2.0, 0.5))]),
        inst(MaxExp, "exponential", vec![u(exp(1.3))]),
        inst(MaxExp, "heavy_gamma", vec![u(UnivariateModel::gamma(0.5, 2.0))]),
        inst(KyFan, "equal_covariances", vec![cov(&[[1.0, 0.3], [0.3, 2.0]]), cov(&[[1.0, 0.3], [0.3, 2.0]])]),
        inst(KyFan, "endpoint", vec![cov(&[[1.0, 0.3], [0.3, 2.0]]), cov(&[[1.5, -0.2], [-0.2, 1.0]])]).with_param("lambda1", 1.0),
        inst(KyFan, "correlated_vs_identity", vec![cov(&[[1.0, 0.9], [0.9, 1.0]]), cov(&[[1.0, 0.0], [0.0, 1.0]])]),
        inst(KyFan, "entropy_form", vec![cov(&[[3.972, 1.192], [1.192, 0.634]]), cov(&[[3.051, -1.237], [-1.237, 4.029]])]).with_variant("wcre"),
        inst(MarginalSubadd, "fgm_positive", vec![fgm(0.5)]),
        inst(MarginalSubadd, "fgm_negative", vec![fgm(-0.5)]),
        inst(MarginalSubadd, "trivariate_independent", vec![trivariate_independent]),
        inst(Hadamard, "diagonal", vec![cov(&[[1.0, 0.0], [0.0, 2.0]])]),
        inst(Hadamard, "positive", vec![cov(&[[1.0, 0.5], [0.5, 1.0]])]),
        inst(Hadamard, "negative", vec![cov(&[[1.0, -0.5], [-0.5, 1.0]])]),
        inst(MaxWeibull, "weibull", vec![u(UnivariateModel::weibull(1.0, 2.0))]),
        inst(MaxWeibull, "gamma", vec![u(UnivariateModel::gamma(2.0, 0.5))]),
        inst(MaxWeibull, "power_weight", vec![u(UnivariateModel::weibull(1.0, 2.0))]).with_weight(unit_power()),
    ]
}
