//! Joint, conditional and mutual WCRE of random vectors (n ≤ 3) by tensor-grid
//! quadrature, the weights derived from conditional survival functions, and the
//! Gaussian orthant constants.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::joint::{determinant, gaussian_upper, check_covariance, MultivariateModel};
use crate::model::{upper_cut, Lifetime};
use crate::quadrature::{integrate_pieces, Axis, IntegralResult, QuadratureSpec};
use crate::univariate::{neg_s_log_s, wce, wcre, EntropyValue};
use crate::weight::WeightFunction;

/// φ(x⃗) = ∏ φᵢ(xᵢ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductWeight(pub Vec<WeightFunction>);

impl ProductWeight {
    /// `phi` on the first coordinate and 1 on the others; a constant c gives φ ≡ c.
    pub fn broadcast(phi: &WeightFunction, n: usize) -> Self {
        let mut factors = vec![WeightFunction::unit(); n];
        factors[0] = phi.clone();
        Self(factors)
    }

    pub fn unit(n: usize) -> Self {
        Self(vec![WeightFunction::unit(); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return domain(format!("product weight has {} factors for dimension {n}", self.0.len()));
        }
        self.0.iter().try_for_each(|w| w.validate())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(w, v)| w.value(*v)).product()
    }

    /// The weight with one factor multiplied by `c`, when that is expressible.
    pub fn scaled(&self, c: f64) -> Option<Self> {
        let mut out = self.clone();
        let k = out.0.iter().position(|w| w.scaled(c).is_some())?;
        out.0[k] = out.0[k].scaled(c)?;
        Some(out)
    }
}

struct Level {
    nodes: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    phi: Vec<Vec<f64>>,
    /// [model][axis][node] marginal survival values.
    sf: Vec<Vec<Vec<f64>>>,
}

/// Integrand evaluation context at one grid node.
pub struct GridPoint<'a> {
    pub x: &'a [f64],
    s: &'a [[f64; 3]],
    models: &'a [&'a MultivariateModel],
}

impl GridPoint<'_> {
    fn dim(&self) -> usize {
        self.x.len()
    }

    /// Joint sf of the first model.
    pub fn sf(&self) -> f64 {
        self.sf_in(0)
    }

    pub fn sf_in(&self, k: usize) -> f64 {
        self.models[k].sf_from_marginals(self.x, &self.s[k][..self.dim()])
    }

    /// Sub-vector sf of the first model; an empty set gives 1.
    pub fn sub_sf(&self, coords: &[usize]) -> f64 {
        self.sub_sf_in(0, coords)
    }

    pub fn sub_sf_in(&self, k: usize, coords: &[usize]) -> f64 {
        self.models[k].sf_of(coords, self.x, &self.s[k][..self.dim()])
    }

    pub fn marginal_sf(&self, i: usize) -> f64 {
        self.s[0][i]
    }

    pub fn cdf(&self) -> f64 {
        self.models[0].cdf_from_marginals(self.x, &self.s[0][..self.dim()])
    }
}

/// Full and half resolution tensor grids over the box covering a set of models
/// with a common dimension.
pub struct Field<'a> {
    models: Vec<&'a MultivariateModel>,
    full: Level,
    half: Level,
    truncation: Vec<f64>,
}

impl<'a> Field<'a> {
    pub fn new(models: &[&'a MultivariateModel], w: &ProductWeight, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let n = models.first().map(|m| m.dim()).ok_or_else(|| Error::Input("no model given".into()))?;
        if !(2..=3).contains(&n) || models.iter().any(|m| m.dim() != n) {
            return domain("grid integrals need models of a common dimension 2 or 3");
        }
        w.validate(n)?;
        let mut axes = Vec::with_capacity(n);
        for i in 0..n {
            let mut hi: f64 = 0.0;
            let mut breaks = w.0[i].breakpoints();
            for m in models {
                let marg = m.marginal(i);
                hi = hi.max(upper_cut(&marg, spec));
                breaks.push(marg.support().0);
                breaks.extend(marg.breakpoints());
                breaks.extend(marg.atoms().into_iter().map(|a| a.0));
            }
            axes.push(Axis::finite(0.0, hi).with_breaks(breaks.into_iter().filter(|b| b.is_finite())));
        }
        let level = |points: usize| {
            let rules: Vec<(Vec<f64>, Vec<f64>)> = axes.iter().map(|a| a.rule(points)).collect();
            let phi = rules.iter().enumerate().map(|(i, r)| r.0.iter().map(|x| w.0[i].value(*x)).collect()).collect();
            let sf = models
                .iter()
                .map(|m| (0..n).map(|i| {
                    let marg = m.marginal(i);
                    rules[i].0.iter().map(|x| marg.sf(*x)).collect()
                }).collect())
                .collect();
            let (nodes, weights) = rules.into_iter().unzip();
            Level { nodes, weights, phi, sf }
        };
        Ok(Self {
            models: models.to_vec(),
            full: level(spec.grid_points_per_dim),
            half: level(spec.grid_points_per_dim / 2),
            truncation: axes.iter().map(|a| a.hi).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.full.nodes.len()
    }

    /// Node coordinates of axis `i` at full resolution.
    pub fn nodes(&self, i: usize) -> &[f64] {
        &self.full.nodes[i]
    }

    fn sum<const K: usize>(&self, level: &Level, f: &(dyn Fn(&GridPoint) -> [f64; K] + Sync), bad: &AtomicU64) -> [f64; K] {
        let n = self.dim();
        let nm = self.models.len();
        let outer = level.nodes[0].len();
        let partials: Vec<[f64; K]> = (0..outer)
            .into_par_iter()
            .map(|a| {
                let mut acc = [0.0; K];
                let mut x = [0.0; 3];
                let mut s = vec![[1.0; 3]; nm];
                x[0] = level.nodes[0][a];
                for k in 0..nm {
                    s[k][0] = level.sf[k][0][a];
                }
                let w0 = level.weights[0][a] * level.phi[0][a];
                if w0 == 0.0 {
                    return acc;
                }
                let mut visit = |x: &[f64], s: &[[f64; 3]], wt: f64| {
                    if wt == 0.0 {
                        return;
                    }
                    let p = GridPoint { x, s, models: &self.models };
                    let v = f(&p);
                    for (acc_i, v_i) in acc.iter_mut().zip(v) {
                        if v_i.is_finite() {
                            *acc_i += wt * v_i;
                        } else {
                            bad.store(x[0].to_bits(), Ordering::Relaxed);
                        }
                    }
                };
                for b in 0..level.nodes[1].len() {
                    x[1] = level.nodes[1][b];
                    for k in 0..nm {
                        s[k][1] = level.sf[k][1][b];
                    }
                    let w01 = w0 * level.weights[1][b] * level.phi[1][b];
                    if n == 2 {
                        visit(&x[..2], &s, w01);
                        continue;
                    }
                    for c in 0..level.nodes[2].len() {
                        x[2] = level.nodes[2][c];
                        for k in 0..nm {
                            s[k][2] = level.sf[k][2][c];
                        }
                        visit(&x[..3], &s, w01 * level.weights[2][c] * level.phi[2][c]);
                    }
                }
                acc
            })
            .collect();
        let mut total = [0.0; K];
        for p in &partials {
            for (t, v) in total.iter_mut().zip(p) {
                *t += v;
            }
        }
        total
    }

    /// ∫ φ(x⃗)·f(x⃗) for K integrands at once; errors are full/half differences.
    pub fn integrate<const K: usize>(&self, f: &(dyn Fn(&GridPoint) -> [f64; K] + Sync)) -> Result<[IntegralResult; K]> {
        let bad = AtomicU64::new(f64::NAN.to_bits());
        let full = self.sum(&self.full, f, &bad);
        let half = self.sum(&self.half, f, &bad);
        let x = f64::from_bits(bad.load(Ordering::Relaxed));
        if !x.is_nan() {
            return Err(Error::Integrand { x });
        }
        let count: usize = self.full.nodes.iter().map(|a| a.len()).product();
        let cut = self.truncation.iter().copied().reduce(f64::max);
        Ok(std::array::from_fn(|k| IntegralResult {
            value: full[k],
            abs_error_estimate: (full[k] - half[k]).abs(),
            subdivisions_used: count,
            truncation_point: cut,
        }))
    }

    pub fn integrate_one(&self, f: &(dyn Fn(&GridPoint) -> f64 + Sync)) -> Result<IntegralResult> {
        Ok(self.integrate(&|p: &GridPoint| [f(p)])?[0])
    }
}

/// Weighted integral of one model: ∫ φ f over the model's grid.
pub fn grid_integral(m: &MultivariateModel, w: &ProductWeight, spec: &QuadratureSpec, f: &(dyn Fn(&GridPoint) -> f64 + Sync)) -> Result<IntegralResult> {
    m.validate()?;
    Field::new(&[m], w, spec)?.integrate_one(f)
}

/// Marginal divergence screen: each axis functional must be finite in 1-D.
pub(crate) fn screen_axes(m: &MultivariateModel, w: &ProductWeight, spec: &QuadratureSpec, residual: bool) -> Result<()> {
    for (i, phi) in w.0.iter().enumerate() {
        if phi.as_constant().is_some() {
            continue;
        }
        let marg = m.marginal(i);
        let r = if residual { wcre(&marg, phi, spec) } else { wce(&marg, phi, spec) };
        match r {
            Err(Error::Divergent(msg)) => return Err(Error::Divergent(format!("axis {i}: {msg}"))),
            Err(e) => return Err(e),
            Ok(_) => {}
        }
    }
    Ok(())
}

fn entropy(r: IntegralResult) -> EntropyValue {
    EntropyValue { value: r.value, quadrature: r, finite: None }
}

/// −∫ φ F̄ log F̄ over the nonnegative orthant.
pub fn joint_wcre(m: &MultivariateModel, w: &ProductWeight, spec: &QuadratureSpec) -> Result<EntropyValue> {
    m.validate()?;
    w.validate(m.dim())?;
    screen_axes(m, w, spec, true)?;
    grid_integral(m, w, spec, &|p| neg_s_log_s(p.sf())).map(entropy)
}

/// −∫ φ F log F with F the joint CDF.
pub fn joint_wce(m: &MultivariateModel, w: &ProductWeight, spec: &QuadratureSpec) -> Result<EntropyValue> {
    m.validate()?;
    w.validate(m.dim())?;
    screen_axes(m, w, spec, false)?;
    grid_integral(m, w, spec, &|p| neg_s_log_s(p.cdf())).map(entropy)
}

/// ∫ φ F̄ log(∏ F̄_num / ∏ F̄_den), each factor the sf of a coordinate subset.
pub fn log_ratio_integral(m: &MultivariateModel, w: &ProductWeight, num: &[&[usize]], den: &[&[usize]], spec: &QuadratureSpec) -> Result<IntegralResult> {
    grid_integral(m, w, spec, &|p| log_ratio_term(p, 0, num, den))
}

/// F̄ · log(∏ F̄_num / ∏ F̄_den) at one node of model `k`, zero where F̄ vanishes.
pub fn log_ratio_term(p: &GridPoint, k: usize, num: &[&[usize]], den: &[&[usize]]) -> f64 {
    let s = p.sf_in(k);
    if !(s > 0.0) {
        return 0.0;
    }
    let a: f64 = num.iter().map(|c| p.sub_sf_in(k, c)).product();
    let b: f64 = den.iter().map(|c| p.sub_sf_in(k, c)).product();
    if a == b {
        return 0.0;
    }
    if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
        let r = a / b;
        if r.is_normal() {
            return s * r.ln();
        }
    }
    let la: f64 = num.iter().map(|c| p.sub_sf_in(k, c).ln()).sum();
    let lb: f64 = den.iter().map(|c| p.sub_sf_in(k, c).ln()).sum();
    s * (la - lb)
}

/// −∫ φ F̄ log(F̄/F̄₂): WCRE of X₁ given X₂.
pub fn conditional_wcre(m: &MultivariateModel, w: &ProductWeight, spec: &QuadratureSpec) -> Result<f64> {
    if m.dim() != 2 {
        return domain("conditional WCRE needs a bivariate model");
    }
    Ok(-log_ratio_integral(m, w, &[&[0, 1]], &[&[1]], spec)?.value)
}

/// τ = ∫ φ F̄ log(F̄ / ∏ F̄ᵢ).
pub fn mutual_wcre(m: &MultivariateModel, w: &ProductWeight, spec: &QuadratureSpec) -> Result<f64> {
    let all: Vec<usize> = (0..m.dim()).collect();
    let singles: Vec<[usize; 1]> = (0..m.dim()).map(|i| [i]).collect();
    let den: Vec<&[usize]> = singles.iter().map(|s| s.as_slice()).collect();
    Ok(log_ratio_integral(m, w, &[&all], &den, spec)?.value)
}

/// Which conditional sf is integrated out of φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reduction", rename_all = "snake_case")]
pub enum Reduction {
    /// ψᵢ(xᵢ) = ∫ φ F̄(x⃗)/F̄ᵢ(xᵢ) over the other coordinates.
    PsiI { i: usize },
    /// ψᵢⱼ(xᵢ, xⱼ) = ∫ φ F̄(x⃗)/F̄ᵢⱼ(xᵢ, xⱼ) over the remaining coordinate.
    PsiIj { i: usize, j: usize },
    /// ψᵢ over all the other coordinates of a trivariate model (the same table as
    /// `PsiI` there).
    PsiIRest { i: usize },
}

impl Reduction {
    pub fn kept(&self) -> Vec<usize> {
        match self {
            Self::PsiI { i } | Self::PsiIRest { i } => vec![*i],
            Self::PsiIj { i, j } => vec![*i, *j],
        }
    }
}

/// A derived weight tabulated on the parent grid nodes of the kept coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedWeight {
    pub reduction: Reduction,
    pub kept: Vec<usize>,
    /// Full-resolution parent nodes and quadrature weights per kept axis.
    pub nodes: Vec<Vec<f64>>,
    pub node_weights: Vec<Vec<f64>>,
    /// Row-major over the kept axes.
    pub values: Vec<f64>,
}

impl DerivedWeight {
    pub fn at(&self, idx: &[usize]) -> f64 {
        match idx.len() {
            1 => self.values[idx[0]],
            _ => self.values[idx[0] * self.nodes[1].len() + idx[1]],
        }
    }

    /// −∫ ψ F̄_S log F̄_S over the kept coordinates S on the parent nodes.
    pub fn entropy(&self, m: &MultivariateModel) -> f64 {
        let n = m.dim();
        let marg: Vec<_> = (0..n).map(|i| m.marginal(i)).collect();
        let mut x = vec![0.0; n];
        let mut s = vec![1.0; n];
        let mut total = 0.0;
        let mut visit = |idx: &[usize], wt: f64, x: &mut Vec<f64>, s: &mut Vec<f64>| {
            for (a, axis) in self.kept.iter().enumerate() {
                x[*axis] = self.nodes[a][idx[a]];
                s[*axis] = marg[*axis].sf(x[*axis]);
            }
            total += wt * self.at(idx) * neg_s_log_s(m.sf_of(&self.kept, x, s));
        };
        match self.kept.len() {
            1 => {
                for a in 0..self.nodes[0].len() {
                    visit(&[a], self.node_weights[0][a], &mut x, &mut s);
                }
            }
            _ => {
                for a in 0..self.nodes[0].len() {
                    for b in 0..self.nodes[1].len() {
                        visit(&[a, b], self.node_weights[0][a] * self.node_weights[1][b], &mut x, &mut s);
                    }
                }
            }
        }
        total
    }
}

/// Tabulates ψ for `reduction` on the full-resolution parent grid.
pub fn derived_weight(m: &MultivariateModel, w: &ProductWeight, reduction: Reduction, spec: &QuadratureSpec) -> Result<DerivedWeight> {
    m.validate()?;
    let n = m.dim();
    let kept = reduction.kept();
    let ok = match reduction {
        Reduction::PsiI { i } => i < n,
        Reduction::PsiIRest { i } => n == 3 && i < n,
        Reduction::PsiIj { i, j } => n == 3 && i < n && j < n && i != j,
    };
    if !ok {
        return domain(format!("reduction {reduction:?} does not fit dimension {n}"));
    }
    let field = Field::new(&[m], w, spec)?;
    let level = &field.full;
    let rest: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
    let shape: Vec<usize> = kept.iter().map(|k| level.nodes[*k].len()).collect();
    let cells: usize = shape.iter().product();
    let values: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|flat| {
            let idx = if shape.len() == 1 { vec![flat] } else { vec![flat / shape[1], flat % shape[1]] };
            let mut x = vec![0.0; n];
            let mut s = vec![1.0; n];
            let mut wk = 1.0;
            for (a, axis) in kept.iter().enumerate() {
                x[*axis] = level.nodes[*axis][idx[a]];
                s[*axis] = level.sf[0][*axis][idx[a]];
                wk *= level.phi[*axis][idx[a]];
            }
            let denom = m.sf_of(&kept, &x, &s);
            if wk == 0.0 || denom <= 0.0 {
                return 0.0;
            }
            let mut total = 0.0;
            let mut inner = |x: &mut Vec<f64>, s: &mut Vec<f64>, counters: &[usize]| {
                let mut wt = wk;
                for (r, axis) in rest.iter().enumerate() {
                    x[*axis] = level.nodes[*axis][counters[r]];
                    s[*axis] = level.sf[0][*axis][counters[r]];
                    wt *= level.weights[*axis][counters[r]] * level.phi[*axis][counters[r]];
                }
                if wt != 0.0 {
                    total += wt * m.sf_from_marginals(x, s) / denom;
                }
            };
            match rest.len() {
                1 => {
                    for c in 0..level.nodes[rest[0]].len() {
                        inner(&mut x, &mut s, &[c]);
                    }
                }
                _ => {
                    for c in 0..level.nodes[rest[0]].len() {
                        for d in 0..level.nodes[rest[1]].len() {
                            inner(&mut x, &mut s, &[c, d]);
                        }
                    }
                }
            }
            total
        })
        .collect();
    Ok(DerivedWeight {
        reduction,
        nodes: kept.iter().map(|k| level.nodes[*k].clone()).collect(),
        node_weights: kept.iter().map(|k| level.weights[*k].clone()).collect(),
        kept,
        values,
    })
}

/// E_{ψ_S}(X_S) = −∫ φ F̄ log F̄_S, the entropy of the sub-vector on `coords`
/// under its derived weight, evaluated on the parent grid.
pub fn derived_entropy(m: &MultivariateModel, w: &ProductWeight, coords: &[usize], spec: &QuadratureSpec) -> Result<f64> {
    Ok(-log_ratio_integral(m, w, &[coords], &[], spec)?.value)
}

/// (2π)^{n/2} (det C)^{1/2} P(Z > x), the unnormalised Gaussian orthant integral.
pub fn gaussian_alpha_star(mean: &[f64], cov: &[Vec<f64>], x: &[f64]) -> Result<f64> {
    Ok(gaussian_rho(mean, cov, x)? * gaussian_normaliser(cov)?)
}

/// P(Z > x) for Z ~ N(mean, cov).
pub fn gaussian_rho(mean: &[f64], cov: &[Vec<f64>], x: &[f64]) -> Result<f64> {
    let n = mean.len();
    if !(1..=3).contains(&n) || x.len() != n {
        return domain(format!("Gaussian orthants need 1 to 3 coordinates, got {n}"));
    }
    check_covariance(cov, n)?;
    Ok(gaussian_upper(mean, cov, x))
}

/// (2π)^{n/2} (det C)^{1/2}.
pub fn gaussian_normaliser(cov: &[Vec<f64>]) -> Result<f64> {
    let n = cov.len() as f64;
    Ok((2.0 * std::f64::consts::PI).powf(n / 2.0) * determinant(cov)?.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub total: f64,
    pub parts: Vec<f64>,
}

/// Σᵢ (∏_{j≠i} ∫φⱼF̄ⱼ)·E_{φᵢ}(Xᵢ) for an independent model and product weight.
pub fn independent_decomposition(m: &MultivariateModel, w: &ProductWeight, spec: &QuadratureSpec) -> Result<Decomposition> {
    m.validate()?;
    w.validate(m.dim())?;
    if !m.is_independent() {
        return domain("decomposition needs independent components");
    }
    let n = m.dim();
    let mut factor = Vec::with_capacity(n);
    let mut own = Vec::with_capacity(n);
    for i in 0..n {
        let marg = m.marginal(i);
        let phi = &w.0[i];
        let cut = upper_cut(&marg, spec);
        let mut pts = crate::model::integration_points(&marg, cut, &phi.breakpoints());
        if pts.len() < 2 {
            pts = vec![0.0, cut.max(0.0)];
        }
        factor.push(integrate_pieces(&|x| phi.value(x) * marg.sf(x), &pts, spec)?.value);
        own.push(wcre(&marg, phi, spec)?.value);
    }
    let parts: Vec<f64> = (0..n).map(|i| own[i] * (0..n).filter(|j| *j != i).map(|j| factor[j]).product::<f64>()).collect();
    Ok(Decomposition { total: parts.iter().sum(), parts })
}
