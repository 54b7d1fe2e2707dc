//! Stochastic kernels Π(u, x) on the nonnegative reals and the two sides of the
//! data-processing inequality for the relative WCRE.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{integration_points, upper_cut, Lifetime};
use crate::quadrature::{integrate_pieces, QuadratureSpec};
use crate::special::{normal_pdf, normal_sf};
use crate::weight::WeightFunction;

/// Half-width of the Gaussian smoothing window in bandwidths.
const WINDOW: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StochasticKernel {
    /// Normal density centred at u with standard deviation `bandwidth`,
    /// truncated to [0, ∞) and renormalised.
    GaussianSmoothing { bandwidth: f64 },
    /// Cells [edges[i], edges[i+1]); row i gives the probabilities of moving from
    /// cell i to each cell, spread uniformly within the target cell. Points beyond
    /// the last edge use the last row.
    GridMatrix { edges: Vec<f64>, matrix: Vec<Vec<f64>> },
}

impl StochasticKernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::GaussianSmoothing { bandwidth } => {
                if !(*bandwidth > 0.0 && bandwidth.is_finite()) {
                    return domain(format!("kernel bandwidth must be positive, got {bandwidth}"));
                }
            }
            Self::GridMatrix { edges, matrix } => {
                let m = edges.len().saturating_sub(1);
                if m == 0 || edges[0] != 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) || !edges[m].is_finite() {
                    return domain("kernel grid edges must start at 0 and increase strictly");
                }
                if matrix.len() != m || matrix.iter().any(|r| r.len() != m) {
                    return domain(format!("kernel matrix must be {m}x{m}"));
                }
                for (i, row) in matrix.iter().enumerate() {
                    if row.iter().any(|p| !(*p >= 0.0)) {
                        return domain(format!("kernel row {i} has a negative entry"));
                    }
                    let total: f64 = row.iter().sum();
                    if (total - 1.0).abs() > 1e-6 {
                        return domain(format!("kernel row {i} sums to {total}"));
                    }
                }
            }
        }
        Ok(())
    }

    fn cell(edges: &[f64], t: f64) -> Option<usize> {
        let m = edges.len() - 1;
        if t < 0.0 {
            None
        } else if t >= edges[m] {
            Some(m - 1)
        } else {
            Some(edges.partition_point(|e| *e <= t) - 1)
        }
    }

    /// Π(u, x).
    pub fn density(&self, u: f64, x: f64) -> f64 {
        if x < 0.0 || u < 0.0 {
            return 0.0;
        }
        match self {
            Self::GaussianSmoothing { bandwidth: h } => normal_pdf((x - u) / h) / (h * normal_sf(-u / h)),
            Self::GridMatrix { edges, matrix } => {
                let m = edges.len() - 1;
                if x >= edges[m] {
                    return 0.0;
                }
                let (i, j) = (Self::cell(edges, u).unwrap(), Self::cell(edges, x).unwrap());
                matrix[i][j] / (edges[j + 1] - edges[j])
            }
        }
    }

    /// Integration nodes in x covering the support of Π(u, ·).
    fn x_points(&self, u: f64) -> Vec<f64> {
        match self {
            Self::GaussianSmoothing { bandwidth: h } => {
                let lo = (u - WINDOW * h).max(0.0);
                let mut pts = vec![lo, u + WINDOW * h];
                if u > lo {
                    pts.insert(1, u);
                }
                pts
            }
            Self::GridMatrix { edges, .. } => edges.clone(),
        }
    }

    /// Integration nodes in u ∈ [0, u_hi] covering the support of Π(·, x).
    fn u_points(&self, x: f64, u_hi: f64) -> Vec<f64> {
        let mut pts = match self {
            Self::GaussianSmoothing { bandwidth: h } => vec![(x - WINDOW * h).max(0.0), x, x + WINDOW * h],
            Self::GridMatrix { edges, .. } => edges.clone(),
        };
        pts.push(0.0);
        pts.push(u_hi);
        pts.retain(|p| *p >= 0.0 && *p <= u_hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// ∫ Π(u, x) dx; equals 1 for a valid kernel.
    pub fn row_mass(&self, u: f64, spec: &QuadratureSpec) -> Result<f64> {
        Ok(integrate_pieces(&|x| self.density(u, x), &self.x_points(u), spec)?.value)
    }

    /// Ψ(u) = ∫ φ(x) Π(u, x) dx.
    pub fn transformed_weight(&self, phi: &WeightFunction, u: f64, spec: &QuadratureSpec) -> Result<f64> {
        if let Some(c) = phi.as_constant() {
            return Ok(c);
        }
        if let Self::GridMatrix { edges, matrix } = self {
            let i = Self::cell(edges, u).expect("u ≥ 0");
            let mut total = 0.0;
            for (j, p) in matrix[i].iter().enumerate() {
                if *p > 0.0 {
                    total += p * (phi.psi(edges[j + 1])? - phi.psi(edges[j])?) / (edges[j + 1] - edges[j]);
                }
            }
            return Ok(total);
        }
        let mut pts = self.x_points(u);
        let (lo, hi) = (pts[0], pts[pts.len() - 1]);
        pts.extend(phi.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(integrate_pieces(&|x| phi.value(x) * self.density(u, x), &pts, spec)?.value)
    }

    /// (F̄Π)(x) = ∫₀^{u_hi} F̄(u) Π(u, x) du.
    pub fn apply(&self, sf: &dyn Fn(f64) -> f64, x: f64, u_hi: f64, spec: &QuadratureSpec) -> Result<f64> {
        let pts = self.u_points(x, u_hi);
        if pts.len() < 2 {
            return Ok(0.0);
        }
        Ok(integrate_pieces(&|u| sf(u) * self.density(u, x), &pts, spec)?.value)
    }

    fn x_extent(&self, u_hi: f64) -> f64 {
        match self {
            Self::GaussianSmoothing { bandwidth: h } => u_hi + WINDOW * h,
            Self::GridMatrix { edges, .. } => *edges.last().unwrap(),
        }
    }
}

/// Both sides of the kernel data-processing inequality:
/// (D_Ψ(F̄‖Ḡ), D_φ(F̄Π‖ḠΠ)).
pub fn data_processing_sides(
    f: &dyn Lifetime,
    g: &dyn Lifetime,
    phi: &WeightFunction,
    kernel: &StochasticKernel,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    kernel.validate()?;
    phi.validate()?;
    let u_hi = upper_cut(f, spec).max(upper_cut(g, spec));
    let mut extra = phi.breakpoints();
    extra.extend(g.breakpoints());
    if let StochasticKernel::GridMatrix { edges, .. } = kernel {
        extra.extend(edges.iter().copied());
    }

    let err = std::sync::Mutex::new(None);
    let keep = |r: Result<f64>| -> f64 {
        r.unwrap_or_else(|e| {
            err.lock().unwrap().get_or_insert(e);
            0.0
        })
    };

    let before = |u: f64| {
        let s = f.sf(u);
        if s <= 0.0 {
            return 0.0;
        }
        let diff = f.log_sf(u) - g.log_sf(u);
        if diff == 0.0 {
            return 0.0;
        }
        keep(kernel.transformed_weight(phi, u, spec)) * s * diff
    };
    let lhs = integrate_pieces(&before, &integration_points(f, upper_cut(f, spec), &extra), spec)?.value;

    let fs = |u: f64| f.sf(u);
    let gs = |u: f64| g.sf(u);
    let after = |x: f64| {
        let w = phi.value(x);
        if w == 0.0 {
            return 0.0;
        }
        let a = keep(kernel.apply(&fs, x, u_hi, spec));
        let b = keep(kernel.apply(&gs, x, u_hi, spec));
        if a <= 0.0 || b <= 0.0 || a == b {
            0.0
        } else {
            w * a * (a / b).ln()
        }
    };
    let x_hi = kernel.x_extent(u_hi);
    let mut pts: Vec<f64> = vec![0.0, u_hi, x_hi];
    pts.extend(extra.iter().copied().filter(|p| *p > 0.0 && *p < x_hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let rhs = integrate_pieces(&after, &pts, spec)?.value;
    if let Some(e) = err.into_inner().unwrap() {
        return Err(e);
    }
    Ok((lhs, rhs))
}
