//! Weight functions φ on the nonnegative reals and their integrals ψ and ψ*_p.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_pieces, QuadratureSpec};
use crate::special::gamma_p;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightFunction {
    Constant { c: f64 },
    /// x ↦ xᵃ
    Power { a: f64 },
    /// x ↦ c·xᵃ
    ScaledPower { c: f64, a: f64 },
    /// x ↦ e^(−r·x)
    Exponential { r: f64 },
    /// Linear interpolation between `(x, φ(x))` knots, constant outside.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl WeightFunction {
    pub fn constant(c: f64) -> Self {
        Self::Constant { c }
    }

    pub fn unit() -> Self {
        Self::Constant { c: 1.0 }
    }

    pub fn power(a: f64) -> Self {
        Self::Power { a }
    }

    pub fn exponential(r: f64) -> Self {
        Self::Exponential { r }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { c } if !(*c >= 0.0 && c.is_finite()) => domain(format!("constant weight {c} must be nonnegative")),
            Self::Power { a } | Self::ScaledPower { a, .. } if !(*a > -1.0 && a.is_finite()) => {
                domain(format!("power weight exponent {a} is not integrable at 0"))
            }
            Self::ScaledPower { c, .. } if !(*c >= 0.0 && c.is_finite()) => {
                domain(format!("scaled power coefficient {c} must be nonnegative"))
            }
            Self::Exponential { r } if !r.is_finite() => domain("exponential weight rate must be finite"),
            Self::Tabulated { knots } => {
                if knots.is_empty() {
                    return domain("tabulated weight needs at least one knot");
                }
                if knots.iter().any(|(x, y)| !(x.is_finite() && *x >= 0.0 && y.is_finite() && *y >= 0.0)) {
                    return domain("tabulated knots must be finite with x ≥ 0 and φ ≥ 0");
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return domain("tabulated knots must be strictly increasing in x");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether φ has an integrable singularity at 0 (power exponent in (−1, 0)).
    pub fn singular_at_zero(&self) -> bool {
        matches!(self, Self::Power { a } | Self::ScaledPower { a, .. } if *a < 0.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Constant { c } => *c,
            Self::Power { a } => power(x, *a),
            Self::ScaledPower { c, a } => c * power(x, *a),
            Self::Exponential { r } => (-r * x).exp(),
            Self::Tabulated { knots } => interpolate(knots, x),
        }
    }

    /// Returns `c` when φ ≡ c.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Self::Constant { c } => Some(*c),
            Self::Power { a } if *a == 0.0 => Some(1.0),
            Self::ScaledPower { c, a } if *a == 0.0 || *c == 0.0 => Some(*c),
            Self::Exponential { r } if *r == 0.0 => Some(1.0),
            Self::Tabulated { knots } if knots.iter().all(|k| k.1 == knots[0].1) => Some(knots[0].1),
            _ => None,
        }
    }

    /// sup of φ over [0, ∞).
    pub fn supremum(&self) -> f64 {
        match self {
            Self::Constant { c } => *c,
            Self::Power { a } if *a == 0.0 => 1.0,
            Self::ScaledPower { c, a } if *a == 0.0 || *c == 0.0 => *c,
            Self::Power { .. } | Self::ScaledPower { .. } => f64::INFINITY,
            Self::Exponential { r } => {
                if *r >= 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Tabulated { knots } => knots.iter().map(|k| k.1).fold(0.0, f64::max),
        }
    }

    /// inf of φ over [0, ∞).
    pub fn infimum(&self) -> f64 {
        match self {
            Self::Constant { c } => *c,
            Self::Power { a } if *a == 0.0 => 1.0,
            Self::ScaledPower { c, a } if *a == 0.0 || *c == 0.0 => *c,
            Self::Power { .. } | Self::ScaledPower { .. } => 0.0,
            Self::Exponential { r } => {
                if *r <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tabulated { knots } => knots.iter().map(|k| k.1).fold(f64::INFINITY, f64::min),
        }
    }

    /// Kinks of φ that integrators should split at.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Tabulated { knots } => knots.iter().map(|k| k.0).collect(),
            _ => Vec::new(),
        }
    }

    /// c·φ, when the kind is closed under scaling (exponential weights are not).
    pub fn scaled(&self, factor: f64) -> Option<Self> {
        match self {
            Self::Constant { c } => Some(Self::Constant { c: c * factor }),
            Self::Power { a } => Some(Self::ScaledPower { c: factor, a: *a }),
            Self::ScaledPower { c, a } => Some(Self::ScaledPower { c: c * factor, a: *a }),
            Self::Exponential { r } if *r == 0.0 => Some(Self::Constant { c: factor }),
            Self::Exponential { .. } => None,
            Self::Tabulated { knots } => Some(Self::Tabulated { knots: knots.iter().map(|(x, y)| (*x, y * factor)).collect() }),
        }
    }

    /// ψ(x) = ∫₀ˣ φ(t) dt.
    pub fn psi(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if !(x >= 0.0) {
            return domain(format!("psi needs x ≥ 0, got {x}"));
        }
        Ok(match self {
            Self::Constant { c } => c * x,
            Self::Power { a } => power(x, a + 1.0) / (a + 1.0),
            Self::ScaledPower { c, a } => c * power(x, a + 1.0) / (a + 1.0),
            Self::Exponential { r } => {
                if *r == 0.0 {
                    x
                } else {
                    -(-r * x).exp_m1() / r
                }
            }
            Self::Tabulated { knots } => tabulated_integral(knots, x),
        })
    }

    /// ψ*_p(x) = ∫₀ˣ tᵖ φ(t) dt.
    pub fn psi_star(&self, p: f64, x: f64) -> Result<f64> {
        self.validate()?;
        if !(x >= 0.0 && p >= 0.0) {
            return domain(format!("psi_star needs p ≥ 0 and x ≥ 0, got p = {p}, x = {x}"));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        match self {
            Self::Constant { c } => Ok(c * power(x, p + 1.0) / (p + 1.0)),
            Self::Power { a } => Ok(power(x, p + a + 1.0) / (p + a + 1.0)),
            Self::ScaledPower { c, a } => Ok(c * power(x, p + a + 1.0) / (p + a + 1.0)),
            Self::Exponential { r } if *r > 0.0 => Ok(gamma(p + 1.0) * gamma_p(p + 1.0, r * x) / r.powf(p + 1.0)),
            Self::Exponential { r } if *r == 0.0 => Ok(power(x, p + 1.0) / (p + 1.0)),
            _ => {
                let mut points = vec![0.0];
                points.extend(self.breakpoints().into_iter().filter(|k| *k > 0.0 && *k < x));
                points.push(x);
                let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
                Ok(integrate_pieces(&|t| power(t, p) * self.value(t), &points, &spec)?.value)
            }
        }
    }

    /// Smallest x in [0, hi] with ψ(x) ≥ y, by bisection.
    pub fn psi_inverse(&self, y: f64, hi: f64) -> Result<f64> {
        if self.psi(hi)? < y {
            return Err(Error::Domain(format!("ψ stays below {y} on [0, {hi}]")));
        }
        let (mut a, mut b) = (0.0, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if self.psi(mid)? < y {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-12 * b.max(1.0) {
                break;
            }
        }
        Ok(b)
    }
}

fn power(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        x.powf(a)
    }
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|k| k.0 <= x);
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn tabulated_integral(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    if x <= first.0 {
        return first.1 * x;
    }
    let mut total = first.1 * first.0;
    for w in knots.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x <= x0 {
            return total;
        }
        let end = x.min(x1);
        let y_end = y0 + (y1 - y0) * (end - x0) / (x1 - x0);
        total += 0.5 * (y0 + y_end) * (end - x0);
        if x <= x1 {
            return total;
        }
    }
    let last = knots[knots.len() - 1];
    total + last.1 * (x - last.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_1d, Upper};

    #[test]
    fn psi_examples() {
        assert_eq!(WeightFunction::power(1.0).psi(2.0).unwrap(), 2.0);
        assert_eq!(WeightFunction::unit().psi(3.5).unwrap(), 3.5);
        let oracle = integrate_1d(&|t: f64| (-t).exp(), 0.0, Upper::Finite(1.0), &QuadratureSpec::default()).unwrap().value;
        let got = WeightFunction::exponential(1.0).psi(1.0).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 0.632121).abs() < 1e-6);
    }

    #[test]
    fn psi_star_examples() {
        assert_eq!(WeightFunction::unit().psi_star(1.0, 2.0).unwrap(), 2.0);
        assert!((WeightFunction::power(1.0).psi_star(1.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let spec = QuadratureSpec::default();
        let env = |t: f64| (-t).exp() * (1.0 + t).powi(3);
        let oracle = integrate_1d(&|t: f64| t * t * (-t).exp(), 0.0, Upper::Envelope(&env), &spec).unwrap();
        let got = WeightFunction::exponential(1.0).psi_star(2.0, oracle.truncation_point.unwrap()).unwrap();
        assert!((got - oracle.value).abs() < 1e-9);
        assert!((got - 2.0).abs() < 1e-8);
    }

    #[test]
    fn bounds_of_weights() {
        assert_eq!(WeightFunction::power(1.0).infimum(), 0.0);
        assert_eq!(WeightFunction::exponential(-2.0).infimum(), 1.0);
        assert_eq!(WeightFunction::exponential(-2.0).supremum(), f64::INFINITY);
        let w = WeightFunction::Tabulated { knots: vec![(0.0, 3.0), (1.0, 1.5), (2.0, 2.0)] };
        assert_eq!((w.infimum(), w.supremum()), (1.5, 3.0));
    }

    #[test]
    fn non_integrable_power_is_rejected() {
        assert!(matches!(WeightFunction::power(-1.0).psi(1.0), Err(Error::Domain(_))));
        let w = WeightFunction::power(-0.5);
        assert!(w.singular_at_zero());
        assert!((w.psi(4.0).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn tabulated_interpolates_and_extrapolates() {
        let w = WeightFunction::Tabulated { knots: vec![(1.0, 2.0), (3.0, 4.0)] };
        assert_eq!(w.value(0.0), 2.0);
        assert_eq!(w.value(2.0), 3.0);
        assert_eq!(w.value(10.0), 4.0);
        // 2·1 + (2+4)/2·2 + 4·1
        assert!((w.psi(4.0).unwrap() - 12.0).abs() < 1e-14);
        assert!((w.psi_star(0.0, 4.0).unwrap() - 12.0).abs() < 1e-10);
        let bad = WeightFunction::Tabulated { knots: vec![(1.0, 2.0), (1.0, 4.0)] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let w: WeightFunction = serde_json::from_str(r#"{"kind":"constant","c":1}"#).unwrap();
        assert_eq!(w, WeightFunction::unit());
        let w: WeightFunction = serde_json::from_str(r#"{"kind":"tabulated","knots":[[0,1],[2,3]]}"#).unwrap();
        assert_eq!(w.value(1.0), 2.0);
        assert!(serde_json::from_str::<WeightFunction>(r#"{"kind":"constant","c":1,"zz":2}"#).is_err());
    }

    #[test]
    fn psi_inverse_bisects() {
        let x = WeightFunction::power(1.0).psi_inverse(2.0, 10.0).unwrap();
        assert!((x - 2.0).abs() < 1e-10);
    }
}
