//! Normal and gamma distribution functions, and the bivariate normal orthant probability.

use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::quadrature::gauss_legendre;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / TWO_PI.sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// log P(Z > z), accurate far into the upper tail.
pub fn normal_log_sf(z: f64) -> f64 {
    if z < 30.0 {
        return normal_sf(z).ln();
    }
    // Mills ratio expansion
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    -0.5 * z2 - z.ln() - 0.5 * TWO_PI.ln() + series.ln()
}

pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

/// P(X > h, Y > k) for a standard bivariate normal with correlation `r`.
///
/// Drezner–Wesolowsky with Genz's refinements; the |r| ≥ 0.925 branch uses the
/// asymptotic expansion around r = ±1.
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::NEG_INFINITY {
        return normal_sf(k);
    }
    if k == f64::NEG_INFINITY {
        return normal_sf(h);
    }
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    let points = if r.abs() < 0.3 {
        6
    } else if r.abs() < 0.75 {
        12
    } else {
        20
    };
    let gl = gauss_legendre(points);
    // negative half of the symmetric rule
    let half: Vec<(f64, f64)> = gl.nodes.iter().zip(&gl.weights).take(points / 2).map(|(x, w)| (*x, *w)).collect();
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        for &(x, w) in &half {
            for sign in [-1.0, 1.0] {
                let sn = (asr * (sign * x + 1.0) / 2.0).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return (bvn * asr / (2.0 * TWO_PI) + normal_cdf(-h) * normal_cdf(-k)).clamp(0.0, 1.0);
    }
    let mut kk = k;
    if r < 0.0 {
        kk = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let bs = (h - kk) * (h - kk);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a * (-(bs / a_s + hk) / 2.0).exp()
            * (1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp() * TWO_PI.sqrt() * normal_cdf(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(x, w) in &half {
            for sign in [-1.0, 1.0] {
                let xs = (a * (sign * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                bvn += a * w * ((-bs / (2.0 * xs) - hk / (1.0 + rs)).exp() / rs
                    - (-(bs / xs + hk) / 2.0).exp() * (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / TWO_PI;
    }
    let out = if r > 0.0 {
        bvn + normal_cdf(-h.max(kk))
    } else {
        -bvn + (normal_cdf(-h) - normal_cdf(-kk)).max(0.0)
    };
    out.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_1d, QuadratureSpec, Upper};

    // P(X>h, Y>k) = ∫_h^∞ φ(t) Φ̄((k − r t)/√(1−r²)) dt
    fn bvn_oracle(h: f64, k: f64, r: f64) -> f64 {
        let s = (1.0 - r * r).sqrt();
        let f = |t: f64| normal_pdf(t) * normal_sf((k - r * t) / s);
        let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-15, ..Default::default() };
        integrate_1d(&f, h.max(-12.0), Upper::Finite(12.0), &spec).unwrap().value
    }

    #[test]
    fn bvn_matches_conditional_quadrature() {
        for &r in &[-0.99, -0.95, -0.93, -0.8, -0.5, -0.1, 0.0, 0.2, 0.6, 0.9, 0.93, 0.99] {
            for &(h, k) in &[(0.0, 0.0), (1.0, -0.5), (-1.2, 0.7), (2.0, 2.5), (-2.0, -1.0), (0.3, 1.9)] {
                let got = bvn_upper(h, k, r);
                let want = bvn_oracle(h, k, r);
                assert!((got - want).abs() < 1e-9, "h={h} k={k} r={r}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn bvn_origin_closed_form() {
        for &r in &[-0.7f64, 0.0, 0.5] {
            let want = 0.25 + r.asin() / TWO_PI;
            assert!((bvn_upper(0.0, 0.0, r) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn normal_tail_log_is_continuous() {
        let direct = normal_sf(30.0).ln();
        let z2: f64 = 900.0;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
        let asymptotic = -0.5 * z2 - 30f64.ln() - 0.5 * TWO_PI.ln() + series.ln();
        assert!((direct - asymptotic).abs() < 1e-9);
        assert!((normal_log_sf(30.0) - direct).abs() < 1e-9);
        assert!(normal_log_sf(40.0).is_finite());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &z in &[-3.0, -0.4, 0.0, 1.7, 5.0] {
            assert!((normal_quantile(normal_cdf(z)) - z).abs() < 1e-9);
        }
    }

    #[test]
    fn incomplete_gamma_exponential_case() {
        assert!((gamma_q(1.0, 2.0) - (-2.0f64).exp()).abs() < 1e-14);
        assert!((gamma_p(2.0, 1.0) - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-14);
    }
}
