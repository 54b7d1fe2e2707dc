//! Adaptive Gauss–Kronrod integration in one dimension and tensor Gauss–Legendre
//! grids in two and three.

use std::collections::{BinaryHeap, HashMap};
use std::cmp::Ordering;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and limits shared by every integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Semi-infinite ranges are cut at twice the point where the dominating
    /// survival factor falls below this mass.
    pub tail_mass: f64,
    pub grid_points_per_dim: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            tail_mass: 1e-10,
            grid_points_per_dim: 256,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.tail_mass > 0.0
            && self.tail_mass < 1.0
            && self.max_subdivisions > 0
            && self.grid_points_per_dim >= 16;
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!("invalid quadrature spec {self:?}")))
        }
    }

    pub fn with_tail_mass(mut self, tail_mass: f64) -> Self {
        self.tail_mass = tail_mass;
        self
    }

    pub fn with_grid(mut self, points: usize) -> Self {
        self.grid_points_per_dim = points;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub subdivisions_used: usize,
    pub truncation_point: Option<f64>,
}

impl IntegralResult {
    pub fn zero() -> Self {
        Self { value: 0.0, abs_error_estimate: 0.0, subdivisions_used: 0, truncation_point: None }
    }

    /// Combines two results as `self + scale * other`.
    pub fn combine(self, other: IntegralResult, scale: f64) -> Self {
        Self {
            value: self.value + scale * other.value,
            abs_error_estimate: self.abs_error_estimate + scale.abs() * other.abs_error_estimate,
            subdivisions_used: self.subdivisions_used.max(other.subdivisions_used),
            truncation_point: match (self.truncation_point, other.truncation_point) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.value *= c;
        self.abs_error_estimate *= c.abs();
        self
    }
}

/// Upper end of a one-dimensional range.
#[derive(Clone, Copy)]
pub enum Upper<'a> {
    Finite(f64),
    /// Infinite, with a monotone survival-type envelope dominating the integrand.
    Envelope(&'a dyn Fn(f64) -> f64),
}

/// Cut point for an infinite range: twice the first point where `envelope` drops
/// below `tail_mass`.
pub fn envelope_cut(lo: f64, envelope: &dyn Fn(f64) -> f64, tail_mass: f64) -> Result<f64> {
    let mut step = 1.0_f64;
    let mut hi = lo + step;
    let mut iterations = 0;
    while envelope(hi) > tail_mass {
        step *= 2.0;
        hi = lo + step;
        iterations += 1;
        if iterations > 1100 || !hi.is_finite() {
            return Err(Error::Domain("envelope never falls below the tail mass".into()));
        }
    }
    let mut a = lo.max(hi - step / 2.0).min(hi);
    if envelope(a) <= tail_mass {
        a = lo;
    }
    let mut b = hi;
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if envelope(mid) > tail_mass {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(if b > 0.0 { 2.0 * b } else { b + 2.0 * (b - lo).abs().max(1.0) })
}

// Kronrod 21-point abscissae (descending) and weights; Gauss 10-point weights on the odd entries.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Compensated running sum.
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn new(x: f64) -> Self {
        Self { sum: x, comp: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then(other.a.total_cmp(&self.a))
    }
}

fn gk21(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Integrand { x })
        }
    };
    let fc = eval(center)?;
    let mut kronrod = Neumaier::new(fc * WGK[10]);
    let mut gauss = 0.0;
    let mut abs_k = (fc * WGK[10]).abs();
    let mut values = [(0.0, 0.0); 10];
    for (j, &x) in XGK.iter().take(10).enumerate() {
        let dx = half * x;
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        values[j] = (f1, f2);
        kronrod.add(WGK[j] * f1);
        kronrod.add(WGK[j] * f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let kronrod = kronrod.total();
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let abs_k = abs_k * half.abs();
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_k > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_k);
    }
    Ok(Segment { a, b, value, err })
}

/// Adaptive integration over `[lo, hi]`, optionally infinite.
pub fn integrate_1d(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: Upper<'_>,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    match hi {
        Upper::Finite(h) => integrate_pieces(f, &[lo, h], spec),
        Upper::Envelope(env) => {
            let cut = envelope_cut(lo, env, spec.tail_mass)?;
            let mut r = integrate_pieces(f, &[lo, cut], spec)?;
            r.truncation_point = Some(cut);
            Ok(r)
        }
    }
}

/// Adaptive integration over the union of consecutive intervals `[p0,p1], [p1,p2], ...`.
/// Interior points mark kinks or jumps of the integrand.
pub fn integrate_pieces(f: &dyn Fn(f64) -> f64, points: &[f64], spec: &QuadratureSpec) -> Result<IntegralResult> {
    let mut pts: Vec<f64> = points.iter().copied().filter(|p| p.is_finite()).collect();
    if pts.is_empty() {
        return Err(Error::Domain("integration range needs a finite endpoint".into()));
    }
    let lo = pts[0];
    let hi = *pts.last().unwrap();
    if !(lo <= hi) {
        return Err(Error::Domain(format!("empty integration range [{lo}, {hi}]")));
    }
    pts.retain(|p| *p >= lo && *p <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Ok(IntegralResult::zero());
    }
    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    for w in pts.windows(2) {
        heap.push(gk21(f, w[0], w[1])?);
    }
    let mut count = heap.len();
    loop {
        let total: f64 = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
        let err: f64 = frozen_err + heap.iter().map(|s| s.err).sum::<f64>();
        if err <= spec.target(total) || heap.is_empty() {
            if err <= spec.target(total) || err <= 1e3 * f64::EPSILON * total.abs() {
                return Ok(IntegralResult {
                    value: total,
                    abs_error_estimate: err,
                    subdivisions_used: count,
                    truncation_point: None,
                });
            }
            return Err(Error::Convergence { best: total, abs_error: err, subdivisions: count });
        }
        if count >= spec.max_subdivisions {
            return Err(Error::Convergence { best: total, abs_error: err, subdivisions: count });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-13 * worst.a.abs().max(1e-300) {
            frozen_value += worst.value;
            frozen_err += worst.err;
            continue;
        }
        heap.push(gk21(f, worst.a, mid)?);
        heap.push(gk21(f, mid, worst.b)?);
        count += 1;
    }
}

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1], ascending.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn compute_gauss_legendre(n: usize) -> GaussLegendre {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if n == 0 {
                break;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussLegendre { nodes, weights }
}

/// One axis of a tensor grid: a finite range split into panels at `breaks`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub breaks: Vec<f64>,
}

impl Axis {
    pub fn finite(lo: f64, hi: f64) -> Self {
        Self { lo, hi, breaks: Vec::new() }
    }

    pub fn semi_infinite(lo: f64, envelope: &dyn Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<Self> {
        Ok(Self { lo, hi: envelope_cut(lo, envelope, spec.tail_mass)?, breaks: Vec::new() })
    }

    pub fn with_breaks(mut self, breaks: impl IntoIterator<Item = f64>) -> Self {
        self.breaks.extend(breaks);
        self
    }

    fn panels(&self) -> Vec<f64> {
        let mut pts = vec![self.lo, self.hi];
        pts.extend(self.breaks.iter().copied().filter(|b| *b > self.lo && *b < self.hi));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Composite Gauss–Legendre nodes and weights using about `points` nodes in total.
    pub fn rule(&self, points: usize) -> (Vec<f64>, Vec<f64>) {
        let panels = self.panels();
        let count = panels.len() - 1;
        let per = (points / count.max(1)).max(4);
        let gl = gauss_legendre(per);
        let mut nodes = Vec::with_capacity(per * count);
        let mut weights = Vec::with_capacity(per * count);
        for w in panels.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let h = 0.5 * (w[1] - w[0]);
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(c + h * x);
                weights.push(h * wt);
            }
        }
        (nodes, weights)
    }
}

/// Tensor Gauss–Legendre rule at full and half resolution.
#[derive(Debug, Clone)]
pub struct TensorGrid {
    pub full: Vec<(Vec<f64>, Vec<f64>)>,
    pub half: Vec<(Vec<f64>, Vec<f64>)>,
    pub truncation: Vec<f64>,
}

impl TensorGrid {
    pub fn new(axes: &[Axis], spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        if !(1..=3).contains(&axes.len()) {
            return Err(Error::Domain(format!("tensor grids support 1 to 3 axes, got {}", axes.len())));
        }
        let n = spec.grid_points_per_dim;
        Ok(Self {
            full: axes.iter().map(|a| a.rule(n)).collect(),
            half: axes.iter().map(|a| a.rule(n / 2)).collect(),
            truncation: axes.iter().map(|a| a.hi).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.full.len()
    }

    /// Sums `g(point, weight)` over one resolution with a fixed reduction order.
    pub fn sum(rule: &[(Vec<f64>, Vec<f64>)], g: &(dyn Fn(&[f64], &[usize]) -> f64 + Sync)) -> f64 {
        let dim = rule.len();
        let outer = rule[0].0.len();
        let partials: Vec<f64> = (0..outer)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                let mut point = vec![0.0; dim];
                let mut index = vec![0usize; dim];
                point[0] = rule[0].0[i];
                index[0] = i;
                let w0 = rule[0].1[i];
                match dim {
                    1 => acc += w0 * g(&point, &index),
                    2 => {
                        for j in 0..rule[1].0.len() {
                            point[1] = rule[1].0[j];
                            index[1] = j;
                            acc += w0 * rule[1].1[j] * g(&point, &index);
                        }
                    }
                    _ => {
                        for j in 0..rule[1].0.len() {
                            point[1] = rule[1].0[j];
                            index[1] = j;
                            let w01 = w0 * rule[1].1[j];
                            for k in 0..rule[2].0.len() {
                                point[2] = rule[2].0[k];
                                index[2] = k;
                                acc += w01 * rule[2].1[k] * g(&point, &index);
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        partials.iter().sum()
    }

    /// Integrates a pointwise function; the error estimate is the full/half difference.
    pub fn integrate(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<IntegralResult> {
        let bad = std::sync::atomic::AtomicU64::new(f64::NAN.to_bits());
        let guarded = |x: &[f64], _: &[usize]| {
            let y = f(x);
            if y.is_finite() {
                y
            } else {
                bad.store(x[0].to_bits(), std::sync::atomic::Ordering::Relaxed);
                0.0
            }
        };
        let full = Self::sum(&self.full, &guarded);
        let half = Self::sum(&self.half, &guarded);
        let x = f64::from_bits(bad.load(std::sync::atomic::Ordering::Relaxed));
        if !x.is_nan() {
            return Err(Error::Integrand { x });
        }
        Ok(IntegralResult {
            value: full,
            abs_error_estimate: (full - half).abs(),
            subdivisions_used: self.full.iter().map(|a| a.0.len()).product(),
            truncation_point: self.truncation.iter().copied().reduce(f64::max),
        })
    }
}

/// Tensor-grid integration over a 2- or 3-dimensional box.
pub fn integrate_nd(f: &(dyn Fn(&[f64]) -> f64 + Sync), axes: &[Axis], spec: &QuadratureSpec) -> Result<IntegralResult> {
    if !(2..=3).contains(&axes.len()) {
        return Err(Error::Domain(format!("integrate_nd needs 2 or 3 axes, got {}", axes.len())));
    }
    TensorGrid::new(axes, spec)?.integrate(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gamma_two() {
        let env = |x: f64| (-x).exp() * (1.0 + x);
        let r = integrate_1d(&|x| x * (-x).exp(), 0.0, Upper::Envelope(&env), &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!(r.truncation_point.unwrap() > 20.0);
    }

    #[test]
    fn constant_is_exact() {
        let r = integrate_1d(&|_| 1.0, 0.0, Upper::Finite(1.0), &spec()).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn uniform_cre() {
        // antiderivative of -(1-x)log(1-x) is (1-x)^2 log(1-x)/2 - (1-x)^2/4
        let anti = |x: f64| {
            let s: f64 = 1.0 - x;
            if s == 0.0 { 0.0 } else { s * s * s.ln() / 2.0 - s * s / 4.0 }
        };
        let exact = anti(1.0) - anti(0.0);
        let r = integrate_1d(&|x| -(1.0 - x) * (1.0 - x).ln(), 0.0, Upper::Finite(1.0), &spec()).unwrap();
        assert!((r.value - exact).abs() < 1e-10);
        assert!((exact - 0.25).abs() < 1e-15);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let r = integrate_1d(&|x: f64| x.powf(-0.5), 0.0, Upper::Finite(1.0), &spec()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn nan_reports_abscissa() {
        let err = integrate_1d(&|x| if x > 0.5 { f64::NAN } else { x }, 0.0, Upper::Finite(1.0), &spec()).unwrap_err();
        assert!(matches!(err, Error::Integrand { x } if x > 0.5));
    }

    #[test]
    fn subdivision_limit_is_reported() {
        let tight = QuadratureSpec { max_subdivisions: 3, rel_tol: 1e-15, abs_tol: 1e-300, ..spec() };
        let err = integrate_1d(&|x: f64| (50.0 * x).sin().abs(), 0.0, Upper::Finite(10.0), &tight).unwrap_err();
        assert!(matches!(err, Error::Convergence { subdivisions, .. } if subdivisions <= 3));
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for n in [5, 16, 128, 256] {
            let gl = gauss_legendre(n);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum {s}");
            // x^4 integrates to 2/5
            let q: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(4)).sum();
            assert!((q - 0.4).abs() < 1e-13);
        }
    }

    #[test]
    fn nd_product_exponential() {
        let env = |x: f64| (-x).exp();
        let ax = Axis::semi_infinite(0.0, &env, &spec()).unwrap();
        let r = integrate_nd(&|x| (-x[0] - x[1]).exp(), &[ax.clone(), ax.clone()], &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
        let r = integrate_nd(&|x| (x[0] + x[1]) * (-x[0] - x[1]).exp(), &[ax.clone(), ax.clone()], &spec()).unwrap();
        let one_d = integrate_1d(&|x| x * (-x).exp(), 0.0, Upper::Envelope(&env), &spec()).unwrap().value;
        assert!((r.value - 2.0 * one_d).abs() < 1e-6);
        let r = integrate_nd(&|x| (-x[0] - x[1] - x[2]).exp(), &[ax.clone(), ax.clone(), ax], &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nd_rejects_bad_dimension() {
        assert!(integrate_nd(&|_| 1.0, &[Axis::finite(0.0, 1.0)], &spec()).is_err());
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0usize..4, rate in 0.5f64..3.0) {
            let spec = QuadratureSpec::default();
            let env = move |x: f64| (-rate * x).exp() * (1.0 + x).powi(4);
            let f = move |x: f64| x.powi(k as i32) * (-rate * x).exp();
            let g = move |x: f64| (1.0 + x) * (-rate * x).exp();
            let rf = integrate_1d(&f, 0.0, Upper::Envelope(&env), &spec).unwrap();
            let rg = integrate_1d(&g, 0.0, Upper::Envelope(&env), &spec).unwrap();
            let h = move |x: f64| a * f(x) + b * g(x);
            let rh = integrate_1d(&h, 0.0, Upper::Envelope(&env), &spec).unwrap();
            let tol = a.abs() * rf.abs_error_estimate + b.abs() * rg.abs_error_estimate + rh.abs_error_estimate + 1e-12;
            prop_assert!((rh.value - a * rf.value - b * rg.value).abs() <= tol * 10.0);
        }

        #[test]
        fn separable_nd_matches_product(r1 in 0.5f64..2.0, r2 in 0.5f64..2.0) {
            let spec = QuadratureSpec::default();
            let e1 = move |x: f64| (-r1 * x).exp();
            let e2 = move |x: f64| (-r2 * x).exp();
            let a1 = Axis::semi_infinite(0.0, &e1, &spec).unwrap();
            let a2 = Axis::semi_infinite(0.0, &e2, &spec).unwrap();
            let f1 = move |x: f64| (1.0 + x) * (-r1 * x).exp();
            let f2 = move |x: f64| x * x * (-r2 * x).exp();
            let i1 = integrate_1d(&f1, 0.0, Upper::Finite(a1.hi), &spec).unwrap().value;
            let i2 = integrate_1d(&f2, 0.0, Upper::Finite(a2.hi), &spec).unwrap().value;
            let nd = integrate_nd(&|x| f1(x[0]) * f2(x[1]), &[a1, a2], &spec).unwrap().value;
            prop_assert!((nd - i1 * i2).abs() <= 1e-6 * (i1 * i2).abs());
        }
    }
}
