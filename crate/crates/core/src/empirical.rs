//! Plug-in WCRE/WCE of a sample, evaluated exactly on the steps of the empirical
//! survival function, with percentile bootstrap intervals and a convergence
//! experiment against a model value.

use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{Lifetime, Sample, UnivariateModel};
use crate::quadrature::QuadratureSpec;
use crate::rng;
use crate::special::{normal_cdf, normal_quantile};
use crate::univariate::{neg_s_log_s, wcre};
use crate::weight::WeightFunction;

pub const BOOTSTRAP_REPLICATES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEstimate {
    pub value: f64,
    pub n: usize,
    /// BCa percentile interval and its level.
    pub bootstrap_ci: Option<(f64, f64)>,
    pub level: Option<f64>,
    /// Step intervals of the empirical distribution, including [0, x₍₁₎) and
    /// the one beyond the maximum.
    pub pieces: usize,
}

#[derive(Clone, Copy)]
enum Side {
    Residual,
    Past,
}

fn step_sum(values: &[f64], phi: &WeightFunction, side: Side) -> Result<f64> {
    let n = values.len();
    let nf = n as f64;
    let mut total = 0.0;
    let mut prev = phi.psi(values[0])?;
    for i in 1..n {
        let next = if values[i] == values[i - 1] { prev } else { phi.psi(values[i])? };
        let width = next - prev;
        if width != 0.0 {
            // on [x₍ᵢ₎, x₍ᵢ₊₁₎) exactly i of the n points are ≤ x
            let level = match side {
                Side::Residual => (n - i) as f64 / nf,
                Side::Past => i as f64 / nf,
            };
            total += neg_s_log_s(level) * width;
        }
        prev = next;
    }
    Ok(total)
}

fn distinct(values: &[f64]) -> usize {
    1 + values.windows(2).filter(|w| w[1] != w[0]).count()
}

fn estimate(sample: &Sample, phi: &WeightFunction, level: Option<f64>, seed: u64, side: Side) -> Result<EmpiricalEstimate> {
    phi.validate()?;
    let values = sample.values();
    let value = step_sum(values, phi, side)?;
    let bootstrap_ci = match level {
        None => None,
        Some(l) => {
            if !(l > 0.0 && l < 1.0) {
                return domain(format!("confidence level {l} outside (0, 1)"));
            }
            Some(bootstrap(values, phi, l, seed, side)?)
        }
    };
    Ok(EmpiricalEstimate { value, n: values.len(), bootstrap_ci, level, pieces: distinct(values) + 1 })
}

fn bootstrap(values: &[f64], phi: &WeightFunction, level: f64, seed: u64, side: Side) -> Result<(f64, f64)> {
    use rand::Rng;
    let n = values.len();
    let mut reps: Vec<f64> = (0..BOOTSTRAP_REPLICATES)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(seed, b as u64);
            let mut draw: Vec<f64> = (0..n).map(|_| values[r.gen_range(0..n)]).collect();
            draw.sort_by(f64::total_cmp);
            step_sum(&draw, phi, side)
        })
        .collect::<Result<_>>()?;
    reps.sort_by(f64::total_cmp);
    // BCa percentiles: median-bias shift and jackknife acceleration
    let estimate = step_sum(values, phi, side)?;
    let below = reps.iter().filter(|r| **r < estimate).count() as f64;
    let ties = reps.iter().filter(|r| **r == estimate).count() as f64;
    let share = ((below + 0.5 * ties) / reps.len() as f64).clamp(0.5 / reps.len() as f64, 1.0 - 0.5 / reps.len() as f64);
    let z0 = normal_quantile(share);
    let a = acceleration(values, phi, side)?;
    let z = normal_quantile(0.5 * (1.0 + level));
    let adjusted = |zq: f64| normal_cdf(z0 + (z0 + zq) / (1.0 - a * (z0 + zq)));
    Ok((percentile(&reps, adjusted(-z)), percentile(&reps, adjusted(z))))
}

/// Jackknife skewness of the estimator, the acceleration of the BCa interval.
fn acceleration(values: &[f64], phi: &WeightFunction, side: Side) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Ok(0.0);
    }
    let loo: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rest = Vec::with_capacity(n - 1);
            rest.extend_from_slice(&values[..i]);
            rest.extend_from_slice(&values[i + 1..]);
            step_sum(&rest, phi, side)
        })
        .collect::<Result<_>>()?;
    let mean = loo.iter().sum::<f64>() / n as f64;
    let (num, den) = loo.iter().fold((0.0, 0.0), |acc, v| {
        let d = mean - v;
        (acc.0 + d * d * d, acc.1 + d * d)
    });
    Ok(if den > 0.0 { num / (6.0 * den.powf(1.5)) } else { 0.0 })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// −Σ F̄ₙ log F̄ₙ · Δψ over the steps of the empirical sf.
pub fn empirical_wcre(sample: &Sample, phi: &WeightFunction, level: Option<f64>, seed: u64) -> Result<EmpiricalEstimate> {
    estimate(sample, phi, level, seed, Side::Residual)
}

/// −Σ Fₙ log Fₙ · Δψ over the steps of the empirical CDF.
pub fn empirical_wce(sample: &Sample, phi: &WeightFunction, level: Option<f64>, seed: u64) -> Result<EmpiricalEstimate> {
    estimate(sample, phi, level, seed, Side::Past)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub mean_abs_err: f64,
    pub sd: f64,
}

/// Mean and standard deviation over `replications` of |plug-in − model value|
/// for each sample size.
pub fn convergence_experiment(
    target: &UnivariateModel,
    phi: &WeightFunction,
    sizes: &[usize],
    replications: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<Vec<ConvergenceRow>> {
    target.validate()?;
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return domain("sample sizes must be positive and increasing");
    }
    if replications == 0 {
        return domain("at least one replication is needed");
    }
    let reference = match wcre(target, phi, spec) {
        Ok(v) => v.value,
        Err(Error::Divergent(msg)) => return Err(Error::Divergent(format!("target WCRE is not finite: {msg}"))),
        Err(e) => return Err(e),
    };
    sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let errs: Vec<f64> = (0..replications)
                .into_par_iter()
                .map(|rep| {
                    let mut r = rng::stream(seed, ((k as u64) << 32) | rep as u64);
                    let mut draw: Vec<f64> = (0..n).map(|_| target.sample(&mut r)).collect();
                    draw.sort_by(f64::total_cmp);
                    Ok((step_sum(&draw, phi, Side::Residual)? - reference).abs())
                })
                .collect::<Result<_>>()?;
            let m = errs.iter().sum::<f64>() / replications as f64;
            let var = if replications > 1 {
                errs.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / (replications - 1) as f64
            } else {
                0.0
            };
            Ok(ConvergenceRow { n, mean_abs_err: m, sd: var.sqrt() })
        })
        .collect()
}

/// Mean errors nonincreasing along the ladder, allowing one rise within one SD.
pub fn is_nonincreasing(rows: &[ConvergenceRow]) -> bool {
    let mut inversions = 0;
    for w in rows.windows(2) {
        if w[1].mean_abs_err > w[0].mean_abs_err {
            if w[1].mean_abs_err - w[0].mean_abs_err > w[1].sd.max(w[0].sd) {
                return false;
            }
            inversions += 1;
        }
    }
    inversions <= 1
}

/// Single-column sample: one value per row, optional header, `#` comments.
pub fn read_sample(reader: impl BufRead) -> Result<Sample> {
    let mut values = Vec::new();
    let mut seen_data = false;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| Error::Input(format!("line {lineno}: {e}")))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let field = body.trim_end_matches(',').trim();
        if field.contains(',') {
            return Err(Error::Input(format!("line {lineno}: expected one column, got {field:?}")));
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => {
                values.push(v);
                seen_data = true;
            }
            Ok(v) => return Err(Error::Input(format!("line {lineno}: value {v} is not a finite nonnegative number"))),
            Err(_) if !seen_data && values.is_empty() && field.chars().any(|c| c.is_alphabetic()) => {
                // header row
                seen_data = true;
            }
            Err(_) => return Err(Error::Input(format!("line {lineno}: cannot parse {field:?} as a number"))),
        }
    }
    if values.is_empty() {
        return Err(Error::Input("sample file contains no values".into()));
    }
    Sample::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn piecewise_examples() {
        let one = WeightFunction::unit();
        let half_ln2 = 0.5 * std::f64::consts::LN_2;
        assert!((empirical_wcre(&sample(&[1.0, 2.0]), &one, None, 0).unwrap().value - half_ln2).abs() < 1e-15);
        assert_eq!(empirical_wcre(&sample(&[3.0]), &one, None, 0).unwrap().value, 0.0);
        let p = empirical_wcre(&sample(&[1.0, 2.0]), &WeightFunction::power(1.0), None, 0).unwrap().value;
        assert!((p - half_ln2 * 1.5).abs() < 1e-15);
        assert!((empirical_wce(&sample(&[1.0, 2.0]), &one, None, 0).unwrap().value - half_ln2).abs() < 1e-15);
        assert_eq!(empirical_wce(&sample(&[3.0]), &one, None, 0).unwrap().value, 0.0);
        let three = empirical_wce(&sample(&[1.0, 2.0, 3.0]), &one, None, 0).unwrap();
        let want = -((1.0f64 / 3.0) * (1.0f64 / 3.0).ln() + (2.0f64 / 3.0) * (2.0f64 / 3.0).ln());
        assert!((three.value - want).abs() < 1e-15);
        assert!(three.pieces <= three.n + 1);
    }

    #[test]
    fn negative_entries_are_rejected() {
        assert!(Sample::new(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn quantile_lattice_converges() {
        let m = UnivariateModel::exponential(1.0);
        let err = |n: usize| {
            let v: Vec<f64> = (1..=n).map(|i| m.quantile((i as f64 - 0.5) / n as f64)).collect();
            (empirical_wcre(&Sample::new(v).unwrap(), &WeightFunction::unit(), None, 0).unwrap().value - 1.0).abs()
        };
        assert!(err(4000) <= 0.5 * err(1000), "{} vs {}", err(4000), err(1000));
    }

    #[test]
    fn bootstrap_is_seeded_and_brackets_the_estimate() {
        let m = UnivariateModel::exponential(1.0);
        let v: Vec<f64> = (1..=300).map(|i| m.quantile(i as f64 / 301.0)).collect();
        let s = Sample::new(v).unwrap();
        let a = empirical_wcre(&s, &WeightFunction::unit(), Some(0.95), 7).unwrap();
        let b = empirical_wcre(&s, &WeightFunction::unit(), Some(0.95), 7).unwrap();
        assert_eq!(a, b);
        let (lo, hi) = a.bootstrap_ci.unwrap();
        assert!(lo < a.value && a.value < hi);
    }

    #[test]
    fn bootstrap_coverage_smoke() {
        let m = UnivariateModel::exponential(1.0);
        let hits = (0..100u64)
            .filter(|t| {
                let mut r = rng::stream(1234, *t);
                let v: Vec<f64> = (0..1000).map(|_| m.sample(&mut r)).collect();
                let e = empirical_wcre(&Sample::new(v).unwrap(), &WeightFunction::unit(), Some(0.95), *t).unwrap();
                let (lo, hi) = e.bootstrap_ci.unwrap();
                lo <= 1.0 && 1.0 <= hi
            })
            .count();
        assert!(hits >= 90, "coverage {hits}/100");
    }

    #[test]
    fn convergence_examples() {
        let spec = QuadratureSpec::default();
        let rows = convergence_experiment(&UnivariateModel::exponential(1.0), &WeightFunction::unit(), &[100, 1000, 10_000], 50, 0, &spec).unwrap();
        assert!(rows[0].mean_abs_err > rows[1].mean_abs_err && rows[1].mean_abs_err > rows[2].mean_abs_err);
        assert!(rows[2].mean_abs_err < 0.02);
        assert!(is_nonincreasing(&rows));
        let tiny = convergence_experiment(&UnivariateModel::uniform(0.0, 1e-9), &WeightFunction::unit(), &[10, 100], 5, 0, &spec).unwrap();
        assert!(tiny.iter().all(|r| r.mean_abs_err < 1e-9));
        let pw = convergence_experiment(&UnivariateModel::exponential(1.0), &WeightFunction::power(1.0), &[1000, 10_000], 30, 3, &spec).unwrap();
        assert!(pw[1].mean_abs_err < pw[0].mean_abs_err);
        let growing = WeightFunction::exponential(-2.0);
        assert!(matches!(
            convergence_experiment(&UnivariateModel::exponential(1.0), &growing, &[10], 2, 0, &spec),
            Err(Error::Divergent(_))
        ));
        assert!(convergence_experiment(&UnivariateModel::exponential(1.0), &WeightFunction::unit(), &[100, 10], 2, 0, &spec).is_err());
    }

    #[test]
    fn csv_reader() {
        let text = "# lifetimes\nvalue\n1.5\n\n0.5  # trailing\n2\n";
        let s = read_sample(text.as_bytes()).unwrap();
        assert_eq!(s.values(), &[0.5, 1.5, 2.0]);
        let err = read_sample("1\nabc\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = read_sample("1\n-2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(read_sample("1,2\n".as_bytes()).unwrap_err().to_string().contains("line 1"));
        assert!(read_sample("# nothing\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn scale_equivariance(v in prop::collection::vec(0.0f64..10.0, 1..40), c in 0.1f64..10.0) {
            let one = WeightFunction::unit();
            let a = empirical_wcre(&sample(&v), &one, None, 0).unwrap().value;
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let b = empirical_wcre(&sample(&scaled), &one, None, 0).unwrap().value;
            prop_assert!((b - c * a).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        #[test]
        fn ties_add_nothing(v in prop::collection::vec(0.0f64..10.0, 2..30), k in 1usize..4) {
            // repeating every point k times keeps the step levels and widths
            let one = WeightFunction::unit();
            let rep: Vec<f64> = v.iter().flat_map(|x| std::iter::repeat(*x).take(k)).collect();
            let a = empirical_wcre(&sample(&v), &one, None, 0).unwrap().value;
            let b = empirical_wcre(&sample(&rep), &one, None, 0).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            prop_assert!(a >= 0.0);
        }
    }
}
