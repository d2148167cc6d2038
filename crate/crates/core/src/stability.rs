//! Error-versus-sample-size curves, transition detection and power-law fits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::dense::fmt_f64;
use crate::embed::isomap;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::procrustes::{direct_error, reference_sample_error_for, ReferenceSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMode {
    /// Procrustes error against known ground truth.
    Direct,
    /// Procrustes error between two embeddings of a shared reference set.
    #[serde(rename = "refsample")]
    ReferenceSample,
}

impl fmt::Display for ErrorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorMode::Direct => "direct",
            ErrorMode::ReferenceSample => "refsample",
        })
    }
}

impl FromStr for ErrorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(ErrorMode::Direct),
            "refsample" | "reference_sample" => Ok(ErrorMode::ReferenceSample),
            other => Err(Error::invalid(format!("unknown error mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointFlag {
    Ok,
    /// Some trials failed (disconnected graph); the mean covers the rest.
    Partial,
    /// Every trial failed; the point carries no error value.
    Dropped,
}

impl fmt::Display for PointFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointFlag::Ok => "ok",
            PointFlag::Partial => "partial",
            PointFlag::Dropped => "dropped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    /// Mean over successful trials; NaN for dropped points.
    pub mean_error: f64,
    pub sd_error: f64,
    /// Successful trials.
    pub trials: usize,
    pub failed: usize,
    pub flag: PointFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub mode: ErrorMode,
    pub points: Vec<CurvePoint>,
}

impl ErrorCurve {
    /// Builds a curve from `(n, error)` pairs, e.g. for analysis of external
    /// measurements.
    pub fn from_pairs(mode: ErrorMode, pairs: &[(usize, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(n, e)| CurvePoint {
                n,
                mean_error: e,
                sd_error: 0.0,
                trials: 1,
                failed: 0,
                flag: PointFlag::Ok,
            })
            .collect();
        let curve = Self { mode, points };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<()> {
        if self.points.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(Error::invalid("curve sample sizes must be strictly increasing"));
        }
        if self.usable().any(|p| !(p.mean_error >= 0.0)) {
            return Err(Error::invalid("curve errors must be non-negative"));
        }
        Ok(())
    }

    /// Points with at least one successful trial.
    pub fn usable(&self) -> impl Iterator<Item = &CurvePoint> + '_ {
        self.points.iter().filter(|p| p.flag != PointFlag::Dropped)
    }

    pub fn pairs(&self) -> Vec<(usize, f64)> {
        self.usable().map(|p| (p.n, p.mean_error)).collect()
    }

    pub fn error_at(&self, n: usize) -> Option<f64> {
        self.usable().find(|p| p.n == n).map(|p| p.mean_error)
    }

    /// CSV with header `n,mean_error,sd_error,trials,mode,flag`.
    pub fn write_csv<W: Write>(&self, mut w: W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "n,mean_error,sd_error,trials,mode,flag")?;
        for p in &self.points {
            let (mean, sd) = if p.flag == PointFlag::Dropped {
                (String::new(), String::new())
            } else {
                (fmt_f64(p.mean_error), fmt_f64(p.sd_error))
            };
            writeln!(w, "{},{},{},{},{},{}", p.n, mean, sd, p.trials, self.mode, p.flag)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub schedule: Vec<usize>,
    pub mode: ErrorMode,
    pub k: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    /// Reference set size `|F|` for reference-sample mode.
    pub ref_size: usize,
}

pub const DEFAULT_TRIALS: usize = 10;
pub const DEFAULT_REF_SIZE: usize = 100;

impl CurveConfig {
    pub fn new(schedule: Vec<usize>, mode: ErrorMode, k: usize, d: usize) -> Self {
        Self { schedule, mode, k, d, trials: DEFAULT_TRIALS, seed: 0, ref_size: DEFAULT_REF_SIZE }
    }

    /// Rows a dataset needs to support this sweep.
    pub fn required_rows(&self) -> usize {
        let top = self.schedule.iter().copied().max().unwrap_or(0);
        match self.mode {
            ErrorMode::Direct => top,
            ErrorMode::ReferenceSample => self.ref_size + 2 * top,
        }
    }
}

/// Parses `start:stop:step` (inclusive stop) into a schedule.
pub fn parse_schedule(spec: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::invalid(format!("bad schedule {spec:?}, expected start:stop:step")))?;
    match nums.as_slice() {
        &[start, stop, step] if step > 0 && start > 0 && start <= stop => {
            Ok((start..=stop).step_by(step).collect())
        }
        _ => Err(Error::invalid(format!("bad schedule {spec:?}, expected start:stop:step"))),
    }
}

/// SplitMix64 finalizer, used to derive independent per-trial seeds.
fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Row permutation used by trial `trial` of a sweep.
pub fn trial_permutation(rows: usize, seed: u64, trial: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix(seed, trial as u64 + 1)));
    order
}

/// Runs the chosen error metric `trials` times for each schedule entry.
///
/// Each trial draws one random permutation of the rows; the subsample for
/// size `n` is a prefix of it, so within a trial the samples grow the way a
/// stream does. In reference-sample mode the schedule gives `|R₁| = |R₂|`:
/// `F` is the first `ref_size` rows of the permutation and the two sample
/// sets are prefixes of two disjoint later blocks.
///
/// Trials whose neighbor graph is disconnected are recorded as failures; a
/// point is dropped only when all of its trials fail.
pub fn error_curve(
    x: &DataMatrix,
    ground_truth: Option<&DMatrix<f64>>,
    cfg: &CurveConfig,
) -> Result<ErrorCurve> {
    if cfg.schedule.is_empty() {
        return Err(Error::invalid("empty schedule"));
    }
    if cfg.schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("schedule must be strictly increasing"));
    }
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let smallest = cfg.schedule[0];
    if smallest <= cfg.k || smallest <= cfg.d {
        return Err(Error::invalid(format!(
            "schedule starts at {smallest}, needs more than k={} and d={} points",
            cfg.k, cfg.d
        )));
    }
    let needed = cfg.required_rows();
    if needed > x.rows() {
        return Err(Error::invalid(format!(
            "schedule needs {needed} rows but the dataset has {}",
            x.rows()
        )));
    }
    match (cfg.mode, ground_truth) {
        (ErrorMode::Direct, None) => {
            return Err(Error::invalid("direct mode requires ground truth"))
        }
        (ErrorMode::Direct, Some(t)) if t.nrows() != x.rows() => {
            return Err(Error::DimensionMismatch { expected: x.rows(), found: t.nrows() })
        }
        (ErrorMode::ReferenceSample, Some(_)) => {
            return Err(Error::invalid("reference-sample mode does not use ground truth"))
        }
        _ => {}
    }

    let perms: Vec<Vec<usize>> =
        (0..cfg.trials).map(|t| trial_permutation(x.rows(), cfg.seed, t)).collect();
    let top = *cfg.schedule.last().expect("non-empty");
    let cells: Vec<(usize, usize)> = (0..cfg.schedule.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let results: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(p, t)| {
            let n = cfg.schedule[p];
            let perm = &perms[t];
            match cfg.mode {
                ErrorMode::Direct => {
                    let idx = &perm[..n];
                    let sub = x.select_rows(idx)?;
                    let truth = ground_truth.expect("checked above").select_rows(idx);
                    let e = isomap(&sub, cfg.k, cfg.d)?;
                    direct_error(&truth, &e.coords)
                }
                ErrorMode::ReferenceSample => {
                    let f = cfg.ref_size;
                    let split = ReferenceSplit {
                        reference: perm[..f].to_vec(),
                        sample_1: perm[f..f + n].to_vec(),
                        sample_2: perm[f + top..f + top + n].to_vec(),
                    };
                    reference_sample_error_for(x, &split, cfg.k, cfg.d)
                }
            }
        })
        .collect();

    let mut points = Vec::with_capacity(cfg.schedule.len());
    let mut results = results.into_iter();
    for &n in &cfg.schedule {
        let mut ok = Vec::new();
        let mut failed = 0;
        for (t, r) in results.by_ref().take(cfg.trials).enumerate() {
            match r {
                Ok(e) => ok.push(e),
                Err(err) if is_recoverable(&err) => {
                    log::warn!("n={n} trial {t}: {err}");
                    failed += 1;
                }
                Err(err) => return Err(err),
            }
        }
        let (mean, sd) = mean_sd(&ok);
        let flag = match (ok.len(), failed) {
            (0, _) => PointFlag::Dropped,
            (_, 0) => PointFlag::Ok,
            _ => PointFlag::Partial,
        };
        points.push(CurvePoint { n, mean_error: mean, sd_error: sd, trials: ok.len(), failed, flag });
    }
    Ok(ErrorCurve { mode: cfg.mode, points })
}

fn is_recoverable(err: &Error) -> bool {
    match err {
        Error::Disconnected { .. } | Error::Degenerate(_) | Error::Singular(_) => true,
        Error::ReferenceRun { source, .. } => is_recoverable(source),
        _ => false,
    }
}

/// Mean and sample standard deviation (0 for fewer than two values).
fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

pub const DEFAULT_WINDOW: usize = 3;
pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub transition_n: Option<usize>,
    pub window_w: usize,
    pub threshold: f64,
    pub rule: String,
}

/// Relative change arriving at point `j` (j ≥ 1); a zero predecessor counts
/// as converged.
fn relative_change(pairs: &[(usize, f64)], j: usize) -> f64 {
    let prev = pairs[j - 1].1;
    if prev == 0.0 {
        0.0
    } else {
        (pairs[j].1 - prev).abs() / prev
    }
}

/// First sample size `n_i` such that the relative change into each of the
/// `w` points `n_i, …, n_{i+w−1}` is below `threshold`. The first point of
/// the curve has no predecessor and imposes no constraint.
pub fn detect_transition(curve: &ErrorCurve, w: usize, threshold: f64) -> Result<TransitionReport> {
    if w < 2 {
        return Err(Error::invalid(format!("window must be >= 2, got {w}")));
    }
    if !(threshold > 0.0) {
        return Err(Error::invalid(format!("threshold must be > 0, got {threshold}")));
    }
    let pairs = curve.pairs();
    if pairs.len() < w + 1 {
        return Err(Error::invalid(format!(
            "curve has {} usable points, window {w} needs at least {}",
            pairs.len(),
            w + 1
        )));
    }
    let transition_n = (0..=pairs.len() - w)
        .find(|&i| (i.max(1)..i + w).all(|j| relative_change(&pairs, j) < threshold))
        .map(|i| pairs[i].0);
    Ok(TransitionReport {
        transition_n,
        window_w: w,
        threshold,
        rule: format!(
            "first n_i with |e_j - e_(j-1)| / e_(j-1) < {threshold} for j = i..i+{}",
            w - 1
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Slope of `ln ε` against `ln n`.
    pub exponent: f64,
    /// Natural-log intercept, `ε ≈ exp(intercept)·n^exponent`.
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

pub const DEFAULT_HEAD_FRACTION: f64 = 0.5;

/// Least-squares fit of `ln ε = intercept + exponent·ln n` over the first
/// `head_fraction` of the usable curve points.
pub fn fit_power_law(curve: &ErrorCurve, head_fraction: f64) -> Result<PowerLawFit> {
    if !(head_fraction > 0.0 && head_fraction <= 1.0) {
        return Err(Error::invalid(format!("head fraction must be in (0, 1], got {head_fraction}")));
    }
    let pairs = curve.pairs();
    let take = ((pairs.len() as f64) * head_fraction).ceil() as usize;
    fit_log_log(&pairs[..take.min(pairs.len())])
}

pub fn fit_log_log(pairs: &[(usize, f64)]) -> Result<PowerLawFit> {
    if pairs.len() < 3 {
        return Err(Error::invalid(format!("power-law fit needs >= 3 points, got {}", pairs.len())));
    }
    if let Some(&(n, e)) = pairs.iter().find(|p| !(p.1 > 0.0) || p.0 == 0) {
        return Err(Error::invalid(format!("power-law fit needs positive values, got ({n}, {e})")));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (exponent, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(PowerLawFit { exponent, intercept, r_squared, points_used: pairs.len() })
}

/// Ordinary least squares `y = a + b·x`; returns `(b, a, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_swiss_roll;
    use crate::procrustes::direct_error;
    use proptest::prelude::*;

    fn curve(pairs: &[(usize, f64)]) -> ErrorCurve {
        ErrorCurve::from_pairs(ErrorMode::Direct, pairs).unwrap()
    }

    #[test]
    fn transition_hand_example() {
        let c = curve(&[
            (100, 0.50),
            (200, 0.30),
            (300, 0.20),
            (400, 0.105),
            (500, 0.100),
            (600, 0.101),
            (700, 0.099),
        ]);
        let r = detect_transition(&c, 2, 0.05).unwrap();
        assert_eq!(r.transition_n, Some(500));
    }

    #[test]
    fn flat_curve_transitions_at_start() {
        let c = curve(&[(10, 0.2), (20, 0.2), (30, 0.2), (40, 0.2)]);
        assert_eq!(detect_transition(&c, 3, 0.05).unwrap().transition_n, Some(10));
    }

    #[test]
    fn geometric_decay_never_transitions() {
        let pairs: Vec<(usize, f64)> = (0..12).map(|i| (100 * (i + 1), 0.5f64.powi(i as i32))).collect();
        assert_eq!(detect_transition(&curve(&pairs), 3, 0.05).unwrap().transition_n, None);
    }

    #[test]
    fn zero_error_counts_as_converged() {
        let c = curve(&[(1, 0.4), (2, 0.0), (3, 0.0), (4, 0.0)]);
        assert_eq!(detect_transition(&c, 2, 0.05).unwrap().transition_n, Some(3));
    }

    #[test]
    fn transition_preconditions() {
        let c = curve(&[(1, 0.4), (2, 0.3), (3, 0.2)]);
        assert!(detect_transition(&c, 3, 0.05).is_err());
        assert!(detect_transition(&c, 1, 0.05).is_err());
        assert!(detect_transition(&c, 2, 0.0).is_err());
    }

    #[test]
    fn exact_power_laws() {
        let pairs: Vec<(usize, f64)> = (1..10).map(|i| (i * 100, 1.0 / (i * 100) as f64)).collect();
        let fit = fit_power_law(&curve(&pairs), 1.0).unwrap();
        assert!((fit.exponent + 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let pairs: Vec<(usize, f64)> =
            (1..10).map(|i| (i * 50, 4.0 * ((i * 50) as f64).powf(-0.5))).collect();
        let fit = fit_power_law(&curve(&pairs), 1.0).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-9);
        assert!((fit.intercept - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn head_fraction_selects_prefix() {
        // Power law for the first half, flat afterwards.
        let pairs: Vec<(usize, f64)> = (1..=10)
            .map(|i| {
                let n = i * 100;
                (n, if i <= 5 { 100.0 / n as f64 } else { 0.2 })
            })
            .collect();
        let fit = fit_power_law(&curve(&pairs), 0.5).unwrap();
        assert_eq!(fit.points_used, 5);
        assert!((fit.exponent + 1.0).abs() < 1e-9);
    }

    #[test]
    fn power_law_rejects_bad_input() {
        assert!(fit_log_log(&[(1, 0.5), (2, 0.0), (3, 0.1)]).is_err());
        assert!(fit_log_log(&[(1, 0.5), (2, 0.1)]).is_err());
        let c = curve(&[(1, 0.5), (2, 0.4), (3, 0.3), (4, 0.2)]);
        assert!(fit_power_law(&c, 0.5).is_err());
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!(parse_schedule("100:500:100").unwrap(), vec![100, 200, 300, 400, 500]);
        assert_eq!(parse_schedule("5:5:1").unwrap(), vec![5]);
        assert!(parse_schedule("100:50:10").is_err());
        assert!(parse_schedule("1:10:0").is_err());
        assert!(parse_schedule("1:10").is_err());
    }

    #[test]
    fn single_point_curve_equals_metric() {
        let (x, gt) = gen_swiss_roll(400, 2, 0.0).unwrap();
        let mut cfg = CurveConfig::new(vec![300], ErrorMode::Direct, 10, 2);
        cfg.trials = 1;
        cfg.seed = 5;
        let c = error_curve(&x, Some(&gt.coords), &cfg).unwrap();
        let perm = trial_permutation(400, 5, 0);
        let idx = &perm[..300];
        let e = isomap(&x.select_rows(idx).unwrap(), 10, 2).unwrap();
        let want = direct_error(&gt.select_rows(idx).coords, &e.coords).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.points[0].mean_error, want);
        assert_eq!(c.points[0].sd_error, 0.0);
    }

    #[test]
    fn curve_is_deterministic_and_validated() {
        let (x, gt) = gen_swiss_roll(700, 3, 0.0).unwrap();
        let mut cfg = CurveConfig::new(vec![100, 200, 300], ErrorMode::Direct, 8, 2);
        cfg.trials = 2;
        let a = error_curve(&x, Some(&gt.coords), &cfg).unwrap();
        let b = error_curve(&x, Some(&gt.coords), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(error_curve(&x, None, &cfg).is_err());
        cfg.mode = ErrorMode::ReferenceSample;
        cfg.ref_size = 50;
        let r = error_curve(&x, None, &cfg).unwrap();
        assert_eq!(r.points.len(), 3);
        assert!(r.usable().all(|p| p.mean_error >= 0.0));
        cfg.schedule = vec![100, 400];
        assert!(error_curve(&x, None, &cfg).is_err(), "needs 850 rows");
        cfg.schedule = vec![200, 100];
        assert!(error_curve(&x, None, &cfg).is_err());
    }

    #[test]
    fn disconnected_trials_are_flagged() {
        // Two distant clusters: small subsamples with k=3 split apart.
        let mut rows = Vec::new();
        for i in 0..200 {
            let off = if i % 2 == 0 { 0.0 } else { 1e4 };
            rows.push([off + (i as f64 * 0.37).sin(), (i as f64 * 0.91).cos(), i as f64 * 1e-3]);
        }
        let x = DataMatrix::from_rows(&rows).unwrap();
        let mut cfg = CurveConfig::new(vec![20, 40], ErrorMode::ReferenceSample, 3, 2);
        cfg.trials = 2;
        cfg.ref_size = 10;
        let c = error_curve(&x, None, &cfg).unwrap();
        assert!(c.points.iter().all(|p| p.flag == PointFlag::Dropped && p.failed == 2));
        let mut buf = Vec::new();
        c.write_csv(&mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,mean_error,sd_error,trials,mode,flag\n"));
        assert!(text.contains("20,,,0,refsample,dropped"));
    }

    proptest! {
        #[test]
        fn larger_threshold_never_delays_transition(
            errs in proptest::collection::vec(0.01f64..1.0, 5..25),
            t1 in 0.001f64..0.5, t2 in 0.001f64..0.5, w in 2usize..4,
        ) {
            let pairs: Vec<(usize, f64)> = errs.iter().enumerate().map(|(i, &e)| (i + 1, e)).collect();
            let c = curve(&pairs);
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            let a = detect_transition(&c, w, lo).unwrap().transition_n;
            let b = detect_transition(&c, w, hi).unwrap().transition_n;
            match (a, b) {
                (Some(a), Some(b)) => prop_assert!(b <= a),
                (Some(_), None) => prop_assert!(false, "larger threshold lost the transition"),
                _ => {}
            }
        }
    }
}
