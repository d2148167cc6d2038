use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sisomap_core::data::dense::write_rows;
use sisomap_core::data::ParamRanges;
use sisomap_core::embed::residual_variance;
use sisomap_core::stability::{
    detect_transition, error_curve, fit_power_law, CurveConfig, ErrorCurve, ErrorMode,
    PowerLawFit, TransitionReport, DEFAULT_HEAD_FRACTION,
};
use sisomap_core::stream::{map_point_detailed, run_stream};
use sisomap_core::{make_stream, procrustes_align, BatchModel, DMatrix};

use crate::config::RunConfig;
use crate::dataset::{self, Loaded};
use crate::CliError;

pub(crate) fn header(cfg: &RunConfig) -> String {
    format!("config={}", cfg.hash())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Creates the output directory and stores the config next to the outputs.
pub(crate) fn prepare_out(cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out)?;
    cfg.save(&cfg.out.join("config.json"))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub n: usize,
    pub seed: u64,
    pub noise_sd: f64,
    pub amplitude: f64,
    pub param_ranges: ParamRanges,
    pub files: Vec<String>,
}

pub fn generate(cfg: &RunConfig) -> Result<String, CliError> {
    prepare_out(cfg)?;
    let roll = dataset::swiss_roll(&cfg.dataset, cfg.seed);
    let (x, truth) = roll.generate()?;
    let head = header(cfg);
    sisomap_core::data::dense::write_csv(create(&cfg.out.join("data.csv"))?, Some(&head), &x)?;
    let rows = matrix_rows(&truth.coords);
    write_rows(
        create(&cfg.out.join("ground_truth.csv"))?,
        Some(&head),
        rows.iter().map(|r| r.as_slice()),
    )?;
    let manifest = Manifest {
        config_hash: cfg.hash(),
        n: roll.n,
        seed: roll.seed,
        noise_sd: roll.noise_sd,
        amplitude: roll.amplitude,
        param_ranges: roll.ranges,
        files: vec!["data.csv".into(), "ground_truth.csv".into()],
    };
    write_json(&cfg.out.join("manifest.json"), &manifest)?;
    Ok(format!("generate: {} samples written to {}", x.rows(), cfg.out.display()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveReport {
    pub config_hash: String,
    pub mode: ErrorMode,
    pub points: usize,
    pub dropped: usize,
    pub transition: TransitionReport,
    pub power_law: Option<PowerLawFit>,
}

fn curve_config(cfg: &RunConfig) -> Result<CurveConfig, CliError> {
    let mut c = CurveConfig::new(cfg.schedule_values()?, cfg.mode, cfg.k, cfg.dim);
    c.trials = cfg.trials;
    c.seed = cfg.seed;
    c.ref_size = cfg.ref_size;
    Ok(c)
}

fn run_curve(cfg: &RunConfig, data: &Loaded) -> Result<(ErrorCurve, CurveReport), CliError> {
    let cc = curve_config(cfg)?;
    let truth = match cfg.mode {
        ErrorMode::Direct => Some(data.truth.as_ref().ok_or_else(|| {
            CliError::Usage("direct mode needs ground truth (swissroll or --ground-truth)".into())
        })?),
        ErrorMode::ReferenceSample => None,
    };
    let curve = error_curve(&data.x, truth, &cc)?;
    let usable = curve.usable().count();
    // Too many dropped points to apply the window: report no transition.
    let transition = if usable > cfg.window {
        detect_transition(&curve, cfg.window, cfg.threshold)?
    } else {
        TransitionReport {
            transition_n: None,
            window_w: cfg.window,
            threshold: cfg.threshold,
            rule: format!("only {usable} usable points"),
        }
    };
    let power_law = fit_power_law(&curve, DEFAULT_HEAD_FRACTION).ok();
    let report = CurveReport {
        config_hash: cfg.hash(),
        mode: cfg.mode,
        points: curve.points.len(),
        dropped: curve.points.len() - usable,
        transition,
        power_law,
    };
    Ok((curve, report))
}

pub fn curve(cfg: &RunConfig) -> Result<CurveReport, CliError> {
    prepare_out(cfg)?;
    let data = dataset::load(&cfg.dataset, cfg.seed)?;
    let (curve, report) = run_curve(cfg, &data)?;
    curve.write_csv(create(&cfg.out.join("curve.csv"))?, Some(&header(cfg)))?;
    write_json(&cfg.out.join("transition.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamQuality {
    /// Stacked error at most 1.25 times the batch-only error.
    pub stacked_within_1_25x: Option<bool>,
    /// Mean replay distance at most 1% of the embedding diameter.
    pub replay_within_1pct: bool,
    /// Mean least-squares residual below 10% of the target norm.
    pub residual_below_10pct: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamReport {
    pub config_hash: String,
    pub batch_size: usize,
    /// Set when the batch size came from transition detection.
    pub detected_batch_size: bool,
    pub stream_size: usize,
    pub k: usize,
    pub dim: usize,
    pub residual_variance: f64,
    pub normal_condition: f64,
    pub embedding_diameter: f64,
    pub batch_error: Option<f64>,
    pub stacked_error: Option<f64>,
    pub stream_error: Option<f64>,
    /// Mean distance between a re-mapped batch point and its batch
    /// coordinates, divided by the embedding diameter.
    pub replay_fidelity: f64,
    pub residual_ratio_mean: f64,
    pub residual_ratio_max: f64,
    pub mean_point_nanos: f64,
    pub quality: StreamQuality,
}

pub fn diameter(y: &DMatrix<f64>) -> f64 {
    use rayon::prelude::*;
    (0..y.nrows())
        .into_par_iter()
        .map(|i| {
            (i + 1..y.nrows()).map(|j| (y.row(i) - y.row(j)).norm()).fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Mean replay distance over all batch points, relative to the diameter.
pub fn replay_fidelity(model: &BatchModel) -> Result<f64, CliError> {
    let y = &model.embedding().coords;
    let diam = diameter(y);
    let mut total = 0.0;
    for (i, row) in model.batch().iter_rows().enumerate() {
        let m = map_point_detailed(model, row)?;
        total += m.coords.iter().enumerate().map(|(c, v)| (v - y[(i, c)]).powi(2)).sum::<f64>().sqrt();
    }
    Ok(total / model.n() as f64 / diam)
}

fn stack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

pub fn stream(cfg: &RunConfig) -> Result<StreamReport, CliError> {
    prepare_out(cfg)?;
    let data = dataset::load(&cfg.dataset, cfg.seed)?;
    let (batch_size, detected) = match cfg.batch_size {
        Some(b) => (b, false),
        None => {
            let (curve, report) = run_curve(cfg, &data)?;
            curve.write_csv(create(&cfg.out.join("curve.csv"))?, Some(&header(cfg)))?;
            write_json(&cfg.out.join("transition.json"), &report)?;
            let n = report.transition.transition_n.ok_or_else(|| {
                CliError::Core(sisomap_core::Error::Degenerate(
                    "no transition detected; pass --batch-size".into(),
                ))
            })?;
            (n, true)
        }
    };
    let n_total = data.x.rows();
    let (batch, batch_idx, stream_rows, stream_idx) = if batch_size == n_total {
        // Everything is batch; the stream is empty.
        let idx: Vec<usize> = (0..n_total).collect();
        (data.x.clone(), idx, None, Vec::new())
    } else {
        let src = make_stream(&data.x, batch_size, cfg.seed)?;
        let m = cfg.stream_size.unwrap_or(src.remainder.rows()).min(src.remainder.rows());
        let idx = src.remainder_indices()[..m].to_vec();
        let rows = (m > 0).then(|| src.remainder.select_rows(&(0..m).collect::<Vec<_>>())).transpose()?;
        (src.batch.clone(), src.batch_indices().to_vec(), rows, idx)
    };

    let model = BatchModel::build(batch, cfg.k, cfg.dim)?;
    let mapping = match &stream_rows {
        Some(rows) => run_stream(&model, rows.iter_rows())?,
        None => run_stream(&model, std::iter::empty::<&[f64]>())?,
    };
    let y_b = &model.embedding().coords;

    let head = header(cfg);
    model.embedding().write_csv(create(&cfg.out.join("batch.csv"))?, Some(&head))?;
    mapping.write_csv(create(&cfg.out.join("stream.csv"))?, Some(&head))?;

    let (batch_error, stacked_error, stream_error) = match &data.truth {
        Some(t) => {
            let tb = t.select_rows(&batch_idx);
            let batch_err = procrustes_align(&tb, y_b)?.error;
            if mapping.is_empty() {
                (Some(batch_err), Some(batch_err), None)
            } else {
                let ts = t.select_rows(&stream_idx);
                let stacked = procrustes_align(&stack(&tb, &ts), &stack(y_b, &mapping.coords))?.error;
                let alone = procrustes_align(&ts, &mapping.coords).ok().map(|a| a.error);
                (Some(batch_err), Some(stacked), alone)
            }
        }
        None => (None, None, None),
    };

    let ratios: Vec<f64> = mapping
        .residuals
        .iter()
        .zip(&mapping.target_norms)
        .map(|(r, c)| if *c > 0.0 { r / c } else { 0.0 })
        .collect();
    let (ratio_mean, ratio_max) = if ratios.is_empty() {
        (0.0, 0.0)
    } else {
        (ratios.iter().sum::<f64>() / ratios.len() as f64, ratios.iter().copied().fold(0.0, f64::max))
    };
    let replay = replay_fidelity(&model)?;
    let mean_point_nanos = if mapping.is_empty() {
        0.0
    } else {
        mapping.total_nanos() as f64 / mapping.len() as f64
    };
    let report = StreamReport {
        config_hash: cfg.hash(),
        batch_size: model.n(),
        detected_batch_size: detected,
        stream_size: mapping.len(),
        k: cfg.k,
        dim: cfg.dim,
        residual_variance: residual_variance(model.geodesics(), model.embedding())?,
        normal_condition: model.normal_condition(),
        embedding_diameter: diameter(y_b),
        batch_error,
        stacked_error,
        stream_error,
        replay_fidelity: replay,
        residual_ratio_mean: ratio_mean,
        residual_ratio_max: ratio_max,
        mean_point_nanos,
        quality: StreamQuality {
            stacked_within_1_25x: batch_error.zip(stacked_error).map(|(b, s)| s <= 1.25 * b),
            replay_within_1pct: replay <= 0.01,
            residual_below_10pct: ratio_mean < 0.1,
        },
    };
    write_json(&cfg.out.join("report.json"), &report)?;
    Ok(report)
}
