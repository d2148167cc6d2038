//! Timing harness: Isomap on a batch plus S-Isomap on the stream, against
//! full Isomap on batch and stream together.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sisomap_core::stability::linear_fit;
use sisomap_core::stream::{map_point, run_stream};
use sisomap_core::{isomap, make_stream, BatchModel};

use crate::commands::{prepare_out, write_json};
use crate::config::{RunConfig, DEFAULT_BENCH_BATCH};
use crate::dataset;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineInfo {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    pub worker_threads: usize,
    pub cpu_model: Option<String>,
}

impl MachineInfo {
    pub fn detect() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo").ok().and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|v| v.trim().to_string())
        });
        Self {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            worker_threads: rayon::current_num_threads(),
            cpu_model,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRun {
    pub m: usize,
    pub per_point_nanos: Vec<u64>,
    pub cumulative_nanos: u64,
    pub mean_point_nanos: f64,
    /// Batch Isomap plus the stream.
    pub s_isomap_nanos: u64,
    /// Full Isomap on batch and stream together.
    pub baseline_nanos: Option<u64>,
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub config_hash: String,
    pub machine: MachineInfo,
    pub batch_size: usize,
    pub batch_nanos: u64,
    pub warmup_points: usize,
    pub runs: Vec<BenchRun>,
    /// Least-squares slope (ns per point) and r² of cumulative time against m.
    pub linearity_slope: Option<f64>,
    pub linearity_r2: Option<f64>,
    /// Mean per-point time at the largest m over that at the smallest.
    pub flatness_ratio: Option<f64>,
}

fn nanos(start: Instant) -> u64 {
    start.elapsed().as_nanos() as u64
}

pub fn bench(cfg: &RunConfig) -> Result<BenchReport, CliError> {
    prepare_out(cfg)?;
    let batch_size = cfg.batch_size.unwrap_or(DEFAULT_BENCH_BATCH);
    let mut sizes = cfg.stream_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let max_m = *sizes.last().expect("validated non-empty");
    let data = dataset::load(&cfg.dataset, cfg.seed)?;
    let need = batch_size + max_m.max(1);
    if data.x.rows() < need {
        return Err(CliError::Usage(format!(
            "bench needs {need} rows (batch {batch_size} + stream {max_m}), dataset has {}",
            data.x.rows()
        )));
    }
    let src = make_stream(&data.x, batch_size, cfg.seed)?;

    let start = Instant::now();
    let model = BatchModel::build(src.batch.clone(), cfg.k, cfg.dim)?;
    let batch_nanos = nanos(start);

    // Warm-up: touch the model and code paths; results are discarded.
    for row in src.remainder.iter_rows().take(cfg.warmup) {
        std::hint::black_box(map_point(&model, row)?);
    }

    let mut runs = Vec::with_capacity(sizes.len());
    for &m in &sizes {
        let stream = src.remainder.iter_rows().take(m);
        let mapping = run_stream(&model, stream)?;
        let cumulative = mapping.total_nanos();
        let baseline_nanos = if cfg.baseline {
            let idx: Vec<usize> =
                src.batch_indices().iter().chain(&src.remainder_indices()[..m]).copied().collect();
            let all = data.x.select_rows(&idx)?;
            let start = Instant::now();
            std::hint::black_box(isomap(&all, cfg.k, cfg.dim)?);
            Some(nanos(start))
        } else {
            None
        };
        let total = batch_nanos + cumulative;
        runs.push(BenchRun {
            m,
            mean_point_nanos: if m == 0 { 0.0 } else { cumulative as f64 / m as f64 },
            per_point_nanos: mapping.per_point_nanos,
            cumulative_nanos: cumulative,
            s_isomap_nanos: total,
            baseline_nanos,
            speedup: baseline_nanos.map(|b| b as f64 / total as f64),
        });
    }

    let (linearity_slope, linearity_r2) = if runs.len() >= 2 {
        let xs: Vec<f64> = runs.iter().map(|r| r.m as f64).collect();
        let ys: Vec<f64> = runs.iter().map(|r| r.cumulative_nanos as f64).collect();
        let (slope, _, r2) = linear_fit(&xs, &ys);
        (Some(slope), Some(r2))
    } else {
        (None, None)
    };
    let nonzero: Vec<&BenchRun> = runs.iter().filter(|r| r.m > 0).collect();
    let flatness_ratio = match (nonzero.first(), nonzero.last()) {
        (Some(a), Some(b)) if nonzero.len() >= 2 => Some(b.mean_point_nanos / a.mean_point_nanos),
        _ => None,
    };
    let report = BenchReport {
        config_hash: cfg.hash(),
        machine: MachineInfo::detect(),
        batch_size,
        batch_nanos,
        warmup_points: cfg.warmup.min(src.remainder.rows()),
        runs,
        linearity_slope,
        linearity_r2,
        flatness_ratio,
    };
    write_json(&cfg.out.join("bench.json"), &report)?;
    Ok(report)
}
