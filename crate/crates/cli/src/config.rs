//! Run configuration: everything a command needs to reproduce its outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sisomap_core::stability::{parse_schedule, ErrorMode};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Generate,
    Curve,
    Stream,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Swissroll,
    Idx,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    /// Sample count for generated data.
    pub n: usize,
    pub noise_sd: f64,
    pub input: Option<PathBuf>,
    /// IDX label file; guessed from the image file name when absent.
    pub labels: Option<PathBuf>,
    pub label: Option<u8>,
    pub max_rows: Option<usize>,
    /// Ground-truth coordinates for a CSV dataset (enables direct mode).
    pub ground_truth: Option<PathBuf>,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            kind: DatasetKind::Swissroll,
            n: 10_000,
            noise_sd: 0.0,
            input: None,
            labels: None,
            label: None,
            max_rows: None,
            ground_truth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub dataset: DatasetSpec,
    pub k: usize,
    pub dim: usize,
    pub mode: ErrorMode,
    /// `start:stop:step`, inclusive.
    pub schedule: String,
    pub window: usize,
    pub threshold: f64,
    pub trials: usize,
    pub ref_size: usize,
    pub seed: u64,
    /// Batch size for `stream`/`bench`; `stream` detects it when absent.
    pub batch_size: Option<usize>,
    /// Stream points to map (default: all remaining).
    pub stream_size: Option<usize>,
    /// Stream lengths swept by `bench`.
    pub stream_sizes: Vec<usize>,
    /// Stream points mapped and discarded before timing.
    pub warmup: usize,
    pub baseline: bool,
    pub single_thread: bool,
    pub out: PathBuf,
}

pub const DEFAULT_BENCH_BATCH: usize = 2000;

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            dataset: DatasetSpec::default(),
            k: 10,
            dim: 2,
            mode: ErrorMode::Direct,
            schedule: "100:3000:100".into(),
            window: sisomap_core::stability::DEFAULT_WINDOW,
            threshold: sisomap_core::stability::DEFAULT_THRESHOLD,
            trials: sisomap_core::stability::DEFAULT_TRIALS,
            ref_size: sisomap_core::stability::DEFAULT_REF_SIZE,
            seed: 0,
            batch_size: None,
            stream_size: None,
            stream_sizes: vec![1000, 2000, 4000],
            warmup: 100,
            baseline: true,
            single_thread: false,
            out: PathBuf::from("out"),
        }
    }

    pub fn schedule_values(&self) -> Result<Vec<usize>, CliError> {
        parse_schedule(&self.schedule).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Argument checks that need no data; all failures are usage errors.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.k == 0 {
            return usage("--k must be >= 1".into());
        }
        if self.dim == 0 {
            return usage("--dim must be >= 1".into());
        }
        if self.trials == 0 {
            return usage("--trials must be >= 1".into());
        }
        if self.window < 2 {
            return usage(format!("--window must be >= 2, got {}", self.window));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return usage(format!("--threshold must be positive, got {}", self.threshold));
        }
        let ds = &self.dataset;
        if !(ds.noise_sd >= 0.0 && ds.noise_sd.is_finite()) {
            return usage(format!("--noise-sd must be >= 0, got {}", ds.noise_sd));
        }
        if ds.kind == DatasetKind::Swissroll && ds.n == 0 {
            return usage("--n must be >= 1".into());
        }
        if ds.kind != DatasetKind::Swissroll && ds.input.is_none() {
            return usage("--input is required for idx and csv datasets".into());
        }
        if self.command == Command::Generate && ds.kind != DatasetKind::Swissroll {
            return usage("generate only supports --dataset swissroll".into());
        }
        let needs_curve = self.command == Command::Curve
            || (self.command == Command::Stream && self.batch_size.is_none());
        if needs_curve {
            let schedule = self.schedule_values()?;
            if schedule.len() < self.window + 1 {
                return usage(format!(
                    "schedule {} has {} points; window {} needs at least {}",
                    self.schedule,
                    schedule.len(),
                    self.window,
                    self.window + 1
                ));
            }
        }
        if self.command == Command::Bench && self.stream_sizes.is_empty() {
            return usage("--stream-sizes must list at least one size".into());
        }
        Ok(())
    }

    /// SHA-256 of the configuration with output-only fields blanked, so two
    /// runs that must produce identical numbers share a hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.single_thread = false;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
