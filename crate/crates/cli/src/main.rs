use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sisomap_cli::{execute, CliError, Command, DatasetKind, DatasetSpec, RunConfig};
use sisomap_core::stability::ErrorMode;

/// Streaming Isomap: error curves, transition detection and out-of-sample
/// mapping.
#[derive(Parser)]
#[command(name = "sisomap", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Write a Swiss Roll dataset with ground truth and a manifest.
    Generate(Opts),
    /// Error curve over a sample-size schedule plus transition detection.
    Curve(Opts),
    /// Learn a batch manifold and map the rest of the data as a stream.
    Stream(Opts),
    /// Time batch + streaming against full Isomap.
    Bench(Opts),
    /// Re-execute a saved config.json.
    Rerun {
        config: PathBuf,
        /// Output directory (defaults to the one in the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, value_enum, default_value = "swissroll")]
    dataset: DatasetKind,
    /// Input file for idx or csv datasets.
    #[arg(long)]
    input: Option<PathBuf>,
    /// IDX label file (default: guessed from the image file name).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Keep only samples with this label.
    #[arg(long)]
    label: Option<u8>,
    #[arg(long)]
    max_rows: Option<usize>,
    /// Ground-truth coordinates for a csv dataset.
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Generated sample count.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    noise_sd: f64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// direct or refsample.
    #[arg(long, default_value = "direct")]
    mode: ErrorMode,
    /// start:stop:step, inclusive.
    #[arg(long, default_value = "100:3000:100")]
    schedule: String,
    #[arg(long, default_value_t = 3)]
    window: usize,
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Reference set size for refsample mode.
    #[arg(long, default_value_t = 100)]
    ref_size: usize,
    #[arg(long, env = "SISOMAP_SEED", default_value_t = 0)]
    seed: u64,
    /// Batch size; `stream` detects it from the error curve when omitted.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Number of stream points to map (default: all remaining).
    #[arg(long)]
    stream_size: Option<usize>,
    /// Stream lengths for `bench`.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
    stream_sizes: Vec<usize>,
    /// Untimed points mapped before `bench` starts measuring.
    #[arg(long, default_value_t = 100)]
    warmup: usize,
    /// Skip the full-Isomap baseline in `bench`.
    #[arg(long)]
    no_baseline: bool,
    /// Run all numerical work on one thread.
    #[arg(long)]
    single_thread: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Opts {
    fn into_config(self, command: Command) -> RunConfig {
        RunConfig {
            command,
            dataset: DatasetSpec {
                kind: self.dataset,
                n: self.n,
                noise_sd: self.noise_sd,
                input: self.input,
                labels: self.labels,
                label: self.label,
                max_rows: self.max_rows,
                ground_truth: self.ground_truth,
            },
            k: self.k,
            dim: self.dim,
            mode: self.mode,
            schedule: self.schedule,
            window: self.window,
            threshold: self.threshold,
            trials: self.trials,
            ref_size: self.ref_size,
            seed: self.seed,
            batch_size: self.batch_size,
            stream_size: self.stream_size,
            stream_sizes: self.stream_sizes,
            warmup: self.warmup,
            baseline: !self.no_baseline,
            single_thread: self.single_thread,
            out: self.out,
        }
    }
}

fn config(cli: Cli) -> Result<RunConfig, CliError> {
    Ok(match cli.command {
        Sub::Generate(o) => o.into_config(Command::Generate),
        Sub::Curve(o) => o.into_config(Command::Curve),
        Sub::Stream(o) => o.into_config(Command::Stream),
        Sub::Bench(o) => o.into_config(Command::Bench),
        Sub::Rerun { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(out) = out {
                cfg.out = out;
            }
            cfg
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match config(cli).and_then(|cfg| execute(&cfg)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sisomap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
