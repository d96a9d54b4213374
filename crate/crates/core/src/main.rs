use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use unimodal_dbscan::io::TableFormat;
use unimodal_dbscan::pipeline::{run, Command, OracleOptions, RunConfig, RunReport, SynthOptions};
use unimodal_dbscan::search::TuneConfig;
use unimodal_dbscan::Metric;

/// DBSCAN with automatic radius selection.
///
/// Thread count follows RAYON_NUM_THREADS; results do not depend on it.
#[derive(Debug, Parser)]
#[command(name = "unimodal-dbscan", version)]
struct Cli {
    /// Command to run.
    #[arg(value_enum, required_unless_present = "replay")]
    command: Option<Command>,

    /// Data matrix (CSV/TSV, one point per row); predicted labels for `eval`;
    /// a curve file for `dip --from-curve`.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Ground-truth labels for `eval`, one integer per line, -1 for noise.
    #[arg(long)]
    labels: Option<PathBuf>,

    #[arg(long, default_value = "euclidean")]
    metric: Metric,

    #[arg(long, default_value_t = RunConfig::DEFAULT_MIN_PTS)]
    min_pts: usize,

    #[arg(long, default_value_t = TuneConfig::DEFAULT_ITR)]
    itr: usize,

    #[arg(long, default_value_t = TuneConfig::DEFAULT_ALPHA)]
    alpha: f64,

    /// Repeats averaged by `tse`.
    #[arg(long, default_value_t = TuneConfig::DEFAULT_M)]
    m: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Noise fraction above which a single cluster counts as zero.
    #[arg(long, default_value_t = TuneConfig::DEFAULT_CHANCE_NOISE_THRESHOLD)]
    chance_noise_threshold: f64,

    /// Radius for `dbscan`.
    #[arg(long)]
    epsilon: Option<f64>,

    #[arg(long, default_value_t = RunConfig::DEFAULT_GRID_SIZE)]
    grid_size: usize,

    #[arg(long, default_value_t = RunConfig::DEFAULT_N_BOOT)]
    n_boot: usize,

    /// Output directory [default: out].
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t)]
    format: TableFormat,

    /// `dip`: treat --input as a curve.csv produced by `sweep`.
    #[arg(long)]
    from_curve: bool,

    /// `synth`: number of blobs.
    #[arg(long, default_value_t = SynthOptions::default().k)]
    k: usize,

    /// `synth`: points per blob.
    #[arg(long, default_value_t = SynthOptions::default().per_cluster)]
    per_cluster: usize,

    /// `synth`: dimensions.
    #[arg(long, default_value_t = SynthOptions::default().dims)]
    dims: usize,

    /// `synth`: minimum distance between blob centers.
    #[arg(long, default_value_t = SynthOptions::default().separation)]
    separation: f64,

    /// `oracle`: points per dataset for the min_pts = 2 checks.
    #[arg(long, default_value_t = OracleOptions::default().n)]
    oracle_n: usize,

    /// `oracle`: Monte Carlo trials for the min_pts = 2 checks.
    #[arg(long, default_value_t = OracleOptions::default().trials)]
    trials: usize,

    /// `oracle`: points per dataset for the concentration checks.
    #[arg(long, default_value_t = OracleOptions::default().concentration_n)]
    concentration_n: usize,

    /// `oracle`: trials per concentration check.
    #[arg(long, default_value_t = OracleOptions::default().concentration_trials)]
    concentration_trials: usize,

    /// Re-run the configuration recorded in a report.json.
    #[arg(long, conflicts_with = "command")]
    replay: Option<PathBuf>,
}

impl Cli {
    fn into_config(self) -> Result<RunConfig, unimodal_dbscan::Error> {
        if let Some(path) = &self.replay {
            let mut config = RunReport::load(path)?.config;
            if let Some(out) = self.out {
                config.output_dir = out;
            }
            return Ok(config);
        }
        let command = self.command.expect("clap enforces a command");
        Ok(RunConfig {
            command,
            input_path: self.input,
            labels_path: self.labels,
            tune: TuneConfig {
                min_pts: self.min_pts,
                itr: self.itr,
                alpha: self.alpha,
                m: self.m,
                seed: self.seed,
                metric: self.metric,
                chance_noise_threshold: self.chance_noise_threshold,
            },
            epsilon: self.epsilon,
            grid_size: self.grid_size,
            n_boot: self.n_boot,
            output_dir: self.out.unwrap_or_else(|| PathBuf::from("out")),
            format: self.format,
            from_curve: self.from_curve,
            synth: SynthOptions {
                k: self.k,
                per_cluster: self.per_cluster,
                dims: self.dims,
                separation: self.separation,
            },
            oracle: OracleOptions {
                n: self.oracle_n,
                trials: self.trials,
                concentration_n: self.concentration_n,
                concentration_trials: self.concentration_trials,
            },
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli
        .into_config()
        .and_then(|config| run(&config).map(|report| (config, report)));
    match result {
        Ok((config, report)) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} finished in {:.3}s; outputs in {}",
                report.command.name(),
                report.wall_clock_seconds,
                config.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
