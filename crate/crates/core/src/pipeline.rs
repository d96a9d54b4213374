//! Command execution behind the CLI: validated configuration in, report and
//! output files out. Outputs are computed in full before anything is
//! written, then committed atomically.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curve::{curve_mode, default_grid, report_for_curve, strict_local_maxima, sweep_curve, unimodality_report};
use crate::data::DataMatrix;
use crate::dbscan::{count_clusters, dbscan, noise_fraction, DbscanParams, PointRole};
use crate::error::{Error, Result};
use crate::io::{
    format_curve, format_labels, format_matrix, load_labels, load_matrix, parse_curve, OutputSet, TableFormat,
};
use crate::metrics::{ari, exclude_noise, nmi, LabelPair, NMI_NORMALIZATION};
use crate::search::{ts_clustering, tse_clustering, tse_estimate, TuneConfig};
use crate::synth::{synth_blobs, BlobSpec};
use crate::theory::{
    concentration_experiment, expected_k_closed_form, mode_epsilon_closed_form, monte_carlo_curve, ConcentrationConfig,
    DEFAULT_MARGIN,
};

/// Version of the `report.json` schema.
pub const REPORT_VERSION: &str = "1";

pub const LABELS_FILE: &str = "labels.csv";
pub const CURVE_FILE: &str = "curve.csv";
pub const DATA_FILE: &str = "data.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Dbscan,
    Tune,
    Tse,
    Sweep,
    Dip,
    Oracle,
    Eval,
    Synth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dbscan => "dbscan",
            Command::Tune => "tune",
            Command::Tse => "tse",
            Command::Sweep => "sweep",
            Command::Dip => "dip",
            Command::Oracle => "oracle",
            Command::Eval => "eval",
            Command::Synth => "synth",
        }
    }

    fn takes_input(self) -> bool {
        !matches!(self, Command::Oracle | Command::Synth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub k: usize,
    pub per_cluster: usize,
    pub dims: usize,
    pub separation: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            k: 20,
            per_cluster: 100,
            dims: 16,
            separation: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Points per uniform dataset for the `min_pts = 2` checks.
    pub n: usize,
    pub trials: usize,
    pub concentration_n: usize,
    pub concentration_trials: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            n: 1000,
            trials: 200,
            concentration_n: 20_000,
            concentration_trials: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: Option<PathBuf>,
    pub labels_path: Option<PathBuf>,
    pub tune: TuneConfig,
    /// Radius for the plain `dbscan` command.
    pub epsilon: Option<f64>,
    pub grid_size: usize,
    pub n_boot: usize,
    pub output_dir: PathBuf,
    pub format: TableFormat,
    /// `dip` reads a `curve.csv` instead of a data matrix.
    pub from_curve: bool,
    pub synth: SynthOptions,
    pub oracle: OracleOptions,
}

impl RunConfig {
    pub const DEFAULT_MIN_PTS: usize = 5;
    pub const DEFAULT_GRID_SIZE: usize = 100;
    pub const DEFAULT_N_BOOT: usize = 1000;

    pub fn new(command: Command) -> Self {
        Self {
            command,
            input_path: None,
            labels_path: None,
            tune: TuneConfig::new(Self::DEFAULT_MIN_PTS),
            epsilon: None,
            grid_size: Self::DEFAULT_GRID_SIZE,
            n_boot: Self::DEFAULT_N_BOOT,
            output_dir: PathBuf::from("out"),
            format: TableFormat::Csv,
            from_curve: false,
            synth: SynthOptions::default(),
            oracle: OracleOptions::default(),
        }
    }

    /// Rejects bad values and flag combinations before any work starts.
    pub fn validate(&self) -> Result<()> {
        let cmd = self.command;
        self.tune.validate()?;
        if cmd.takes_input() && self.input_path.is_none() {
            return Err(Error::param(format!("`{}` requires --input", cmd.name())));
        }
        if !cmd.takes_input() && self.input_path.is_some() {
            return Err(Error::param(format!("`{}` does not take --input", cmd.name())));
        }
        match (cmd, &self.labels_path) {
            (Command::Eval, None) => return Err(Error::param("`eval` requires --labels")),
            (Command::Eval, Some(_)) | (_, None) => {}
            (_, Some(_)) => return Err(Error::param("--labels is only valid with `eval`")),
        }
        match (cmd, self.epsilon) {
            (Command::Dbscan, None) => return Err(Error::param("`dbscan` requires --epsilon")),
            (Command::Dbscan, Some(eps)) => {
                DbscanParams::new(eps, self.tune.min_pts)?;
            }
            (_, Some(_)) => return Err(Error::param("--epsilon is only valid with `dbscan`")),
            (_, None) => {}
        }
        if self.from_curve && cmd != Command::Dip {
            return Err(Error::param("--from-curve is only valid with `dip`"));
        }
        if self.grid_size < 3 {
            return Err(Error::param(format!(
                "--grid-size must be at least 3, got {}",
                self.grid_size
            )));
        }
        if self.n_boot == 0 {
            return Err(Error::param("--n-boot must be positive"));
        }
        if cmd == Command::Synth {
            let s = self.synth;
            if s.k == 0 || s.per_cluster == 0 || s.dims == 0 || s.separation.is_nan() || s.separation <= 0.0 {
                return Err(Error::param("synth needs positive k, per-cluster, dims and separation"));
            }
        }
        if cmd == Command::Oracle {
            let o = self.oracle;
            if o.n < 3 || o.trials == 0 || o.concentration_trials == 0 {
                return Err(Error::param("oracle needs n >= 3 and positive trial counts"));
            }
            if o.concentration_n < 20 {
                return Err(Error::param("oracle needs concentration-n >= 20 so that min_pts >= 2"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub tool_version: String,
    pub command: Command,
    pub seed: u64,
    pub config: RunConfig,
    pub results: Value,
    pub wall_clock_seconds: f64,
    /// DBSCAN runs spent on searching, sweeping or simulating. The single
    /// run that produces the final labeling of `tune`/`tse` is excluded.
    pub dbscan_invocations: usize,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

struct Outcome {
    results: Value,
    dbscan_invocations: usize,
    warnings: Vec<String>,
}

/// Runs the command and returns its report plus the staged output files,
/// without touching the output directory.
pub fn execute(config: &RunConfig) -> Result<(RunReport, OutputSet)> {
    config.validate()?;
    let started = Instant::now();
    let mut files = OutputSet::default();
    let outcome = match config.command {
        Command::Dbscan => run_dbscan(config, &mut files)?,
        Command::Tune | Command::Tse => run_tune(config, &mut files)?,
        Command::Sweep => run_sweep(config, &mut files)?,
        Command::Dip => run_dip(config, &mut files)?,
        Command::Oracle => run_oracle(config)?,
        Command::Eval => run_eval(config)?,
        Command::Synth => run_synth(config, &mut files)?,
    };
    let report = RunReport {
        version: REPORT_VERSION.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: config.command,
        seed: config.tune.seed,
        config: config.clone(),
        results: outcome.results,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        dbscan_invocations: outcome.dbscan_invocations,
        warnings: outcome.warnings,
    };
    Ok((report, files))
}

/// Executes and writes every output plus `report.json` into the output
/// directory. Nothing is written when any step fails.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let (report, mut files) = execute(config)?;
    files.add(REPORT_FILE, serde_json::to_vec_pretty(&report)?);
    files.commit(&config.output_dir)?;
    Ok(report)
}

fn input(config: &RunConfig) -> Result<&Path> {
    config
        .input_path
        .as_deref()
        .ok_or_else(|| Error::param("missing --input"))
}

fn load_input(config: &RunConfig) -> Result<DataMatrix> {
    load_matrix(input(config)?, config.format)
}

fn run_dbscan(config: &RunConfig, files: &mut OutputSet) -> Result<Outcome> {
    let x = load_input(config)?;
    let eps = config.epsilon.ok_or_else(|| Error::param("missing --epsilon"))?;
    let labeling = dbscan(&x, DbscanParams::new(eps, config.tune.min_pts)?, config.tune.metric);
    let role_count = |role| labeling.roles().iter().filter(|&&r| r == role).count();
    files.add(LABELS_FILE, format_labels(labeling.labels()));
    Ok(Outcome {
        results: json!({
            "epsilon": eps,
            "min_pts": config.tune.min_pts,
            "n_points": x.n_points(),
            "n_dims": x.n_dims(),
            "k": labeling.n_clusters(),
            "noise_fraction": labeling.noise_fraction(),
            "core_points": role_count(PointRole::Core),
            "border_points": role_count(PointRole::Border),
            "noise_points": role_count(PointRole::Noise),
        }),
        dbscan_invocations: 1,
        warnings: Vec::new(),
    })
}

fn run_tune(config: &RunConfig, files: &mut OutputSet) -> Result<Outcome> {
    let x = load_input(config)?;
    let tse = config.command == Command::Tse;
    let mut results = json!({});
    let tuned = if tse {
        let tuned = tse_clustering(&x, &config.tune)?;
        // Individual estimates are cheap to recompute; report them for inspection.
        let estimates = tse_estimate(&x, tuned.bounds.search, &config.tune)?.estimates;
        results["tse_estimates"] = json!(estimates);
        tuned
    } else {
        ts_clustering(&x, &config.tune)?
    };
    files.add(LABELS_FILE, format_labels(tuned.labeling.labels()));
    let b = &tuned.bounds;
    let extra = json!({
        "epsilon_star": tuned.epsilon,
        "k": tuned.labeling.n_clusters(),
        "noise_fraction": tuned.labeling.noise_fraction(),
        "n_points": x.n_points(),
        "n_dims": x.n_dims(),
        "trivial_upper_bound": b.trivial_upper,
        "upper_bound": b.upper,
        "lower_bound": b.lower,
        "search_bounds": b.search,
        "coordinate_evaluations": tuned.cost.coordinate_evaluations,
    });
    merge(&mut results, extra);
    Ok(Outcome {
        results,
        dbscan_invocations: tuned.cost.dbscan_invocations,
        warnings: tuned.warnings,
    })
}

fn merge(target: &mut Value, extra: Value) {
    if let (Some(t), Value::Object(e)) = (target.as_object_mut(), extra) {
        t.extend(e);
    }
}

fn run_sweep(config: &RunConfig, files: &mut OutputSet) -> Result<Outcome> {
    let x = load_input(config)?;
    let grid = default_grid(&x, config.grid_size, config.tune.metric)?;
    let curve = sweep_curve(&x, &grid, config.tune.min_pts, config.tune.metric)?;
    let mode = curve_mode(&curve).expect("grid is non-empty");
    let ks: Vec<usize> = curve.iter().map(|s| s.k).collect();
    files.add(CURVE_FILE, format_curve(&curve));
    Ok(Outcome {
        results: json!({
            "grid_size": grid.len(),
            "grid_start": grid[0],
            "grid_end": grid[grid.len() - 1],
            "mode_epsilon": mode.epsilon,
            "mode_k": mode.k,
            "strict_local_maxima": strict_local_maxima(&ks),
        }),
        dbscan_invocations: grid.len(),
        warnings: Vec::new(),
    })
}

fn run_dip(config: &RunConfig, files: &mut OutputSet) -> Result<Outcome> {
    let (report, invocations) = if config.from_curve {
        let path = input(config)?;
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        (
            report_for_curve(parse_curve(&text)?, config.n_boot, config.tune.seed)?,
            0,
        )
    } else {
        let x = load_input(config)?;
        let report = unimodality_report(
            &x,
            config.grid_size,
            config.tune.min_pts,
            config.tune.metric,
            config.n_boot,
            config.tune.seed,
        )?;
        files.add(CURVE_FILE, format_curve(&report.curve));
        (report, config.grid_size)
    };
    Ok(Outcome {
        results: json!({
            "dip": report.dip,
            "p_value": report.p_value,
            "unimodal_at_5_percent": report.p_value >= 0.05,
            "mode_epsilon": report.mode_epsilon,
            "mode_k": report.mode_k,
            "n_boot": report.n_boot,
            "sample_size": report.sample_size,
        }),
        dbscan_invocations: invocations,
        warnings: Vec::new(),
    })
}

fn run_eval(config: &RunConfig) -> Result<Outcome> {
    let predicted = load_labels(input(config)?)?;
    let truth_path = config
        .labels_path
        .as_deref()
        .ok_or_else(|| Error::param("missing --labels"))?;
    let truth = load_labels(truth_path)?;
    let pair = LabelPair::new(truth, predicted)?;
    let (kept, excluded) = exclude_noise(&pair)?;
    let ari_value = if kept.len() >= 2 { Some(ari(&kept)?) } else { None };
    let mut warnings = Vec::new();
    if ari_value.is_none() {
        warnings.push("fewer than 2 points after noise exclusion; ARI undefined".to_string());
    }
    Ok(Outcome {
        results: json!({
            "nmi": nmi(&kept)?,
            "ari": ari_value,
            "noise_fraction": noise_fraction(pair.predicted()),
            "k": count_clusters(pair.predicted()),
            "excluded_count": excluded.total(),
            "excluded_predicted_noise": excluded.predicted_noise,
            "excluded_truth_noise": excluded.truth_noise,
            "n_evaluated": kept.len(),
            "nmi_normalization": NMI_NORMALIZATION,
        }),
        dbscan_invocations: 0,
        warnings,
    })
}

fn run_synth(config: &RunConfig, files: &mut OutputSet) -> Result<Outcome> {
    let s = config.synth;
    let (x, labels) = synth_blobs(BlobSpec {
        k: s.k,
        per_cluster: s.per_cluster,
        dims: s.dims,
        separation: s.separation,
        seed: config.tune.seed,
    })?;
    files.add(DATA_FILE, format_matrix(&x));
    files.add(LABELS_FILE, format_labels(&labels));
    Ok(Outcome {
        results: json!({
            "n_points": x.n_points(),
            "n_dims": x.n_dims(),
            "k": s.k,
        }),
        dbscan_invocations: 0,
        warnings: Vec::new(),
    })
}

/// Grid used to locate the empirical mode of the Monte Carlo curve.
pub fn oracle_mode_grid(n: usize) -> Vec<f64> {
    let center = std::f64::consts::LN_2 / n as f64;
    (0..50).map(|i| center * (0.2 + 2.8 * i as f64 / 49.0)).collect()
}

fn run_oracle(config: &RunConfig) -> Result<Outcome> {
    let o = config.oracle;
    let seed = config.tune.seed;
    let n = o.n;
    let nf = n as f64;
    let ln2_n = std::f64::consts::LN_2 / nf;
    let mut checks = Vec::new();
    let mut invocations = 0;

    // Closed-form mode against a fine-grid maximizer of the closed form.
    let eps0 = mode_epsilon_closed_form(n)?;
    let step = 0.5 / 100_000.0;
    let grid_argmax = (1..=100_000)
        .map(|i| i as f64 * step)
        .map(|e| (e, expected_k_closed_form(n, e).unwrap_or(f64::NAN)))
        .fold((0.0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;
    checks.push(json!({
        "name": "closed_form_mode_matches_grid_argmax",
        "mode_epsilon": eps0,
        "grid_argmax": grid_argmax,
        "passed": (eps0 - grid_argmax).abs() <= step,
    }));

    // Monte Carlo peak height and location.
    let grid = oracle_mode_grid(n);
    let curve = monte_carlo_curve(n, &grid, o.trials, seed)?;
    invocations += grid.len() * o.trials;
    let (argmax, _) = grid.iter().zip(&curve).fold(
        (0.0, f64::MIN),
        |best, (&e, m)| if m.mean > best.1 { (e, m.mean) } else { best },
    );
    let at_mode = monte_carlo_curve(n, &[ln2_n], o.trials, seed)?[0];
    invocations += o.trials;
    checks.push(json!({
        "name": "monte_carlo_peak_near_quarter_n",
        "epsilon": ln2_n,
        "mean_k": at_mode.mean,
        "std_error": at_mode.std_error,
        "target": nf / 4.0,
        "passed": (at_mode.mean - nf / 4.0).abs() <= 0.05 * nf / 4.0,
    }));
    checks.push(json!({
        "name": "monte_carlo_argmax_near_ln2_over_n",
        "argmax": argmax,
        "target": ln2_n,
        "passed": argmax >= ln2_n / 1.5 && argmax <= ln2_n * 1.5,
    }));

    // Closed form against simulation near the mode.
    let probes = [0.5 * ln2_n, ln2_n, 1.5 * ln2_n];
    let sim = monte_carlo_curve(n, &probes, o.trials, seed)?;
    invocations += probes.len() * o.trials;
    for (eps, m) in probes.iter().zip(&sim) {
        let predicted = expected_k_closed_form(n, *eps)?;
        let tolerance = (0.05 * predicted.abs()).max(3.0 * m.std_error);
        checks.push(json!({
            "name": "closed_form_matches_monte_carlo",
            "epsilon": eps,
            "closed_form": predicted,
            "monte_carlo_mean": m.mean,
            "std_error": m.std_error,
            "tolerance": tolerance,
            "passed": (predicted - m.mean).abs() <= tolerance,
        }));
    }

    // Concentration of the trivial regimes for min_pts = rho * n.
    let conc = ConcentrationConfig::new(0.1, 2.0, 0.05)?;
    for dims in [1, 2, 4] {
        let r = concentration_experiment(
            &conc,
            dims,
            o.concentration_n,
            o.concentration_trials,
            seed,
            DEFAULT_MARGIN,
        )?;
        invocations += 2 * o.concentration_trials;
        let passed = r.passed;
        let mut entry = serde_json::to_value(&r)?;
        entry["name"] = json!("concentration");
        entry["passed"] = json!(passed);
        checks.push(entry);
    }

    let all_passed = checks.iter().all(|c| c["passed"] == json!(true));
    Ok(Outcome {
        results: json!({ "checks": checks, "all_passed": all_passed }),
        dbscan_invocations: invocations,
        warnings: Vec::new(),
    })
}
