//! Ternary search for the radius that maximizes the DBSCAN cluster count.
//!
//! With `min_pts` fixed, the cluster count `k(ε)` is zero while no point is
//! core, rises as clusters form, and falls back to one as they merge. The
//! search treats `k(ε)` as unimodal: each iteration probes the two interior
//! third points of the current interval and discards one or two thirds.
//! Search bounds come from subsampling: fewer rows push the mode up (an
//! upper bound), fewer dimensions pull it down (a lower bound).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, Metric};
use crate::dbscan::{approximate_diameter_ub, dbscan, dbscan_with, DbscanParams, Distances, Labeling};
use crate::error::{Error, Result};
use crate::rng::{sample_sorted, stream_rng, STREAM_LB_DIMS, STREAM_TSE_BASE, STREAM_UB_ROWS};

/// Radius used in place of a zero diameter bound (all points identical).
pub const DEGENERATE_UB_FLOOR: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SearchBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower >= 0.0 && lower < upper) {
            return Err(Error::param(format!(
                "search bounds need 0 <= lower < upper, got ({lower}, {upper})"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        (self.lower + self.upper) / 2.0
    }

    /// The two interior probe points `(2L+U)/3` and `(L+2U)/3`.
    pub fn thirds(&self) -> (f64, f64) {
        (
            (2.0 * self.lower + self.upper) / 3.0,
            (self.lower + 2.0 * self.upper) / 3.0,
        )
    }

    fn is_degenerate(&self) -> bool {
        self.width() <= 4.0 * f64::EPSILON * self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub min_pts: usize,
    pub itr: usize,
    pub alpha: f64,
    pub m: usize,
    pub seed: u64,
    pub metric: Metric,
    pub chance_noise_threshold: f64,
}

impl TuneConfig {
    pub const DEFAULT_ITR: usize = 6;
    pub const DEFAULT_ALPHA: f64 = 0.2;
    pub const DEFAULT_M: usize = 30;
    pub const DEFAULT_CHANCE_NOISE_THRESHOLD: f64 = 0.9;

    pub fn new(min_pts: usize) -> Self {
        Self {
            min_pts,
            itr: Self::DEFAULT_ITR,
            alpha: Self::DEFAULT_ALPHA,
            m: Self::DEFAULT_M,
            seed: 0,
            metric: Metric::default(),
            chance_noise_threshold: Self::DEFAULT_CHANCE_NOISE_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_pts < 2 {
            return Err(Error::param(format!(
                "min_pts must be at least 2, got {}",
                self.min_pts
            )));
        }
        if self.itr == 0 {
            return Err(Error::param("itr must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.m == 0 {
            return Err(Error::param("m must be positive"));
        }
        if !(self.chance_noise_threshold > 0.0 && self.chance_noise_threshold < 1.0) {
            return Err(Error::param(format!(
                "chance_noise_threshold must lie in (0, 1), got {}",
                self.chance_noise_threshold
            )));
        }
        Ok(())
    }

    /// `ceil(alpha * n)`, at least 1 and at most `n`.
    pub fn sample_size(&self, n: usize) -> usize {
        ((self.alpha * n as f64).ceil() as usize).clamp(1, n)
    }

    fn params(&self, epsilon: f64) -> Result<DbscanParams> {
        DbscanParams::new(epsilon, self.min_pts)
    }
}

/// One evaluation of the cluster-count curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub epsilon: f64,
    pub k: usize,
    pub noise: f64,
}

impl ProbeResult {
    pub fn from_labeling(epsilon: f64, labeling: &Labeling) -> Self {
        Self {
            epsilon,
            k: labeling.n_clusters(),
            noise: labeling.noise_fraction(),
        }
    }
}

/// Cluster count as seen by the search. A lone cluster that leaves more
/// than `chance_noise_threshold` of the data as noise formed by chance, not
/// by merging, so it counts as zero.
pub fn effective_k(probe: &ProbeResult, chance_noise_threshold: f64) -> usize {
    if probe.k == 1 && probe.noise > chance_noise_threshold {
        0
    } else {
        probe.k
    }
}

/// Interval reduction for one iteration. Branches are tested in order:
/// both probes merged (mode is left of `m_l`), left empty and right merged
/// (mode between probes), both empty (mode right of `m_r`), then the usual
/// unimodal comparison.
pub fn cond(bounds: SearchBounds, m_l: f64, m_r: f64, k_l: usize, k_r: usize) -> SearchBounds {
    let (lower, upper) = match (k_l, k_r) {
        (1, 1) => (bounds.lower, m_l),
        (0, 1) => (m_l, m_r),
        (0, 0) => (m_r, bounds.upper),
        _ if k_l > k_r => (bounds.lower, m_r),
        _ => (m_l, bounds.upper),
    };
    SearchBounds { lower, upper }
}

/// Work counters for a search. `coordinate_evaluations` sums `rows² · dims`
/// over every DBSCAN probe, the brute-force cost of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchCost {
    pub dbscan_invocations: usize,
    pub coordinate_evaluations: u64,
}

impl SearchCost {
    fn record(&mut self, x: &DataMatrix) {
        let n = x.n_points() as u64;
        self.dbscan_invocations += 1;
        self.coordinate_evaluations += n * n * x.n_dims() as u64;
    }

    pub fn add(&mut self, other: &SearchCost) {
        self.dbscan_invocations += other.dbscan_invocations;
        self.coordinate_evaluations += other.coordinate_evaluations;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub epsilon: f64,
    pub initial: SearchBounds,
    pub final_bounds: SearchBounds,
    pub probes: Vec<ProbeResult>,
    pub cost: SearchCost,
    pub warnings: Vec<String>,
}

/// Runs `cfg.itr` ternary-search iterations on `x` within `bounds` and
/// returns the midpoint of the last pair of probes.
pub fn ternary_search(x: &DataMatrix, bounds: SearchBounds, cfg: &TuneConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let initial = SearchBounds::new(bounds.lower, bounds.upper)?;
    let mut outcome = SearchOutcome {
        epsilon: initial.midpoint(),
        initial,
        final_bounds: initial,
        probes: Vec::with_capacity(2 * cfg.itr),
        cost: SearchCost::default(),
        warnings: Vec::new(),
    };
    if initial.is_degenerate() {
        outcome.warnings.push(format!(
            "search interval ({}, {}) is below machine precision",
            initial.lower, initial.upper
        ));
        return Ok(outcome);
    }

    let distances = Distances::for_repeated_use(x, cfg.metric);
    let mut current = initial;
    for iteration in 0..cfg.itr {
        if current.is_degenerate() {
            outcome.warnings.push(format!(
                "interval collapsed to machine precision after {iteration} iterations"
            ));
            break;
        }
        let (m_l, m_r) = current.thirds();
        let (left, right) = rayon::join(|| run_probe(&distances, cfg, m_l), || run_probe(&distances, cfg, m_r));
        let (left, right) = (left?, right?);
        outcome.cost.record(x);
        outcome.cost.record(x);
        outcome.probes.push(left);
        outcome.probes.push(right);
        let k_l = effective_k(&left, cfg.chance_noise_threshold);
        let k_r = effective_k(&right, cfg.chance_noise_threshold);
        current = cond(current, m_l, m_r, k_l, k_r);
        outcome.epsilon = (m_l + m_r) / 2.0;
    }
    outcome.final_bounds = current;
    Ok(outcome)
}

fn run_probe(distances: &Distances<'_>, cfg: &TuneConfig, epsilon: f64) -> Result<ProbeResult> {
    let labeling = dbscan_with(distances, cfg.params(epsilon)?);
    Ok(ProbeResult::from_labeling(epsilon, &labeling))
}

/// `2 · max_i d(x_0, x_i)`, replaced by [`DEGENERATE_UB_FLOOR`] with a
/// warning when every point coincides with the first.
pub fn trivial_upper_bound(x: &DataMatrix, metric: Metric) -> Result<(f64, Option<String>)> {
    let ub0 = approximate_diameter_ub(x, metric)?;
    if ub0 > 0.0 {
        Ok((ub0, None))
    } else {
        Ok((
            DEGENERATE_UB_FLOOR,
            Some("all points coincide; using a machine-epsilon radius bound".to_string()),
        ))
    }
}

/// Upper bound on the mode: ternary search over `(0, UB⁰)` on a uniform
/// subsample of `ceil(alpha · N)` rows with all dimensions.
pub fn estimate_upper_bound(x: &DataMatrix, cfg: &TuneConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let rows = cfg.sample_size(x.n_points());
    if rows < cfg.min_pts + 1 {
        return Err(Error::SubsampleTooSmall {
            rows,
            min_pts: cfg.min_pts,
        });
    }
    let (ub0, warning) = trivial_upper_bound(x, cfg.metric)?;
    let mut rng = stream_rng(cfg.seed, STREAM_UB_ROWS);
    let picked = sample_sorted(&mut rng, x.n_points(), rows);
    let sub = x.select_rows(&picked)?;
    let mut outcome = ternary_search(&sub, SearchBounds::new(0.0, ub0)?, cfg)?;
    outcome.warnings.extend(warning);
    Ok(outcome)
}

/// Lower bound on the mode: ternary search over `(0, ub)` on a projection
/// onto `ceil(alpha · D)` uniformly chosen dimensions with all rows.
pub fn estimate_lower_bound(x: &DataMatrix, ub: f64, cfg: &TuneConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let dims = cfg.sample_size(x.n_dims());
    let mut rng = stream_rng(cfg.seed, STREAM_LB_DIMS);
    let picked = sample_sorted(&mut rng, x.n_dims(), dims);
    let projected = x.select_dims(&picked)?;
    ternary_search(&projected, SearchBounds::new(0.0, ub)?, cfg)
}

/// Bounds for the final search as produced by [`ts_clustering`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedBounds {
    pub trivial_upper: f64,
    pub upper: f64,
    pub lower: f64,
    pub search: SearchBounds,
    pub cost: SearchCost,
    pub warnings: Vec<String>,
}

/// Computes `UB⁰`, the subsampled upper bound and the projected lower bound.
pub fn estimate_bounds(x: &DataMatrix, cfg: &TuneConfig) -> Result<EstimatedBounds> {
    cfg.validate()?;
    let (ub0, warning) = trivial_upper_bound(x, cfg.metric)?;
    let mut warnings: Vec<String> = warning.into_iter().collect();
    let mut cost = SearchCost::default();

    let upper = match estimate_upper_bound(x, cfg) {
        Ok(found) => {
            cost.add(&found.cost);
            warnings.extend(found.warnings.into_iter().filter(|w| !w.starts_with("all points")));
            found.epsilon
        }
        Err(Error::SubsampleTooSmall { rows, min_pts }) => {
            warnings.push(format!(
                "row subsample of {rows} is too small for min_pts {min_pts}; using the trivial upper bound"
            ));
            ub0
        }
        Err(e) => return Err(e),
    };

    let found = estimate_lower_bound(x, upper, cfg)?;
    cost.add(&found.cost);
    warnings.extend(found.warnings);
    let lower = found.epsilon;

    let search = if lower < upper {
        SearchBounds::new(lower, upper)?
    } else {
        warnings.push(format!(
            "estimated lower bound {lower} >= upper bound {upper}; widening"
        ));
        fallback_bounds(lower, upper, ub0)?
    };

    Ok(EstimatedBounds {
        trivial_upper: ub0,
        upper,
        lower,
        search,
        cost,
        warnings,
    })
}

/// `(LB/2, min(2·UB, UB⁰))` for crossed estimates, or `(0, UB⁰)` when that
/// is still empty.
fn fallback_bounds(lower: f64, upper: f64, ub0: f64) -> Result<SearchBounds> {
    SearchBounds::new(0.5 * lower, (2.0 * upper).min(ub0)).or_else(|_| SearchBounds::new(0.0, ub0))
}

#[derive(Debug, Clone)]
pub struct TunedClustering {
    pub epsilon: f64,
    pub labeling: Labeling,
    pub bounds: EstimatedBounds,
    /// Search probes only; the final labeling run is not counted.
    pub cost: SearchCost,
    pub warnings: Vec<String>,
}

/// Full pipeline: estimate bounds, ternary-search the full data between
/// them, then cluster at the found radius.
pub fn ts_clustering(x: &DataMatrix, cfg: &TuneConfig) -> Result<TunedClustering> {
    check_min_points(x, cfg)?;
    let bounds = estimate_bounds(x, cfg)?;
    let found = ternary_search(x, bounds.search, cfg)?;
    finish(x, cfg, bounds, found.epsilon, found.cost, found.warnings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TseOutcome {
    pub epsilon: f64,
    pub estimates: Vec<f64>,
    pub cost: SearchCost,
    pub warnings: Vec<String>,
}

/// Averages `cfg.m` ternary searches, each on an independent subsample of
/// `ceil(alpha · N)` rows and `ceil(alpha · D)` dimensions.
pub fn tse_estimate(x: &DataMatrix, bounds: SearchBounds, cfg: &TuneConfig) -> Result<TseOutcome> {
    cfg.validate()?;
    let rows = cfg.sample_size(x.n_points());
    if rows < cfg.min_pts + 1 {
        return Err(Error::SubsampleTooSmall {
            rows,
            min_pts: cfg.min_pts,
        });
    }
    let dims = cfg.sample_size(x.n_dims());
    let runs: Vec<SearchOutcome> = (0..cfg.m)
        .into_par_iter()
        .map(|repeat| {
            let mut rng = stream_rng(cfg.seed, STREAM_TSE_BASE + repeat as u64);
            let picked_rows = sample_sorted(&mut rng, x.n_points(), rows);
            let picked_dims = sample_sorted(&mut rng, x.n_dims(), dims);
            let sub = x.select_rows(&picked_rows)?.select_dims(&picked_dims)?;
            ternary_search(&sub, bounds, cfg)
        })
        .collect::<Result<_>>()?;

    let mut cost = SearchCost::default();
    let mut warnings = Vec::new();
    let mut estimates = Vec::with_capacity(runs.len());
    for run in runs {
        cost.add(&run.cost);
        warnings.extend(run.warnings);
        estimates.push(run.epsilon);
    }
    let epsilon = estimates.iter().sum::<f64>() / estimates.len() as f64;
    Ok(TseOutcome {
        epsilon,
        estimates,
        cost,
        warnings,
    })
}

/// Like [`ts_clustering`] but the final full-data search is replaced by
/// [`tse_estimate`].
pub fn tse_clustering(x: &DataMatrix, cfg: &TuneConfig) -> Result<TunedClustering> {
    check_min_points(x, cfg)?;
    let bounds = estimate_bounds(x, cfg)?;
    let found = tse_estimate(x, bounds.search, cfg)?;
    finish(x, cfg, bounds, found.epsilon, found.cost, found.warnings)
}

fn check_min_points(x: &DataMatrix, cfg: &TuneConfig) -> Result<()> {
    cfg.validate()?;
    if x.n_points() < cfg.min_pts {
        return Err(Error::param(format!(
            "{} points cannot form a cluster with min_pts {}",
            x.n_points(),
            cfg.min_pts
        )));
    }
    Ok(())
}

fn finish(
    x: &DataMatrix,
    cfg: &TuneConfig,
    bounds: EstimatedBounds,
    epsilon: f64,
    final_cost: SearchCost,
    final_warnings: Vec<String>,
) -> Result<TunedClustering> {
    let labeling = dbscan(x, cfg.params(epsilon)?, cfg.metric);
    let mut cost = bounds.cost.clone();
    cost.add(&final_cost);
    let mut warnings = bounds.warnings.clone();
    warnings.extend(final_warnings);
    Ok(TunedClustering {
        epsilon,
        labeling,
        bounds,
        cost,
        warnings,
    })
}
