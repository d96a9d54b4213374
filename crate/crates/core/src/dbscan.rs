//! Exact DBSCAN with closed-ball neighborhoods and brute-force neighbor search.
//!
//! A point is *core* when its closed ε-ball holds at least `min_pts` points,
//! itself included. Clusters are the connected components of the ε-graph on
//! core points, plus every non-core point within ε of one of their members.
//! Points are scanned in index order, clusters are numbered in the order they
//! are discovered, and a border point reachable from several clusters joins
//! the one discovered first. Everything else is noise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, Metric};
use crate::error::{Error, Result};

/// Matrices up to this many points get a precomputed distance table when a
/// caller evaluates many radii on the same data.
pub const PRECOMPUTE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    epsilon: f64,
    min_pts: usize,
}

impl DbscanParams {
    pub fn new(epsilon: f64, min_pts: usize) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::param(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if min_pts < 2 {
            return Err(Error::param(format!("min_pts must be at least 2, got {min_pts}")));
        }
        Ok(Self { epsilon, min_pts })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn min_pts(&self) -> usize {
        self.min_pts
    }
}

/// Cluster assignment of one point. Serialized as `-1` for noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Noise,
    Cluster(usize),
}

impl Label {
    pub const NOISE_CODE: i64 = -1;

    pub fn is_noise(self) -> bool {
        matches!(self, Label::Noise)
    }

    pub fn cluster(self) -> Option<usize> {
        match self {
            Label::Noise => None,
            Label::Cluster(c) => Some(c),
        }
    }

    pub fn to_code(self) -> i64 {
        match self {
            Label::Noise => Self::NOISE_CODE,
            Label::Cluster(c) => c as i64,
        }
    }

    pub fn from_code(code: i64) -> Result<Self> {
        match code {
            Self::NOISE_CODE => Ok(Label::Noise),
            c if c >= 0 => Ok(Label::Cluster(c as usize)),
            c => Err(Error::param(format!("label {c} is negative and not the noise code -1"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointRole {
    Core,
    Border,
    Noise,
}

/// Output of one DBSCAN run.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    labels: Vec<Label>,
    roles: Vec<PointRole>,
    n_clusters: usize,
}

impl Labeling {
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn roles(&self) -> &[PointRole] {
        &self.roles
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn noise_fraction(&self) -> f64 {
        noise_fraction(&self.labels)
    }

    pub fn codes(&self) -> Vec<i64> {
        self.labels.iter().map(|l| l.to_code()).collect()
    }
}

/// Number of distinct non-noise labels.
pub fn count_clusters(labels: &[Label]) -> usize {
    let mut ids: Vec<usize> = labels.iter().filter_map(|l| l.cluster()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

/// Fraction of points labeled noise; `0.0` for an empty slice.
pub fn noise_fraction(labels: &[Label]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    labels.iter().filter(|l| l.is_noise()).count() as f64 / labels.len() as f64
}

/// Indices within the closed ε-ball around point `i`, in ascending order.
/// Always contains `i`.
pub fn region_query(x: &DataMatrix, i: usize, epsilon: f64, metric: Metric) -> Result<Vec<usize>> {
    if i >= x.n_points() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n_points: x.n_points(),
        });
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    let p = x.row(i);
    Ok((0..x.n_points())
        .filter(|&j| metric.eval(p, x.row(j)) <= epsilon)
        .collect())
}

/// Trivial upper bound on the diameter: twice the largest distance from the
/// first point. Lies in `[diameter, 2 * diameter]` under a true metric.
pub fn approximate_diameter_ub(x: &DataMatrix, metric: Metric) -> Result<f64> {
    if x.n_points() < 2 {
        return Err(Error::DegenerateDataset(
            "diameter bound needs at least two points".into(),
        ));
    }
    let first = x.row(0);
    let far = x.rows().skip(1).map(|r| metric.eval(first, r)).fold(0.0f64, f64::max);
    Ok(2.0 * far)
}

/// Pairwise distance oracle consumed by the clustering kernel.
pub trait DistanceSource: Sync {
    fn n_points(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;
}

/// Distances computed on demand from the coordinates.
#[derive(Debug, Clone, Copy)]
pub struct OnTheFly<'a> {
    x: &'a DataMatrix,
    metric: Metric,
}

impl<'a> OnTheFly<'a> {
    pub fn new(x: &'a DataMatrix, metric: Metric) -> Self {
        Self { x, metric }
    }
}

impl DistanceSource for OnTheFly<'_> {
    #[inline]
    fn n_points(&self) -> usize {
        self.x.n_points()
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.eval(self.x.row(i), self.x.row(j))
    }
}

/// Full symmetric distance table. Values are bit-identical to [`OnTheFly`].
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    n: usize,
    table: Vec<f64>,
}

impl PairwiseDistances {
    pub fn compute(x: &DataMatrix, metric: Metric) -> Self {
        let n = x.n_points();
        let mut table = vec![0.0; n * n];
        table.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let p = x.row(i);
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = metric.eval(p, x.row(j));
            }
        });
        Self { n, table }
    }
}

impl DistanceSource for PairwiseDistances {
    #[inline]
    fn n_points(&self) -> usize {
        self.n
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.table[i * self.n + j]
    }
}

/// Either a precomputed table (small inputs) or on-demand distances.
pub enum Distances<'a> {
    Table(PairwiseDistances),
    Direct(OnTheFly<'a>),
}

impl<'a> Distances<'a> {
    /// Precomputes when `N <= PRECOMPUTE_LIMIT`.
    pub fn for_repeated_use(x: &'a DataMatrix, metric: Metric) -> Self {
        if x.n_points() <= PRECOMPUTE_LIMIT {
            Distances::Table(PairwiseDistances::compute(x, metric))
        } else {
            Distances::Direct(OnTheFly::new(x, metric))
        }
    }
}

impl DistanceSource for Distances<'_> {
    #[inline]
    fn n_points(&self) -> usize {
        match self {
            Distances::Table(t) => t.n_points(),
            Distances::Direct(d) => d.n_points(),
        }
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            Distances::Table(t) => t.dist(i, j),
            Distances::Direct(d) => d.dist(i, j),
        }
    }
}

pub fn dbscan(x: &DataMatrix, params: DbscanParams, metric: Metric) -> Labeling {
    dbscan_with(&OnTheFly::new(x, metric), params)
}

/// DBSCAN over an arbitrary distance source.
pub fn dbscan_with<S: DistanceSource>(src: &S, params: DbscanParams) -> Labeling {
    let n = src.n_points();
    let eps = params.epsilon;
    let min_pts = params.min_pts;

    // Counting stops at min_pts: only the core flag is needed.
    let core: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut count = 0;
            for j in 0..n {
                if src.dist(i, j) <= eps {
                    count += 1;
                    if count >= min_pts {
                        return true;
                    }
                }
            }
            false
        })
        .collect();

    let mut labels = vec![Label::Noise; n];
    let mut assigned = vec![false; n];
    // Points never change cluster once assigned, so each expansion step only
    // needs to scan the points still unassigned.
    let mut unassigned: Vec<usize> = (0..n).collect();
    let mut stack = Vec::new();
    let mut n_clusters = 0;

    for seed in 0..n {
        if !core[seed] || assigned[seed] {
            continue;
        }
        let cluster = n_clusters;
        n_clusters += 1;
        assigned[seed] = true;
        labels[seed] = Label::Cluster(cluster);
        stack.push(seed);
        while let Some(p) = stack.pop() {
            unassigned.retain(|&j| {
                if assigned[j] {
                    return false;
                }
                if src.dist(p, j) <= eps {
                    assigned[j] = true;
                    labels[j] = Label::Cluster(cluster);
                    if core[j] {
                        stack.push(j);
                    }
                    false
                } else {
                    true
                }
            });
            if unassigned.is_empty() {
                stack.clear();
            }
        }
    }

    let roles = (0..n)
        .map(|i| {
            if core[i] {
                PointRole::Core
            } else if assigned[i] {
                PointRole::Border
            } else {
                PointRole::Noise
            }
        })
        .collect();

    Labeling {
        labels,
        roles,
        n_clusters,
    }
}
