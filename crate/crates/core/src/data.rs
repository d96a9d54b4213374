//! Dense point sets and the distance functions defined over them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance function used for neighborhood queries.
///
/// Euclidean and Manhattan are true metrics. Cosine distance (`1 - cos θ`)
/// is offered for embedding data but does not satisfy the triangle
/// inequality, so the factor-2 diameter bound is not guaranteed under it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    Cosine,
}

impl Metric {
    /// Distance between two equal-length coordinate slices. The caller
    /// guarantees equal length.
    #[inline]
    pub fn eval(self, p: &[f64], q: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), q.len());
        match self {
            Metric::Euclidean => p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Metric::Manhattan => p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum(),
            Metric::Cosine => {
                let (mut dot, mut np, mut nq) = (0.0, 0.0, 0.0);
                for (a, b) in p.iter().zip(q) {
                    dot += a * b;
                    np += a * a;
                    nq += b * b;
                }
                if np == 0.0 && nq == 0.0 {
                    0.0
                } else if np == 0.0 || nq == 0.0 {
                    1.0
                } else {
                    (1.0 - dot / (np.sqrt() * nq.sqrt())).clamp(0.0, 2.0)
                }
            }
        }
    }

    /// Whether the triangle inequality holds.
    pub fn is_metric(self) -> bool {
        !matches!(self, Metric::Cosine)
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "manhattan" | "l1" => Ok(Metric::Manhattan),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::param(format!("unknown metric {other:?}"))),
        }
    }
}

/// Checked distance between two points.
pub fn distance(p: &[f64], q: &[f64], metric: Metric) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if p.iter().chain(q).any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite coordinate".into()));
    }
    Ok(metric.eval(p, q))
}

/// Row-major `N x D` matrix of finite coordinates, `N, D >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n_points: usize,
    n_dims: usize,
}

impl DataMatrix {
    pub fn new(n_points: usize, n_dims: usize, values: Vec<f64>) -> Result<Self> {
        if n_points == 0 || n_dims == 0 {
            return Err(Error::InvalidData(format!(
                "shape {n_points}x{n_dims} must have at least one point and one dimension"
            )));
        }
        if values.len() != n_points * n_dims {
            return Err(Error::InvalidData(format!(
                "{} values do not fill a {n_points}x{n_dims} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite coordinate at row {}, column {}",
                pos / n_dims,
                pos % n_dims
            )));
        }
        Ok(Self {
            values,
            n_points,
            n_dims,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_dims = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * n_dims);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_dims {
                return Err(Error::InvalidData(format!(
                    "row {i} has {} columns, expected {n_dims}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), n_dims, values)
    }

    /// One-dimensional dataset from scalar values.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_dims..(i + 1) * self.n_dims]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_dims)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sub-matrix with the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * self.n_dims);
        for &r in rows {
            if r >= self.n_points {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    n_points: self.n_points,
                });
            }
            values.extend_from_slice(self.row(r));
        }
        Self::new(rows.len(), self.n_dims, values)
    }

    /// Projection onto the given columns, in the given order.
    pub fn select_dims(&self, dims: &[usize]) -> Result<Self> {
        if let Some(&bad) = dims.iter().find(|&&d| d >= self.n_dims) {
            return Err(Error::InvalidParameter(format!(
                "dimension {bad} out of range for {} dims",
                self.n_dims
            )));
        }
        let mut values = Vec::with_capacity(self.n_points * dims.len());
        for row in self.rows() {
            values.extend(dims.iter().map(|&d| row[d]));
        }
        Self::new(self.n_points, dims.len(), values)
    }

    /// Exact diameter by exhaustive pairwise search. Quadratic; for tests
    /// and small inputs.
    pub fn exact_diameter(&self, metric: Metric) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n_points {
            for j in i + 1..self.n_points {
                best = best.max(metric.eval(self.row(i), self.row(j)));
            }
        }
        best
    }

    /// Smallest distance between two distinct indices; `None` when `N < 2`.
    pub fn min_pairwise_distance(&self, metric: Metric) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.n_points {
            for j in i + 1..self.n_points {
                let d = metric.eval(self.row(i), self.row(j));
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}
