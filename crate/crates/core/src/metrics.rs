//! External clustering agreement with noise exclusion.
//!
//! NMI is normalized by the arithmetic mean of the two label entropies.
//! Both metrics treat every distinct label, including noise, as a class;
//! call [`exclude_noise`] first to score only points that were clustered.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dbscan::Label;
use crate::error::{Error, Result};

pub const NMI_NORMALIZATION: &str = "arithmetic";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPair {
    truth: Vec<Label>,
    predicted: Vec<Label>,
}

impl LabelPair {
    pub fn new(truth: Vec<Label>, predicted: Vec<Label>) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                left: truth.len(),
                right: predicted.len(),
            });
        }
        Ok(Self { truth, predicted })
    }

    pub fn truth(&self) -> &[Label] {
        &self.truth
    }

    pub fn predicted(&self) -> &[Label] {
        &self.predicted
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedCounts {
    /// Rows dropped because the prediction is noise.
    pub predicted_noise: usize,
    /// Rows dropped because only the ground truth is noise.
    pub truth_noise: usize,
}

impl ExcludedCounts {
    pub fn total(&self) -> usize {
        self.predicted_noise + self.truth_noise
    }
}

/// Drops rows where the prediction is noise, then rows where the truth is.
pub fn exclude_noise(pair: &LabelPair) -> Result<(LabelPair, ExcludedCounts)> {
    let mut counts = ExcludedCounts::default();
    let mut truth = Vec::with_capacity(pair.len());
    let mut predicted = Vec::with_capacity(pair.len());
    for (&t, &p) in pair.truth.iter().zip(&pair.predicted) {
        if p.is_noise() {
            counts.predicted_noise += 1;
        } else if t.is_noise() {
            counts.truth_noise += 1;
        } else {
            truth.push(t);
            predicted.push(p);
        }
    }
    if truth.is_empty() {
        return Err(Error::Empty("no points left after removing noise".into()));
    }
    Ok((LabelPair { truth, predicted }, counts))
}

/// Contingency table with row sums (truth) and column sums (predicted).
struct Contingency {
    cells: Vec<Vec<u64>>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    n: u64,
}

impl Contingency {
    fn build(pair: &LabelPair) -> Self {
        fn dense(labels: &[Label]) -> (Vec<usize>, usize) {
            let mut ids = HashMap::new();
            let mapped = labels
                .iter()
                .map(|l| {
                    let next = ids.len();
                    *ids.entry(*l).or_insert(next)
                })
                .collect();
            (mapped, ids.len())
        }
        let (t, n_t) = dense(&pair.truth);
        let (p, n_p) = dense(&pair.predicted);
        let mut cells = vec![vec![0u64; n_p]; n_t];
        for (&a, &b) in t.iter().zip(&p) {
            cells[a][b] += 1;
        }
        let rows = cells.iter().map(|r| r.iter().sum()).collect();
        let cols = (0..n_p).map(|j| cells.iter().map(|r| r[j]).sum()).collect();
        Self {
            cells,
            rows,
            cols,
            n: t.len() as u64,
        }
    }
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information in `[0, 1]`.
pub fn nmi(pair: &LabelPair) -> Result<f64> {
    if pair.is_empty() {
        return Err(Error::Empty("nmi of an empty labeling".into()));
    }
    let table = Contingency::build(pair);
    let n = table.n as f64;
    let h_truth = entropy(&table.rows, n);
    let h_pred = entropy(&table.cols, n);
    if h_truth == 0.0 && h_pred == 0.0 {
        // Both partitions are a single class, hence identical.
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.cells.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (table.rows[i] as f64 * table.cols[j] as f64)).ln();
            }
        }
    }
    Ok((mi / ((h_truth + h_pred) / 2.0)).clamp(0.0, 1.0))
}

fn pairs(c: u64) -> f64 {
    (c * c.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index; 1 for identical partitions, 0 in expectation for
/// random ones.
pub fn ari(pair: &LabelPair) -> Result<f64> {
    if pair.len() < 2 {
        return Err(Error::param(format!("ari needs at least 2 points, got {}", pair.len())));
    }
    let table = Contingency::build(pair);
    let index: f64 = table.cells.iter().flatten().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = table.rows.iter().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = table.cols.iter().map(|&c| pairs(c)).sum();
    let expected = sum_rows * sum_cols / pairs(table.n);
    let max = (sum_rows + sum_cols) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// `k / k_star`.
pub fn approximation_ratio(k: usize, k_star: usize) -> Result<f64> {
    if k_star == 0 {
        return Err(Error::param("reference cluster count must be positive"));
    }
    Ok(k as f64 / k_star as f64)
}
