//! Exhaustive sweeps of the cluster-count curve and unimodality testing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, Metric};
use crate::dbscan::{dbscan_with, DbscanParams, Distances};
use crate::dip::{dip_sorted, p_value_for};
use crate::error::{Error, Result};
use crate::search::trivial_upper_bound;

/// One point of a sweep: cluster count and noise fraction at a radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub epsilon: f64,
    pub k: usize,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimodalityReport {
    pub dip: f64,
    pub p_value: f64,
    pub mode_epsilon: f64,
    pub mode_k: usize,
    pub n_boot: usize,
    pub sample_size: usize,
    pub curve: Vec<CurveSample>,
}

/// `size` evenly spaced radii from `start` to `end` inclusive.
pub fn linear_grid(start: f64, end: f64, size: usize) -> Result<Vec<f64>> {
    if size < 2 || !(start > 0.0 && end > start && end.is_finite()) {
        return Err(Error::param(format!(
            "grid needs 0 < start < end and at least 2 points, got ({start}, {end}, {size})"
        )));
    }
    let step = (end - start) / (size - 1) as f64;
    Ok((0..size)
        .map(|i| if i + 1 == size { end } else { start + step * i as f64 })
        .collect())
}

/// Default sweep grid: `grid_size` points from `UB⁰/1000` to `UB⁰`.
pub fn default_grid(x: &DataMatrix, grid_size: usize, metric: Metric) -> Result<Vec<f64>> {
    let (ub0, warning) = trivial_upper_bound(x, metric)?;
    if warning.is_some() {
        return Err(Error::DegenerateDataset("all points coincide".into()));
    }
    linear_grid(ub0 / 1000.0, ub0, grid_size)
}

/// Runs DBSCAN independently at every radius of a strictly increasing grid.
pub fn sweep_curve(x: &DataMatrix, grid: &[f64], min_pts: usize, metric: Metric) -> Result<Vec<CurveSample>> {
    if grid.is_empty() {
        return Err(Error::Empty("sweep grid".into()));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::param("sweep grid must be strictly increasing"));
    }
    let params: Vec<DbscanParams> = grid
        .iter()
        .map(|&eps| DbscanParams::new(eps, min_pts))
        .collect::<Result<_>>()?;
    let distances = Distances::for_repeated_use(x, metric);
    Ok(params
        .par_iter()
        .map(|&p| {
            let labeling = dbscan_with(&distances, p);
            CurveSample {
                epsilon: p.epsilon(),
                k: labeling.n_clusters(),
                noise: labeling.noise_fraction(),
            }
        })
        .collect())
}

/// Histogram expansion: every radius repeated as many times as its cluster
/// count, so the curve reads as a frequency distribution over radii.
pub fn curve_to_sample(curve: &[CurveSample]) -> Result<Vec<f64>> {
    let sample: Vec<f64> = curve.iter().flat_map(|s| std::iter::repeat_n(s.epsilon, s.k)).collect();
    if sample.is_empty() {
        return Err(Error::Empty("cluster-count curve is zero everywhere".into()));
    }
    Ok(sample)
}

/// Grid argmax of `k`, first occurrence on ties.
pub fn curve_mode(curve: &[CurveSample]) -> Option<CurveSample> {
    curve
        .iter()
        .copied()
        .fold(None, |best: Option<CurveSample>, s| match best {
            Some(b) if b.k >= s.k => Some(b),
            _ => Some(s),
        })
}

/// Number of strict local maxima of a sequence, where runs of equal values
/// are treated as one plateau that must be strictly higher than the runs on
/// both sides. Plateaus at either end count when higher than their single
/// neighbor.
pub fn strict_local_maxima(values: &[usize]) -> usize {
    let mut runs: Vec<usize> = Vec::new();
    for &v in values {
        if runs.last() != Some(&v) {
            runs.push(v);
        }
    }
    (0..runs.len())
        .filter(|&i| {
            let left = i == 0 || runs[i - 1] < runs[i];
            let right = i + 1 == runs.len() || runs[i + 1] < runs[i];
            runs.len() > 1 && left && right
        })
        .count()
}

/// Sweeps the default grid, tests the expanded curve with the dip test,
/// and reports the sweep mode.
pub fn unimodality_report(
    x: &DataMatrix,
    grid_size: usize,
    min_pts: usize,
    metric: Metric,
    n_boot: usize,
    seed: u64,
) -> Result<UnimodalityReport> {
    if grid_size < 3 {
        return Err(Error::param(format!("grid_size must be at least 3, got {grid_size}")));
    }
    if n_boot == 0 {
        return Err(Error::param("n_boot must be positive"));
    }
    let grid = default_grid(x, grid_size, metric)?;
    let curve = sweep_curve(x, &grid, min_pts, metric)?;
    report_for_curve(curve, n_boot, seed)
}

/// Dip test and mode of an already computed curve.
pub fn report_for_curve(curve: Vec<CurveSample>, n_boot: usize, seed: u64) -> Result<UnimodalityReport> {
    if n_boot == 0 {
        return Err(Error::param("n_boot must be positive"));
    }
    let mut sample = curve_to_sample(&curve)?;
    if sample.len() < 2 {
        return Err(Error::DegenerateDataset(
            "cluster-count curve has total mass below 2".into(),
        ));
    }
    sample.sort_by(f64::total_cmp);
    let dip = dip_sorted(&sample);
    let p_value = p_value_for(dip, sample.len(), n_boot, seed);
    let mode = curve_mode(&curve).expect("non-empty curve");
    Ok(UnimodalityReport {
        dip,
        p_value,
        mode_epsilon: mode.epsilon,
        mode_k: mode.k,
        n_boot,
        sample_size: sample.len(),
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(epsilon: f64, k: usize) -> CurveSample {
        CurveSample { epsilon, k, noise: 0.0 }
    }

    #[test]
    fn sweep_boundary_example() {
        let x = DataMatrix::from_column(&[0.0, 10.0, 20.0]).unwrap();
        let curve = sweep_curve(&x, &[0.5, 25.0], 2, Metric::Euclidean).unwrap();
        assert_eq!(
            curve,
            vec![
                CurveSample {
                    epsilon: 0.5,
                    k: 0,
                    noise: 1.0
                },
                CurveSample {
                    epsilon: 25.0,
                    k: 1,
                    noise: 0.0
                },
            ]
        );
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let x = DataMatrix::from_column(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            sweep_curve(&x, &[], 2, Metric::Euclidean),
            Err(Error::Empty(_))
        ));
        assert!(sweep_curve(&x, &[1.0, 1.0], 2, Metric::Euclidean).is_err());
    }

    #[test]
    fn expansion_examples() {
        let curve = [sample(1.0, 2), sample(2.0, 0), sample(3.0, 1)];
        assert_eq!(curve_to_sample(&curve).unwrap(), vec![1.0, 1.0, 3.0]);
        assert_eq!(curve_to_sample(&[sample(1.0, 1)]).unwrap(), vec![1.0]);
        let flat = [sample(1.0, 3), sample(2.0, 3)];
        assert_eq!(curve_to_sample(&flat).unwrap(), vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        assert!(curve_to_sample(&[sample(1.0, 0)]).is_err());
    }

    #[test]
    fn local_maxima_counting() {
        assert_eq!(strict_local_maxima(&[0, 1, 2, 2, 1, 1]), 1);
        assert_eq!(strict_local_maxima(&[0, 2, 1, 3, 1]), 2);
        assert_eq!(strict_local_maxima(&[0, 2, 2, 1, 1, 3, 3, 1]), 2);
        assert_eq!(strict_local_maxima(&[1, 1, 1]), 0);
        assert_eq!(strict_local_maxima(&[]), 0);
    }

    #[test]
    fn grid_endpoints() {
        let g = linear_grid(0.01, 10.0, 100).unwrap();
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[99], 10.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(linear_grid(0.0, 1.0, 5).is_err());
    }

    #[test]
    fn report_rejects_degenerate_data() {
        let x = DataMatrix::from_column(&[1.0; 5]).unwrap();
        assert!(matches!(
            unimodality_report(&x, 10, 2, Metric::Euclidean, 100, 0),
            Err(Error::DegenerateDataset(_))
        ));
        let y = DataMatrix::from_column(&[0.0, 1.0, 2.0]).unwrap();
        assert!(unimodality_report(&y, 2, 2, Metric::Euclidean, 100, 0).is_err());
    }
}
