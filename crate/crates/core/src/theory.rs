//! Closed-form predictions for uniform data and Monte Carlo checks of them.
//!
//! For `N` uniform points on `[0,1]` with `min_pts = 2`, a cluster ends at
//! every point whose left spacing is below ε and right spacing above it,
//! which gives `E[k(ε)] = (N-1)(1-ε)₊ᴺ - (N-2)(1-2ε)₊ᴺ`. With
//! `min_pts = ρN` the count is trivially 0 below `ρ^{1/D}/(2β)` and
//! trivially 1 above `√D·β·ρ^{1/D}/2` for large `N`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::data::Metric;
use crate::dbscan::{dbscan, dbscan_with, DbscanParams, PairwiseDistances};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_TRIAL_BASE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformModel {
    pub n: usize,
    pub dims: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub rho: f64,
    pub beta: f64,
    pub delta: f64,
}

impl ConcentrationConfig {
    pub fn new(rho: f64, beta: f64, delta: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 0.25) {
            return Err(Error::param(format!("rho must lie in (0, 1/4), got {rho}")));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::param(format!("beta must exceed 1, got {beta}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self { rho, beta, delta })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::param(format!("closed form needs n >= 3, got {n}")));
    }
    Ok(())
}

/// Expected cluster count for `n` uniform points in `[0,1]`, `min_pts = 2`.
pub fn expected_k_closed_form(n: usize, epsilon: f64) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    let pos = |y: f64| y.max(0.0);
    Ok((nf - 1.0) * pos(1.0 - epsilon).powf(nf) - (nf - 2.0) * pos(1.0 - 2.0 * epsilon).powf(nf))
}

/// Radius maximizing [`expected_k_closed_form`]: `(a-1)/(2a-1)` with
/// `a = ((2n-2)/(n-2))^{1/(n-1)}`.
pub fn mode_epsilon_closed_form(n: usize) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    let ln_a = ((2.0 * nf - 2.0) / (nf - 2.0)).ln() / (nf - 1.0);
    let a_minus_1 = ln_a.exp_m1();
    Ok(a_minus_1 / (2.0 * a_minus_1 + 1.0))
}

/// `n x dims` matrix of iid `U[0,1]` coordinates.
pub fn sample_uniform_dataset(model: UniformModel) -> Result<DataMatrix> {
    let mut rng = stream_rng(model.seed, 0);
    let values: Vec<f64> = (0..model.n * model.dims).map(|_| rng.gen::<f64>()).collect();
    DataMatrix::new(model.n, model.dims, values)
}

fn trial_dataset(n: usize, dims: usize, seed: u64, trial: usize) -> Result<DataMatrix> {
    sample_uniform_dataset(UniformModel {
        n,
        dims,
        seed: seed.wrapping_add(STREAM_TRIAL_BASE).wrapping_add(trial as u64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl MeanEstimate {
    fn from_values(values: &[f64]) -> Self {
        let t = values.len() as f64;
        let mean = values.iter().sum::<f64>() / t;
        let std_error = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
            (var / t).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error }
    }
}

/// Mean cluster count (`min_pts = 2`) over `trials` uniform 1-D datasets,
/// one estimate per radius. Each trial dataset is reused across the grid.
pub fn monte_carlo_curve(n: usize, grid: &[f64], trials: usize, seed: u64) -> Result<Vec<MeanEstimate>> {
    if n < 2 {
        return Err(Error::param(format!("n must be at least 2, got {n}")));
    }
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    let params: Vec<DbscanParams> = grid
        .iter()
        .map(|&eps| DbscanParams::new(eps, 2))
        .collect::<Result<_>>()?;
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = trial_dataset(n, 1, seed, t)?;
            let table = PairwiseDistances::compute(&x, Metric::Euclidean);
            Ok(params
                .iter()
                .map(|&p| dbscan_with(&table, p).n_clusters() as f64)
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..grid.len())
        .map(|g| {
            let column: Vec<f64> = per_trial.iter().map(|row| row[g]).collect();
            MeanEstimate::from_values(&column)
        })
        .collect())
}

pub fn monte_carlo_expected_k(n: usize, epsilon: f64, trials: usize, seed: u64) -> Result<MeanEstimate> {
    Ok(monte_carlo_curve(n, &[epsilon], trials, seed)?[0])
}

/// `(eps_low, eps_high)`: below `eps_low` the count is 0 w.h.p., above
/// `eps_high` it is 1.
pub fn concentration_thresholds(cfg: &ConcentrationConfig, dims: usize) -> Result<(f64, f64)> {
    if dims == 0 {
        return Err(Error::param("dims must be positive"));
    }
    let scale = 0.5 * cfg.rho.powf(1.0 / dims as f64);
    Ok((scale / cfg.beta, (dims as f64).sqrt() * cfg.beta * scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub dims: usize,
    pub n: usize,
    pub trials: usize,
    pub min_pts: usize,
    pub eps_low: f64,
    pub eps_high: f64,
    pub probe_low: f64,
    pub probe_high: f64,
    pub fraction_zero_at_low: f64,
    pub fraction_one_at_high: f64,
    pub required: f64,
    pub passed: bool,
}

pub const DEFAULT_MARGIN: f64 = 0.1;

/// `round(rho * n)`, at least 2.
pub fn concentration_min_pts(rho: f64, n: usize) -> usize {
    ((rho * n as f64).round() as usize).max(2)
}

/// Probes `eps_high·(1+margin)` and `eps_low·(1-margin)` on `trials`
/// uniform datasets and checks both trivial regimes occur with
/// probability at least `1 - delta`.
pub fn concentration_experiment(
    cfg: &ConcentrationConfig,
    dims: usize,
    n: usize,
    trials: usize,
    seed: u64,
    margin: f64,
) -> Result<ConcentrationReport> {
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::param(format!("margin must lie in [0, 1), got {margin}")));
    }
    let (eps_low, eps_high) = concentration_thresholds(cfg, dims)?;
    let min_pts = concentration_min_pts(cfg.rho, n);
    let probe_low = eps_low * (1.0 - margin);
    let probe_high = eps_high * (1.0 + margin);
    let low = DbscanParams::new(probe_low, min_pts)?;
    let high = DbscanParams::new(probe_high, min_pts)?;

    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = trial_dataset(n, dims, seed, t)?;
            let zero = dbscan(&x, low, Metric::Euclidean).n_clusters() == 0;
            let one = dbscan(&x, high, Metric::Euclidean).n_clusters() == 1;
            Ok((zero, one))
        })
        .collect::<Result<_>>()?;

    let frac = |f: fn(&(bool, bool)) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / trials as f64;
    let fraction_zero_at_low = frac(|o| o.0);
    let fraction_one_at_high = frac(|o| o.1);
    let required = 1.0 - cfg.delta;
    Ok(ConcentrationReport {
        dims,
        n,
        trials,
        min_pts,
        eps_low,
        eps_high,
        probe_low,
        probe_high,
        fraction_zero_at_low,
        fraction_one_at_high,
        required,
        passed: fraction_zero_at_low >= required && fraction_one_at_high >= required,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let v = expected_k_closed_form(10, 0.5).unwrap();
        assert!((v - 9.0 / 1024.0).abs() < 1e-15);
        assert_eq!(expected_k_closed_form(10, 1.0).unwrap(), 0.0);
        assert_eq!(expected_k_closed_form(10, 3.0).unwrap(), 0.0);
        assert!(expected_k_closed_form(2, 0.1).is_err());
        let n = 1000;
        let peak = expected_k_closed_form(n, mode_epsilon_closed_form(n).unwrap()).unwrap();
        assert!((peak - 250.0).abs() / 250.0 < 0.01, "peak {peak}");
    }

    #[test]
    fn mode_small_case_and_asymptotics() {
        assert!((mode_epsilon_closed_form(3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let n = 10_000;
        let ratio = mode_epsilon_closed_form(n).unwrap() / (2f64.ln() / n as f64);
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn thresholds_examples() {
        let cfg = ConcentrationConfig::new(0.1, 2.0, 0.05).unwrap();
        let (lo, hi) = concentration_thresholds(&cfg, 1).unwrap();
        assert!((lo - 0.025).abs() < 1e-15 && (hi - 0.1).abs() < 1e-15);
        let (lo4, hi4) = concentration_thresholds(&cfg, 4).unwrap();
        let root = 0.1f64.powf(0.25);
        assert!((lo4 - 0.25 * root).abs() < 1e-15);
        assert!((hi4 - 2.0 * root).abs() < 1e-15);
        let near = ConcentrationConfig::new(0.1, 1.0 + 1e-12, 0.05).unwrap();
        let (a, b) = concentration_thresholds(&near, 1).unwrap();
        assert!((a - 0.05).abs() < 1e-10 && (b - 0.05).abs() < 1e-10);
    }

    #[test]
    fn config_validation() {
        assert!(ConcentrationConfig::new(0.25, 2.0, 0.05).is_err());
        assert!(ConcentrationConfig::new(0.1, 1.0, 0.05).is_err());
        assert!(ConcentrationConfig::new(0.1, 2.0, 1.0).is_err());
    }

    #[test]
    fn uniform_sample_support_and_determinism() {
        let model = UniformModel {
            n: 500,
            dims: 4,
            seed: 3,
        };
        let x = sample_uniform_dataset(model).unwrap();
        assert!(x.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(x, sample_uniform_dataset(model).unwrap());
        let count = x.values().len() as f64;
        let mean = x.values().iter().sum::<f64>() / count;
        let sigma = (1.0f64 / 12.0).sqrt() / count.sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn monte_carlo_boundaries() {
        let wide = monte_carlo_expected_k(50, 1.0, 10, 1).unwrap();
        assert_eq!((wide.mean, wide.std_error), (1.0, 0.0));
        let tiny = monte_carlo_expected_k(100, 1e-9, 10, 1).unwrap();
        assert_eq!(tiny.mean, 0.0);
    }

    #[test]
    fn concentration_trivial_regimes() {
        // MinPts larger than n: nothing can be core.
        let cfg = ConcentrationConfig::new(0.2, 2.0, 0.05).unwrap();
        let x = sample_uniform_dataset(UniformModel {
            n: 30,
            dims: 2,
            seed: 0,
        })
        .unwrap();
        let l = dbscan(&x, DbscanParams::new(5.0, 31).unwrap(), Metric::Euclidean);
        assert_eq!(l.n_clusters(), 0);
        let l = dbscan(&x, DbscanParams::new(2f64.sqrt(), 2).unwrap(), Metric::Euclidean);
        assert_eq!(l.n_clusters(), 1);
        let report = concentration_experiment(&cfg, 1, 2000, 4, 5, DEFAULT_MARGIN).unwrap();
        assert_eq!(report.min_pts, 400);
        assert!(report.passed);
    }
}
