//! Isotropic Gaussian blobs with ground-truth labels.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::dbscan::Label;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub k: usize,
    pub per_cluster: usize,
    pub dims: usize,
    pub separation: f64,
    pub seed: u64,
}

const CENTER_ATTEMPTS: usize = 1000;

/// `k` unit-variance blobs of `per_cluster` points whose centers are pairwise
/// at least `separation` apart. Points are grouped by blob; labels `0..k`.
pub fn synth_blobs(spec: BlobSpec) -> Result<(DataMatrix, Vec<Label>)> {
    if spec.k == 0 || spec.per_cluster == 0 || spec.dims == 0 {
        return Err(Error::param("k, per_cluster and dims must be positive"));
    }
    if !(spec.separation > 0.0 && spec.separation.is_finite()) {
        return Err(Error::param(format!(
            "separation must be positive, got {}",
            spec.separation
        )));
    }
    let mut rng = stream_rng(spec.seed, 0);
    let centers = place_centers(&mut rng, spec);

    let mut values = Vec::with_capacity(spec.k * spec.per_cluster * spec.dims);
    let mut labels = Vec::with_capacity(spec.k * spec.per_cluster);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..spec.per_cluster {
            values.extend(center.iter().map(|&m| m + rng.sample::<f64, _>(StandardNormal)));
            labels.push(Label::Cluster(c));
        }
    }
    Ok((DataMatrix::new(spec.k * spec.per_cluster, spec.dims, values)?, labels))
}

fn place_centers(rng: &mut impl Rng, spec: BlobSpec) -> Vec<Vec<f64>> {
    let mut side = 2.0 * spec.separation * (spec.k as f64).powf(1.0 / spec.dims as f64).max(1.0);
    'restart: loop {
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.k);
        while centers.len() < spec.k {
            let mut placed = false;
            for _ in 0..CENTER_ATTEMPTS {
                let candidate: Vec<f64> = (0..spec.dims).map(|_| rng.gen::<f64>() * side).collect();
                let clear = centers.iter().all(|c| {
                    c.iter()
                        .zip(&candidate)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                        >= spec.separation
                });
                if clear {
                    centers.push(candidate);
                    placed = true;
                    break;
                }
            }
            if !placed {
                side *= 1.5;
                continue 'restart;
            }
        }
        return centers;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(k: usize, dims: usize, separation: f64) -> BlobSpec {
        BlobSpec {
            k,
            per_cluster: 20,
            dims,
            separation,
            seed: 11,
        }
    }

    #[test]
    fn single_blob_has_one_label() {
        let (x, labels) = synth_blobs(spec(1, 3, 10.0)).unwrap();
        assert_eq!(x.n_points(), 20);
        assert!(labels.iter().all(|&l| l == Label::Cluster(0)));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(
            synth_blobs(spec(4, 2, 10.0)).unwrap(),
            synth_blobs(spec(4, 2, 10.0)).unwrap()
        );
        let other = BlobSpec {
            seed: 12,
            ..spec(4, 2, 10.0)
        };
        assert_ne!(synth_blobs(spec(4, 2, 10.0)).unwrap().0, synth_blobs(other).unwrap().0);
    }

    #[test]
    fn centers_respect_separation() {
        let s = spec(30, 2, 5.0);
        let centers = place_centers(&mut stream_rng(s.seed, 0), s);
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                let d: f64 = centers[i]
                    .iter()
                    .zip(&centers[j])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(d >= 5.0);
            }
        }
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(synth_blobs(spec(0, 2, 1.0)).is_err());
        assert!(synth_blobs(spec(2, 2, 0.0)).is_err());
    }
}
