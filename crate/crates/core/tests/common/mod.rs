//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use unimodal_dbscan::rng::stream_rng;
use unimodal_dbscan::DataMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, 7)
}

fn euclidean(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// DBSCAN straight from the definitions, as label codes (-1 for noise).
///
/// Density-reachability between core points is closed transitively with a
/// Floyd-Warshall pass. Clusters are numbered by their smallest core index
/// and a border point takes the smallest cluster id among its core
/// neighbors.
pub fn oracle_dbscan(x: &DataMatrix, eps: f64, min_pts: usize) -> Vec<i64> {
    let n = x.n_points();
    let near = |i: usize, j: usize| euclidean(x.row(i), x.row(j)) <= eps;
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts)
        .collect();

    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = core[i] && core[j] && (i == j || near(i, j));
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][m] && reach[m][j] {
                    reach[i][j] = true;
                }
            }
        }
    }

    let mut cluster_of_core = vec![-1i64; n];
    let mut next = 0;
    for i in 0..n {
        if core[i] && cluster_of_core[i] < 0 {
            for j in 0..n {
                if reach[i][j] {
                    cluster_of_core[j] = next;
                }
            }
            next += 1;
        }
    }
    (0..n)
        .map(|i| {
            if core[i] {
                cluster_of_core[i]
            } else {
                (0..n)
                    .filter(|&j| core[j] && near(i, j))
                    .map(|j| cluster_of_core[j])
                    .min()
                    .unwrap_or(-1)
            }
        })
        .collect()
}

/// Uniform points in `[0, scale]^dims`, rounded to a 1/8 lattice to provoke
/// ties and duplicates.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, dims: usize, scale: f64, lattice: bool) -> DataMatrix {
    let values = (0..n * dims)
        .map(|_| {
            let v = rng.gen::<f64>() * scale;
            if lattice {
                (v * 8.0).round() / 8.0
            } else {
                v
            }
        })
        .collect();
    DataMatrix::new(n, dims, values).unwrap()
}

fn counts<T: std::hash::Hash + Eq + Copy>(items: impl Iterator<Item = T>) -> HashMap<T, f64> {
    let mut out = HashMap::new();
    for it in items {
        *out.entry(it).or_insert(0.0) += 1.0;
    }
    out
}

/// Mutual information over the mean of the two entropies, computed from the
/// joint and marginal distributions directly.
pub fn brute_nmi(truth: &[i64], predicted: &[i64]) -> f64 {
    let n = truth.len() as f64;
    let pt = counts(truth.iter().copied());
    let pp = counts(predicted.iter().copied());
    let joint = counts(truth.iter().copied().zip(predicted.iter().copied()));
    let h = |m: &HashMap<i64, f64>| -m.values().map(|c| c / n * (c / n).ln()).sum::<f64>();
    let (ht, hp) = (h(&pt), h(&pp));
    if ht == 0.0 && hp == 0.0 {
        return 1.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(a, b), &c)| {
            let pab = c / n;
            pab * (pab / ((pt[&a] / n) * (pp[&b] / n))).ln()
        })
        .sum();
    mi / ((ht + hp) / 2.0)
}

/// Adjusted Rand index from the four pair-agreement counts over all
/// unordered pairs of points.
pub fn brute_ari(truth: &[i64], predicted: &[i64]) -> f64 {
    let n = truth.len();
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (truth[i] == truth[j], predicted[i] == predicted[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let denom = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (n00 * n11 - n01 * n10) / denom
}
