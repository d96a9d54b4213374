//! Random search for small 2-D point sets whose cluster-count curve has more
//! than one strict local maximum.
//!
//! k(eps) only changes at pairwise distances, so each candidate is evaluated
//! exactly: once just below the smallest distance and once at every distinct
//! distance. Candidates are scored by the narrowest radius interval among the
//! runs that make up the two peaks and the valley between them, so the
//! winner is easy to detect with an ordinary sweep.
//!
//! Usage: cargo run --release --example find_nonunimodal [seed] [candidates]

use rand::Rng;
use unimodal_dbscan::curve::strict_local_maxima;
use unimodal_dbscan::dbscan::PairwiseDistances;
use unimodal_dbscan::rng::stream_rng;
use unimodal_dbscan::{dbscan::dbscan_with, io::format_matrix, DataMatrix, DbscanParams, Metric};

const MIN_PTS: usize = 2;
const SIDE: u32 = 20;

struct Run {
    k: usize,
    from: f64,
    to: f64,
}

fn runs(x: &DataMatrix) -> Vec<Run> {
    let table = PairwiseDistances::compute(x, Metric::Euclidean);
    let mut radii: Vec<f64> = (0..x.n_points())
        .flat_map(|i| (i + 1..x.n_points()).map(move |j| (i, j)))
        .map(|(i, j)| Metric::Euclidean.eval(x.row(i), x.row(j)))
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut out: Vec<Run> = vec![Run {
        k: 0,
        from: 0.0,
        to: radii[0],
    }];
    for (idx, &eps) in radii.iter().enumerate() {
        let k = dbscan_with(&table, DbscanParams::new(eps, MIN_PTS).unwrap()).n_clusters();
        let to = radii.get(idx + 1).copied().unwrap_or(f64::INFINITY);
        match out.last_mut() {
            Some(last) if last.k == k => last.to = to,
            _ => out.push(Run { k, from: eps, to }),
        }
    }
    out
}

/// Narrowest interval among the first peak, the following valley and the
/// next peak; `None` when the curve is unimodal.
fn score(runs: &[Run]) -> Option<f64> {
    let ks: Vec<usize> = runs.iter().map(|r| r.k).collect();
    if strict_local_maxima(&ks) < 2 {
        return None;
    }
    let peaks: Vec<usize> = (1..runs.len() - 1)
        .filter(|&i| runs[i - 1].k < runs[i].k && runs[i + 1].k < runs[i].k)
        .collect();
    let (a, b) = (peaks[0], peaks[1]);
    let width = (a..=b).map(|i| runs[i].to - runs[i].from).fold(f64::INFINITY, f64::min);
    let span = runs.last().unwrap().from;
    Some(width / span)
}

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let candidates: usize = args.next().map_or(20_000, |s| s.parse().expect("candidates"));
    let mut rng = stream_rng(seed, 0);
    let mut best: Option<(f64, DataMatrix)> = None;
    for _ in 0..candidates {
        let n = rng.gen_range(5..=9);
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.gen_range(0..=SIDE) as f64, rng.gen_range(0..=SIDE) as f64])
            .collect();
        let x = DataMatrix::from_rows(&pts).unwrap();
        if x.min_pairwise_distance(Metric::Euclidean) == Some(0.0) {
            continue;
        }
        if let Some(s) = score(&runs(&x)) {
            let better = best
                .as_ref()
                .is_none_or(|(b, prev)| s > *b + 1e-12 || ((s - *b).abs() <= 1e-12 && x.n_points() < prev.n_points()));
            if better {
                best = Some((s, x));
            }
        }
    }
    let (s, x) = best.expect("no non-unimodal configuration found");
    eprintln!("min_pts={MIN_PTS} n={} relative_width={s:.4}", x.n_points());
    for r in runs(&x) {
        eprintln!("  k={} on [{:.4}, {:.4})", r.k, r.from, r.to);
    }
    print!("{}", format_matrix(&x));
}
