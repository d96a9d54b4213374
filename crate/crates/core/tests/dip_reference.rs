//! Dip statistic against values produced by the `diptest` Python package
//! (`dipstat(x, allow_zero=False)`), plus property checks.

use proptest::prelude::*;
use unimodal_dbscan::dip::{dip_p_value, dip_statistic};

const NORMAL_40: [f64; 40] = [
    0.304717, -1.039984, 0.750451, 0.940565, -1.951035, -1.30218, 0.12784, -0.316243, -0.016801, -0.853044, 0.879398,
    0.777792, 0.066031, 1.127241, 0.467509, -0.859292, 0.368751, -0.958883, 0.87845, -0.049926, -0.184862, -0.68093,
    1.222541, -0.154529, -0.428328, -0.352134, 0.532309, 0.365444, 0.412733, 0.430821, 2.141648, -0.406415, -0.512243,
    -0.813773, 0.615979, 1.128972, -0.113947, -0.840156, -0.824481, 0.650593,
];
const BIMODAL_60: [f64; 60] = [
    0.743254, 0.543154, -0.66551, 0.232161, 0.116686, 0.218689, 0.871429, 0.223596, 0.678914, 0.067579, 0.289119,
    0.631288, -1.457156, -0.319671, -0.470373, -0.638878, -0.275142, 1.494941, -0.865831, 0.968278, -1.68287,
    -0.334885, 0.162753, 0.586222, 0.711227, 0.793347, -0.348725, -0.462352, 0.857976, -0.191304, 4.724314, 4.866713,
    5.080548, 6.497161, 6.142426, 6.690485, 5.572747, 6.15854, 6.62559, 5.690653, 6.456775, 5.338074, 5.636946,
    5.618262, 4.80416, 6.486972, 5.530598, 6.012494, 6.480747, 6.446531, 6.665385, 5.901515, 5.576702, 5.920282,
    4.312666, 4.552888, 4.6773, 5.002753, 6.399774, 5.094521,
];
const TIES_25: [f64; 25] = [
    2.0, 1.0, 4.0, 5.0, 1.0, 4.0, 1.0, 4.0, 4.0, 2.0, 4.0, 1.0, 0.0, 0.0, 2.0, 5.0, 0.0, 2.0, 4.0, 1.0, 4.0, 1.0, 4.0,
    3.0, 3.0,
];
const SKEWED_50: [f64; 50] = [
    0.684483, 2.159779, 1.54172, 1.171247, 0.17095, 1.189421, 0.454478, 0.123764, 0.399426, 0.070557, 0.915085,
    0.971677, 0.2943, 0.045841, 2.72931, 0.807799, 1.488073, 0.352795, 1.676401, 1.641271, 0.093132, 5.43159, 0.673596,
    1.397758, 0.243699, 0.983821, 0.286243, 1.613945, 0.463076, 0.779097, 0.528071, 0.75351, 0.472301, 0.612994,
    0.028722, 1.587509, 2.509648, 0.58096, 3.404089, 0.168086, 2.784648, 0.364354, 0.668658, 2.436994, 0.126925,
    0.190985, 1.342529, 0.982379, 0.287969, 0.443358,
];
const TRIMODAL_45: [f64; 45] = [
    0.638541, -0.246416, 0.251547, -0.270878, 0.279472, 0.115485, -0.046991, -0.012229, -0.196436, 0.133822, -0.136495,
    -0.367682, -0.383381, 0.051776, 0.473727, 3.047997, 2.964409, 3.085748, 3.391801, 3.065815, 2.876722, 3.331887,
    3.128627, 3.460727, 3.05497, 2.632659, 2.589552, 3.495278, 3.5171, 2.946144, 5.885044, 6.438433, 5.667886,
    5.731582, 6.192998, 5.881618, 5.998463, 5.950967, 6.101272, 6.422245, 6.027175, 6.193182, 5.384948, 5.985384,
    5.747031,
];

fn close(actual: f64, expected: f64) {
    assert!(
        (actual - expected).abs() < 1e-12,
        "dip {actual} vs reference {expected}"
    );
}

#[test]
fn matches_reference_package() {
    close(dip_statistic(&NORMAL_40).unwrap(), 0.052675396645344284);
    close(dip_statistic(&BIMODAL_60).unwrap(), 0.14361413215320104);
    close(dip_statistic(&TIES_25).unwrap(), 0.12);
    close(dip_statistic(&[0.0, 1.0, 5.0]).unwrap(), 0.16666666666666666);
    close(dip_statistic(&SKEWED_50).unwrap(), 0.0328077622801698);
    close(dip_statistic(&TRIMODAL_45).unwrap(), 0.11159463086809268);
}

#[test]
fn separated_masses_are_significant() {
    let mut s = vec![0.0; 100];
    s.extend(vec![1.0; 100]);
    assert!(dip_p_value(&s, 200, 1).unwrap() < 0.05);
}

#[test]
fn triangular_sample_is_not_significant() {
    // Inverse-CDF points of the symmetric triangular law on [0, 2].
    let n = 500;
    let s: Vec<f64> = (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            if u < 0.5 {
                (2.0 * u).sqrt()
            } else {
                2.0 - (2.0 * (1.0 - u)).sqrt()
            }
        })
        .collect();
    assert!(dip_p_value(&s, 200, 1).unwrap() > 0.05);
}

#[test]
fn p_value_non_increasing_in_dip() {
    let a = NORMAL_40.to_vec();
    let b: Vec<f64> = BIMODAL_60[..20].iter().chain(&BIMODAL_60[40..]).copied().collect();
    let (da, db) = (dip_statistic(&a).unwrap(), dip_statistic(&b).unwrap());
    let (pa, pb) = (dip_p_value(&a, 300, 5).unwrap(), dip_p_value(&b, 300, 5).unwrap());
    if da <= db {
        assert!(pa >= pb);
    } else {
        assert!(pb >= pa);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dip_within_published_bounds(sample in prop::collection::vec(-1e3f64..1e3, 2..120)) {
        let d = dip_statistic(&sample).unwrap();
        let n = sample.len() as f64;
        prop_assert!(d >= 1.0 / (2.0 * n) - 1e-15);
        prop_assert!(d <= 0.25 + 1e-15);
    }

    #[test]
    fn dip_invariant_under_increasing_affine_maps(
        sample in prop::collection::vec(-100f64..100.0, 2..80),
        scale in 0.01f64..100.0,
        shift in -1e3f64..1e3,
    ) {
        let mapped: Vec<f64> = sample.iter().map(|v| scale * v + shift).collect();
        let (a, b) = (dip_statistic(&sample).unwrap(), dip_statistic(&mapped).unwrap());
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }
}
