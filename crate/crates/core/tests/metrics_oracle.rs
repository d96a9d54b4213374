mod common;

use common::{brute_ari, brute_nmi};
use proptest::prelude::*;
use unimodal_dbscan::metrics::{ari, exclude_noise, nmi, LabelPair};
use unimodal_dbscan::Label;

fn pair(t: &[i64], p: &[i64]) -> LabelPair {
    let conv = |c: &[i64]| c.iter().map(|&v| Label::from_code(v).unwrap()).collect();
    LabelPair::new(conv(t), conv(p)).unwrap()
}

fn labelings() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (2usize..60, 1i64..6, 1i64..6)
        .prop_flat_map(|(n, kt, kp)| (prop::collection::vec(0..kt, n), prop::collection::vec(0..kp, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn agrees_with_definitions((t, p) in labelings()) {
        let lp = pair(&t, &p);
        prop_assert!((nmi(&lp).unwrap() - brute_nmi(&t, &p)).abs() < 1e-9);
        prop_assert!((ari(&lp).unwrap() - brute_ari(&t, &p)).abs() < 1e-9);
    }

    #[test]
    fn symmetric((t, p) in labelings()) {
        let (a, b) = (pair(&t, &p), pair(&p, &t));
        prop_assert!((nmi(&a).unwrap() - nmi(&b).unwrap()).abs() < 1e-12);
        prop_assert!((ari(&a).unwrap() - ari(&b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_relabeling((t, p) in labelings(), shift in 1i64..50) {
        let renamed: Vec<i64> = p.iter().map(|v| (v * 7 + shift) % 1000).collect();
        let (a, b) = (pair(&t, &p), pair(&t, &renamed));
        prop_assert!((nmi(&a).unwrap() - nmi(&b).unwrap()).abs() < 1e-12);
        prop_assert!((ari(&a).unwrap() - ari(&b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn self_agreement_is_perfect(t in prop::collection::vec(0i64..5, 2..60)) {
        let lp = pair(&t, &t);
        prop_assert!((nmi(&lp).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((ari(&lp).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nmi_in_unit_interval((t, p) in labelings()) {
        let v = nmi(&pair(&t, &p)).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn worked_examples_match_oracle() {
    let cases: [(&[i64], &[i64], f64, f64); 3] = [
        (&[0, 0, 1, 1], &[0, 1, 0, 1], 0.0, -0.5),
        (
            &[0, 0, 1, 1],
            &[0, 0, 1, 2],
            0.8,
            brute_ari(&[0, 0, 1, 1], &[0, 0, 1, 2]),
        ),
        (&[0, 0, 1, 2], &[5, 5, 3, 4], 1.0, 1.0),
    ];
    for (t, p, want_nmi, want_ari) in cases {
        let lp = pair(t, p);
        assert!((nmi(&lp).unwrap() - want_nmi).abs() < 1e-9);
        assert!((brute_nmi(t, p) - want_nmi).abs() < 1e-9);
        assert!((ari(&lp).unwrap() - want_ari).abs() < 1e-9);
    }
}

#[test]
fn noise_rows_are_dropped_before_scoring() {
    let lp = pair(&[0, 0, 1, 1, -1], &[0, 0, 1, -1, 1]);
    let (kept, counts) = exclude_noise(&lp).unwrap();
    assert_eq!(kept.len(), 3);
    assert_eq!(counts.total(), 2);
    assert_eq!(nmi(&kept).unwrap(), 1.0);
}
