use design_miner::metrics::{auc, classification_metrics, mann_whitney_u, overlap_analysis, ConfusionMatrix};
use design_miner::textproc::TokenSeq;
use proptest::prelude::*;

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(s, mut y)| {
                y[0] = true;
                y[1] = false;
                (s, y)
            })
    })
}

fn tie_free(s: &[f64]) -> bool {
    let mut v = s.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2).all(|w| w[0] < w[1])
}

fn docs() -> impl Strategy<Value = Vec<TokenSeq>> {
    let word = prop::sample::select(vec!["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"]);
    prop::collection::vec(
        prop::collection::vec(word.prop_map(str::to_string), 0..12).prop_map(TokenSeq::new),
        1..15,
    )
}

proptest! {
    #[test]
    fn auc_flip_symmetries((s, y) in scored()) {
        let a = auc(&s, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let flipped: Vec<bool> = y.iter().map(|v| !v).collect();
        prop_assert!((a - auc(&neg, &flipped).unwrap()).abs() <= 1e-12);
        if tie_free(&s) {
            prop_assert!((a - (1.0 - auc(&neg, &y).unwrap())).abs() <= 1e-12);
        }
    }

    #[test]
    fn auc_invariant_under_increasing_maps((s, y) in scored(), scale in 0.01f64..100.0, shift in -50.0f64..50.0) {
        let a = auc(&s, &y).unwrap();
        let e: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        let affine: Vec<f64> = s.iter().map(|v| scale * v + shift).collect();
        prop_assert_eq!(a, auc(&e, &y).unwrap());
        prop_assert_eq!(a, auc(&affine, &y).unwrap());
    }

    #[test]
    fn balanced_accuracy_identity(tp in 0u64..100, fp in 0u64..100, tn in 0u64..100, fn_ in 0u64..100) {
        prop_assume!(tp + fp + tn + fn_ > 0);
        let cm = ConfusionMatrix { tp, fp, tn, fn_ };
        let m = classification_metrics(&cm).unwrap();
        let tnr = if tn + fp == 0 { 0.0 } else { tn as f64 / (tn + fp) as f64 };
        prop_assert_eq!(m.balanced_accuracy, (m.recall + tnr) / 2.0);
        prop_assert!((-1.0..=1.0).contains(&m.mcc));
    }

    #[test]
    fn overlap_is_symmetric(a in docs(), b in docs(), n in 1usize..4, k in 1usize..10) {
        let ab = overlap_analysis(&a, &b, n, k).unwrap();
        let ba = overlap_analysis(&b, &a, n, k).unwrap();
        prop_assert_eq!(ab.overlap_pct, ba.overlap_pct);
        prop_assert_eq!(ab.shared, ba.shared);
    }

    #[test]
    fn u_statistics_sum_to_pair_count(
        a in prop::collection::vec(0u8..20, 1..15),
        b in prop::collection::vec(0u8..20, 1..15),
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = (a.iter().map(|&v| v as f64).collect(), b.iter().map(|&v| v as f64).collect());
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        prop_assert!((ab.u + ba.u - (a.len() * b.len()) as f64).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-9);
    }
}
