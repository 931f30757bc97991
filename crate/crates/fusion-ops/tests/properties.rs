//! Property tests for the fusion operators.

use fusion_ops::{
    agreement_matrix, conflict_matrix, degree_of_conflict, discount_factors, fuse_dbf, fuse_gbaf,
};
use proptest::prelude::*;
use sl_core::{opinion_from_evidence, Evidence, Opinion};

/// Lists of 1..=6 random non-dogmatic opinions over a shared domain.
fn opinion_list() -> impl Strategy<Value = Vec<Opinion>> {
    (2usize..=10, 1usize..=6).prop_flat_map(|(k, v)| {
        prop::collection::vec(
            prop::collection::vec(0.0f64..50.0, k),
            v,
        )
        .prop_map(|evidences| {
            evidences
                .into_iter()
                .map(|e| opinion_from_evidence(&Evidence::try_new(e).unwrap(), None).unwrap())
                .collect()
        })
    })
}

fn max_component_diff(a: &Opinion, b: &Opinion) -> f64 {
    let mut worst = (a.uncertainty() - b.uncertainty()).abs();
    for (x, y) in a.beliefs().iter().zip(b.beliefs()) {
        worst = worst.max((x - y).abs());
    }
    worst
}

/// Next lexicographic permutation in place; false once wrapped around.
fn next_permutation(idx: &mut [usize]) -> bool {
    let n = idx.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && idx[i - 1] >= idx[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while idx[j] <= idx[i - 1] {
        j -= 1;
    }
    idx.swap(i - 1, j);
    idx[i..].reverse();
    true
}

proptest! {
    #[test]
    fn degree_of_conflict_is_bounded_and_symmetric(ops in opinion_list()) {
        for a in &ops {
            for b in &ops {
                let fwd = degree_of_conflict(a, b).unwrap();
                let bwd = degree_of_conflict(b, a).unwrap();
                prop_assert!(fwd.dc >= 0.0 && fwd.dc <= 1.0);
                prop_assert_eq!(fwd.dc, bwd.dc);
            }
        }
    }

    #[test]
    fn gbaf_uncertainty_is_harmonic_mean(ops in opinion_list()) {
        let fused = fuse_gbaf(&ops).unwrap();
        let harmonic = ops.len() as f64
            / ops.iter().map(|o| 1.0 / o.uncertainty()).sum::<f64>();
        prop_assert!((fused.uncertainty() - harmonic).abs() <= 1e-12);
    }

    #[test]
    fn gbaf_and_dbf_are_permutation_invariant(ops in opinion_list(), lambda in 0.5f64..10.0) {
        let gbaf = fuse_gbaf(&ops).unwrap();
        let (dbf, _) = fuse_dbf(&ops, lambda).unwrap();
        let mut idx: Vec<usize> = (0..ops.len()).collect();
        loop {
            let permuted: Vec<Opinion> = idx.iter().map(|&i| ops[i].clone()).collect();
            let g = fuse_gbaf(&permuted).unwrap();
            let (d, _) = fuse_dbf(&permuted, lambda).unwrap();
            prop_assert!(max_component_diff(&g, &gbaf) <= 1e-12);
            prop_assert!(max_component_diff(&d, &dbf) <= 1e-12);
            if !next_permutation(&mut idx) {
                break;
            }
        }
    }

    #[test]
    fn vacuous_opinion_leaves_discounts_untouched(ops in opinion_list(), lambda in 0.5f64..10.0) {
        let base = conflict_matrix(&ops).unwrap();
        let eta = discount_factors(&agreement_matrix(&base, lambda).unwrap());

        let mut with_vacuous = ops.clone();
        with_vacuous.push(Opinion::vacuous(ops[0].num_classes()).unwrap());
        let extended = conflict_matrix(&with_vacuous).unwrap();
        let eta_ext = discount_factors(&agreement_matrix(&extended, lambda).unwrap());

        for v in 0..ops.len() {
            prop_assert_eq!(extended.get(v, ops.len()), 0.0);
            prop_assert_eq!(eta.get(v), eta_ext.get(v));
        }
    }

    #[test]
    fn dbf_fused_uncertainty_rises_with_conflict(
        u in 0.05f64..0.95,
        pd_lo in 0.0f64..1.0,
        pd_hi in 0.0f64..1.0,
        lambda in 0.5f64..10.0,
    ) {
        // Two opinions with equal uncertainty and controllable projected
        // distance: b = (m·s, (1-m)·s) vs the mirror image, s = 1 - u.
        let (lo, hi) = if pd_lo <= pd_hi { (pd_lo, pd_hi) } else { (pd_hi, pd_lo) };
        let fused_u = |pd: f64| {
            let s = 1.0 - u;
            let m = 0.5 + pd / 2.0;
            let a = Opinion::try_new(vec![m * s, (1.0 - m) * s], u, None).unwrap();
            let b = Opinion::try_new(vec![(1.0 - m) * s, m * s], u, None).unwrap();
            fuse_dbf(&[a, b], lambda).unwrap().0.uncertainty()
        };
        prop_assert!(fused_u(hi) >= fused_u(lo) - 1e-12);
    }
}
