//! Property tests for the symmetric-polynomial machinery.

use noncolliding::sympoly::{
    default_recovery_tol, elem_sym, gap_polys, incomplete_elem_sym, poly_to_chamber, ChamberPoint,
};
use proptest::prelude::*;

/// Strictly ordered vectors with a healthy minimum gap, where root
/// recovery is well conditioned.
fn separated_chamber(p: usize) -> impl Strategy<Value = ChamberPoint> {
    prop::collection::vec(-0.45..0.45f64, p).prop_map(move |jitter| {
        let h = 3.0 / p as f64;
        let xs: Vec<f64> = jitter
            .iter()
            .enumerate()
            .map(|(i, j)| -1.5 + h * (i as f64 + 0.5 + 0.4 * j))
            .collect();
        ChamberPoint::from_unsorted(xs).unwrap()
    })
}

proptest! {
    #[test]
    fn roundtrip_recovers_separated_states(p in 2usize..=10, x in (2usize..=10).prop_flat_map(separated_chamber)) {
        let _ = p;
        let y = elem_sym(&x);
        let back = poly_to_chamber(&y, default_recovery_tol(&y)).unwrap();
        let scale = x.coords().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for (a, b) in back.coords().iter().zip(x.coords()) {
            prop_assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn splitting_identity_holds(xs in prop::collection::vec(-5.0..5.0f64, 2..8), i in 0usize..8) {
        let p = xs.len();
        let i = i % p;
        let x = ChamberPoint::from_unsorted(xs).unwrap();
        // e_n = x_i e_{n-1}^(i) + e_n^(i) for every degree and index
        for n in 1..=p as i32 {
            let lhs = incomplete_elem_sym(&x, &[], n);
            let rhs = x.coords()[i] * incomplete_elem_sym(&x, &[i], n - 1)
                + incomplete_elem_sym(&x, &[i], n);
            let scale = lhs.abs().max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn gap_polys_zero_tail_after_planted_ties(
        mut xs in prop::collection::vec(-2.0..2.0f64, 4..7),
        tie_at in 0usize..5,
    ) {
        let k = tie_at % (xs.len() - 1);
        xs[k + 1] = xs[k];
        let x = ChamberPoint::from_unsorted(xs).unwrap();
        let v = gap_polys(&x);
        // once some V_n vanishes, every later one does too
        let mut seen_zero = false;
        for vn in &v {
            if seen_zero {
                prop_assert_eq!(*vn, 0.0);
            }
            if *vn == 0.0 {
                seen_zero = true;
            }
        }
        prop_assert!(seen_zero, "a planted tie must kill the Vandermonde");
        prop_assert_eq!(*v.last().unwrap(), 0.0);
    }
}
