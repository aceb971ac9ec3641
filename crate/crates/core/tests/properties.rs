//! Property-based checks of the algebraic invariants that must hold for all
//! inputs, not just hand-picked examples.

use bohmsim_core::io::fmt_f64;
use bohmsim_core::potential::PotentialModel;
use bohmsim_core::types::{PhaseSpacePoint, Trajectory};
use bohmsim_core::zeno::subdivide;
use proptest::prelude::*;

fn small_f64() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

proptest! {
    #[test]
    fn line_average_symmetric(x in small_f64(), x0 in small_f64()) {
        // the segment from x0 to x is the segment from x to x0
        let v = PotentialModel::polynomial_1d(vec![0.0, 0.0, 0.5, 0.0, 0.1]);
        let a = v.line_average(&[x], &[x0]).unwrap();
        let b = v.line_average(&[x0], &[x]).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn line_average_on_coincident_points_is_value(x in small_f64()) {
        let v = PotentialModel::polynomial_1d(vec![0.3, -1.0, 0.5, 0.0, 0.1]);
        let avg = v.line_average(&[x], &[x]).unwrap();
        let val = v.value(&[x]).unwrap();
        prop_assert!((avg - val).abs() <= 1e-12 * (1.0 + val.abs()));
    }

    #[test]
    fn line_average_gradient_coincidence(x in small_f64()) {
        // grad_x of the line average at x = x0 is half the potential gradient
        let v = PotentialModel::polynomial_1d(vec![0.0, 2.0, 0.5, -0.3, 0.1]);
        let g = v.line_average_gradient(&[x], &[x]).unwrap()[0];
        let full = v.gradient(&[x]).unwrap()[0];
        prop_assert!((g - 0.5 * full).abs() <= 1e-10 * (1.0 + full.abs()));
    }

    #[test]
    fn closed_form_matches_quadrature(x in small_f64(), x0 in small_f64()) {
        let v = PotentialModel::polynomial_1d(vec![1.0, -0.5, 0.5, 0.2, 0.1]);
        let closed = v.line_average(&[x], &[x0]).unwrap();
        let quad = v.line_average_quadrature(&[x], &[x0], 16).unwrap();
        prop_assert!((closed - quad).abs() <= 1e-9 * (1.0 + closed.abs()));
    }

    #[test]
    fn trajectory_rejects_any_unsorted_times(
        mut times in proptest::collection::vec(-100.0..100.0f64, 2..20)
    ) {
        let states: Vec<PhaseSpacePoint> =
            times.iter().map(|&t| PhaseSpacePoint::new_1d(t, 0.0)).collect();
        let strictly_increasing = times.windows(2).all(|w| w[1] > w[0]);
        let built = Trajectory::new(times.clone(), states.clone());
        prop_assert_eq!(built.is_ok(), strictly_increasing);
        // sorted + deduplicated input is always accepted
        times.sort_by(f64::total_cmp);
        times.dedup();
        let states: Vec<PhaseSpacePoint> =
            times.iter().map(|&t| PhaseSpacePoint::new_1d(t, 0.0)).collect();
        prop_assert!(Trajectory::new(times, states).is_ok());
    }

    #[test]
    fn subdivision_tiles_the_interval(
        t0 in -5.0..5.0f64,
        span in 0.1..10.0f64,
        n in 1usize..50
    ) {
        let t1 = t0 + span;
        let iv = subdivide(t0, t1, n).unwrap();
        prop_assert_eq!(iv.len(), n);
        prop_assert_eq!(iv[0].0, t0);
        prop_assert_eq!(iv[n - 1].1, t1);
        for w in iv.windows(2) {
            prop_assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn float_formatting_round_trips(v in proptest::num::f64::NORMAL) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}
