//! Property suite for the multiscale exponent estimator and its
//! agreement with the exact orbit obstruction.

use proptest::prelude::*;

use anosov_core::cohomology::{orbit_condition, solve_fiber_coboundary};
use anosov_core::lattice::{self, UnimodularMatrix};
use anosov_core::maps::{TorusMap, TrigPolynomial};
use anosov_core::num_complex::Complex64;
use anosov_core::regularity::{
    directional_increments, dyadic_scales, holder_exponent, Classification,
};
use anosov_core::sample;

fn cat() -> UnimodularMatrix {
    UnimodularMatrix::new(&[vec![2, 1], vec![1, 1]]).unwrap()
}

fn b3() -> UnimodularMatrix {
    UnimodularMatrix::new(&[vec![3, 1], vec![2, 1]]).unwrap()
}

fn unstable_rate(m: &UnimodularMatrix) -> f64 {
    let s = lattice::spectral_splitting(m).unwrap();
    s.modes[s.weakest_unstable()].value.re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn slope_is_invariant_under_direction_rescaling(c in 0.5f64..2.0) {
        let f = |y: &[f64]| (y[0] * y[0] + y[1]).abs().powf(0.6);
        let scales = dyadic_scales(6, 14);
        let pts = sample::kronecker_points(2, 48, 3);
        let base = [0.7, 0.3];
        let scaled = [0.7 * c, 0.3 * c];
        let t1 = directional_increments(&f, &pts, &base, &scales);
        let t2 = directional_increments(&f, &pts, &scaled, &scales);
        let r1 = holder_exponent(&t1).unwrap();
        let r2 = holder_exponent(&t2).unwrap();
        if let (Some(a1), Some(a2)) = (r1.exponent, r2.exponent) {
            prop_assert!((a1 - a2).abs() < 0.01, "{a1} vs {a2}");
        }
    }

    #[test]
    fn power_law_controls_recover_their_exponent(beta_idx in 0usize..4) {
        let beta = [0.25, 0.5, 0.75, 1.0][beta_idx];
        let f = move |y: &[f64]| y[0].abs().powf(beta);
        let scales = dyadic_scales(4, 14);
        // base points far below the finest scale so the pure power law
        // dominates every increment
        let pts: Vec<Vec<f64>> = sample::kronecker_points(2, 40, 5)
            .into_iter()
            .map(|p| vec![p[0] / 16_777_216.0, p[1]])
            .collect();
        let table = directional_increments(&f, &pts, &[1.0, 0.0], &scales);
        let report = holder_exponent(&table).unwrap();
        let alpha = report.exponent.unwrap();
        prop_assert!((alpha - beta).abs() < 0.02, "{alpha} vs {beta}");
    }
}

/// Verdict "Lipschitz-or-better" along the base unstable direction occurs
/// exactly when the exact orbit condition holds, on five constructed
/// shift families each side.
#[test]
fn classification_tracks_the_orbit_condition() {
    let b = b3();
    let lambda = unstable_rate(&cat());
    let mu = unstable_rate(&b);
    let split = lattice::spectral_splitting(&b).unwrap();
    let u = split.real_vector(1).unwrap();
    let base = TorusMap::linear_map(b.clone());
    let bt = b.transpose();
    let scales = dyadic_scales(4, 14);
    let pts = sample::kronecker_points(2, 48, 9);
    let freqs: [[i64; 2]; 5] = [[1, 0], [0, 1], [1, 1], [1, -1], [2, 1]];
    for (i, n0) in freqs.iter().enumerate() {
        let c = Complex64::new(0.003 + 0.001 * i as f64, -0.004);
        for cancel in [true, false] {
            let mut terms = vec![(n0.to_vec(), c)];
            if cancel {
                let moved: Vec<i64> = bt
                    .int_mat()
                    .matvec(&n0.iter().map(|&x| x as i128).collect::<Vec<_>>())
                    .iter()
                    .map(|&x| x as i64)
                    .collect();
                terms.push((moved, -c / lambda));
            }
            let phi = TrigPolynomial::from_half_terms(2, &terms);
            let cond = orbit_condition(&phi, &b, lambda, mu).unwrap();
            assert_eq!(cond.holds, cancel, "orbit condition for {n0:?} cancel={cancel}");
            let psi = solve_fiber_coboundary(&phi, &base, lambda, 1e-12).unwrap();
            let table = directional_increments(|y: &[f64]| psi.eval(y), &pts, &u, &scales);
            let report = holder_exponent(&table).unwrap();
            let lipschitz = report.classification == Classification::LipschitzOrBetter;
            assert_eq!(
                lipschitz, cancel,
                "classification for {n0:?} cancel={cancel}: {:?}",
                report.classification
            );
        }
    }
}
