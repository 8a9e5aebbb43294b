//! Property suite for torus map evaluation, derivatives and the
//! linearizing conjugacy.

use proptest::prelude::*;

use anosov_core::lattice::UnimodularMatrix;
use anosov_core::maps::{self, linearizing_conjugacy, TorusMap, TrigPolynomial};

fn cat() -> UnimodularMatrix {
    UnimodularMatrix::new(&[vec![2, 1], vec![1, 1]]).unwrap()
}

fn perturbed(eps0: f64, eps1: f64) -> TorusMap {
    TorusMap::new(
        cat(),
        vec![
            TrigPolynomial::sin_wave(2, &[1, 0], eps0),
            TrigPolynomial::cos_wave(2, &[0, 1], eps1),
        ],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lift_commutes_with_deck_translations(
        x0 in 0.0f64..1.0, x1 in 0.0f64..1.0,
        m0 in -3i64..=3, m1 in -3i64..=3,
        eps in 0.0f64..0.05,
    ) {
        let f = perturbed(eps, eps / 2.0);
        let x = [x0, x1];
        let shifted = [x0 + m0 as f64, x1 + m1 as f64];
        let a = f.eval_lift(&shifted);
        let b = f.eval_lift(&x);
        let mm = cat().to_f64().matvec(&[m0 as f64, m1 as f64]);
        for i in 0..2 {
            prop_assert!((a[i] - b[i] - mm[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences(
        x0 in 0.0f64..1.0, x1 in 0.0f64..1.0,
        eps in 0.0f64..0.05,
    ) {
        let f = perturbed(eps, eps);
        let x = [x0, x1];
        let j = f.jacobian(&x);
        let h = 1e-5;
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let fp = f.eval_lift(&xp);
            let fm = f.eval_lift(&xm);
            for r in 0..2 {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                prop_assert!((j[(r, c)] - fd).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn finite_time_splitting_is_equivariant(x0 in 0.0f64..1.0, x1 in 0.0f64..1.0) {
        let f = perturbed(0.03, 0.02);
        let x = [x0, x1];
        let fs = maps::finite_time_splitting(&f, &x, 30).unwrap();
        let fs_next = maps::finite_time_splitting(&f, &f.eval(&x), 30).unwrap();
        let j = f.jacobian(&x);
        for (e, e_next) in fs.directions.iter().zip(&fs_next.directions) {
            let mut im = j.matvec(e);
            let n: f64 = im.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in im.iter_mut() {
                *v /= n;
            }
            let dot: f64 = im.iter().zip(e_next).map(|(a, b)| a * b).sum();
            let s = if dot >= 0.0 { 1.0 } else { -1.0 };
            let res: f64 = im
                .iter()
                .zip(e_next)
                .map(|(a, b)| (a - s * b) * (a - s * b))
                .sum::<f64>()
                .sqrt();
            prop_assert!(res <= fs.residual + fs_next.residual + 1e-9);
        }
    }
}

#[test]
fn conjugacy_lift_is_periodic() {
    let f = perturbed(0.02, 0.015);
    let h = linearizing_conjugacy(&f, 1e-6, 64).unwrap();
    for &(x0, x1, m0, m1) in &[
        (0.13, 0.58, 1.0, 0.0),
        (0.71, 0.29, -2.0, 1.0),
        (0.05, 0.95, 0.0, 3.0),
    ] {
        let a = h.apply_lift(&[x0 + m0, x1 + m1]);
        let b = h.apply_lift(&[x0, x1]);
        assert!((a[0] - b[0] - m0).abs() < 1e-9);
        assert!((a[1] - b[1] - m1).abs() < 1e-9);
    }
}
