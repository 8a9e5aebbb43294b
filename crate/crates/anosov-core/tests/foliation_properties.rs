//! Property suite for foliation probes, the affine leafwise distance and
//! u-Gibbs histograms.

use proptest::prelude::*;

use anosov_core::foliation::{
    epsilon_density, integrate_leaf, leaf_direction, strong_direction_field, ugibbs_measure,
    AffineDistance,
};
use anosov_core::lattice::UnimodularMatrix;
use anosov_core::maps::{TorusMap, TrigPolynomial};
use anosov_core::sample;

fn cat() -> UnimodularMatrix {
    UnimodularMatrix::new(&[vec![2, 1], vec![1, 1]]).unwrap()
}

fn perturbed_cat(eps: f64) -> TorusMap {
    TorusMap::new(
        cat(),
        vec![
            TrigPolynomial::sin_wave(2, &[1, 0], eps),
            TrigPolynomial::sin_wave(2, &[0, 1], -eps),
        ],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coverage_is_monotone_in_radius_and_eps(seed in 1u64..500) {
        let pts = sample::kronecker_points(2, 400, seed);
        // nested point sets: coverage nondecreasing in the prefix length
        let mut prev = 0.0;
        for n in [50, 100, 200, 400] {
            let c = epsilon_density(&pts[..n], 0.125, 16);
            prop_assert!(c + 1e-12 >= prev);
            prev = c;
        }
        // and nondecreasing in eps at fixed points
        let fine = epsilon_density(&pts, 0.0625, 32);
        let coarse = epsilon_density(&pts, 0.125, 16);
        prop_assert!(coarse + 1e-12 >= fine);
    }

    #[test]
    fn direction_field_is_equivariant_within_residual(
        x0 in 0.0f64..1.0,
        x1 in 0.0f64..1.0,
    ) {
        let f = perturbed_cat(0.02);
        let (_, res) = strong_direction_field(&f, &[x0, x1], 1, 40).unwrap();
        prop_assert!(res < 1e-6, "residual {res}");
    }
}

/// D3: the ratio of the affine distance to the torus distance is bounded
/// above and below by an explicitly computed constant over a sampled set
/// of leafwise pairs.
#[test]
fn affine_distance_ratio_bounds_hold_with_finite_constant() {
    let f = perturbed_cat(0.02);
    let mut ratios = Vec::new();
    for (i, x) in sample::kronecker_points(2, 6, 21).into_iter().enumerate() {
        let ad = AffineDistance::new(&f, &x, 20).unwrap();
        let dir = leaf_direction(&f, &x, 1, 40).unwrap();
        for j in 4..=9 {
            let d = 0.5f64.powi(j) * (1.0 + 0.1 * i as f64);
            let y: Vec<f64> = x.iter().zip(&dir).map(|(&a, &b)| a + d * b).collect();
            ratios.push(ad.distance(&y).unwrap() / d);
        }
    }
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let c = hi.max(1.0 / lo);
    assert!(c.is_finite() && c < 2.0, "C = {c}");
    for r in &ratios {
        assert!(*r <= c + 1e-12 && *r >= 1.0 / c - 1e-12);
    }
}

#[test]
fn ugibbs_histogram_is_a_probability_vector_and_converges_to_uniform() {
    let f = TorusMap::linear_map(cat());
    let small = ugibbs_measure(&f, &[0.0, 0.0], 1.0, 2_000, 10, 4, 400, 0).unwrap();
    let large = ugibbs_measure(&f, &[0.0, 0.0], 1.0, 40_000, 10, 4, 400, 0).unwrap();
    for hist in [&small, &large] {
        assert!((hist.mass() - 1.0).abs() < 1e-12);
        assert!(hist.weights.iter().all(|&w| w >= 0.0));
    }
    assert!(
        large.max_relative_deviation_from_uniform()
            < small.max_relative_deviation_from_uniform()
    );
}

#[test]
fn leaf_nodes_stay_on_the_integrated_curve() {
    // arclength parameters are strictly increasing and consecutive nodes
    // are one step apart
    let f = perturbed_cat(0.02);
    let seg = integrate_leaf(&f, &[0.3, 0.4], 1, 0.1, 1e-3).unwrap();
    for w in seg.arclength.windows(2) {
        assert!(w[1] > w[0]);
    }
    for (p, q) in seg.lift_points.iter().zip(seg.lift_points.iter().skip(1)) {
        let gap: f64 = p
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!((gap - 1e-3).abs() < 1e-6);
    }
}
