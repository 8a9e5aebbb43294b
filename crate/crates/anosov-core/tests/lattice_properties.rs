//! Property suite for the exact integer-algebra layer.

use proptest::prelude::*;

use anosov_core::lattice::{
    char_poly, factor_over_integers, invariant_sublattice_basis, periodic_points_linear,
    spectral_splitting, IntPolynomial, Rational, UnimodularMatrix,
};

/// Random SL(2, Z) element as a short word in the elementary generators;
/// filtered to the hyperbolic ones.
fn sl2_strategy() -> impl Strategy<Value = UnimodularMatrix> {
    proptest::collection::vec((any::<bool>(), 1i128..4), 2..5)
        .prop_map(|word| {
            let mut m = UnimodularMatrix::identity(2);
            for (upper, k) in word {
                let e = if upper {
                    UnimodularMatrix::new(&[vec![1, k], vec![0, 1]]).unwrap()
                } else {
                    UnimodularMatrix::new(&[vec![1, 0], vec![k, 1]]).unwrap()
                };
                m = m.matmul(&e);
            }
            m
        })
        .prop_filter("hyperbolic", |m| m.is_hyperbolic())
}

fn fractional(r: &Rational) -> Rational {
    *r - r.floor()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn periodic_point_counts_match_determinant(m in sl2_strategy(), p in 1u32..=6) {
        // keep the enumeration tractable: |det(M^p - I)| caps the count
        let mut shifted = m.pow(p).int_mat().clone();
        for i in 0..2 {
            shifted[(i, i)] -= 1;
        }
        prop_assume!(shifted.det().abs() <= 1500);
        let (points, det_count) = periodic_points_linear(&m, p);
        prop_assert_eq!(points.len() as i128, det_count);
        let mp = m.pow(p);
        for x in &points {
            let y = mp.apply_rational(x);
            for (a, b) in y.iter().zip(x) {
                // exact return modulo the integer lattice
                prop_assert_eq!(*(*a - *b).denom(), 1);
            }
            for c in x {
                prop_assert_eq!(&fractional(c), c);
            }
        }
    }

    #[test]
    fn factorization_product_is_exact(
        roots_a in proptest::collection::vec(-3i128..=3, 1..3),
        roots_b in proptest::collection::vec(-3i128..=3, 1..3),
    ) {
        // build the input as an exact product of small monic factors
        let mut p = IntPolynomial::new(vec![1]);
        for r in roots_a.iter().chain(&roots_b) {
            p = p.mul(&IntPolynomial::new(vec![-r, 1]));
        }
        let factors = factor_over_integers(&p).unwrap();
        let mut prod = IntPolynomial::new(vec![1]);
        for f in &factors {
            prod = prod.mul(f);
        }
        prop_assert_eq!(prod.coeffs, p.coeffs);
    }

    #[test]
    fn eigenpairs_have_small_residual(m in sl2_strategy()) {
        let split = spectral_splitting(&m).unwrap();
        for mode in &split.modes {
            prop_assert!(mode.residual(&m) < 1e-9);
        }
    }

    #[test]
    fn sublattice_blocks_multiply_to_char_poly(a in sl2_strategy(), b in sl2_strategy()) {
        let m = UnimodularMatrix::block_diag(&[&a, &b]);
        let basis = invariant_sublattice_basis(&m).unwrap();
        let mut prod = IntPolynomial::new(vec![1]);
        for blk in basis.blocks() {
            prod = prod.mul(&char_poly(&blk));
        }
        prop_assert_eq!(prod.coeffs, char_poly(&m).coeffs);
    }
}
