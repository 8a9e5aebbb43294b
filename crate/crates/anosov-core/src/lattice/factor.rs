//! Factorization of monic integer polynomials over Z.
//!
//! Strategy: squarefree split by exact polynomial gcd, then numeric root
//! clustering. Candidate factors are built from conjugation-closed root
//! subsets of minimal size, rounded to integer coefficients and verified
//! by exact division. Minimal subset size makes accepted factors
//! irreducible over Q.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_integer::gcd;

use super::roots;
use super::IntPolynomial;
use crate::math;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorError {
    /// Input is not monic.
    NotMonic,
    /// The numeric-clustering candidate search could not produce an exact
    /// integer factorization (degree/precision limit).
    FactorizationFailed,
}

impl core::fmt::Display for FactorError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FactorError::NotMonic => write!(f, "polynomial is not monic"),
            FactorError::FactorizationFailed => {
                write!(f, "no exact integer factorization found by root clustering")
            }
        }
    }
}

/// Monic irreducible factors over Q, with repetition; the product equals
/// the input exactly.
pub fn factor_over_integers(p: &IntPolynomial) -> Result<Vec<IntPolynomial>, FactorError> {
    if !p.is_monic() {
        return Err(FactorError::NotMonic);
    }
    if p.degree() == 0 {
        return Ok(vec![]);
    }
    if p.degree() == 1 {
        return Ok(vec![p.clone()]);
    }
    let deriv = p.derivative();
    let g = primitive_gcd(p, &deriv);
    let mut out = Vec::new();
    if g.degree() == 0 {
        factor_squarefree(p, &mut out)?;
    } else {
        // squarefree part p/g carries each irreducible factor once
        let sqfree = p.exact_div(&g).ok_or(FactorError::FactorizationFailed)?;
        let mut once = Vec::new();
        factor_squarefree(&sqfree, &mut once)?;
        let mut rest = p.clone();
        for f in once {
            while let Some(q) = rest.exact_div(&f) {
                out.push(f.clone());
                rest = q;
            }
        }
        if rest.degree() != 0 {
            return Err(FactorError::FactorizationFailed);
        }
    }
    out.sort_by(|a, b| (a.degree(), &a.coeffs).cmp(&(b.degree(), &b.coeffs)));
    Ok(out)
}

fn factor_squarefree(p: &IntPolynomial, out: &mut Vec<IntPolynomial>) -> Result<(), FactorError> {
    let mut rest = p.clone();
    let mut rts = roots::roots(&rest.to_f64());
    'outer: while rest.degree() > 0 {
        let n = rts.len();
        debug_assert_eq!(n, rest.degree());
        for size in 1..=n {
            for mask in 0u32..(1u32 << n) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let subset: Vec<Complex64> =
                    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| rts[i]).collect();
                if let Some(cand) = candidate_from_roots(&subset) {
                    if let Some(q) = rest.exact_div(&cand) {
                        out.push(cand);
                        rest = q;
                        rts = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| rts[i]).collect();
                        continue 'outer;
                    }
                }
            }
        }
        return Err(FactorError::FactorizationFailed);
    }
    Ok(())
}

/// Expand prod (x - r_i) and round to integers; `None` when the product is
/// visibly non-real or the coefficients are not near integers.
fn candidate_from_roots(rts: &[Complex64]) -> Option<IntPolynomial> {
    // coefficients kept highest-degree-first while multiplying out
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in rts {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (j, &c) in coeffs.iter().enumerate() {
            next[j] += c;
            next[j + 1] -= *r * c;
        }
        coeffs = next;
    }
    let mut int_coeffs = Vec::with_capacity(coeffs.len());
    for c in &coeffs {
        if math::abs(c.im) > 1e-6 {
            return None;
        }
        let rounded = math::round(c.re);
        // tight: roots are accurate to ~1e-12, so true factors land much
        // closer than mismatched subsets ever do
        if math::abs(c.re - rounded) > 1e-6 {
            return None;
        }
        int_coeffs.push(rounded as i128);
    }
    int_coeffs.reverse(); // to lowest-degree-first
    Some(IntPolynomial::new(int_coeffs))
}

/// Primitive gcd of integer polynomials via a primitive pseudo-remainder
/// sequence. Result has positive leading coefficient.
pub fn primitive_gcd(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    let mut f = primitive_part(a);
    let mut g = primitive_part(b);
    if f.degree() < g.degree() {
        core::mem::swap(&mut f, &mut g);
    }
    while g.degree() > 0 || g.coeffs.iter().any(|&c| c != 0) {
        if g.coeffs.iter().all(|&c| c == 0) {
            break;
        }
        let r = pseudo_rem(&f, &g);
        if r.coeffs.iter().all(|&c| c == 0) {
            let mut out = primitive_part(&g);
            if *out.coeffs.last().unwrap() < 0 {
                out = out.negate();
            }
            return out;
        }
        f = g;
        g = primitive_part(&r);
    }
    // gcd is a constant
    IntPolynomial::new(vec![1])
}

fn primitive_part(p: &IntPolynomial) -> IntPolynomial {
    let content = p.coeffs.iter().fold(0i128, |g, &c| gcd(g, c.abs()));
    if content <= 1 {
        return p.clone();
    }
    IntPolynomial::new(p.coeffs.iter().map(|&c| c / content).collect())
}

fn pseudo_rem(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    let da = a.degree();
    let db = b.degree();
    assert!(db <= da);
    let lc = *b.coeffs.last().unwrap();
    let mut r = a.coeffs.clone();
    for _ in 0..(da - db + 1) {
        for c in r.iter_mut() {
            *c *= lc;
        }
        let dr = r.len() - 1;
        if dr < db || r[dr] == 0 {
            // degree may have dropped; normalize and continue
            while r.len() > 1 && *r.last().unwrap() == 0 {
                r.pop();
            }
            if r.len() - 1 < db {
                break;
            }
        }
        let dr = r.len() - 1;
        let q = r[dr] / lc;
        for j in 0..=db {
            r[dr - db + j] -= q * b.coeffs[j];
        }
        while r.len() > 1 && *r.last().unwrap() == 0 {
            r.pop();
        }
        if r.len() - 1 < db {
            break;
        }
    }
    IntPolynomial::new(r)
}
