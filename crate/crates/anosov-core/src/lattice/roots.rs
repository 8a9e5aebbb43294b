//! Complex roots of real polynomials by the Aberth-Ehrlich iteration with
//! Newton polishing. Intended for squarefree inputs of small degree.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::math;

/// Evaluate `p` (coefficients lowest-degree-first) and its derivative.
fn eval_with_deriv(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a polynomial with real coefficients
/// (lowest-degree-first, leading coefficient nonzero).
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while let Some(&last) = c.last() {
        if last == 0.0 && c.len() > 1 {
            c.pop();
        } else {
            break;
        }
    }
    let deg = c.len() - 1;
    let mut out = Vec::with_capacity(deg);
    // peel off zero roots exactly
    let mut low = 0;
    while low < deg && c[low] == 0.0 {
        out.push(Complex64::new(0.0, 0.0));
        low += 1;
    }
    let c = &c[low..];
    let n = c.len() - 1;
    if n == 0 {
        return out;
    }
    let lead = c[n];
    // Cauchy bound for the initial circle
    let radius = 1.0 + c[..n].iter().fold(0.0f64, |m, &x| m.max(math::abs(x))) / math::abs(lead);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * core::f64::consts::PI * (k as f64) / (n as f64) + 0.43;
            Complex64::new(radius * math::cos(theta), radius * math::sin(theta))
        })
        .collect();
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval_with_deriv(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() == 0.0 {
                Complex64::new(1e-8, 1e-8)
            } else {
                p / dp
            };
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    sum += 1.0 / (z[i] - z[j]);
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * sum;
            let step = if denom.norm() < 1e-12 { newton } else { newton / denom };
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-15 {
            break;
        }
    }
    // Newton polish and conjugate symmetrization
    for zi in z.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = eval_with_deriv(c, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            *zi -= p / dp;
        }
        if math::abs(zi.im) < 1e-9 * (1.0 + math::abs(zi.re)) {
            // candidate real root: re-polish on the real axis
            let mut x = zi.re;
            for _ in 0..4 {
                let (p, dp) = eval_with_deriv(c, Complex64::new(x, 0.0));
                if dp.norm() == 0.0 {
                    break;
                }
                x -= (p / dp).re;
            }
            *zi = Complex64::new(x, 0.0);
        }
    }
    out.extend(z);
    out.sort_by(|a, b| {
        (a.norm(), a.re, a.im)
            .partial_cmp(&(b.norm(), b.re, b.im))
            .unwrap()
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_golden() {
        // x^2 - 3x + 1: roots (3 +- sqrt(5))/2
        let r = roots(&[1.0, -3.0, 1.0]);
        assert!((r[0].re - 0.3819660112501051).abs() < 1e-12);
        assert!((r[1].re - 2.618033988749895).abs() < 1e-12);
        assert!(r[0].im.abs() < 1e-12 && r[1].im.abs() < 1e-12);
    }

    #[test]
    fn cubic_with_complex_pair() {
        // x^3 - 1: roots 1, exp(+-2pi i/3)
        let r = roots(&[-1.0, 0.0, 0.0, 1.0]);
        let real: Vec<_> = r.iter().filter(|z| z.im == 0.0).collect();
        assert_eq!(real.len(), 1);
        assert!((real[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_spec_instance() {
        // x^3 - 3x^2 + 1, moduli approx {0.532, 0.653, 2.879}
        let r = roots(&[1.0, 0.0, -3.0, 1.0]);
        let moduli: Vec<f64> = r.iter().map(|z| z.norm()).collect();
        assert!((moduli[0] - 0.5320888862379561).abs() < 1e-9);
        assert!((moduli[1] - 0.6527036446661393).abs() < 1e-9);
        assert!((moduli[2] - 2.8793852415718169).abs() < 1e-9);
    }
}
