//! Exact integer linear algebra over the lattice Z^d: characteristic
//! polynomials, factorization over Z, spectral splittings, invariant
//! sublattices and periodic point enumeration for linear automorphisms.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_rational::Ratio;

use crate::mat::{self, Mat};
use crate::math;

pub mod factor;
pub mod roots;
pub mod snf;

pub use factor::{factor_over_integers, FactorError};
pub use snf::IntMat;

pub type Rational = Ratio<i128>;

/// Certification margin around the unit circle and for eigen-residuals.
pub const EIGEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    /// |det| != 1.
    NotUnimodular,
    /// Some eigenvalue modulus is within `EIGEN_TOL` of 1.
    NotHyperbolic,
    /// The characteristic polynomial is irreducible over Q.
    IrreducibleInput,
    /// An eigenvalue's geometric multiplicity is below its algebraic one.
    DefectiveSpectrum,
    Factor(FactorError),
}

impl core::fmt::Display for LatticeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LatticeError::NotUnimodular => write!(f, "matrix determinant is not +-1"),
            LatticeError::NotHyperbolic => {
                write!(f, "an eigenvalue modulus is within 1e-9 of the unit circle")
            }
            LatticeError::IrreducibleInput => {
                write!(f, "characteristic polynomial is irreducible over Q")
            }
            LatticeError::DefectiveSpectrum => write!(f, "matrix has a defective eigenvalue"),
            LatticeError::Factor(e) => write!(f, "{e}"),
        }
    }
}

impl From<FactorError> for LatticeError {
    fn from(e: FactorError) -> Self {
        LatticeError::Factor(e)
    }
}

/// Exact integer d x d matrix with |det| = 1; the automorphism L and its
/// lifts M.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnimodularMatrix {
    mat: IntMat,
    det: i128,
}

impl UnimodularMatrix {
    pub fn new(rows: &[Vec<i128>]) -> Result<Self, LatticeError> {
        let mat = IntMat::from_rows(rows);
        assert_eq!(mat.rows, mat.cols);
        let det = mat.det();
        if det.abs() != 1 {
            return Err(LatticeError::NotUnimodular);
        }
        Ok(UnimodularMatrix { mat, det })
    }

    pub fn from_int_mat(mat: IntMat) -> Result<Self, LatticeError> {
        assert_eq!(mat.rows, mat.cols);
        let det = mat.det();
        if det.abs() != 1 {
            return Err(LatticeError::NotUnimodular);
        }
        Ok(UnimodularMatrix { mat, det })
    }

    pub fn identity(n: usize) -> Self {
        UnimodularMatrix {
            mat: IntMat::identity(n),
            det: 1,
        }
    }

    pub fn block_diag(blocks: &[&UnimodularMatrix]) -> Self {
        let dim: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut m = IntMat::zeros(dim, dim);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    m[(off + i, off + j)] = b.mat[(i, j)];
                }
            }
            off += b.dim();
        }
        let det = blocks.iter().map(|b| b.det).product();
        UnimodularMatrix { mat: m, det }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn det(&self) -> i128 {
        self.det
    }

    pub fn entry(&self, i: usize, j: usize) -> i128 {
        self.mat[(i, j)]
    }

    pub fn int_mat(&self) -> &IntMat {
        &self.mat
    }

    pub fn matmul(&self, other: &UnimodularMatrix) -> UnimodularMatrix {
        UnimodularMatrix {
            mat: self.mat.matmul(&other.mat),
            det: self.det * other.det,
        }
    }

    pub fn pow(&self, p: u32) -> UnimodularMatrix {
        UnimodularMatrix {
            mat: self.mat.pow(p),
            det: if p % 2 == 0 { self.det.abs() } else { self.det },
        }
    }

    pub fn transpose(&self) -> UnimodularMatrix {
        UnimodularMatrix {
            mat: self.mat.transpose(),
            det: self.det,
        }
    }

    /// Exact inverse (adjugate over the +-1 determinant).
    pub fn inverse(&self) -> UnimodularMatrix {
        let n = self.dim();
        let mut inv = IntMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // cofactor C_ji / det
                let mut minor = IntMat::zeros(n - 1, n - 1);
                let mut mi = 0;
                for r in 0..n {
                    if r == j {
                        continue;
                    }
                    let mut mj = 0;
                    for c in 0..n {
                        if c == i {
                            continue;
                        }
                        minor[(mi, mj)] = self.mat[(r, c)];
                        mj += 1;
                    }
                    mi += 1;
                }
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                inv[(i, j)] = sign * minor.det() * self.det;
            }
        }
        UnimodularMatrix {
            mat: inv,
            det: self.det,
        }
    }

    pub fn to_f64(&self) -> Mat {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.mat[(i, j)] as f64;
            }
        }
        m
    }

    pub fn apply_int(&self, v: &[i128]) -> Vec<i128> {
        self.mat.matvec(v)
    }

    pub fn apply_rational(&self, v: &[Rational]) -> Vec<Rational> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Rational::from_integer(self.mat[(i, j)]) * v[j])
                    .sum()
            })
            .collect()
    }

    /// True when no eigenvalue modulus is within `EIGEN_TOL` of 1.
    pub fn is_hyperbolic(&self) -> bool {
        let p = char_poly(self);
        roots::roots(&p.to_f64())
            .iter()
            .all(|z| math::abs(z.norm() - 1.0) > EIGEN_TOL)
    }
}

/// Monic integer polynomial, coefficients lowest-degree-first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntPolynomial {
    pub coeffs: Vec<i128>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i128>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        *self.coeffs.last().unwrap() == 1
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|&c| c as f64).collect()
    }

    pub fn eval_int(&self, x: i128) -> i128 {
        self.coeffs.iter().rev().fold(0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c as f64)
    }

    /// Evaluate at an integer matrix by Horner's rule.
    pub fn eval_matrix(&self, m: &IntMat) -> IntMat {
        let n = m.rows;
        let mut acc = IntMat::zeros(n, n);
        for &c in self.coeffs.iter().rev() {
            acc = acc.matmul(m);
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    pub fn derivative(&self) -> IntPolynomial {
        if self.coeffs.len() == 1 {
            return IntPolynomial::new(vec![0]);
        }
        IntPolynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as i128)
                .collect(),
        )
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        let mut out = vec![0i128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }

    pub fn negate(&self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|&c| -c).collect())
    }

    /// Exact division by a monic divisor; `None` on nonzero remainder.
    pub fn exact_div(&self, divisor: &IntPolynomial) -> Option<IntPolynomial> {
        if !divisor.is_monic() || divisor.degree() > self.degree() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let mut quot = vec![0i128; self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd];
            quot[k] = q;
            for j in 0..=dd {
                rem[k + j] -= q * divisor.coeffs[j];
            }
        }
        if rem.iter().any(|&c| c != 0) {
            return None;
        }
        Some(IntPolynomial::new(quot))
    }
}

/// Exact monic characteristic polynomial by the Faddeev-LeVerrier
/// recurrence (all divisions exact).
pub fn char_poly(m: &UnimodularMatrix) -> IntPolynomial {
    let n = m.dim();
    let a = m.int_mat();
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    let mut acc = a.clone();
    let mut c = vec![0i128; n + 1];
    for k in 1..=n {
        if k > 1 {
            // acc = A (acc_prev + c_{k-1} I)
            let mut shifted = acc.clone();
            for i in 0..n {
                shifted[(i, i)] += c[k - 1];
            }
            acc = a.matmul(&shifted);
        }
        let trace: i128 = (0..n).map(|i| acc[(i, i)]).sum();
        c[k] = -trace / k as i128;
        coeffs[n - k] = c[k];
    }
    IntPolynomial::new(coeffs)
}

/// One eigendirection of the splitting. For a complex-conjugate pair the
/// imaginary part is nonzero and the conjugate mode carries its negative.
#[derive(Debug, Clone)]
pub struct EigenMode {
    pub value: Complex64,
    pub vec_re: Vec<f64>,
    pub vec_im: Vec<f64>,
}

impl EigenMode {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }

    /// Eigen-residual ||M v - lambda v||_inf.
    pub fn residual(&self, m: &UnimodularMatrix) -> f64 {
        let mf = m.to_f64();
        let mre = mf.matvec(&self.vec_re);
        let mim = mf.matvec(&self.vec_im);
        let mut worst = 0.0f64;
        for i in 0..self.vec_re.len() {
            let lr = self.value.re * self.vec_re[i] - self.value.im * self.vec_im[i];
            let li = self.value.re * self.vec_im[i] + self.value.im * self.vec_re[i];
            worst = worst.max(math::abs(mre[i] - lr)).max(math::abs(mim[i] - li));
        }
        worst
    }
}

/// Eigendata of a hyperbolic automorphism, sorted by modulus ascending.
#[derive(Debug, Clone)]
pub struct SpectralSplitting {
    pub modes: Vec<EigenMode>,
    pub stable_count: usize,
    pub unstable_count: usize,
    /// Set when two eigenvalue moduli coincide to within `EIGEN_TOL`
    /// (reducible/complex cases); simple-splitting consumers must check it.
    pub repeated_modulus: bool,
}

impl SpectralSplitting {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.value).collect()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.value.norm()).collect()
    }

    /// Unit real eigenvector for a real mode index.
    pub fn real_vector(&self, idx: usize) -> Option<Vec<f64>> {
        let m = &self.modes[idx];
        if m.is_real() {
            Some(m.vec_re.clone())
        } else {
            None
        }
    }

    /// Index of the unstable mode with smallest modulus (> 1).
    pub fn weakest_unstable(&self) -> usize {
        self.stable_count
    }

    /// Index of the unstable mode with largest modulus.
    pub fn strongest_unstable(&self) -> usize {
        self.modes.len() - 1
    }
}

/// Sorted eigendata of `m`; fails on non-hyperbolic or defective input.
pub fn spectral_splitting(m: &UnimodularMatrix) -> Result<SpectralSplitting, LatticeError> {
    let p = char_poly(m);
    let factors = factor_over_integers(&p)?;
    // distinct factors with multiplicity
    let mut distinct: Vec<(IntPolynomial, usize)> = Vec::new();
    for f in factors {
        match distinct.iter_mut().find(|(g, _)| *g == f) {
            Some((_, k)) => *k += 1,
            None => distinct.push((f, 1)),
        }
    }
    let mut modes: Vec<EigenMode> = Vec::new();
    let norm_scale = 1.0 + m.to_f64().max_norm();
    for (f, mult) in &distinct {
        let rts = roots::roots(&f.to_f64());
        for z in rts {
            if math::abs(z.norm() - 1.0) <= EIGEN_TOL {
                return Err(LatticeError::NotHyperbolic);
            }
            if z.im < 0.0 {
                continue; // conjugate mirrored below
            }
            let vectors = eigenvectors_for(m, z, *mult, norm_scale)?;
            for (vre, vim) in vectors {
                if z.im == 0.0 {
                    modes.push(EigenMode {
                        value: z,
                        vec_re: vre,
                        vec_im: vim,
                    });
                } else {
                    modes.push(EigenMode {
                        value: z,
                        vec_re: vre.clone(),
                        vec_im: vim.clone(),
                    });
                    modes.push(EigenMode {
                        value: z.conj(),
                        vec_re: vre,
                        vec_im: vim.iter().map(|x| -x).collect(),
                    });
                }
            }
        }
    }
    if modes.len() != m.dim() {
        return Err(LatticeError::DefectiveSpectrum);
    }
    modes.sort_by(|a, b| {
        (a.value.norm(), a.value.re, a.value.im)
            .partial_cmp(&(b.value.norm(), b.value.re, b.value.im))
            .unwrap()
    });
    let stable_count = modes.iter().filter(|m| m.value.norm() < 1.0).count();
    let unstable_count = modes.len() - stable_count;
    let mut repeated = false;
    for i in 1..modes.len() {
        if math::abs(modes[i].value.norm() - modes[i - 1].value.norm()) <= EIGEN_TOL {
            repeated = true;
        }
    }
    Ok(SpectralSplitting {
        modes,
        stable_count,
        unstable_count,
        repeated_modulus: repeated,
    })
}

fn eigenvectors_for(
    m: &UnimodularMatrix,
    z: Complex64,
    mult: usize,
    scale: f64,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>, LatticeError> {
    let n = m.dim();
    if z.im == 0.0 {
        let mut shifted = m.to_f64();
        for i in 0..n {
            shifted[(i, i)] -= z.re;
        }
        let ns = shifted.null_space(1e-8 * scale);
        if ns.len() < mult {
            return Err(LatticeError::DefectiveSpectrum);
        }
        Ok(ns
            .into_iter()
            .take(mult)
            .map(|mut v| {
                mat::orient(&mut v);
                (v, vec![0.0; n])
            })
            .collect())
    } else {
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = Complex64::new(m.entry(i, j) as f64, 0.0);
            }
            a[i * n + i] -= z;
        }
        let ns = mat::complex_null_space(n, n, &a, 1e-8 * scale);
        if ns.len() < mult {
            return Err(LatticeError::DefectiveSpectrum);
        }
        Ok(ns
            .into_iter()
            .take(mult)
            .map(|v| {
                // deterministic phase: rotate the largest component to the
                // positive real axis
                let mut best = 0;
                for (i, c) in v.iter().enumerate() {
                    if c.norm() > v[best].norm() {
                        best = i;
                    }
                }
                let phase = v[best] / v[best].norm();
                let v: Vec<Complex64> = v.iter().map(|c| c / phase).collect();
                (
                    v.iter().map(|c| c.re).collect(),
                    v.iter().map(|c| c.im).collect(),
                )
            })
            .collect())
    }
}

/// Integer basis adapted to the invariant sublattices Ker(P_i(M)).
#[derive(Debug, Clone)]
pub struct SublatticeBasis {
    /// Basis vectors as columns, HNF-normalized per block.
    pub basis: IntMat,
    pub block_sizes: Vec<usize>,
    /// Conjugated matrix basis^-1 M basis: integer, block diagonal.
    pub block_matrix: IntMat,
    /// Index of the direct sum of the block lattices inside Z^d.
    pub index: i128,
}

impl SublatticeBasis {
    /// Blocks of `block_matrix` as unimodular matrices.
    pub fn blocks(&self) -> Vec<UnimodularMatrix> {
        let mut out = Vec::new();
        let mut off = 0;
        for &sz in &self.block_sizes {
            let mut b = IntMat::zeros(sz, sz);
            for i in 0..sz {
                for j in 0..sz {
                    b[(i, j)] = self.block_matrix[(off + i, off + j)];
                }
            }
            out.push(UnimodularMatrix::from_int_mat(b).expect("block of unimodular matrix"));
            off += sz;
        }
        out
    }
}

/// Adapted integer basis for a reducible automorphism: per irreducible
/// factor P_i, the saturated lattice Ker(P_i(M)^{m_i}); repeated factors
/// are further split into cyclic blocks when M acts semisimply on them.
pub fn invariant_sublattice_basis(m: &UnimodularMatrix) -> Result<SublatticeBasis, LatticeError> {
    let d = m.dim();
    let p = char_poly(m);
    let factors = factor_over_integers(&p)?;
    let mut distinct: Vec<(IntPolynomial, usize)> = Vec::new();
    for f in factors {
        match distinct.iter_mut().find(|(g, _)| *g == f) {
            Some((_, k)) => *k += 1,
            None => distinct.push((f, 1)),
        }
    }
    if distinct.len() == 1 && distinct[0].1 == 1 {
        return Err(LatticeError::IrreducibleInput);
    }
    let mut block_cols: Vec<Vec<Vec<i128>>> = Vec::new();
    for (f, mult) in &distinct {
        let deg = f.degree();
        let mut power = f.clone();
        for _ in 1..*mult {
            power = power.mul(f);
        }
        let k_mat = power.eval_matrix(m.int_mat());
        let lat = snf::kernel_basis(&k_mat);
        debug_assert_eq!(lat.len(), deg * mult);
        if *mult == 1 {
            block_cols.push(lat);
            continue;
        }
        // is M semisimple on this component? then split into cyclic blocks
        let f_m = f.eval_matrix(m.int_mat());
        let semisimple = lat.iter().all(|v| f_m.matvec(v).iter().all(|&x| x == 0));
        if !semisimple {
            block_cols.push(lat);
            continue;
        }
        let mut chosen: Vec<Vec<Vec<i128>>> = Vec::new();
        for w in &lat {
            if chosen.len() == *mult {
                break;
            }
            // cyclic lattice generated by w
            let mut gens = vec![w.clone()];
            for _ in 1..deg {
                let next = m.int_mat().matvec(gens.last().unwrap());
                gens.push(next);
            }
            let cyc = snf::saturate_columns(&IntMat::from_cols(&gens));
            if cyc.len() != deg {
                continue;
            }
            // direct-sum check against already chosen blocks
            let mut stack: Vec<Vec<i128>> = chosen.iter().flatten().cloned().collect();
            stack.extend(cyc.iter().cloned());
            let probe = IntMat::from_cols(&stack);
            if snf::smith_normal_form(&probe).rank() == stack.len() {
                chosen.push(cyc);
            }
        }
        if chosen.len() != *mult {
            return Err(LatticeError::DefectiveSpectrum);
        }
        for c in chosen {
            block_cols.push(c);
        }
    }
    // HNF-normalize each block basis and assemble
    let mut cols: Vec<Vec<i128>> = Vec::new();
    let mut block_sizes = Vec::new();
    for block in &block_cols {
        let h = snf::hnf_cols(&IntMat::from_cols(block));
        block_sizes.push(block.len());
        for j in 0..h.cols {
            cols.push(h.col(j));
        }
    }
    let basis = IntMat::from_cols(&cols);
    debug_assert_eq!(basis.cols, d);
    let index = basis.det().abs();
    let conj = rational_conjugate(&basis, m.int_mat()).ok_or(LatticeError::DefectiveSpectrum)?;
    // the conjugated matrix must be block diagonal
    let mut off = 0;
    for &sz in &block_sizes {
        for i in 0..d {
            for j in off..(off + sz) {
                if (i < off || i >= off + sz) && conj[(i, j)] != 0 {
                    return Err(LatticeError::DefectiveSpectrum);
                }
            }
        }
        off += sz;
    }
    Ok(SublatticeBasis {
        basis,
        block_sizes,
        block_matrix: conj,
        index,
    })
}

/// Exact `T^-1 M T` over the rationals; `None` when the result is not an
/// integer matrix.
fn rational_conjugate(t: &IntMat, m: &IntMat) -> Option<IntMat> {
    let d = t.rows;
    let mt = m.matmul(t);
    let mut out = IntMat::zeros(d, d);
    for j in 0..d {
        let rhs: Vec<Rational> = (0..d).map(|i| Rational::from_integer(mt[(i, j)])).collect();
        let x = rational_solve(t, &rhs)?;
        for i in 0..d {
            if !x[i].is_integer() {
                return None;
            }
            out[(i, j)] = x[i].to_integer();
        }
    }
    Some(out)
}

/// Exact Gaussian elimination over Q.
pub fn rational_solve(a: &IntMat, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.rows;
    let mut aug: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = (0..n)
                .map(|j| Rational::from_integer(a[(i, j)]))
                .collect();
            row.push(b[i]);
            row
        })
        .collect();
    for k in 0..n {
        let piv = (k..n).find(|&i| aug[i][k] != Rational::from_integer(0))?;
        aug.swap(k, piv);
        let p = aug[k][k];
        for i in (k + 1)..n {
            let f = aug[i][k] / p;
            if f != Rational::from_integer(0) {
                for j in k..=n {
                    let t = f * aug[k][j];
                    aug[i][j] -= t;
                }
            }
        }
    }
    let mut x = vec![Rational::from_integer(0); n];
    for i in (0..n).rev() {
        let mut s = aug[i][n];
        for j in (i + 1)..n {
            s -= aug[i][j] * x[j];
        }
        x[i] = s / aug[i][i];
    }
    Some(x)
}

/// Fixed points of M^p on the torus: exact rational representatives of the
/// classes of (M^p - I)^-1 Z^d / Z^d, and the count |det(M^p - I)|.
pub fn periodic_points_linear(m: &UnimodularMatrix, p: u32) -> (Vec<Vec<Rational>>, i128) {
    let d = m.dim();
    let mut dmat = m.pow(p).int_mat().clone();
    for i in 0..d {
        dmat[(i, i)] -= 1;
    }
    let count = dmat.det().abs();
    assert!(count != 0, "M^p - I is singular; input not hyperbolic");
    let smith = snf::smith_normal_form(&dmat);
    let diag = smith.diag();
    let mut points = Vec::with_capacity(count as usize);
    let mut idx = vec![0i128; d];
    loop {
        // x = V y with y_i = k_i / s_i, reduced mod 1
        let y: Vec<Rational> = (0..d).map(|i| Rational::new(idx[i], diag[i])).collect();
        let x: Vec<Rational> = (0..d)
            .map(|i| {
                let mut s = Rational::from_integer(0);
                for j in 0..d {
                    s += Rational::from_integer(smith.v[(i, j)]) * y[j];
                }
                s - s.floor()
            })
            .collect();
        points.push(x);
        // odometer over the invariant-factor ranges
        let mut carry = true;
        for i in 0..d {
            if carry {
                idx[i] += 1;
                if idx[i] == diag[i] {
                    idx[i] = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    points.sort();
    (points, count)
}
