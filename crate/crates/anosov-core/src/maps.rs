//! Torus maps: linear automorphisms with trigonometric perturbations, skew
//! products over them, derivative cocycles, finite-time invariant
//! splittings, empirical cocycle rates and the linearizing conjugacy back
//! to the model automorphism.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::lattice::{self, LatticeError, SpectralSplitting, UnimodularMatrix};
use crate::mat::{self, Mat};
use crate::math;

pub const TAU: f64 = 2.0 * core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapError {
    DimensionMismatch,
    /// Singular-value gap below threshold; splitting directions unreliable.
    SplittingDegenerate,
    /// Fixed-point iteration failed to reach tolerance.
    NoConvergence,
    /// The smallest expanding eigenvalue is a complex pair in a map
    /// construction that only handles real rates.
    ComplexPairUnsupportedDim,
    Lattice(LatticeError),
}

impl core::fmt::Display for MapError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MapError::DimensionMismatch => write!(f, "dimension mismatch"),
            MapError::SplittingDegenerate => write!(f, "splitting degenerate"),
            MapError::NoConvergence => write!(f, "iteration did not converge"),
            MapError::ComplexPairUnsupportedDim => {
                write!(f, "complex-pair rate not supported in this construction")
            }
            MapError::Lattice(e) => write!(f, "{e}"),
        }
    }
}

impl From<LatticeError> for MapError {
    fn from(e: LatticeError) -> Self {
        MapError::Lattice(e)
    }
}

/// Real-valued trigonometric polynomial on the d-torus, stored as its full
/// complex Fourier support (each frequency paired with its conjugate).
#[derive(Debug, Clone)]
pub struct TrigPolynomial {
    pub dim: usize,
    /// (frequency, coefficient) pairs; reality demands the support be
    /// closed under negation with conjugate coefficients.
    pub terms: Vec<(Vec<i64>, Complex64)>,
}

impl TrigPolynomial {
    pub fn zero(dim: usize) -> Self {
        TrigPolynomial { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        TrigPolynomial {
            dim,
            terms: vec![(vec![0; dim], Complex64::new(c, 0.0))],
        }
    }

    /// Build from half the support; conjugate terms are appended so the
    /// result is real-valued.
    pub fn from_half_terms(dim: usize, half: &[(Vec<i64>, Complex64)]) -> Self {
        let mut terms: Vec<(Vec<i64>, Complex64)> = Vec::new();
        for (n, c) in half {
            assert_eq!(n.len(), dim);
            if n.iter().all(|&k| k == 0) {
                assert!(math::abs(c.im) < 1e-15, "zero-frequency coefficient must be real");
                terms.push((n.clone(), *c));
            } else {
                terms.push((n.clone(), *c));
                terms.push((n.iter().map(|&k| -k).collect(), c.conj()));
            }
        }
        TrigPolynomial { dim, terms }
    }

    /// amp * sin(2 pi n . y).
    pub fn sin_wave(dim: usize, freq: &[i64], amp: f64) -> Self {
        // sin t = (e^{it} - e^{-it}) / 2i
        Self::from_half_terms(dim, &[(freq.to_vec(), Complex64::new(0.0, -amp / 2.0))])
    }

    /// amp * cos(2 pi n . y).
    pub fn cos_wave(dim: usize, freq: &[i64], amp: f64) -> Self {
        Self::from_half_terms(dim, &[(freq.to_vec(), Complex64::new(amp / 2.0, 0.0))])
    }

    pub fn coeff(&self, freq: &[i64]) -> Complex64 {
        self.terms
            .iter()
            .filter(|(n, _)| n == freq)
            .map(|(_, c)| *c)
            .sum()
    }

    pub fn scale(&self, s: f64) -> TrigPolynomial {
        TrigPolynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(n, c)| (n.clone(), c * s)).collect(),
        }
    }

    pub fn add(&self, other: &TrigPolynomial) -> TrigPolynomial {
        assert_eq!(self.dim, other.dim);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        TrigPolynomial { dim: self.dim, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.norm() == 0.0)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, c) in &self.terms {
            let phase: f64 = n.iter().zip(y).map(|(&k, &yi)| k as f64 * yi).sum();
            acc += c * Complex64::new(math::cos(TAU * phase), math::sin(TAU * phase));
        }
        debug_assert!(math::abs(acc.im) < 1e-10);
        acc.re
    }

    /// Gradient; entry j is the partial along y_j.
    pub fn grad(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (n, c) in &self.terms {
            let phase: f64 = n.iter().zip(y).map(|(&k, &yi)| k as f64 * yi).sum();
            let e = Complex64::new(math::cos(TAU * phase), math::sin(TAU * phase));
            for j in 0..self.dim {
                out[j] += c * e * Complex64::new(0.0, TAU * n[j] as f64);
            }
        }
        out.iter().map(|z| z.re).collect()
    }

    /// Directional derivative along a fixed vector.
    pub fn dir_deriv(&self, y: &[f64], dir: &[f64]) -> f64 {
        mat::dot(&self.grad(y), dir)
    }

    /// phi(y + delta) - phi(y) without cancellation loss: each term gives
    /// c e^{2 pi i n.(y + delta/2)} . 2i sin(pi n.delta), so the result
    /// keeps full relative accuracy even for tiny delta.
    pub fn eval_diff(&self, y: &[f64], delta: &[f64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, c) in &self.terms {
            let nd: f64 = n.iter().zip(delta).map(|(&k, &d)| k as f64 * d).sum();
            let ny: f64 = n.iter().zip(y).map(|(&k, &v)| k as f64 * v).sum();
            let phase = TAU * (ny + 0.5 * nd);
            let e = Complex64::new(math::cos(phase), math::sin(phase));
            acc += c * e * Complex64::new(0.0, 2.0 * math::sin(core::f64::consts::PI * nd));
        }
        acc.re
    }

    /// sup |phi| + sup |grad phi| bound from coefficient mass.
    pub fn c1_norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(n, c)| {
                let l1: f64 = n.iter().map(|&k| math::abs(k as f64)).sum();
                c.norm() * (1.0 + TAU * l1)
            })
            .sum()
    }

    /// Embed into a larger torus: frequency n becomes (0,...,0,n) with
    /// `offset` leading zeros.
    pub fn embed(&self, total_dim: usize, offset: usize) -> TrigPolynomial {
        assert!(offset + self.dim <= total_dim);
        TrigPolynomial {
            dim: total_dim,
            terms: self
                .terms
                .iter()
                .map(|(n, c)| {
                    let mut f = vec![0i64; total_dim];
                    f[offset..offset + self.dim].copy_from_slice(n);
                    (f, *c)
                })
                .collect(),
        }
    }
}

/// Reduce every coordinate to [0, 1).
pub fn reduce_mod_1(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| math::frac(v)).collect()
}

/// Distance on the torus (per-coordinate nearest lift, Euclidean norm).
pub fn torus_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        let d = d - math::round(d);
        s += d * d;
    }
    math::sqrt(s)
}

/// A linear automorphism composed with a periodic trigonometric
/// perturbation: f(x) = M x + phi(x) mod 1.
#[derive(Debug, Clone)]
pub struct TorusMap {
    pub linear: UnimodularMatrix,
    pub perturbation: Vec<TrigPolynomial>,
}

impl TorusMap {
    pub fn linear_map(m: UnimodularMatrix) -> Self {
        let d = m.dim();
        TorusMap {
            linear: m,
            perturbation: (0..d).map(|_| TrigPolynomial::zero(d)).collect(),
        }
    }

    pub fn new(linear: UnimodularMatrix, perturbation: Vec<TrigPolynomial>) -> Result<Self, MapError> {
        if perturbation.len() != linear.dim()
            || perturbation.iter().any(|p| p.dim != linear.dim())
        {
            return Err(MapError::DimensionMismatch);
        }
        Ok(TorusMap { linear, perturbation })
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn is_linear(&self) -> bool {
        self.perturbation.iter().all(|p| p.is_zero())
    }

    /// Lifted evaluation (no reduction mod 1).
    pub fn eval_lift(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = self.linear.to_f64().matvec(x);
        for i in 0..d {
            out[i] += self.perturbation[i].eval(x);
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        reduce_mod_1(&self.eval_lift(x))
    }

    pub fn iterate(&self, x: &[f64], n: usize) -> Vec<f64> {
        let mut y = x.to_vec();
        for _ in 0..n {
            y = self.eval(&y);
        }
        y
    }

    /// Exact Jacobian at a point.
    pub fn jacobian(&self, x: &[f64]) -> Mat {
        let d = self.dim();
        let mut j = self.linear.to_f64();
        for i in 0..d {
            let g = self.perturbation[i].grad(x);
            for k in 0..d {
                j[(i, k)] += g[k];
            }
        }
        j
    }

    /// C1 size of the perturbation (sup of value plus first derivatives).
    pub fn perturbation_c1(&self) -> f64 {
        self.perturbation.iter().map(|p| p.c1_norm()).sum()
    }

    /// Preimage of a torus point by Newton iteration on the lift.
    pub fn inverse_point(&self, z: &[f64]) -> Result<Vec<f64>, MapError> {
        let minv = self.linear.inverse().to_f64();
        let mut x = minv.matvec(z);
        for _ in 0..60 {
            let fx = self.eval_lift(&x);
            // nearest lift of the target
            let res: Vec<f64> = fx
                .iter()
                .zip(z)
                .map(|(&a, &b)| {
                    let d = a - b;
                    d - math::round(d)
                })
                .collect();
            let worst = res.iter().fold(0.0f64, |m, &r| m.max(math::abs(r)));
            if worst < 1e-14 {
                return Ok(reduce_mod_1(&x));
            }
            let step = self
                .jacobian(&x)
                .solve(&res)
                .ok_or(MapError::NoConvergence)?;
            for i in 0..x.len() {
                x[i] -= step[i];
            }
        }
        Err(MapError::NoConvergence)
    }

    pub fn spectral_splitting(&self) -> Result<SpectralSplitting, LatticeError> {
        lattice::spectral_splitting(&self.linear)
    }

    /// Cone-field hyperbolicity certificate: on a sample grid the model
    /// unstable cone (half-angle pi/4 in model eigencoordinates) is mapped
    /// into itself with uniform expansion, and dually for the stable cone
    /// under the inverse. Returns the worst expansion margin; positive
    /// means certified.
    pub fn certify(&self) -> Result<CertificationReport, MapError> {
        let d = self.dim();
        let split = self.spectral_splitting().map_err(MapError::Lattice)?;
        if split.repeated_modulus {
            return Err(MapError::SplittingDegenerate);
        }
        let vmat = eigen_matrix(&split);
        let vinv = vmat.inverse().ok_or(MapError::SplittingDegenerate)?;
        let k = split.stable_count;
        let per_axis: usize = if d <= 3 { 32 } else { 12 };
        let mut idx = vec![0usize; d];
        let mut margin = f64::INFINITY;
        loop {
            let x: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) / per_axis as f64).collect();
            let p = vinv.matmul(&self.jacobian(&x)).matmul(&vmat);
            // block norms in eigencoordinates: s rows 0..k, u rows k..d
            let mut a = f64::INFINITY; // min expansion of the u-block
            let mut b = 0.0f64; // u-rows leakage from s-columns
            let mut c = 0.0f64; // s-rows leakage from u-columns
            let mut dd = 0.0f64; // max contraction-block gain
            for j in k..d {
                let mut col_u = 0.0;
                let mut col_s = 0.0;
                for i in 0..d {
                    if i >= k {
                        col_u += p[(i, j)] * p[(i, j)];
                    } else {
                        col_s += p[(i, j)] * p[(i, j)];
                    }
                }
                a = a.min(math::sqrt(col_u) - math::sqrt(col_s));
                c = c.max(math::sqrt(col_s));
            }
            for j in 0..k {
                let mut col_u = 0.0;
                let mut col_s = 0.0;
                for i in 0..d {
                    if i >= k {
                        col_u += p[(i, j)] * p[(i, j)];
                    } else {
                        col_s += p[(i, j)] * p[(i, j)];
                    }
                }
                b = b.max(math::sqrt(col_u));
                dd = dd.max(math::sqrt(col_s));
            }
            // cone invariance + expansion: vectors with |vs| <= |vu| stay
            // in the cone and grow
            let grow = (a - b) - 1.0;
            let stay = (a - b) - (dd + c);
            margin = margin.min(grow.min(stay));
            let mut carry = true;
            for i in 0..d {
                if carry {
                    idx[i] += 1;
                    if idx[i] == per_axis {
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
        Ok(CertificationReport {
            certified: margin > 0.0,
            margin,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CertificationReport {
    pub certified: bool,
    pub margin: f64,
}

/// Columns are the splitting's eigen-frame: real eigenvectors as-is, a
/// complex pair contributes its real and imaginary parts (one column each,
/// from the member with positive imaginary part).
pub fn eigen_matrix(split: &SpectralSplitting) -> Mat {
    let d = split.modes.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut i = 0;
    while i < d {
        let m = &split.modes[i];
        if m.is_real() {
            cols.push(m.vec_re.clone());
            i += 1;
        } else {
            // modes come in conjugate-adjacent pairs after sorting
            let pos = if m.value.im > 0.0 { m } else { &split.modes[i + 1] };
            cols.push(pos.vec_re.clone());
            cols.push(pos.vec_im.clone());
            i += 2;
        }
    }
    Mat::from_cols(&cols)
}

/// Skew product (x, y) -> (A x + shift(y), base(y)); fiber coordinates
/// first, base coordinates after.
#[derive(Debug, Clone)]
pub struct SkewProductMap {
    pub fiber_matrix: UnimodularMatrix,
    pub fiber_shift: Vec<TrigPolynomial>,
    pub base: TorusMap,
}

impl SkewProductMap {
    pub fn new(
        fiber_matrix: UnimodularMatrix,
        fiber_shift: Vec<TrigPolynomial>,
        base: TorusMap,
    ) -> Result<Self, MapError> {
        if fiber_shift.len() != fiber_matrix.dim()
            || fiber_shift.iter().any(|p| p.dim != base.dim())
        {
            return Err(MapError::DimensionMismatch);
        }
        Ok(SkewProductMap {
            fiber_matrix,
            fiber_shift,
            base,
        })
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_matrix.dim()
    }

    pub fn dim(&self) -> usize {
        self.fiber_dim() + self.base.dim()
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        self.as_torus_map().eval(p)
    }

    /// The same map as a TorusMap on the product torus; the shift depends
    /// only on base coordinates, which embed after the fiber block.
    pub fn as_torus_map(&self) -> TorusMap {
        let m = self.fiber_dim();
        let d = self.dim();
        let linear = UnimodularMatrix::block_diag(&[&self.fiber_matrix, &self.base.linear]);
        let mut perturbation: Vec<TrigPolynomial> =
            self.fiber_shift.iter().map(|p| p.embed(d, m)).collect();
        for p in &self.base.perturbation {
            perturbation.push(p.embed(d, m));
        }
        TorusMap { linear, perturbation }
    }
}

/// Derivative of a map at a point, optionally expressed in a supplied
/// frame (columns).
pub fn derivative(map: &TorusMap, x: &[f64], frame: Option<&Mat>) -> Mat {
    let j = map.jacobian(x);
    match frame {
        None => j,
        Some(v) => {
            let vinv = v.inverse().expect("frame must be invertible");
            vinv.matmul(&j).matmul(v)
        }
    }
}

/// The product automorphism L(x,y) = (Ax, By) and its skew perturbation
/// (Ax + phi(y) v, By), with v the unit unstable eigenvector of A.
pub fn make_dllave_pair(
    a: &UnimodularMatrix,
    b: &UnimodularMatrix,
    phi: &TrigPolynomial,
) -> Result<(TorusMap, SkewProductMap), MapError> {
    if a.dim() != 2 || b.dim() != 2 || phi.dim != 2 {
        return Err(MapError::DimensionMismatch);
    }
    let split = lattice::spectral_splitting(a)?;
    let v = split
        .real_vector(split.weakest_unstable())
        .ok_or(MapError::ComplexPairUnsupportedDim)?;
    let shift: Vec<TrigPolynomial> = v.iter().map(|&vi| phi.scale(vi)).collect();
    let model = TorusMap::linear_map(UnimodularMatrix::block_diag(&[a, b]));
    let skew = SkewProductMap::new(a.clone(), shift, TorusMap::linear_map(b.clone()))?;
    Ok((model, skew))
}

/// The frame {v, u, vt, ut} for a 2+2 product: stable and unstable unit
/// eigenvectors of the fiber block, then of the base block.
pub fn dllave_frame(a: &UnimodularMatrix, b: &UnimodularMatrix) -> Result<Mat, MapError> {
    let sa = lattice::spectral_splitting(a)?;
    let sb = lattice::spectral_splitting(b)?;
    let embed = |v: &[f64], hi: bool| -> Vec<f64> {
        let mut out = vec![0.0; 4];
        if hi {
            out[2..4].copy_from_slice(v);
        } else {
            out[0..2].copy_from_slice(v);
        }
        out
    };
    let v = sa.real_vector(0).ok_or(MapError::ComplexPairUnsupportedDim)?;
    let u = sa.real_vector(1).ok_or(MapError::ComplexPairUnsupportedDim)?;
    let vt = sb.real_vector(0).ok_or(MapError::ComplexPairUnsupportedDim)?;
    let ut = sb.real_vector(1).ok_or(MapError::ComplexPairUnsupportedDim)?;
    Ok(Mat::from_cols(&[
        embed(&v, false),
        embed(&u, false),
        embed(&vt, true),
        embed(&ut, true),
    ]))
}

/// Output of `make_reducible_counterexample`: the block-diagonalized model
/// and a fiber-shift perturbation whose conjugacy to the model (or, in the
/// equal-rate case, to the companion perturbation) degrades below
/// Lipschitz.
#[derive(Debug, Clone)]
pub struct ReducibleCounterexample {
    pub basis: lattice::SublatticeBasis,
    /// Block-coordinate model automorphism.
    pub model: TorusMap,
    /// Perturbed skew product (fiber block + shift over the base block).
    pub tilde: SkewProductMap,
    /// Companion map: the model when rates differ, the doubled-shift skew
    /// product when the fiber and base rates coincide.
    pub hat_shift_factor: f64,
    pub lambda: f64,
    pub mu: f64,
    pub equal_rates: bool,
}

impl ReducibleCounterexample {
    pub fn hat(&self) -> SkewProductMap {
        SkewProductMap {
            fiber_matrix: self.tilde.fiber_matrix.clone(),
            fiber_shift: self
                .tilde
                .fiber_shift
                .iter()
                .map(|p| p.scale(self.hat_shift_factor))
                .collect(),
            base: self.tilde.base.clone(),
        }
    }
}

/// Build the reducible counterexample pair from any hyperbolic matrix with
/// reducible characteristic polynomial: recover integer blocks, pick the
/// weakest expanding rate lambda and a base block with rate mu >= lambda,
/// and shift the fiber along its unstable eigenvector by eps sin(2 pi y_1).
pub fn make_reducible_counterexample(
    m: &UnimodularMatrix,
    eps: f64,
) -> Result<ReducibleCounterexample, MapError> {
    let basis = lattice::invariant_sublattice_basis(m)?;
    let blocks = basis.blocks();
    // per-block weakest expanding modulus
    let mut weak: Vec<(usize, Complex64)> = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        let s = lattice::spectral_splitting(b)?;
        weak.push((i, s.modes[s.weakest_unstable()].value));
    }
    weak.sort_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap());
    let (fiber_idx, lam) = weak[0];
    let (base_idx, mu) = weak[1];
    if lam.im != 0.0 || mu.im != 0.0 {
        return Err(MapError::ComplexPairUnsupportedDim);
    }
    let lambda = lam.re;
    let mu = mu.re;
    let equal_rates = math::abs(mu - lambda) <= 1e-9;
    let fiber = &blocks[fiber_idx];
    let base = &blocks[base_idx];
    let sf = lattice::spectral_splitting(fiber)?;
    let v = sf
        .real_vector(sf.weakest_unstable())
        .ok_or(MapError::ComplexPairUnsupportedDim)?;
    let phi = TrigPolynomial::sin_wave(base.dim(), &first_unit_freq(base.dim()), eps);
    let shift: Vec<TrigPolynomial> = v.iter().map(|&vi| phi.scale(vi)).collect();
    let tilde = SkewProductMap::new(fiber.clone(), shift, TorusMap::linear_map(base.clone()))?;
    // reorder model blocks to match the (fiber, base, rest) layout
    let mut order = vec![fiber_idx, base_idx];
    for i in 0..blocks.len() {
        if i != fiber_idx && i != base_idx {
            order.push(i);
        }
    }
    let refs: Vec<&UnimodularMatrix> = order.iter().map(|&i| &blocks[i]).collect();
    let model = TorusMap::linear_map(UnimodularMatrix::block_diag(&refs));
    Ok(ReducibleCounterexample {
        basis,
        model,
        tilde,
        hat_shift_factor: if equal_rates { 2.0 } else { 0.0 },
        lambda,
        mu,
        equal_rates,
    })
}

fn first_unit_freq(dim: usize) -> Vec<i64> {
    let mut f = vec![0i64; dim];
    f[0] = 1;
    f
}

/// Finite-time invariant splitting at a point: unit directions ordered by
/// growth rate ascending (strongest stable first), with the worst
/// Df-equivariance residual over the bundle.
#[derive(Debug, Clone)]
pub struct FiniteSplitting {
    pub directions: Vec<Vec<f64>>,
    pub residual: f64,
}

/// Approximate the Oseledets splitting at `x` by intersecting forward and
/// backward finite-time flags (QR push of frames along the orbit).
pub fn finite_time_splitting(
    f: &TorusMap,
    x: &[f64],
    n: usize,
) -> Result<FiniteSplitting, MapError> {
    let dirs = splitting_directions(f, x, n)?;
    // equivariance residual: Df(x) e_i(x) parallel to e_i(f x)
    let fx = f.eval(x);
    let dirs_fx = splitting_directions(f, &fx, n)?;
    let j = f.jacobian(x);
    let mut residual = 0.0f64;
    for (e, e_fx) in dirs.iter().zip(&dirs_fx) {
        let mut im = j.matvec(e);
        mat::normalize(&mut im);
        mat::orient(&mut im);
        let d: f64 = im
            .iter()
            .zip(e_fx)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        residual = residual.max(math::sqrt(d));
    }
    Ok(FiniteSplitting {
        directions: dirs,
        residual,
    })
}

fn splitting_directions(f: &TorusMap, x: &[f64], n: usize) -> Result<Vec<Vec<f64>>, MapError> {
    let d = f.dim();
    // backward orbit x_{-n} .. x_0 and forward orbit x_0 .. x_n
    let mut back = vec![x.to_vec()];
    for _ in 0..n {
        let prev = f.inverse_point(back.last().unwrap())?;
        back.push(prev);
    }
    back.reverse(); // back[0] = x_{-n}, back[n] = x
    let mut fwd = vec![x.to_vec()];
    for _ in 0..n {
        fwd.push(f.eval(fwd.last().unwrap()));
    }
    // fast flag: push a frame forward from x_{-n}; column k spans the k+1
    // fastest directions at x. The start frame must be generic: coordinate
    // axes can be invariant under block-structured Jacobians and then the
    // columns never sort by growth.
    let mut qf = generic_frame(d);
    for p in back.iter().take(n) {
        qf = f.jacobian(p).matmul(&qf);
        let r = qf.qr_in_place();
        check_gaps(&r)?;
    }
    // slow flag: pull a frame backward from x_n; column k spans the k+1
    // slowest (strongest stable) directions at x
    let mut qs = generic_frame(d);
    for p in fwd.iter().skip(1).rev() {
        let jin = f
            .jacobian(&f.inverse_point(p)?)
            .inverse()
            .ok_or(MapError::SplittingDegenerate)?;
        qs = jin.matmul(&qs);
        let r = qs.qr_in_place();
        check_gaps(&r)?;
    }
    let mut dirs = Vec::with_capacity(d);
    for i in 0..d {
        // E_i = span(first i+1 slow) ^ span(first d-i fast)
        let slow = i + 1;
        let fast = d - i;
        let mut stacked = Mat::zeros(d, slow + fast);
        for r in 0..d {
            for c in 0..slow {
                stacked[(r, c)] = qs[(r, c)];
            }
            for c in 0..fast {
                stacked[(r, slow + c)] = -qf[(r, c)];
            }
        }
        let ns = stacked.null_space(1e-6);
        if ns.len() != 1 {
            return Err(MapError::SplittingDegenerate);
        }
        let coef = &ns[0];
        let mut e = vec![0.0; d];
        for r in 0..d {
            for c in 0..slow {
                e[r] += qs[(r, c)] * coef[c];
            }
        }
        mat::normalize(&mut e);
        mat::orient(&mut e);
        dirs.push(e);
    }
    Ok(dirs)
}

/// Deterministic orthonormal frame with no invariant coordinate subspaces.
fn generic_frame(d: usize) -> Mat {
    let mut rng = crate::sample::SplitMix64::new(0x5eed_f4a3);
    let mut q = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            q[(i, j)] = rng.next_f64() - 0.5;
        }
    }
    q.qr_in_place();
    q
}

fn check_gaps(r_diag: &[f64]) -> Result<(), MapError> {
    for w in r_diag {
        if math::abs(*w) < 1e-12 {
            return Err(MapError::SplittingDegenerate);
        }
    }
    Ok(())
}

/// Empirical per-bundle expansion rates over n-step windows.
#[derive(Debug, Clone)]
pub struct CocycleRates {
    /// Contracting bundle max one-step-equivalent rates, weakest last
    /// (alpha_l < ... < alpha_1 < 1).
    pub alphas: Vec<f64>,
    /// Expanding bundle lower rates (beta-tilde, ascending).
    pub beta_lo: Vec<f64>,
    /// Expanding bundle upper rates (beta, ascending).
    pub beta_hi: Vec<f64>,
    pub constant: f64,
    pub samples: usize,
}

impl CocycleRates {
    pub fn chain_ordered(&self) -> bool {
        let mut prev = 0.0;
        for &a in self.alphas.iter() {
            if a <= prev {
                return false;
            }
            prev = a;
        }
        if prev >= 1.0 {
            return false;
        }
        for i in 0..self.beta_lo.len() {
            if self.beta_lo[i] > self.beta_hi[i] + 1e-12 || self.beta_lo[i] <= 1.0 {
                return false;
            }
            if i > 0 && self.beta_lo[i] <= self.beta_hi[i - 1] {
                return false;
            }
        }
        true
    }

    /// log(blo_m)/log(bhi_m) > log(bhi_i)/log(blo_m) for every weaker
    /// expanding index i: the strongest bundle's rates are pinched enough
    /// relative to the others.
    pub fn narrow_spectrum_check(&self) -> bool {
        let m = self.beta_lo.len();
        if m == 0 {
            return false;
        }
        let rho = math::ln(self.beta_lo[m - 1]) / math::ln(self.beta_hi[m - 1]);
        (0..m - 1).all(|i| rho > math::ln(self.beta_hi[i]) / math::ln(self.beta_lo[m - 1]))
    }
}

/// Sample per-bundle growth over n-step windows at `samples` points.
pub fn cocycle_rates(f: &TorusMap, points: &[Vec<f64>], n: usize) -> Result<CocycleRates, MapError> {
    let d = f.dim();
    let split = f.spectral_splitting().map_err(MapError::Lattice)?;
    let k = split.stable_count;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![0.0f64; d];
    let mut constant = 1.0f64;
    for x in points {
        let fs = finite_time_splitting(f, x, n)?;
        for (i, e) in fs.directions.iter().enumerate() {
            // stable bundles are measured along the backward orbit (as
            // expansion under the inverse): pushing a contracting vector
            // forward amplifies unstable round-off exponentially
            let stable = i < k;
            let mut v = e.clone();
            let mut y = x.clone();
            let mut log_total = 0.0;
            let mut max_dev = 0.0f64;
            for step in 1..=n {
                if stable {
                    y = f.inverse_point(&y)?;
                    let jin = f
                        .jacobian(&y)
                        .inverse()
                        .ok_or(MapError::SplittingDegenerate)?;
                    v = jin.matvec(&v);
                } else {
                    v = f.jacobian(&y).matvec(&v);
                    y = f.eval(&y);
                }
                let g = mat::norm(&v);
                log_total += math::ln(g);
                for z in v.iter_mut() {
                    *z /= g;
                }
                let rate = math::exp(log_total / step as f64);
                max_dev = max_dev.max(rate);
            }
            let rate = if stable {
                // growth g under the inverse corresponds to rate 1/g
                math::exp(-log_total / n as f64)
            } else {
                math::exp(log_total / n as f64)
            };
            lo[i] = lo[i].min(rate);
            hi[i] = hi[i].max(rate);
            // crude uniformity constant: worst window rate vs mean rate
            constant = constant.max(max_dev / math::exp(log_total / n as f64));
        }
    }
    // alphas reported weakest-contraction-last per the chain ordering
    let mut alphas: Vec<f64> = hi[..k].to_vec();
    alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(CocycleRates {
        alphas,
        beta_lo: lo[k..].to_vec(),
        beta_hi: hi[k..].to_vec(),
        constant,
        samples: points.len(),
    })
}

/// Displacement field H - Id of the conjugacy H f = L H, stored on a
/// regular grid with multilinear interpolation.
#[derive(Debug, Clone)]
pub struct LinearizingConjugacy {
    pub model: UnimodularMatrix,
    grid_n: usize,
    dim: usize,
    /// values[cell * dim + coord]
    values: Vec<f64>,
    pub residual: f64,
}

impl LinearizingConjugacy {
    pub fn identity(model: UnimodularMatrix, grid_n: usize) -> Self {
        let dim = model.dim();
        LinearizingConjugacy {
            model,
            grid_n,
            dim,
            values: vec![0.0; grid_n.pow(dim as u32) * dim],
            residual: 0.0,
        }
    }

    fn cell_index(&self, idx: &[usize]) -> usize {
        let mut c = 0;
        for i in (0..self.dim).rev() {
            c = c * self.grid_n + idx[i] % self.grid_n;
        }
        c
    }

    /// Displacement u(x); periodic multilinear interpolation.
    pub fn displacement(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let n = self.grid_n as f64;
        let base: Vec<usize> = x.iter().map(|&v| math::floor(math::frac(v) * n) as usize).collect();
        let frac: Vec<f64> = x.iter().map(|&v| math::frac(v) * n - math::floor(math::frac(v) * n)).collect();
        let mut out = vec![0.0; d];
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = vec![0usize; d];
            for i in 0..d {
                if corner & (1 << i) != 0 {
                    idx[i] = (base[i] + 1) % self.grid_n;
                    w *= frac[i];
                } else {
                    idx[i] = base[i] % self.grid_n;
                    w *= 1.0 - frac[i];
                }
            }
            let c = self.cell_index(&idx);
            for i in 0..d {
                out[i] += w * self.values[c * d + i];
            }
        }
        out
    }

    /// H(x) = x + u(x) on the lift.
    pub fn apply_lift(&self, x: &[f64]) -> Vec<f64> {
        let u = self.displacement(x);
        x.iter().zip(&u).map(|(&a, &b)| a + b).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        reduce_mod_1(&self.apply_lift(x))
    }
}

/// Solve H f = L H for H = Id + u by component-wise contraction in the
/// eigenframe of L. Requires real simple spectrum; supported up to
/// dimension 3 at the default grid sizes.
pub fn linearizing_conjugacy(
    f: &TorusMap,
    tol: f64,
    grid_n: usize,
) -> Result<LinearizingConjugacy, MapError> {
    let d = f.dim();
    let model = f.linear.clone();
    let split = lattice::spectral_splitting(&model)?;
    if split.repeated_modulus || split.modes.iter().any(|m| !m.is_real()) {
        return Err(MapError::SplittingDegenerate);
    }
    let vmat = eigen_matrix(&split);
    let vinv = vmat.inverse().ok_or(MapError::SplittingDegenerate)?;
    let lambda: Vec<f64> = split.modes.iter().map(|m| m.value.re).collect();
    let mut conj = LinearizingConjugacy::identity(model.clone(), grid_n);
    if f.is_linear() {
        return Ok(conj);
    }
    let cells = grid_n.pow(d as u32);
    // precompute per-cell data: grid point, f(x), f^{-1}(x), and the
    // eigencoordinates of the displacement p = f - L
    let mut pts = Vec::with_capacity(cells);
    let mut fwd = Vec::with_capacity(cells);
    let mut bwd = Vec::with_capacity(cells);
    let mut q_here = Vec::with_capacity(cells);
    let mut q_back = Vec::with_capacity(cells);
    let mf = model.to_f64();
    for c in 0..cells {
        let mut idx = c;
        let mut x = vec![0.0; d];
        for v in x.iter_mut() {
            *v = (idx % grid_n) as f64 / grid_n as f64;
            idx /= grid_n;
        }
        let fx = f.eval(&x);
        let fxi = f.inverse_point(&x)?;
        let p: Vec<f64> = f
            .eval_lift(&x)
            .iter()
            .zip(mf.matvec(&x))
            .map(|(&a, b)| a - b)
            .collect();
        let pb: Vec<f64> = f
            .eval_lift(&fxi)
            .iter()
            .zip(mf.matvec(&fxi))
            .map(|(&a, b)| a - b)
            .collect();
        q_here.push(vinv.matvec(&p));
        q_back.push(vinv.matvec(&pb));
        pts.push(x);
        fwd.push(fx);
        bwd.push(fxi);
    }
    // coefficient grids in eigencoordinates
    let mut coef = vec![0.0f64; cells * d];
    let interp = |coef: &[f64], x: &[f64], j: usize| -> f64 {
        // multilinear interpolation of component j
        let n = grid_n as f64;
        let mut out = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut cidx = 0usize;
            for i in (0..d).rev() {
                let xf = math::frac(x[i]) * n;
                let b = math::floor(xf) as usize;
                let fr = xf - math::floor(xf);
                let (ii, wi) = if corner & (1 << i) != 0 {
                    ((b + 1) % grid_n, fr)
                } else {
                    (b % grid_n, 1.0 - fr)
                };
                w *= wi;
                cidx = cidx * grid_n + ii;
            }
            out += w * coef[cidx * d + j];
        }
        out
    };
    let mut converged = false;
    for _ in 0..4000 {
        let mut delta = 0.0f64;
        let mut next = coef.clone();
        for c in 0..cells {
            for j in 0..d {
                let new = if math::abs(lambda[j]) > 1.0 {
                    // c_j(x) = (q_j(x) + c_j(f x)) / lambda_j
                    (q_here[c][j] + interp(&coef, &fwd[c], j)) / lambda[j]
                } else {
                    // c_j(x) = lambda_j c_j(f^-1 x) - q_j(f^-1 x)
                    lambda[j] * interp(&coef, &bwd[c], j) - q_back[c][j]
                };
                delta = delta.max(math::abs(new - coef[c * d + j]));
                next[c * d + j] = new;
            }
        }
        coef = next;
        if delta < tol * 0.05 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(MapError::NoConvergence);
    }
    for c in 0..cells {
        let u = vmat.matvec(&coef[c * d..(c + 1) * d]);
        conj.values[c * d..(c + 1) * d].copy_from_slice(&u);
    }
    // residual sup |H(f x) - L H(x)| on off-grid samples
    let samples = crate::sample::kronecker_points(d, 500, 17);
    let mut res = 0.0f64;
    for x in &samples {
        let lhs = conj.apply(&f.eval(x));
        let rhs = reduce_mod_1(&mf.matvec(&conj.apply_lift(x)));
        res = res.max(torus_dist(&lhs, &rhs));
    }
    conj.residual = res;
    Ok(conj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> UnimodularMatrix {
        UnimodularMatrix::new(&[vec![2, 1], vec![1, 1]]).unwrap()
    }

    fn b3() -> UnimodularMatrix {
        UnimodularMatrix::new(&[vec![3, 1], vec![2, 1]]).unwrap()
    }

    #[test]
    fn trig_reality_and_sin() {
        let p = TrigPolynomial::sin_wave(2, &[1, 0], 0.5);
        for y in crate::sample::kronecker_points(2, 40, 1) {
            let want = 0.5 * math::sin(TAU * y[0]);
            assert!(math::abs(p.eval(&y) - want) < 1e-12);
        }
    }

    #[test]
    fn trig_gradient_matches_differences() {
        let p = TrigPolynomial::sin_wave(2, &[2, -1], 0.3)
            .add(&TrigPolynomial::cos_wave(2, &[1, 1], 0.2));
        let h = 1e-6;
        for y in crate::sample::kronecker_points(2, 20, 2) {
            let g = p.grad(&y);
            for j in 0..2 {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[j] += h;
                ym[j] -= h;
                let fd = (p.eval(&yp) - p.eval(&ym)) / (2.0 * h);
                assert!(math::abs(g[j] - fd) < 1e-6);
            }
        }
    }

    #[test]
    fn cat_map_point_image() {
        let f = TorusMap::linear_map(cat());
        assert_eq!(f.eval(&[0.0, 0.0]), vec![0.0, 0.0]);
        let img = f.eval(&[0.5, 0.5]);
        assert!(math::abs(img[0] - 0.5) < 1e-15 && math::abs(img[1]) < 1e-15);
    }

    #[test]
    fn zero_perturbation_equals_linear() {
        let (l, lt) = make_dllave_pair(&cat(), &b3(), &TrigPolynomial::zero(2)).unwrap();
        for x in crate::sample::kronecker_points(4, 100, 3) {
            assert!(torus_dist(&l.eval(&x), &lt.eval(&x)) < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let phi = TrigPolynomial::sin_wave(2, &[1, 0], 0.01);
        let (_, lt) = make_dllave_pair(&cat(), &b3(), &phi).unwrap();
        let f = lt.as_torus_map();
        let h = 1e-5;
        for x in crate::sample::kronecker_points(4, 20, 4) {
            let j = f.jacobian(&x);
            for c in 0..4 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c] += h;
                xm[c] -= h;
                let fp = f.eval_lift(&xp);
                let fm = f.eval_lift(&xm);
                for r in 0..4 {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    assert!(math::abs(j[(r, c)] - fd) < 1e-6);
                }
            }
        }
    }

    #[test]
    fn derivative_table_in_eigenframe() {
        // skew derivative in {v,u,vt,ut}: diag rates plus a single coupling
        // row feeding the fiber unstable coordinate from base directions
        let phi = TrigPolynomial::sin_wave(2, &[1, 0], 0.01);
        let (_, lt) = make_dllave_pair(&cat(), &b3(), &phi).unwrap();
        let f = lt.as_torus_map();
        let frame = dllave_frame(&cat(), &b3()).unwrap();
        let sa = lattice::spectral_splitting(&cat()).unwrap();
        let sb = lattice::spectral_splitting(&b3()).unwrap();
        let lam = sa.modes[1].value.re;
        let lam_s = sa.modes[0].value.re;
        let mu = sb.modes[1].value.re;
        let mu_s = sb.modes[0].value.re;
        let y = [0.3, 0.7];
        let x = [0.1, 0.2, y[0], y[1]];
        let dmat = derivative(&f, &x, Some(&frame));
        // diagonal rates
        assert!(math::abs(dmat[(0, 0)] - lam_s) < 1e-9);
        assert!(math::abs(dmat[(1, 1)] - lam) < 1e-9);
        assert!(math::abs(dmat[(2, 2)] - mu_s) < 1e-9);
        assert!(math::abs(dmat[(3, 3)] - mu) < 1e-9);
        // coupling: the shift is phi * u, so only the u-row sees the base
        let vt = sb.real_vector(0).unwrap();
        let ut = sb.real_vector(1).unwrap();
        let g = phi.grad(&y);
        assert!(math::abs(dmat[(1, 2)] - mat::dot(&g, &vt)) < 1e-9);
        assert!(math::abs(dmat[(1, 3)] - mat::dot(&g, &ut)) < 1e-9);
        assert!(math::abs(dmat[(0, 2)]) < 1e-9);
        assert!(math::abs(dmat[(0, 3)]) < 1e-9);
        assert!(math::abs(dmat[(2, 0)]) < 1e-9);
        assert!(math::abs(dmat[(3, 1)]) < 1e-9);
    }

    #[test]
    fn inverse_point_roundtrip() {
        let phi = TrigPolynomial::sin_wave(2, &[1, 0], 0.01);
        let (_, lt) = make_dllave_pair(&cat(), &b3(), &phi).unwrap();
        let f = lt.as_torus_map();
        for x in crate::sample::kronecker_points(4, 30, 5) {
            let y = f.inverse_point(&x).unwrap();
            assert!(torus_dist(&f.eval(&y), &x) < 1e-12);
        }
    }

    #[test]
    fn certification_flags() {
        let f = TorusMap::linear_map(cat());
        let rep = f.certify().unwrap();
        assert!(rep.certified);
        // large perturbation must fail the cone criterion
        let big = TorusMap::new(
            cat(),
            vec![
                TrigPolynomial::sin_wave(2, &[1, 0], 0.8),
                TrigPolynomial::sin_wave(2, &[0, 1], 0.8),
            ],
        )
        .unwrap();
        assert!(!big.certify().unwrap().certified);
    }

    #[test]
    fn splitting_recovers_eigenvectors_for_linear() {
        let f = TorusMap::linear_map(cat());
        let s = lattice::spectral_splitting(&cat()).unwrap();
        let fs = finite_time_splitting(&f, &[0.2, 0.7], 25).unwrap();
        for (i, e) in fs.directions.iter().enumerate() {
            let v = s.real_vector(i).unwrap();
            let d: f64 = e.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(math::sqrt(d) < 1e-8, "bundle {i} off by {}", math::sqrt(d));
        }
        assert!(fs.residual < 1e-8);
    }

    #[test]
    fn splitting_equivariant_for_perturbed() {
        let phi = TrigPolynomial::sin_wave(2, &[1, 0], 0.01);
        let (_, lt) = make_dllave_pair(&cat(), &b3(), &phi).unwrap();
        let f = lt.as_torus_map();
        let fs = finite_time_splitting(&f, &[0.21, 0.63, 0.11, 0.53], 60).unwrap();
        assert!(fs.residual < 1e-6, "residual {}", fs.residual);
    }

    #[test]
    fn rates_exact_for_linear() {
        let f = TorusMap::linear_map(cat());
        let pts = crate::sample::kronecker_points(2, 5, 6);
        let r = cocycle_rates(&f, &pts, 25).unwrap();
        let lam = 2.618033988749895;
        assert!(math::abs(r.beta_lo[0] - lam) < 1e-9);
        assert!(math::abs(r.beta_hi[0] - lam) < 1e-9);
        assert!(math::abs(r.alphas[0] - 1.0 / lam) < 1e-9);
        assert!(r.chain_ordered());
    }

    #[test]
    fn rates_chain_ordered_for_perturbed() {
        let phi = TrigPolynomial::sin_wave(2, &[1, 0], 0.01);
        let (_, lt) = make_dllave_pair(&cat(), &b3(), &phi).unwrap();
        let f = lt.as_torus_map();
        let pts = crate::sample::kronecker_points(4, 4, 7);
        let r = cocycle_rates(&f, &pts, 20).unwrap();
        assert!(r.chain_ordered());
        assert!(r.narrow_spectrum_check());
    }

    #[test]
    fn conjugacy_identity_for_linear() {
        let f = TorusMap::linear_map(cat());
        let h = linearizing_conjugacy(&f, 1e-9, 64).unwrap();
        assert_eq!(h.residual, 0.0);
        let x = [0.3, 0.8];
        let hx = h.apply(&x);
        assert!(torus_dist(&hx, &x) < 1e-15);
    }

    #[test]
    fn conjugacy_small_perturbation_residual() {
        let f = TorusMap::new(
            cat(),
            vec![
                TrigPolynomial::sin_wave(2, &[0, 1], 0.015),
                TrigPolynomial::zero(2),
            ],
        )
        .unwrap();
        // the displacement is only Holder-smooth, so grid interpolation
        // dominates the residual at this resolution
        let h = linearizing_conjugacy(&f, 1e-7, 128).unwrap();
        assert!(h.residual < 1e-3, "residual {}", h.residual);
    }

    #[test]
    fn conjugacy_displacement_periodic() {
        let f = TorusMap::new(
            cat(),
            vec![
                TrigPolynomial::sin_wave(2, &[0, 1], 0.015),
                TrigPolynomial::zero(2),
            ],
        )
        .unwrap();
        let h = linearizing_conjugacy(&f, 1e-7, 64).unwrap();
        let x = [0.37, 0.21];
        let shifted = [x[0] + 2.0, x[1] - 1.0];
        let a = h.apply_lift(&x);
        let b = h.apply_lift(&shifted);
        assert!(math::abs(b[0] - a[0] - 2.0) < 1e-12);
        assert!(math::abs(b[1] - a[1] + 1.0) < 1e-12);
    }

    #[test]
    fn reducible_counterexample_structure() {
        let m = UnimodularMatrix::block_diag(&[&cat(), &b3()]);
        let rc = make_reducible_counterexample(&m, 0.01).unwrap();
        assert!(!rc.equal_rates);
        assert!(math::abs(rc.lambda - 2.618033988749895) < 1e-9);
        assert!(math::abs(rc.mu - 3.732050807568877) < 1e-9);
        assert_eq!(rc.hat_shift_factor, 0.0);
        let m2 = UnimodularMatrix::block_diag(&[&cat(), &cat()]);
        let rc2 = make_reducible_counterexample(&m2, 0.01).unwrap();
        assert!(rc2.equal_rates);
        assert_eq!(rc2.hat_shift_factor, 2.0);
    }

    #[test]
    fn deck_translation_commutes() {
        let phi = TrigPolynomial::sin_wave(2, &[1, 0], 0.01);
        let (_, lt) = make_dllave_pair(&cat(), &b3(), &phi).unwrap();
        let f = lt.as_torus_map();
        let x = [0.3, 0.4, 0.5, 0.6];
        let m = [1.0, -2.0, 0.0, 3.0];
        let shifted: Vec<f64> = x.iter().zip(&m).map(|(a, b)| a + b).collect();
        let a = f.eval(&shifted);
        let mm: Vec<f64> = f
            .linear
            .to_f64()
            .matvec(&m);
        let b: Vec<f64> = f
            .eval_lift(&x)
            .iter()
            .zip(&mm)
            .map(|(p, q)| p + q)
            .collect();
        assert!(torus_dist(&a, &reduce_mod_1(&b)) < 1e-12);
    }
}
