//! Coboundary solvers for fiber shift equations over expanding or
//! contracting rates, the exact Fourier-orbit evaluation of the
//! distributional obstruction to Lipschitz conjugacy, and residual checks
//! for candidate conjugacies.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::lattice::{self, UnimodularMatrix};
use crate::maps::{self, SkewProductMap, TorusMap, TrigPolynomial};
use crate::math;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    /// The fiber rate must satisfy |lambda| > 1 for the forward series.
    NonExpandingLambda,
    /// A support frequency sits on an invariant line of the transposed
    /// base matrix (only the zero frequency for integer data).
    SupportOnEigenline,
    /// Fiber eigenstructure not representable (complex rates where a real
    /// decomposition was required).
    UnsupportedFiber,
}

impl core::fmt::Display for CohomologyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CohomologyError::NonExpandingLambda => write!(f, "fiber rate is not expanding"),
            CohomologyError::SupportOnEigenline => {
                write!(f, "support frequency on an invariant line of the base")
            }
            CohomologyError::UnsupportedFiber => write!(f, "fiber eigenstructure unsupported"),
        }
    }
}

/// Truncated series solution psi of phi(y) + psi(B y) = lambda psi(y),
/// evaluated along forward (|lambda| > 1) or backward (|lambda| < 1)
/// orbits of the base map.
#[derive(Debug, Clone)]
pub struct ConjugacyFunction {
    pub base: TorusMap,
    pub lambda: f64,
    pub phi: TrigPolynomial,
    pub depth: usize,
    pub tail_bound: f64,
    expanding: bool,
}

fn sup_bound(phi: &TrigPolynomial) -> f64 {
    phi.terms.iter().map(|(_, c)| c.norm()).sum()
}

impl ConjugacyFunction {
    pub fn eval(&self, y: &[f64]) -> f64 {
        if self.expanding {
            // psi(y) = sum_{k>=0} lambda^{-k-1} phi(B^k y)
            let mut acc = 0.0;
            let mut w = 1.0 / self.lambda;
            let mut p = y.to_vec();
            for _ in 0..=self.depth {
                acc += w * self.phi.eval(&p);
                w /= self.lambda;
                p = self.base.eval(&p);
            }
            acc
        } else {
            // psi(y) = -sum_{k>=1} lambda^{k-1} phi(B^-k y)
            let mut acc = 0.0;
            let mut w = 1.0;
            let mut p = y.to_vec();
            for _ in 0..=self.depth {
                p = self.base.inverse_point(&p).expect("base inverse");
                acc -= w * self.phi.eval(&p);
                w *= self.lambda;
            }
            acc
        }
    }

    /// Derivative of psi along a direction, term by term (legitimate
    /// whenever the weighted derivative series converges, e.g. along the
    /// stable direction of a linear base).
    pub fn dir_deriv(&self, y: &[f64], dir: &[f64]) -> f64 {
        let b = self.base.linear.to_f64();
        if self.expanding {
            let mut acc = 0.0;
            let mut w = 1.0 / self.lambda;
            let mut p = y.to_vec();
            let mut d = dir.to_vec();
            for _ in 0..=self.depth {
                acc += w * self.phi.dir_deriv(&p, &d);
                w /= self.lambda;
                p = self.base.eval(&p);
                d = b.matvec(&d);
            }
            acc
        } else {
            let binv = self.base.linear.inverse().to_f64();
            let mut acc = 0.0;
            let mut w = 1.0;
            let mut p = y.to_vec();
            let mut d = dir.to_vec();
            for _ in 0..=self.depth {
                p = self.base.inverse_point(&p).expect("base inverse");
                d = binv.matvec(&d);
                acc -= w * self.phi.dir_deriv(&p, &d);
                w *= self.lambda;
            }
            acc
        }
    }
}

fn series_depth(phi_sup: f64, rate: f64, tol: f64) -> (usize, f64) {
    // geometric tail: phi_sup * rate^{-n-1} * rate / (rate - 1)
    let mut n = 0usize;
    loop {
        let tail = phi_sup * math::powf(rate, -(n as f64) - 1.0) * rate / (rate - 1.0);
        if tail <= tol || n > 20_000 {
            return (n, tail);
        }
        n += 1;
    }
}

/// Solve phi(y) + psi(B y) = lambda psi(y) for expanding lambda by the
/// forward geometric series, truncated so the tail is below `tol`.
pub fn solve_fiber_coboundary(
    phi: &TrigPolynomial,
    base: &TorusMap,
    lambda: f64,
    tol: f64,
) -> Result<ConjugacyFunction, CohomologyError> {
    if math::abs(lambda) <= 1.0 {
        return Err(CohomologyError::NonExpandingLambda);
    }
    let (depth, tail_bound) = series_depth(sup_bound(phi), math::abs(lambda), tol);
    Ok(ConjugacyFunction {
        base: base.clone(),
        lambda,
        phi: phi.clone(),
        depth,
        tail_bound,
        expanding: true,
    })
}

/// Same equation for a contracting rate, solved along backward orbits.
pub fn solve_fiber_coboundary_contracting(
    phi: &TrigPolynomial,
    base: &TorusMap,
    lambda: f64,
    tol: f64,
) -> Result<ConjugacyFunction, CohomologyError> {
    if math::abs(lambda) >= 1.0 {
        return Err(CohomologyError::NonExpandingLambda);
    }
    let (depth, tail_bound) = series_depth(sup_bound(phi), 1.0 / math::abs(lambda), tol);
    Ok(ConjugacyFunction {
        base: base.clone(),
        lambda,
        phi: phi.clone(),
        depth,
        tail_bound,
        expanding: false,
    })
}

/// Truncated solution of the rotating vector coboundary
/// phi(y) + R psi(B y) = |lambda| R psi(y) with R the rotation by
/// `angle`: psi(y) = sum_{k>=0} |lambda|^{-k-1} R^{-k-1} phi(B^k y).
#[derive(Debug, Clone)]
pub struct VectorConjugacyFunction {
    pub base: TorusMap,
    pub lambda_abs: f64,
    pub angle: f64,
    pub phi: [TrigPolynomial; 2],
    pub depth: usize,
    pub tail_bound: f64,
}

fn rot_apply(angle: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = (math::sin(angle), math::cos(angle));
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

impl VectorConjugacyFunction {
    pub fn eval(&self, y: &[f64]) -> [f64; 2] {
        let mut acc = [0.0, 0.0];
        let mut w = 1.0 / self.lambda_abs;
        let mut ang = -self.angle;
        let mut p = y.to_vec();
        for _ in 0..=self.depth {
            let v = rot_apply(ang, [self.phi[0].eval(&p), self.phi[1].eval(&p)]);
            acc[0] += w * v[0];
            acc[1] += w * v[1];
            w /= self.lambda_abs;
            ang -= self.angle;
            p = self.base.eval(&p);
        }
        acc
    }
}

pub fn solve_vector_coboundary(
    phi: &[TrigPolynomial; 2],
    base: &TorusMap,
    lambda_abs: f64,
    angle: f64,
    tol: f64,
) -> Result<VectorConjugacyFunction, CohomologyError> {
    if lambda_abs <= 1.0 {
        return Err(CohomologyError::NonExpandingLambda);
    }
    let sup = math::sqrt(sup_bound(&phi[0]) * sup_bound(&phi[0]) + sup_bound(&phi[1]) * sup_bound(&phi[1]));
    let (depth, tail_bound) = series_depth(sup, lambda_abs, tol);
    Ok(VectorConjugacyFunction {
        base: base.clone(),
        lambda_abs,
        angle,
        phi: phi.clone(),
        depth,
        tail_bound,
    })
}

/// One frequency orbit of the transposed base matrix intersected with the
/// support: members carry their exponent j relative to the representative.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub representative: Vec<i64>,
    /// (exponent, frequency, coefficient).
    pub members: Vec<(i64, Vec<i64>, Complex64)>,
    /// sum_j lambda^j c_{n_j}.
    pub orbit_sum: Complex64,
}

#[derive(Debug, Clone)]
pub struct OrbitConditionReport {
    pub orbits: Vec<OrbitRecord>,
    pub weight_ratio: f64,
    pub holds: bool,
    pub witness: Option<usize>,
}

/// Canonical sign: first nonzero entry positive. Returns (freq, flipped).
fn canonical_freq(n: &[i64]) -> (Vec<i64>, bool) {
    for &x in n {
        if x > 0 {
            return (n.to_vec(), false);
        }
        if x < 0 {
            return (n.iter().map(|&v| -v).collect(), true);
        }
    }
    (n.to_vec(), false)
}

/// Deduplicated sign-canonical support of a trig polynomial; coefficients
/// of flipped frequencies are conjugated, so each entry is the coefficient
/// at the canonical frequency.
fn canonical_support(phi: &TrigPolynomial) -> Result<Vec<(Vec<i64>, Complex64)>, CohomologyError> {
    // full coefficient map first: only terms at exactly n contribute to
    // c_n (the mirror frequency carries the conjugate, not an addend)
    let mut full: Vec<(Vec<i64>, Complex64)> = Vec::new();
    for (n, c) in &phi.terms {
        if c.norm() == 0.0 {
            continue;
        }
        if n.iter().all(|&v| v == 0) {
            // constant terms make the weighted sum divergent: the zero
            // frequency is fixed by every power of the base
            return Err(CohomologyError::SupportOnEigenline);
        }
        match full.iter_mut().find(|(m, _)| m == n) {
            Some((_, acc)) => *acc += c,
            None => full.push((n.clone(), *c)),
        }
    }
    let mut out: Vec<(Vec<i64>, Complex64)> = Vec::new();
    for (n, c) in &full {
        let (cn, flipped) = canonical_freq(n);
        if !flipped && !out.iter().any(|(m, _)| *m == cn) {
            out.push((cn, *c));
        }
    }
    // canonical entries for mirror-only frequencies
    for (n, c) in &full {
        let (cn, flipped) = canonical_freq(n);
        if flipped && !out.iter().any(|(m, _)| *m == cn) {
            out.push((cn, c.conj()));
        }
    }
    out.retain(|(_, c)| c.norm() > 1e-18);
    Ok(out)
}

fn apply_int_mat(m: &UnimodularMatrix, n: &[i64]) -> Vec<i64> {
    let v: Vec<i128> = n.iter().map(|&x| x as i128).collect();
    m.apply_int(&v).iter().map(|&x| x as i64).collect()
}

/// Look up the coefficient at `freq` in the canonical support, accounting
/// for sign flips.
fn support_coeff(support: &[(Vec<i64>, Complex64)], freq: &[i64]) -> Option<Complex64> {
    let (cn, flipped) = canonical_freq(freq);
    support
        .iter()
        .find(|(m, _)| *m == cn)
        .map(|(_, c)| if flipped { c.conj() } else { *c })
}

const ORBIT_WALK: i64 = 160;

/// Exact evaluation of the Lipschitz obstruction on Fourier orbits: the
/// coefficient of the distributional sum at the orbit of n0 is a nonzero
/// multiple of sum_j lambda^j c_{(B^T)^j n0}, so the condition holds iff
/// every orbit sum vanishes. Requires mu > lambda > 1 for the report's
/// weight ratio to be meaningful; the sums themselves only use lambda.
pub fn orbit_condition(
    phi: &TrigPolynomial,
    b: &UnimodularMatrix,
    lambda: f64,
    mu: f64,
) -> Result<OrbitConditionReport, CohomologyError> {
    let report = orbit_sums(phi, b, lambda)?;
    Ok(OrbitConditionReport {
        weight_ratio: mu / lambda,
        ..report
    })
}

/// The mu = lambda variant: the necessary condition applies to the
/// difference of the two shifts with weight ratio one.
pub fn equal_pd_condition(
    xi: &TrigPolynomial,
    phi: &TrigPolynomial,
    b: &UnimodularMatrix,
    lambda: f64,
) -> Result<OrbitConditionReport, CohomologyError> {
    let diff = xi.add(&phi.scale(-1.0));
    let report = orbit_sums(&diff, b, lambda)?;
    Ok(OrbitConditionReport {
        weight_ratio: 1.0,
        ..report
    })
}

fn orbit_sums(
    phi: &TrigPolynomial,
    b: &UnimodularMatrix,
    lambda: f64,
) -> Result<OrbitConditionReport, CohomologyError> {
    let support = canonical_support(phi)?;
    let bt = b.transpose();
    let bt_inv = bt.inverse();
    let mut visited = vec![false; support.len()];
    let mut orbits: Vec<OrbitRecord> = Vec::new();
    let scale: f64 = support.iter().map(|(_, c)| c.norm()).sum::<f64>().max(1.0);
    for s in 0..support.len() {
        if visited[s] {
            continue;
        }
        // walk the orbit of support[s].0 both ways, collecting every
        // support hit; the window is generous since integer orbits of a
        // hyperbolic matrix leave any finite support quickly
        let n0 = support[s].0.clone();
        let mut members: Vec<(i64, Vec<i64>, Complex64)> = Vec::new();
        let mut m = n0.clone();
        for j in 0..=ORBIT_WALK {
            if let Some(c) = support_coeff(&support, &m) {
                members.push((j, m.clone(), c));
                let (cn, _) = canonical_freq(&m);
                if let Some(k) = support.iter().position(|(q, _)| *q == cn) {
                    visited[k] = true;
                }
            }
            m = apply_int_mat(&bt, &m);
        }
        let mut m = apply_int_mat(&bt_inv, &n0);
        for j in 1..=ORBIT_WALK {
            if let Some(c) = support_coeff(&support, &m) {
                members.push((-j, m.clone(), c));
                let (cn, _) = canonical_freq(&m);
                if let Some(k) = support.iter().position(|(q, _)| *q == cn) {
                    visited[k] = true;
                }
            }
            m = apply_int_mat(&bt_inv, &m);
        }
        members.sort_by_key(|(j, _, _)| *j);
        // re-base exponents at the earliest member for a deterministic
        // representative
        let j0 = members[0].0;
        let representative = members[0].1.clone();
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, _, c) in members.iter_mut() {
            *j -= j0;
            sum += *c * math::powf(lambda, *j as f64);
        }
        orbits.push(OrbitRecord {
            representative,
            members,
            orbit_sum: sum,
        });
    }
    let witness = orbits.iter().position(|o| o.orbit_sum.norm() > 1e-12 * scale);
    Ok(OrbitConditionReport {
        orbits,
        weight_ratio: 1.0,
        holds: witness.is_none(),
        witness,
    })
}

/// Complex-pair orbit record: coefficients are 2-vectors and the weight
/// carries the fiber rotation. The matrix-valued condition of the rotating
/// case factors through rank-one outer products, so it vanishes iff these
/// weighted vector sums vanish.
#[derive(Debug, Clone)]
pub struct VectorOrbitRecord {
    pub representative: Vec<i64>,
    pub members: Vec<(i64, Vec<i64>, [Complex64; 2])>,
    pub orbit_sum: [Complex64; 2],
}

#[derive(Debug, Clone)]
pub struct VectorOrbitConditionReport {
    pub orbits: Vec<VectorOrbitRecord>,
    pub weight_ratio: f64,
    pub holds: bool,
    pub witness: Option<usize>,
}

pub fn orbit_condition_complex(
    phi: &[TrigPolynomial; 2],
    b: &UnimodularMatrix,
    lambda_abs: f64,
    mu_abs: f64,
    fiber_angle: f64,
) -> Result<VectorOrbitConditionReport, CohomologyError> {
    let s0 = canonical_support(&phi[0])?;
    let s1 = canonical_support(&phi[1])?;
    // union of canonical supports
    let mut union: Vec<Vec<i64>> = Vec::new();
    for (n, _) in s0.iter().chain(s1.iter()) {
        if !union.contains(n) {
            union.push(n.clone());
        }
    }
    let coeff2 = |freq: &[i64]| -> [Complex64; 2] {
        [
            support_coeff(&s0, freq).unwrap_or(Complex64::new(0.0, 0.0)),
            support_coeff(&s1, freq).unwrap_or(Complex64::new(0.0, 0.0)),
        ]
    };
    let in_support = |freq: &[i64]| -> bool {
        let c = coeff2(freq);
        c[0].norm() > 0.0 || c[1].norm() > 0.0
    };
    let bt = b.transpose();
    let bt_inv = bt.inverse();
    let mut visited = vec![false; union.len()];
    let mut orbits: Vec<VectorOrbitRecord> = Vec::new();
    let scale: f64 = union
        .iter()
        .map(|n| {
            let c = coeff2(n);
            c[0].norm() + c[1].norm()
        })
        .sum::<f64>()
        .max(1.0);
    for s in 0..union.len() {
        if visited[s] {
            continue;
        }
        let n0 = union[s].clone();
        let mut members: Vec<(i64, Vec<i64>, [Complex64; 2])> = Vec::new();
        let mut m = n0.clone();
        for j in 0..=ORBIT_WALK {
            if in_support(&m) {
                members.push((j, m.clone(), coeff2(&m)));
                let (cn, _) = canonical_freq(&m);
                if let Some(k) = union.iter().position(|q| *q == cn) {
                    visited[k] = true;
                }
            }
            m = apply_int_mat(&bt, &m);
        }
        let mut m = apply_int_mat(&bt_inv, &n0);
        for j in 1..=ORBIT_WALK {
            if in_support(&m) {
                members.push((-j, m.clone(), coeff2(&m)));
                let (cn, _) = canonical_freq(&m);
                if let Some(k) = union.iter().position(|q| *q == cn) {
                    visited[k] = true;
                }
            }
            m = apply_int_mat(&bt_inv, &m);
        }
        members.sort_by_key(|(j, _, _)| *j);
        let j0 = members[0].0;
        let representative = members[0].1.clone();
        let mut sum = [Complex64::new(0.0, 0.0); 2];
        for (j, _, c) in members.iter_mut() {
            *j -= j0;
            let w = math::powf(lambda_abs, *j as f64);
            let ang = fiber_angle * *j as f64;
            let (si, co) = (math::sin(ang), math::cos(ang));
            // real rotation applied to the complex coefficient pair
            sum[0] += (c[0] * co - c[1] * si) * w;
            sum[1] += (c[0] * si + c[1] * co) * w;
        }
        orbits.push(VectorOrbitRecord {
            representative,
            members,
            orbit_sum: sum,
        });
    }
    let witness = orbits
        .iter()
        .position(|o| o.orbit_sum[0].norm() + o.orbit_sum[1].norm() > 1e-12 * scale);
    Ok(VectorOrbitConditionReport {
        orbits,
        weight_ratio: mu_abs / lambda_abs,
        holds: witness.is_none(),
        witness,
    })
}

/// Cesaro averages of the symmetric coefficient-level partial sums
/// sum_{|j| <= K} lambda^j c_{(B^T)^j n0}; a small-depth cross-check for
/// the orbit sums, never the primary evaluation (the pointwise series
/// diverges and only its paired coefficients stabilize).
pub fn cesaro_orbit_sums(
    phi: &TrigPolynomial,
    b: &UnimodularMatrix,
    lambda: f64,
    n0: &[i64],
    depth: usize,
) -> Result<Vec<Complex64>, CohomologyError> {
    let support = canonical_support(phi)?;
    let bt = b.transpose();
    let bt_inv = bt.inverse();
    let mut partials = Vec::with_capacity(depth);
    let mut fwd = n0.to_vec();
    let mut bwd = n0.to_vec();
    let mut s = support_coeff(&support, n0).unwrap_or(Complex64::new(0.0, 0.0));
    partials.push(s);
    for k in 1..depth {
        fwd = apply_int_mat(&bt, &fwd);
        bwd = apply_int_mat(&bt_inv, &bwd);
        if let Some(c) = support_coeff(&support, &fwd) {
            s += c * math::powf(lambda, k as f64);
        }
        if let Some(c) = support_coeff(&support, &bwd) {
            s += c * math::powf(lambda, -(k as f64));
        }
        partials.push(s);
    }
    let mut out = Vec::with_capacity(depth);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, p) in partials.iter().enumerate() {
        acc += p;
        out.push(acc / (k + 1) as f64);
    }
    Ok(out)
}

/// sup over samples of dist(h(f(x)), g(h(x))) on the torus.
pub fn conjugacy_residual<H>(h: H, f: &TorusMap, g: &TorusMap, samples: &[Vec<f64>]) -> f64
where
    H: Fn(&[f64]) -> Vec<f64>,
{
    let mut worst = 0.0f64;
    for x in samples {
        let a = h(&f.eval(x));
        let bpt = g.eval(&h(x));
        worst = worst.max(maps::torus_dist(&a, &bpt));
    }
    worst
}

/// Exact-series conjugacy for a skew product over a linear base: each
/// fiber eigencomponent solves its own scalar coboundary, expanding
/// components forward and contracting ones backward.
#[derive(Debug, Clone)]
pub struct SkewConjugacy {
    pub fiber_dim: usize,
    /// (eigenvector embedded in fiber coords, solved component).
    pub components: Vec<(Vec<f64>, ConjugacyFunction)>,
    pub tail_bound: f64,
}

impl SkewConjugacy {
    /// H(x, y) = (x + sum_i psi_i(y) w_i, y) on the lift.
    pub fn apply_lift(&self, p: &[f64]) -> Vec<f64> {
        let m = self.fiber_dim;
        let y = &p[m..];
        let mut out = p.to_vec();
        for (w, psi) in &self.components {
            let v = psi.eval(y);
            for i in 0..m {
                out[i] += v * w[i];
            }
        }
        out
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        maps::reduce_mod_1(&self.apply_lift(p))
    }

    /// Exact inverse on the lift: the shift depends only on the base
    /// coordinates, which H leaves unchanged.
    pub fn apply_inverse_lift(&self, p: &[f64]) -> Vec<f64> {
        let m = self.fiber_dim;
        let y = &p[m..];
        let mut out = p.to_vec();
        for (w, psi) in &self.components {
            let v = psi.eval(y);
            for i in 0..m {
                out[i] -= v * w[i];
            }
        }
        out
    }
}

/// Build the conjugacy H with H(skew point) = (model linear) H by
/// decomposing the fiber shift in the fiber eigenbasis.
pub fn skew_linearizing_conjugacy(
    skew: &SkewProductMap,
    tol: f64,
) -> Result<SkewConjugacy, CohomologyError> {
    let split =
        lattice::spectral_splitting(&skew.fiber_matrix).map_err(|_| CohomologyError::UnsupportedFiber)?;
    if split.modes.iter().any(|m| !m.is_real()) {
        return Err(CohomologyError::UnsupportedFiber);
    }
    let vmat = maps::eigen_matrix(&split);
    let vinv = vmat.inverse().ok_or(CohomologyError::UnsupportedFiber)?;
    let m = skew.fiber_dim();
    let mut components = Vec::with_capacity(m);
    let mut tail = 0.0f64;
    for i in 0..m {
        // delta_i = sum_j (V^-1)_{ij} shift_j as a trig polynomial
        let mut delta = TrigPolynomial::zero(skew.base.dim());
        for j in 0..m {
            delta = delta.add(&skew.fiber_shift[j].scale(vinv[(i, j)]));
        }
        let rate = split.modes[i].value.re;
        let psi = if math::abs(rate) > 1.0 {
            solve_fiber_coboundary(&delta, &skew.base, rate, tol)?
        } else {
            solve_fiber_coboundary_contracting(&delta, &skew.base, rate, tol)?
        };
        tail = tail.max(psi.tail_bound);
        components.push((vmat.col(i), psi));
    }
    Ok(SkewConjugacy {
        fiber_dim: m,
        components,
        tail_bound: tail,
    })
}
