//! One-dimensional invariant foliations: leaf integration, density and
//! tube-coverage probes, the affine distance-like function along weak
//! unstable leaves, u-Gibbs empirical measures, holonomy exponents, and
//! the strong-foliation moduli for 2+2 skew models.

use alloc::vec;
use alloc::vec::Vec;

use crate::cohomology::{self, CohomologyError};
use crate::maps::{self, MapError, SkewProductMap, TorusMap};
use crate::mat::{self, Mat};
use crate::math;
use crate::sample::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub enum FoliationError {
    /// Finite-time splitting failed to isolate the requested bundle.
    SplittingDegenerate,
    /// Direction field residual above 1e-3 at an integration node.
    StepRejected,
    /// Newton inversion failed along the backward orbit.
    BackwardOrbitUnavailable,
    /// The reference point is not fixed by the map.
    NotFixedPoint,
    /// Certificate inputs must satisfy m0 <= m1 < M.
    OrderingViolated,
    /// Requested leaf parameter beyond the integrated extent.
    LeafTooShort,
    Map(MapError),
    Cohomology(CohomologyError),
}

impl core::fmt::Display for FoliationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FoliationError::SplittingDegenerate => write!(f, "splitting degenerate"),
            FoliationError::StepRejected => write!(f, "direction field residual above step bound"),
            FoliationError::BackwardOrbitUnavailable => write!(f, "backward orbit unavailable"),
            FoliationError::NotFixedPoint => write!(f, "reference point is not fixed"),
            FoliationError::OrderingViolated => write!(f, "need m0 <= m1 < M"),
            FoliationError::LeafTooShort => write!(f, "parameter exceeds integrated leaf extent"),
            FoliationError::Map(e) => write!(f, "{e}"),
            FoliationError::Cohomology(e) => write!(f, "{e}"),
        }
    }
}

impl From<MapError> for FoliationError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::SplittingDegenerate => FoliationError::SplittingDegenerate,
            MapError::NoConvergence => FoliationError::BackwardOrbitUnavailable,
            other => FoliationError::Map(other),
        }
    }
}

impl From<CohomologyError> for FoliationError {
    fn from(e: CohomologyError) -> Self {
        FoliationError::Cohomology(e)
    }
}

fn generic_vector(d: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(0x0f0c_a11e);
    let mut v: Vec<f64> = (0..d).map(|_| rng.next_f64() - 0.5).collect();
    mat::normalize(&mut v);
    v
}

/// Direction of the bundle `E_i` at `x`, unit length. Linear maps return
/// the exact eigendirection; the extreme bundles use power iteration along
/// the orbit; interior bundles fall back to the full finite-time splitting.
pub fn leaf_direction(
    f: &TorusMap,
    x: &[f64],
    bundle: usize,
    iters: usize,
) -> Result<Vec<f64>, FoliationError> {
    let d = f.dim();
    if f.is_linear() {
        let split = f.spectral_splitting().map_err(MapError::from)?;
        return split
            .real_vector(bundle)
            .ok_or(FoliationError::SplittingDegenerate);
    }
    if bundle == d - 1 {
        // strongest expanding: push a generic vector forward from deep in
        // the backward orbit
        let mut orbit = vec![x.to_vec()];
        for _ in 0..iters {
            let prev = f
                .inverse_point(orbit.last().unwrap())
                .map_err(|_| FoliationError::BackwardOrbitUnavailable)?;
            orbit.push(prev);
        }
        let mut v = generic_vector(d);
        for k in (1..=iters).rev() {
            v = f.jacobian(&orbit[k]).matvec(&v);
            mat::normalize(&mut v);
        }
        mat::orient(&mut v);
        return Ok(v);
    }
    if bundle == 0 {
        // strongest contracting: pull a generic vector backward from deep
        // in the forward orbit
        let mut orbit = vec![x.to_vec()];
        for _ in 0..iters {
            orbit.push(f.eval(orbit.last().unwrap()));
        }
        let mut v = generic_vector(d);
        for k in (0..iters).rev() {
            let jin = f
                .jacobian(&orbit[k])
                .inverse()
                .ok_or(FoliationError::SplittingDegenerate)?;
            v = jin.matvec(&v);
            mat::normalize(&mut v);
        }
        mat::orient(&mut v);
        return Ok(v);
    }
    let fs = maps::finite_time_splitting(f, x, iters)?;
    Ok(fs.directions[bundle].clone())
}

/// Bundle direction together with its one-step invariance residual
/// |normalize(Df(x) e(x)) - e(f x)| up to sign.
pub fn strong_direction_field(
    f: &TorusMap,
    x: &[f64],
    bundle: usize,
    iters: usize,
) -> Result<(Vec<f64>, f64), FoliationError> {
    let e = leaf_direction(f, x, bundle, iters)?;
    let fx = f.eval(x);
    let e_fx = leaf_direction(f, &fx, bundle, iters)?;
    let mut im = f.jacobian(x).matvec(&e);
    mat::normalize(&mut im);
    let dot = mat::dot(&im, &e_fx);
    let s = if dot >= 0.0 { 1.0 } else { -1.0 };
    let res: f64 = im
        .iter()
        .zip(&e_fx)
        .map(|(a, b)| (a - s * b) * (a - s * b))
        .sum::<f64>();
    Ok((e, math::sqrt(res)))
}

/// Leaf piece through a point: lifted polyline with winding kept in the
/// coordinates, signed arclength parameters, generating bundle index.
#[derive(Debug, Clone)]
pub struct LeafSegment {
    pub dim: usize,
    pub bundle: usize,
    /// ordered from parameter -R to +R; the seed sits in the middle
    pub lift_points: Vec<Vec<f64>>,
    pub arclength: Vec<f64>,
}

impl LeafSegment {
    pub fn seed_index(&self) -> usize {
        self.lift_points.len() / 2
    }

    pub fn torus_points(&self) -> Vec<Vec<f64>> {
        self.lift_points.iter().map(|p| maps::reduce_mod_1(p)).collect()
    }

    /// Torus points spaced ~`spacing` in arclength, with |s| <= max_s.
    pub fn resample(&self, spacing: f64, max_s: f64) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let mut next = -max_s;
        for (p, &s) in self.lift_points.iter().zip(&self.arclength) {
            if s >= next && math::abs(s) <= max_s {
                out.push(maps::reduce_mod_1(p));
                next = s + spacing;
            }
        }
        out
    }
}

/// Integrate the bundle direction field through `x` by midpoint steps,
/// radius `r` in both directions.
pub fn integrate_leaf(
    f: &TorusMap,
    x: &[f64],
    bundle: usize,
    r: f64,
    step: f64,
) -> Result<LeafSegment, FoliationError> {
    let iters = 40;
    if !f.is_linear() {
        // one-step invariance of the field at the seed
        let (_, res) = strong_direction_field(f, x, bundle, iters)?;
        if res > 1e-3 {
            return Err(FoliationError::StepRejected);
        }
    }
    let n = (r / step) as usize;
    let dir0 = leaf_direction(f, x, bundle, iters)?;
    let mut halves: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
    for (hi, sign) in [(0usize, -1.0f64), (1usize, 1.0f64)] {
        let mut z = x.to_vec();
        let mut prev: Vec<f64> = dir0.iter().map(|&v| sign * v).collect();
        for _ in 0..n {
            let mut d1 = leaf_direction(f, &maps::reduce_mod_1(&z), bundle, iters)?;
            align(&mut d1, &prev);
            let mid: Vec<f64> = z.iter().zip(&d1).map(|(&a, &b)| a + 0.5 * step * b).collect();
            let mut d2 = leaf_direction(f, &maps::reduce_mod_1(&mid), bundle, iters)?;
            align(&mut d2, &d1);
            if dir_gap(&d1, &d2) > 1e-3 {
                return Err(FoliationError::StepRejected);
            }
            z = z.iter().zip(&d2).map(|(&a, &b)| a + step * b).collect();
            prev = d2;
            halves[hi].push(z.clone());
        }
    }
    let mut lift_points: Vec<Vec<f64>> = halves[0].iter().rev().cloned().collect();
    lift_points.push(x.to_vec());
    lift_points.extend(halves[1].iter().cloned());
    let arclength: Vec<f64> = (0..lift_points.len())
        .map(|i| (i as f64 - n as f64) * step)
        .collect();
    Ok(LeafSegment {
        dim: f.dim(),
        bundle,
        lift_points,
        arclength,
    })
}

fn align(v: &mut [f64], reference: &[f64]) {
    if mat::dot(v, reference) < 0.0 {
        for c in v.iter_mut() {
            *c = -*c;
        }
    }
}

fn dir_gap(a: &[f64], b: &[f64]) -> f64 {
    math::sqrt(a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<f64>())
}

/// Fraction of `grid`^d cell centers within torus distance `eps` of the
/// point set.
pub fn epsilon_density(points: &[Vec<f64>], eps: f64, grid: usize) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let d = points[0].len();
    let cells = grid.pow(d as u32);
    let mut covered = vec![false; cells];
    mark_covered(points, eps, grid, &mut covered);
    covered.iter().filter(|&&c| c).count() as f64 / cells as f64
}

fn mark_covered(points: &[Vec<f64>], eps: f64, grid: usize, covered: &mut [bool]) {
    let d = points[0].len();
    let g = grid as i64;
    let reach = (eps * grid as f64) as i64 + 1;
    let span = (2 * reach + 1) as usize;
    let mut offsets = vec![0i64; d];
    for p in points {
        let base: Vec<i64> = p.iter().map(|&x| (math::floor(math::frac(x) * g as f64) as i64).min(g - 1)).collect();
        for flat in 0..span.pow(d as u32) {
            let mut rem = flat;
            for off in offsets.iter_mut() {
                *off = (rem % span) as i64 - reach;
                rem /= span;
            }
            let mut dist2 = 0.0;
            let mut idx = 0usize;
            for k in 0..d {
                let c = (base[k] + offsets[k]).rem_euclid(g);
                idx = idx * grid + c as usize;
                let center = (c as f64 + 0.5) / g as f64;
                let mut dx = math::abs(math::frac(p[k]) - center);
                if dx > 0.5 {
                    dx = 1.0 - dx;
                }
                dist2 += dx * dx;
            }
            if dist2 <= eps * eps {
                covered[idx] = true;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoverageCurve {
    pub radii: Vec<f64>,
    pub coverage: Vec<f64>,
    pub density_achieved: bool,
}

/// Coverage of the tube of leaves seeded in a ball around `x`, as a
/// nondecreasing function of leaf radius.
pub fn tube_minimality_probe(
    f: &TorusMap,
    x: &[f64],
    ball_radius: f64,
    bundle: usize,
    r_max: f64,
    eps: f64,
    step: f64,
) -> Result<CoverageCurve, FoliationError> {
    let d = f.dim();
    let grid = ((2.0 / eps) as usize).max(8);
    let cells = grid.pow(d as u32);
    let mut covered = vec![false; cells];
    // deterministic seeds in the ball: center plus scaled low-discrepancy
    // offsets
    let mut seeds = vec![x.to_vec()];
    let offs = crate::sample::kronecker_points(d, 8, 0x7ea5);
    for o in &offs {
        let s: Vec<f64> = x
            .iter()
            .zip(o)
            .map(|(&a, &b)| a + ball_radius * (b - 0.5))
            .collect();
        seeds.push(maps::reduce_mod_1(&s));
    }
    let spacing = eps / 4.0;
    let checkpoints = 8usize;
    let radii: Vec<f64> = (1..=checkpoints).map(|k| r_max * k as f64 / checkpoints as f64).collect();
    let leaves: Vec<LeafSegment> = seeds
        .iter()
        .map(|s| integrate_leaf(f, s, bundle, r_max, step))
        .collect::<Result<_, _>>()?;
    let mut coverage = Vec::with_capacity(checkpoints);
    let mut prev_r = 0.0;
    for &rk in &radii {
        for leaf in &leaves {
            let pts: Vec<Vec<f64>> = leaf
                .lift_points
                .iter()
                .zip(&leaf.arclength)
                .filter(|(_, &s)| math::abs(s) <= rk && math::abs(s) > prev_r - spacing)
                .map(|(p, _)| maps::reduce_mod_1(p))
                .collect();
            let sub: Vec<Vec<f64>> = pts.iter().step_by((spacing / step).max(1.0) as usize).cloned().collect();
            if !sub.is_empty() {
                mark_covered(&sub, eps, grid, &mut covered);
            }
        }
        coverage.push(covered.iter().filter(|&&c| c).count() as f64 / cells as f64);
        prev_r = rk;
    }
    let density_achieved = coverage.iter().any(|&c| c >= 1.0 - eps);
    Ok(CoverageCurve {
        radii,
        coverage,
        density_achieved,
    })
}

/// One-step derivative of `f` along the strongest expanding direction.
pub fn weak_unstable_derivative(
    f: &TorusMap,
    x: &[f64],
    iters: usize,
) -> Result<f64, FoliationError> {
    let e = leaf_direction(f, x, f.dim() - 1, iters)?;
    Ok(mat::norm(&f.jacobian(x).matvec(&e)))
}

/// Solve f(p + d') = f(p) + d on the lift for d', by Newton on the
/// cancellation-free difference form of the perturbation: the linear
/// part acts on d' exactly and each trig term is evaluated as a product
/// with sin(pi n.d'), so tiny separations keep full relative accuracy.
fn backward_separation(f: &TorusMap, p: &[f64], d: &[f64]) -> Result<Vec<f64>, FoliationError> {
    let a = f.linear.to_f64();
    let mut cur: Vec<f64> = f
        .jacobian(p)
        .inverse()
        .ok_or(FoliationError::BackwardOrbitUnavailable)?
        .matvec(d);
    for _ in 0..50 {
        let mut res = a.matvec(&cur);
        for (i, q) in f.perturbation.iter().enumerate() {
            res[i] += q.eval_diff(p, &cur);
        }
        for (r, &want) in res.iter_mut().zip(d) {
            *r -= want;
        }
        let err = res.iter().map(|&v| math::abs(v)).fold(0.0, f64::max);
        if err < 1e-15 * mat::norm(&cur).max(1e-12) {
            break;
        }
        let shifted: Vec<f64> = p.iter().zip(&cur).map(|(&x, &e)| x + e).collect();
        let jin = f
            .jacobian(&shifted)
            .inverse()
            .ok_or(FoliationError::BackwardOrbitUnavailable)?;
        let corr = jin.matvec(&res);
        for (c, &cc) in cur.iter_mut().zip(&corr) {
            *c -= cc;
        }
    }
    Ok(cur)
}

const AD_EXTRA: usize = 16;

/// Affine distance-like function along the weak unstable leaf through a
/// reference point: the integral over the leaf arc of the density
/// prod_{n=1}^{depth} D^{wu}(f^-n x) / D^{wu}(f^-n z). Backward orbits of
/// arc points are carried as small separations from the cached reference
/// orbit and re-projected onto the local unstable direction every step,
/// so the stable-direction noise that backward dynamics amplifies never
/// enters, and the factors converge to 1 geometrically.
pub struct AffineDistance<'a> {
    f: &'a TorusMap,
    pub depth: usize,
    /// x, f^-1 x, ..., deep enough to also estimate directions at the end
    orbit: Vec<Vec<f64>>,
    /// unit unstable direction at orbit[n], n = 0..=depth+AD_EXTRA
    u_dir: Vec<Vec<f64>>,
    /// D^{wu}(f^-n x) for n = 1..=depth
    dwu_ref: Vec<f64>,
}

impl<'a> AffineDistance<'a> {
    pub fn new(f: &'a TorusMap, x: &[f64], depth: usize) -> Result<Self, FoliationError> {
        let d = f.dim();
        let reach = depth + 2 * AD_EXTRA;
        let mut orbit = vec![maps::reduce_mod_1(x)];
        for _ in 0..reach {
            let prev = f
                .inverse_point(orbit.last().unwrap())
                .map_err(|_| FoliationError::BackwardOrbitUnavailable)?;
            orbit.push(prev);
        }
        let mut u_dir = Vec::with_capacity(depth + AD_EXTRA + 1);
        for n in 0..=depth + AD_EXTRA {
            if f.is_linear() {
                u_dir.push(leaf_direction(f, &orbit[n], d - 1, 1)?);
                continue;
            }
            let mut v = generic_vector(d);
            for m in (n + 1..=n + AD_EXTRA).rev() {
                v = f.jacobian(&orbit[m]).matvec(&v);
                mat::normalize(&mut v);
            }
            u_dir.push(v);
        }
        let dwu_ref: Vec<f64> = (1..=depth)
            .map(|n| mat::norm(&f.jacobian(&orbit[n]).matvec(&u_dir[n])))
            .collect();
        Ok(AffineDistance {
            f,
            depth,
            orbit,
            u_dir,
            dwu_ref,
        })
    }

    fn density(&self, z: &[f64]) -> Result<f64, FoliationError> {
        if self.f.is_linear() {
            return Ok(1.0);
        }
        let d = self.f.dim();
        // backward orbit of z as projected separations from the reference
        let mut delta: Vec<f64> = self.orbit[0]
            .iter()
            .zip(z)
            .map(|(&a, &b)| nearest_diff(b, a))
            .collect();
        let mut seps: Vec<Vec<f64>> = Vec::with_capacity(self.depth + AD_EXTRA + 1);
        seps.push(delta.clone());
        for n in 1..=self.depth + AD_EXTRA {
            delta = backward_separation(self.f, &self.orbit[n], &delta)?;
            // project onto the local unstable direction to stop stable
            // noise amplification, but only once the separation is small
            // enough that the leaf's curvature offset (O(|delta|^2)) is
            // below working precision; earlier the raw Newton separation
            // tracks the curved leaf exactly
            if mat::norm(&delta) < 1e-6 {
                let along = mat::dot(&delta, &self.u_dir[n]);
                delta = self.u_dir[n].iter().map(|&c| along * c).collect();
            }
            seps.push(delta.clone());
        }
        let z_at = |n: usize| -> Vec<f64> {
            self.orbit[n]
                .iter()
                .zip(&seps[n])
                .map(|(&a, &b)| a + b)
                .collect()
        };
        let mut rho = 1.0;
        for n in 1..=self.depth {
            // direction at the displaced point from forward pushes
            let mut v = generic_vector(d);
            for m in (n + 1..=n + AD_EXTRA).rev() {
                v = self.f.jacobian(&z_at(m)).matvec(&v);
                mat::normalize(&mut v);
            }
            let dz = mat::norm(&self.f.jacobian(&z_at(n)).matvec(&v));
            rho *= self.dwu_ref[n - 1] / dz;
        }
        Ok(rho)
    }

    /// Midpoint quadrature of the density along the leaf arc from the
    /// reference point to `y` (nearest torus image).
    pub fn distance(&self, y: &[f64]) -> Result<f64, FoliationError> {
        let chord: Vec<f64> = self
            .orbit[0]
            .iter()
            .zip(y)
            .map(|(&a, &b)| nearest_diff(b, a))
            .collect();
        let len = mat::norm(&chord);
        if len == 0.0 {
            return Ok(0.0);
        }
        let target: Vec<f64> = self.orbit[0].iter().zip(&chord).map(|(&a, &b)| a + b).collect();
        let h = (len / 60.0).min(1e-3);
        // the direction field converges geometrically in the iteration
        // count; 14 pushes leave an O(1e-9) angle error, well below the
        // quadrature error
        let dir_iters = 14;
        let mut z = self.orbit[0].clone();
        let mut total = 0.0;
        loop {
            let rem_vec: Vec<f64> = target.iter().zip(&z).map(|(&a, &b)| a - b).collect();
            let rem = mat::norm(&rem_vec);
            let mut dir = leaf_direction(self.f, &maps::reduce_mod_1(&z), self.f.dim() - 1, dir_iters)?;
            align(&mut dir, &rem_vec);
            let step = rem.min(h);
            let mid: Vec<f64> = z.iter().zip(&dir).map(|(&a, &b)| a + 0.5 * step * b).collect();
            // midpoint direction keeps the path on the leaf to O(h^2)
            let mut dir2 = leaf_direction(self.f, &maps::reduce_mod_1(&mid), self.f.dim() - 1, dir_iters)?;
            align(&mut dir2, &dir);
            total += step * self.density(&mid)?;
            for (c, &dv) in z.iter_mut().zip(&dir2) {
                *c += step * dv;
            }
            if rem <= h {
                break;
            }
        }
        Ok(total)
    }
}

fn nearest_diff(b: f64, a: f64) -> f64 {
    let mut d = math::frac(b) - math::frac(a);
    if d > 0.5 {
        d -= 1.0;
    }
    if d < -0.5 {
        d += 1.0;
    }
    d
}

#[derive(Debug, Clone)]
pub struct DerivativeConditionReport {
    pub holds: bool,
    pub margin: f64,
    pub value_at_x0: f64,
}

/// Is the weak unstable derivative strictly minimized at the fixed point?
/// Margin is the smallest excess over samples outside a 1e-2 ball.
pub fn derivative_condition_check(
    f: &TorusMap,
    x0: &[f64],
    sample_count: usize,
) -> Result<DerivativeConditionReport, FoliationError> {
    if maps::torus_dist(&f.eval(x0), x0) > 1e-9 {
        return Err(FoliationError::NotFixedPoint);
    }
    let d0 = weak_unstable_derivative(f, x0, 40)?;
    let pts = crate::sample::kronecker_points(f.dim(), sample_count, 0xd00f);
    let mut margin = f64::INFINITY;
    for p in &pts {
        if maps::torus_dist(p, x0) <= 1e-2 {
            continue;
        }
        let v = weak_unstable_derivative(f, p, 40)?;
        margin = margin.min(v - d0);
    }
    Ok(DerivativeConditionReport {
        holds: margin > 1e-9,
        margin,
        value_at_x0: d0,
    })
}

/// Predicate M m0^{q-1} / m1^q > 1 with its margin.
pub fn jacobian_ratio_certificate(
    m0: f64,
    m1: f64,
    big_m: f64,
    q: u32,
) -> Result<(bool, f64), FoliationError> {
    if !(m0 <= m1 && m1 < big_m) {
        return Err(FoliationError::OrderingViolated);
    }
    let ratio = big_m * math::powi(m0, (q - 1) as i64) / math::powi(m1, q as i64);
    Ok((ratio > 1.0, ratio - 1.0))
}

/// Histogram measure on a per-axis grid over the torus.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    pub dim: usize,
    pub grid: usize,
    pub weights: Vec<f64>,
    pub samples: usize,
}

impl EmpiricalMeasure {
    pub fn zeros(dim: usize, grid: usize) -> Self {
        EmpiricalMeasure {
            dim,
            grid,
            weights: vec![0.0; grid.pow(dim as u32)],
            samples: 0,
        }
    }

    pub fn cell_index(&self, p: &[f64]) -> usize {
        let mut idx = 0usize;
        for &x in p {
            let c = ((math::frac(x) * self.grid as f64) as usize).min(self.grid - 1);
            idx = idx * self.grid + c;
        }
        idx
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn l1_distance(&self, other: &EmpiricalMeasure) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(&a, &b)| math::abs(a - b))
            .sum()
    }

    /// max_cells |w - 1/cells| / (1/cells)
    pub fn max_relative_deviation_from_uniform(&self) -> f64 {
        let uniform = 1.0 / self.weights.len() as f64;
        self.weights
            .iter()
            .map(|&w| math::abs(w - uniform) / uniform)
            .fold(0.0, f64::max)
    }
}

/// Push an expanding-plaque measure forward and Cesaro-average the
/// iterates: weights on the plaque follow the backward derivative-product
/// density, pushforwards are pointwise, histograms accumulate per cell.
#[allow(clippy::too_many_arguments)]
pub fn ugibbs_measure(
    f: &TorusMap,
    x0: &[f64],
    plaque_len: f64,
    n_iter: usize,
    skip: usize,
    grid: usize,
    samples: usize,
    depth: usize,
) -> Result<EmpiricalMeasure, FoliationError> {
    let d = f.dim();
    let u = leaf_direction(f, x0, d - 1, 40)?;
    // plaque sample points with their density weights
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(samples);
    let mut w: Vec<f64> = Vec::with_capacity(samples);
    if f.is_linear() {
        for k in 0..samples {
            let s = ((k as f64 + 0.5) / samples as f64 - 0.5) * plaque_len;
            let p: Vec<f64> = x0.iter().zip(&u).map(|(&a, &b)| math::frac(a + s * b)).collect();
            pts.push(p);
            w.push(1.0);
        }
    } else {
        let leaf = integrate_leaf(f, x0, d - 1, plaque_len / 2.0, 1e-3)?;
        let nodes = leaf.torus_points();
        let d0 = weak_unstable_derivative(f, x0, 40)?;
        let stride = (nodes.len() / samples).max(1);
        for p in nodes.iter().step_by(stride) {
            let mut rho = weak_unstable_derivative(f, p, 40)? / d0;
            let mut z = p.clone();
            for _ in 0..depth {
                z = f
                    .inverse_point(&z)
                    .map_err(|_| FoliationError::BackwardOrbitUnavailable)?;
                rho *= weak_unstable_derivative(f, &z, 40)? / d0;
            }
            pts.push(p.clone());
            w.push(rho);
        }
    }
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
    let mut hist = EmpiricalMeasure::zeros(d, grid);
    hist.samples = pts.len();
    for (p, &wk) in pts.iter_mut().zip(&w) {
        let mut z = core::mem::take(p);
        for _ in 0..skip {
            z = f.eval(&z);
        }
        for _ in 0..n_iter {
            let idx = hist.cell_index(&z);
            hist.weights[idx] += wk;
            z = f.eval(&z);
        }
    }
    // exact normalization: accumulated rounding over n_iter * samples
    // additions would otherwise drift the total mass
    let mass: f64 = hist.weights.iter().sum();
    for w in hist.weights.iter_mut() {
        *w /= mass;
    }
    Ok(hist)
}

/// Holder exponent of the strong holonomy from measured cocycle rates:
/// log(lower m-th rate) / log(upper m-th rate).
pub fn holonomy_exponent(rates: &maps::CocycleRates, m: usize) -> f64 {
    math::ln(rates.beta_lo[m]) / math::ln(rates.beta_hi[m])
}

/// Strong-foliation modulus for a 2+2 skew model with fiber rate below
/// base rate: height, along the weak unstable model direction, of the
/// conjugated strong unstable leaf over the model strong line through x,
/// at signed parameter t.
pub struct ModulusProbe {
    skew: SkewProductMap,
    full: TorusMap,
    conj: cohomology::SkewConjugacy,
    frame_inv: Mat,
    wu_index: usize,
    su_index: usize,
}

impl ModulusProbe {
    pub fn new(skew: &SkewProductMap) -> Result<Self, FoliationError> {
        let m = skew.fiber_dim();
        let sa = crate::lattice::spectral_splitting(&skew.fiber_matrix).map_err(MapError::from)?;
        let sb = crate::lattice::spectral_splitting(&skew.base.linear).map_err(MapError::from)?;
        let va = maps::eigen_matrix(&sa);
        let vb = maps::eigen_matrix(&sb);
        let d = skew.dim();
        let mut frame = Mat::zeros(d, d);
        for i in 0..m {
            for j in 0..m {
                frame[(i, j)] = va[(i, j)];
            }
        }
        for i in 0..d - m {
            for j in 0..d - m {
                frame[(m + i, m + j)] = vb[(i, j)];
            }
        }
        let conj = cohomology::skew_linearizing_conjugacy(skew, 1e-10)?;
        Ok(ModulusProbe {
            skew: skew.clone(),
            full: skew.as_torus_map(),
            conj,
            frame_inv: frame.inverse().ok_or(FoliationError::SplittingDegenerate)?,
            wu_index: m - 1,
            su_index: d - 1,
        })
    }

    /// Phi(x, t): x in model coordinates, t the signed strong-line
    /// parameter.
    pub fn modulus(&self, x: &[f64], t: f64) -> Result<f64, FoliationError> {
        let reach = math::abs(t) * 1.3 + 0.02;
        let (ts, heights) = self.graph(x, reach)?;
        interpolate(&ts, &heights, t)
    }

    /// Sampled graph (t, Phi(x, t)) out to +- reach.
    pub fn graph(&self, x: &[f64], reach: f64) -> Result<(Vec<f64>, Vec<f64>), FoliationError> {
        let z0 = self.conj.apply_inverse_lift(x);
        let leaf = integrate_leaf(&self.full, &z0, self.skew.dim() - 1, reach, 1e-3)?;
        let mut ts = Vec::with_capacity(leaf.lift_points.len());
        let mut hs = Vec::with_capacity(leaf.lift_points.len());
        for p in &leaf.lift_points {
            let w = self.conj.apply_lift(p);
            let delta: Vec<f64> = w.iter().zip(x).map(|(&a, &b)| a - b).collect();
            let coords = self.frame_inv.matvec(&delta);
            ts.push(coords[self.su_index]);
            hs.push(coords[self.wu_index]);
        }
        Ok((ts, hs))
    }
}

fn interpolate(ts: &[f64], hs: &[f64], t: f64) -> Result<f64, FoliationError> {
    // ts is monotone up to orientation; scan for a bracketing pair
    for k in 0..ts.len().saturating_sub(1) {
        let (a, b) = (ts[k], ts[k + 1]);
        if (t - a) * (t - b) <= 0.0 {
            let w = if math::abs(b - a) < 1e-15 { 0.0 } else { (t - a) / (b - a) };
            return Ok(hs[k] + w * (hs[k + 1] - hs[k]));
        }
    }
    Err(FoliationError::LeafTooShort)
}

/// Do two skew models share their strong-foliation modulus on the sampled
/// points and parameters, within tol?
pub fn moduli_match(
    f: &SkewProductMap,
    g: &SkewProductMap,
    xs: &[Vec<f64>],
    ts: &[f64],
    tol: f64,
) -> Result<bool, FoliationError> {
    let pf = ModulusProbe::new(f)?;
    let pg = ModulusProbe::new(g)?;
    for x in xs {
        for &t in ts {
            if math::abs(pf.modulus(x, t)? - pg.modulus(x, t)?) > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::UnimodularMatrix;
    use crate::maps::TrigPolynomial;

    fn cat() -> UnimodularMatrix {
        UnimodularMatrix::new(&[vec![2, 1], vec![1, 1]]).unwrap()
    }

    fn b3() -> UnimodularMatrix {
        UnimodularMatrix::new(&[vec![3, 1], vec![2, 1]]).unwrap()
    }

    fn companion3() -> UnimodularMatrix {
        // char poly x^3 - 3x^2 + 1: one expanding direction, irrational
        UnimodularMatrix::new(&[vec![0, 0, -1], vec![1, 0, 0], vec![0, 1, 3]]).unwrap()
    }

    fn perturbed_cat(eps: f64) -> TorusMap {
        let p = vec![
            TrigPolynomial::sin_wave(2, &[1, 0], eps),
            TrigPolynomial::sin_wave(2, &[0, 1], -eps),
        ];
        TorusMap::new(cat(), p).unwrap()
    }

    #[test]
    fn linear_direction_is_eigendirection() {
        let f = TorusMap::linear_map(cat());
        let (e, res) = strong_direction_field(&f, &[0.3, 0.7], 1, 20).unwrap();
        let split = f.spectral_splitting().unwrap();
        let u = split.real_vector(1).unwrap();
        assert!(dir_gap(&e, &u) < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn perturbed_direction_residual_small() {
        let f = perturbed_cat(0.02);
        let (_, res) = strong_direction_field(&f, &[0.21, 0.43], 1, 40).unwrap();
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn perturbed_direction_close_to_model() {
        let f = perturbed_cat(0.02);
        let model = TorusMap::linear_map(cat());
        let (e, _) = strong_direction_field(&f, &[0.6, 0.1], 1, 40).unwrap();
        let (u, _) = strong_direction_field(&model, &[0.6, 0.1], 1, 40).unwrap();
        // well inside the half-angle cone around the model direction
        assert!(mat::dot(&e, &u) > 0.9);
    }

    #[test]
    fn linear_leaf_is_straight() {
        let f = TorusMap::linear_map(companion3());
        let leaf = integrate_leaf(&f, &[0.2, 0.5, 0.8], 2, 0.5, 1e-3).unwrap();
        let a = &leaf.lift_points[0];
        let b = leaf.lift_points.last().unwrap();
        let mut dir: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| y - x).collect();
        mat::normalize(&mut dir);
        let field = leaf_direction(&f, &[0.2, 0.5, 0.8], 2, 1).unwrap();
        // collinear with the field at every node to the stated alignment
        for k in 1..leaf.lift_points.len() {
            let mut seg: Vec<f64> = leaf.lift_points[k]
                .iter()
                .zip(&leaf.lift_points[k - 1])
                .map(|(&x, &y)| x - y)
                .collect();
            mat::normalize(&mut seg);
            align(&mut seg, &field);
            assert!(dir_gap(&seg, &field) < 1e-4);
        }
        assert!(math::abs(mat::dot(&dir, &field)) > 1.0 - 1e-9);
    }

    #[test]
    fn leaf_forward_invariance() {
        let f = perturbed_cat(0.01);
        let x = [0.37, 0.18];
        let leaf = integrate_leaf(&f, &x, 1, 0.2, 1e-3).unwrap();
        let fx = f.eval(&x);
        let bigger = integrate_leaf(&f, &fx, 1, 0.8, 1e-3).unwrap();
        let big_pts = bigger.torus_points();
        for p in leaf.torus_points().iter().step_by(25) {
            let q = f.eval(p);
            // distance to the polyline, not just its nodes
            let mut best = f64::INFINITY;
            for w in big_pts.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let seg: Vec<f64> = b.iter().zip(a).map(|(&x, &y)| x - y).collect();
                let to_q: Vec<f64> = q
                    .iter()
                    .zip(a)
                    .map(|(&x, &y)| {
                        let mut d = x - y;
                        if d > 0.5 {
                            d -= 1.0;
                        }
                        if d < -0.5 {
                            d += 1.0;
                        }
                        d
                    })
                    .collect();
                let t = (mat::dot(&to_q, &seg) / mat::dot(&seg, &seg)).clamp(0.0, 1.0);
                let dist2: f64 = to_q
                    .iter()
                    .zip(&seg)
                    .map(|(&x, &s)| (x - t * s) * (x - t * s))
                    .sum();
                best = best.min(math::sqrt(dist2));
            }
            assert!(best < 1e-4, "{best}");
        }
    }

    #[test]
    fn full_grid_density_one() {
        let mut pts = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                pts.push(vec![(i as f64 + 0.5) / 8.0, (j as f64 + 0.5) / 8.0]);
            }
        }
        assert!((epsilon_density(&pts, 0.2, 8) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rational_line_plateaus() {
        let pts: Vec<Vec<f64>> = (0..512)
            .map(|k| vec![k as f64 / 512.0, 0.25, 0.25])
            .collect();
        let c = epsilon_density(&pts, 1.0 / 16.0, 16);
        assert!(c < 0.5, "{c}");
        // more of the same line adds nothing
        let double: Vec<Vec<f64>> = (0..1024).map(|k| vec![k as f64 / 1024.0, 0.25, 0.25]).collect();
        assert!((epsilon_density(&double, 1.0 / 16.0, 16) - c).abs() < 1e-12);
    }

    #[test]
    fn irrational_line_covers() {
        let f = TorusMap::linear_map(companion3());
        let leaf = integrate_leaf(&f, &[0.1, 0.2, 0.3], 2, 60.0, 1e-3).unwrap();
        let pts = leaf.resample(1.0 / 64.0, 60.0);
        let c = epsilon_density(&pts, 1.0 / 8.0, 8);
        assert!(c > 0.97, "{c}");
    }

    #[test]
    fn tube_curve_monotone_and_dense() {
        let f = TorusMap::linear_map(companion3());
        let curve =
            tube_minimality_probe(&f, &[0.4, 0.9, 0.1], 0.05, 2, 60.0, 1.0 / 8.0, 1e-3).unwrap();
        for k in 1..curve.coverage.len() {
            assert!(curve.coverage[k] >= curve.coverage[k - 1] - 1e-12);
        }
        assert!(curve.density_achieved);
        // tube covers at least what its central leaf covers (same grid)
        let leaf = integrate_leaf(&f, &[0.4, 0.9, 0.1], 2, 60.0, 1e-3).unwrap();
        let single = epsilon_density(&leaf.resample(1.0 / 32.0, 60.0), 1.0 / 8.0, 16);
        assert!(*curve.coverage.last().unwrap() + 1e-12 >= single);
        assert!(*curve.coverage.last().unwrap() >= 1.0 - 1.0 / 8.0);
    }

    #[test]
    fn linear_affine_distance_is_arclength() {
        let f = TorusMap::linear_map(cat());
        let split = f.spectral_splitting().unwrap();
        let u = split.real_vector(1).unwrap();
        let x = [0.3, 0.4];
        let ad = AffineDistance::new(&f, &x, 25).unwrap();
        for &d in &[1e-3, 7e-3, 0.05] {
            let y: Vec<f64> = x.iter().zip(&u).map(|(&a, &b)| a + d * b).collect();
            let got = ad.distance(&y).unwrap();
            assert!(math::abs(got - d) < 1e-12 * (1.0 + d), "{got} vs {d}");
        }
    }

    #[test]
    fn affine_distance_one_step_identity() {
        let f = perturbed_cat(0.02);
        let x = [0.13, 0.58];
        // y must lie on the leaf through x, not on the tangent chord
        let seg = integrate_leaf(&f, &x, 1, 3e-3, 5e-5).unwrap();
        let y = maps::reduce_mod_1(seg.lift_points.last().unwrap());
        let depth = 25;
        let ad_x = AffineDistance::new(&f, &x, depth - 1).unwrap();
        let fx = f.eval(&x);
        let fy = f.eval(&y);
        let ad_fx = AffineDistance::new(&f, &fx, depth).unwrap();
        let lhs = ad_fx.distance(&fy).unwrap();
        let rhs = weak_unstable_derivative(&f, &x, 40).unwrap() * ad_x.distance(&y).unwrap();
        assert!(math::abs(lhs - rhs) < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn affine_distance_ratio_tends_to_one() {
        let f = perturbed_cat(0.02);
        let x = [0.71, 0.29];
        let dir = leaf_direction(&f, &x, 1, 40).unwrap();
        let ad = AffineDistance::new(&f, &x, 25).unwrap();
        let mut prev_gap = f64::INFINITY;
        for j in [4, 6, 8, 10] {
            let d = math::powf(0.5, j as f64);
            let y: Vec<f64> = x.iter().zip(&dir).map(|(&a, &b)| a + d * b).collect();
            let ratio = ad.distance(&y).unwrap() / d;
            let gap = math::abs(ratio - 1.0);
            assert!(gap < prev_gap + 1e-12);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-3, "{prev_gap}");
    }

    fn bump_shear(c: f64) -> TorusMap {
        // shift along u whose derivative along u is -c (cos + cos)/2,
        // strictly minimized at the origin, which stays fixed
        let split = crate::lattice::spectral_splitting(&cat()).unwrap();
        let u = split.real_vector(1).unwrap();
        let s1 = -c / (maps::TAU * u[0]) / 2.0;
        let s2 = -c / (maps::TAU * u[1]) / 2.0;
        let g = TrigPolynomial::sin_wave(2, &[1, 0], s1).add(&TrigPolynomial::sin_wave(2, &[0, 1], s2));
        let p = vec![g.scale(u[0]), g.scale(u[1])];
        TorusMap::new(cat(), p).unwrap()
    }

    #[test]
    fn derivative_condition_flat_map_fails() {
        let f = TorusMap::linear_map(cat());
        let rep = derivative_condition_check(&f, &[0.0, 0.0], 100).unwrap();
        assert!(!rep.holds);
        assert!(math::abs(rep.margin) < 1e-9);
    }

    #[test]
    fn derivative_condition_bump_holds_with_monotone_margin() {
        let big = derivative_condition_check(&bump_shear(0.10), &[0.0, 0.0], 150).unwrap();
        let small = derivative_condition_check(&bump_shear(0.05), &[0.0, 0.0], 150).unwrap();
        assert!(big.holds, "margin {}", big.margin);
        assert!(small.holds, "margin {}", small.margin);
        assert!(big.margin > small.margin);
    }

    #[test]
    fn derivative_condition_requires_fixed_point() {
        let f = TorusMap::linear_map(cat());
        assert_eq!(
            derivative_condition_check(&f, &[0.3, 0.3], 10).unwrap_err(),
            FoliationError::NotFixedPoint
        );
    }

    #[test]
    fn jacobian_ratio_examples() {
        let (ok, margin) = jacobian_ratio_certificate(1.30, 1.32, 1.50, 5).unwrap();
        assert!(ok);
        assert!(math::abs(margin - (1.50 * math::powi(1.30, 4) / math::powi(1.32, 5) - 1.0)) < 1e-15);
        let (ok2, _) = jacobian_ratio_certificate(1.30, 1.40, 1.50, 5).unwrap();
        assert!(!ok2);
        // m0 = m1 reduces to M/m1
        let (ok3, m3) = jacobian_ratio_certificate(1.2, 1.2, 1.5, 7).unwrap();
        assert!(ok3);
        assert!(math::abs(m3 - (1.5 / 1.2 - 1.0)) < 1e-12);
        assert_eq!(
            jacobian_ratio_certificate(1.4, 1.3, 1.5, 5).unwrap_err(),
            FoliationError::OrderingViolated
        );
    }

    #[test]
    fn ugibbs_linear_uniform() {
        let f = TorusMap::linear_map(cat());
        let mu = ugibbs_measure(&f, &[0.0, 0.0], 1000.0, 10, 0, 16, 200_000, 30).unwrap();
        assert!(math::abs(mu.mass() - 1.0) < 1e-12);
        assert!(mu.weights.iter().all(|&w| w >= 0.0));
        let dev = mu.max_relative_deviation_from_uniform();
        assert!(dev < 0.10, "{dev}");
    }

    #[test]
    fn ugibbs_invariance_improves_with_n() {
        let f = TorusMap::linear_map(cat());
        let d_small = {
            let a = ugibbs_measure(&f, &[0.0, 0.0], 40.0, 4, 0, 8, 20_000, 30).unwrap();
            let b = ugibbs_measure(&f, &[0.0, 0.0], 40.0, 4, 1, 8, 20_000, 30).unwrap();
            a.l1_distance(&b)
        };
        let d_large = {
            let a = ugibbs_measure(&f, &[0.0, 0.0], 40.0, 16, 0, 8, 20_000, 30).unwrap();
            let b = ugibbs_measure(&f, &[0.0, 0.0], 40.0, 16, 1, 8, 20_000, 30).unwrap();
            a.l1_distance(&b)
        };
        assert!(d_large < d_small, "{d_large} vs {d_small}");
    }

    #[test]
    fn holonomy_exponent_values() {
        let rates = maps::CocycleRates {
            alphas: vec![0.4],
            beta_lo: vec![2.6],
            beta_hi: vec![2.8],
            constant: 1.0,
            samples: 1,
        };
        let rho = holonomy_exponent(&rates, 0);
        assert!(math::abs(rho - math::ln(2.6) / math::ln(2.8)) < 1e-15);
        assert!(math::abs(rho - 0.9281) < 1e-3);
        let flat = maps::CocycleRates {
            alphas: vec![0.4],
            beta_lo: vec![2.8],
            beta_hi: vec![2.8],
            constant: 1.0,
            samples: 1,
        };
        assert!(math::abs(holonomy_exponent(&flat, 0) - 1.0) < 1e-15);
    }

    fn model_skew(eps: f64) -> SkewProductMap {
        let phi = TrigPolynomial::sin_wave(2, &[1, 0], eps);
        maps::make_dllave_pair(&cat(), &b3(), &phi).unwrap().1
    }

    #[test]
    fn modulus_zero_for_linear_model() {
        let probe = ModulusProbe::new(&model_skew(0.0)).unwrap();
        for &t in &[-0.2, -0.05, 0.0, 0.1, 0.2] {
            let v = probe.modulus(&[0.3, 0.1, 0.6, 0.8], t).unwrap();
            assert!(math::abs(v) < 1e-6, "t={t} v={v}");
        }
    }

    #[test]
    fn modulus_vanishes_at_zero_parameter() {
        let probe = ModulusProbe::new(&model_skew(0.01)).unwrap();
        for x in [[0.2, 0.7, 0.1, 0.4], [0.9, 0.3, 0.5, 0.6]] {
            let v = probe.modulus(&x, 0.0).unwrap();
            assert!(math::abs(v) < 1e-9, "{v}");
        }
    }

    #[test]
    fn modulus_detects_nonlinear_strong_leaves() {
        let probe = ModulusProbe::new(&model_skew(0.01)).unwrap();
        let mut biggest = 0.0f64;
        for &t in &[-0.25, -0.1, 0.1, 0.25] {
            biggest = biggest.max(math::abs(probe.modulus(&[0.3, 0.1, 0.6, 0.8], t).unwrap()));
        }
        assert!(biggest > 1e-6, "{biggest}");
    }

    #[test]
    fn moduli_match_reflexive() {
        let f = model_skew(0.01);
        let xs = vec![vec![0.3, 0.1, 0.6, 0.8]];
        let ts = vec![-0.1, 0.05, 0.15];
        assert!(moduli_match(&f, &f, &xs, &ts, 1e-4).unwrap());
    }

    #[test]
    fn leaf_too_short_reported() {
        let probe = ModulusProbe::new(&model_skew(0.0)).unwrap();
        let (ts, hs) = probe.graph(&[0.1, 0.1, 0.1, 0.1], 0.05).unwrap();
        assert_eq!(interpolate(&ts, &hs, 1.0).unwrap_err(), FoliationError::LeafTooShort);
    }

}
