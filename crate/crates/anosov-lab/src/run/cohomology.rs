//! Cohomological-equation subcommands: coboundary, condition,
//! counterexample (dllave | reducible | complex), regularity, pd-check.

use serde_json::{json, Value};

use anosov_core::cohomology::{
    self, ConjugacyFunction, OrbitConditionReport, VectorOrbitConditionReport,
};
use anosov_core::lattice::{self, char_poly, UnimodularMatrix};
use anosov_core::maps::{self, SkewProductMap, TorusMap, TrigPolynomial};
use anosov_core::periodic;
use anosov_core::regularity::{
    self, directional_increments, holder_exponent, second_differences, Classification,
    IncrementTable, RegularityReport,
};
use anosov_core::sample;

use crate::config::{
    self, CoboundaryConfig, ComplexConfig, ConditionConfig, DllaveConfig, PdCheckConfig,
    ReducibleConfig, RegularityConfig,
};
use crate::emit::{sig12, write_json, CsvWriter};
use crate::error::{invalid, numeric, LabError};
use crate::par::par_map;

use super::{complex_str, plane_frame, weakest_unstable_real, Ctx};

fn solve_pair(
    a: &UnimodularMatrix,
    b: &UnimodularMatrix,
    phi: &TrigPolynomial,
    tol: f64,
) -> Result<(f64, f64, ConjugacyFunction), LabError> {
    let lambda = weakest_unstable_real(a)?;
    let mu = weakest_unstable_real(b)?;
    let base = TorusMap::linear_map(b.clone());
    let psi = cohomology::solve_fiber_coboundary(phi, &base, lambda, tol).map_err(numeric)?;
    Ok((lambda, mu, psi))
}

/// Sup of the functional-equation residual over deterministic samples.
fn residual_sup(
    psi: &ConjugacyFunction,
    phi: &TrigPolynomial,
    b: &UnimodularMatrix,
    lambda: f64,
    samples: usize,
    seed: u64,
    threads: usize,
) -> f64 {
    let pts = sample::kronecker_points(b.dim(), samples, seed);
    let bf = b.to_f64();
    let res = par_map(&pts, threads, |y| {
        let by = maps::reduce_mod_1(&bf.matvec(y));
        (phi.eval(y) + psi.eval(&by) - lambda * psi.eval(y)).abs()
    });
    res.into_iter().fold(0.0, f64::max)
}

pub fn coboundary(ctx: &Ctx, cfg: CoboundaryConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("tol", cfg.tol)?;
    let a = config::to_matrix(&cfg.a)?;
    let b = config::to_matrix(&cfg.b)?;
    let phi = config::to_poly(b.dim(), &cfg.phi)?;
    let (lambda, _, psi) = solve_pair(&a, &b, &phi, cfg.tol)?;
    let residual = residual_sup(&psi, &phi, &b, lambda, cfg.samples, ctx.seed, ctx.threads);
    let mut csv = CsvWriter::create(&ctx.out, "psi.csv", &["point", "psi"])?;
    for y in sample::kronecker_points(b.dim(), cfg.samples.min(512), ctx.seed) {
        let coords = y.iter().map(|&c| sig12(c)).collect::<Vec<_>>().join(";");
        csv.row(&[coords, sig12(psi.eval(&y))]);
    }
    csv.finish()?;
    let report = json!({
        "lambda": lambda,
        "series_depth": psi.depth,
        "tail_bound": psi.tail_bound,
        "samples": cfg.samples,
        "residual_sup": residual,
    });
    write_json(&ctx.out, "coboundary.json", &report)?;
    Ok(report)
}

pub fn coboundary_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    let cfg = CoboundaryConfig {
        schema: 1,
        a: vec![vec![2, 1], vec![1, 1]],
        b: vec![vec![3, 1], vec![2, 1]],
        phi: vec![config::TermDef { freq: vec![1, 0], re: 0.0, im: -0.005 }],
        tol: 1e-9,
        samples: 500,
    };
    let report = coboundary(ctx, cfg)?;
    if report["residual_sup"].as_f64().unwrap() > 2e-9 {
        return Err(LabError::Numeric("coboundary selftest residual too large".into()));
    }
    Ok(json!({ "selftest": "coboundary", "ok": true }))
}

fn orbit_report_json(report: &OrbitConditionReport) -> Value {
    let orbits: Vec<Value> = report
        .orbits
        .iter()
        .map(|o| {
            json!({
                "representative": o.representative,
                "members": o.members.len(),
                "sum_re": o.orbit_sum.re,
                "sum_im": o.orbit_sum.im,
                "sum_abs": o.orbit_sum.norm(),
            })
        })
        .collect();
    json!({
        "holds": report.holds,
        "witness": report.witness,
        "weight_ratio": report.weight_ratio,
        "orbits": orbits,
    })
}

fn orbit_report_csv(ctx: &Ctx, report: &OrbitConditionReport) -> Result<(), LabError> {
    let mut csv = CsvWriter::create(
        &ctx.out,
        "condition.csv",
        &["orbit_id", "representative", "members", "sum_re", "sum_im", "sum_abs"],
    )?;
    for (i, o) in report.orbits.iter().enumerate() {
        let rep = o
            .representative
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(";");
        csv.row(&[
            i.to_string(),
            rep,
            o.members.len().to_string(),
            sig12(o.orbit_sum.re),
            sig12(o.orbit_sum.im),
            sig12(o.orbit_sum.norm()),
        ]);
    }
    csv.finish()?;
    Ok(())
}

pub fn condition(ctx: &Ctx, cfg: ConditionConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    let a = config::to_matrix(&cfg.a)?;
    let b = config::to_matrix(&cfg.b)?;
    let phi = config::to_poly(b.dim(), &cfg.phi)?;
    let lambda = weakest_unstable_real(&a)?;
    let mu = weakest_unstable_real(&b)?;
    let report = match &cfg.xi {
        None => cohomology::orbit_condition(&phi, &b, lambda, mu).map_err(numeric)?,
        Some(xi_def) => {
            let xi = config::to_poly(b.dim(), xi_def)?;
            cohomology::equal_pd_condition(&xi, &phi, &b, lambda).map_err(numeric)?
        }
    };
    orbit_report_csv(ctx, &report)?;
    let out = orbit_report_json(&report);
    write_json(&ctx.out, "condition.json", &out)?;
    Ok(out)
}

pub fn condition_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    // a single sine term never cancels along its frequency orbit
    let cfg = ConditionConfig {
        schema: 1,
        a: vec![vec![2, 1], vec![1, 1]],
        b: vec![vec![3, 1], vec![2, 1]],
        phi: vec![config::TermDef { freq: vec![1, 0], re: 0.0, im: -0.5 }],
        xi: None,
    };
    let report = condition(ctx, cfg)?;
    if report["holds"].as_bool().unwrap() || report["witness"].is_null() {
        return Err(LabError::Numeric("condition selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "condition", "ok": true }))
}

fn classification_str(c: &Classification) -> &'static str {
    match c {
        Classification::LipschitzOrBetter => "lipschitz_or_better",
        Classification::Holder(_) => "holder",
        Classification::Inconclusive => "inconclusive",
    }
}

fn regularity_json(r: &RegularityReport) -> Value {
    json!({
        "direction": r.direction,
        "exponent": r.exponent,
        "fit_r2": r.fit_r2,
        "classification": classification_str(&r.classification),
    })
}

fn increments_csv(ctx: &Ctx, name: &str, r: &RegularityReport) -> Result<(), LabError> {
    let mut csv = CsvWriter::create(&ctx.out, name, &["scale", "median_increment"])?;
    for (&s, &m) in r.scales.iter().zip(&r.medians) {
        csv.row(&[sig12(s), sig12(m)]);
    }
    csv.finish()?;
    Ok(())
}

/// Parallel first-difference table: chunk the base points, merge the
/// per-scale increments in chunk order.
fn increments_parallel<F>(
    f: &F,
    basepoints: &[Vec<f64>],
    direction: &[f64],
    scales: &[f64],
    threads: usize,
    second: bool,
) -> IncrementTable
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let chunk = basepoints.len().div_ceil(threads.max(1));
    let chunks: Vec<&[Vec<f64>]> = basepoints.chunks(chunk).collect();
    let tables = par_map(&chunks, threads, |c| {
        if second {
            second_differences(f, c, direction, scales)
        } else {
            directional_increments(f, c, direction, scales)
        }
    });
    let mut increments: Vec<Vec<f64>> = vec![Vec::new(); scales.len()];
    for t in &tables {
        for (row, src) in increments.iter_mut().zip(&t.increments) {
            row.extend_from_slice(src);
        }
    }
    IncrementTable {
        direction: direction.to_vec(),
        scales: scales.to_vec(),
        increments,
    }
}

pub fn regularity_run(ctx: &Ctx, cfg: RegularityConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("tol", cfg.tol)?;
    if cfg.j_min + 5 > cfg.j_max {
        return Err(invalid("need at least six dyadic scales (j_max >= j_min + 5)"));
    }
    if cfg.base_points < 32 {
        return Err(invalid("base_points must be at least 32"));
    }
    let a = config::to_matrix(&cfg.a)?;
    let b = config::to_matrix(&cfg.b)?;
    let phi = config::to_poly(b.dim(), &cfg.phi)?;
    let (_, _, psi) = solve_pair(&a, &b, &phi, cfg.tol)?;
    let (stable, unstable) = plane_frame(&b)?;
    let dir = match cfg.direction.as_str() {
        "unstable" => unstable,
        "stable" => stable,
        other => return Err(invalid(format!("direction must be unstable|stable, got {other}"))),
    };
    let scales = regularity::dyadic_scales(cfg.j_min, cfg.j_max);
    let pts = sample::kronecker_points(b.dim(), cfg.base_points, ctx.seed);
    let eval = |y: &[f64]| psi.eval(y);
    let table = increments_parallel(&eval, &pts, &dir, &scales, ctx.threads, cfg.order == 2);
    let report = holder_exponent(&table).map_err(numeric)?;
    increments_csv(ctx, "increments.csv", &report)?;
    let out = regularity_json(&report);
    write_json(&ctx.out, "regularity.json", &out)?;
    Ok(out)
}

pub fn regularity_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    // smooth data must come out Lipschitz-or-better
    let scales = regularity::dyadic_scales(4, 10);
    let pts = sample::kronecker_points(2, 32, 7);
    let f = |y: &[f64]| (maps::TAU * y[0]).sin();
    let table = increments_parallel(&f, &pts, &[1.0, 0.0], &scales, ctx.threads, false);
    let report = holder_exponent(&table).map_err(numeric)?;
    if report.classification != Classification::LipschitzOrBetter {
        return Err(LabError::Numeric("regularity selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "regularity", "ok": true }))
}

pub fn counterexample_dllave(ctx: &Ctx, cfg: DllaveConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("tol", cfg.tol)?;
    let a = config::to_matrix(&cfg.a)?;
    let b = config::to_matrix(&cfg.b)?;
    let phi = config::to_poly(b.dim(), &cfg.phi)?;
    maps::make_dllave_pair(&a, &b, &phi).map_err(numeric)?;
    let (lambda, mu, psi) = solve_pair(&a, &b, &phi, cfg.tol)?;
    let residual = residual_sup(&psi, &phi, &b, lambda, cfg.samples, ctx.seed, ctx.threads);
    let orbit = cohomology::orbit_condition(&phi, &b, lambda, mu).map_err(numeric)?;
    orbit_report_csv(ctx, &orbit)?;
    let (stable, unstable) = plane_frame(&b)?;
    let scales = regularity::dyadic_scales(regularity::DEFAULT_J_MIN, regularity::DEFAULT_J_MAX);
    let pts = sample::kronecker_points(b.dim(), 64, ctx.seed);
    let eval = |y: &[f64]| psi.eval(y);
    let tab_u = increments_parallel(&eval, &pts, &unstable, &scales, ctx.threads, false);
    let tab_s = increments_parallel(&eval, &pts, &stable, &scales, ctx.threads, false);
    let rep_u = holder_exponent(&tab_u).map_err(numeric)?;
    let rep_s = holder_exponent(&tab_s).map_err(numeric)?;
    increments_csv(ctx, "increments_unstable.csv", &rep_u)?;
    increments_csv(ctx, "increments_stable.csv", &rep_s)?;
    let report = json!({
        "lambda": lambda,
        "mu": mu,
        "predicted_exponent": lambda.ln() / mu.ln(),
        "residual_sup": residual,
        "orbit_condition": orbit_report_json(&orbit),
        "exponent_unstable": regularity_json(&rep_u),
        "exponent_stable": regularity_json(&rep_s),
    });
    write_json(&ctx.out, "counterexample.json", &report)?;
    Ok(report)
}

pub fn counterexample_reducible(ctx: &Ctx, cfg: ReducibleConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("eps", cfg.eps)?;
    let m = config::to_matrix(&cfg.matrix)?;
    let rc = maps::make_reducible_counterexample(&m, cfg.eps).map_err(numeric)?;
    // shift component along the fiber unstable eigendirection
    let fiber = &rc.tilde.fiber_matrix;
    let sf = lattice::spectral_splitting(fiber).map_err(numeric)?;
    let vinv = maps::eigen_matrix(&sf)
        .inverse()
        .ok_or_else(|| LabError::Numeric("fiber eigenframe is singular".into()))?;
    let u_idx = sf.weakest_unstable();
    let mut delta = TrigPolynomial::zero(rc.tilde.base.dim());
    for (j, s) in rc.tilde.fiber_shift.iter().enumerate() {
        delta = delta.add(&s.scale(vinv[(u_idx, j)]));
    }
    let base = &rc.tilde.base.linear;
    let orbit = if rc.equal_rates {
        let doubled = delta.scale(rc.hat_shift_factor);
        cohomology::equal_pd_condition(&doubled, &delta, base, rc.lambda).map_err(numeric)?
    } else {
        cohomology::orbit_condition(&delta, base, rc.lambda, rc.mu).map_err(numeric)?
    };
    orbit_report_csv(ctx, &orbit)?;
    let blocks = rc.basis.blocks();
    let report = json!({
        "lambda": rc.lambda,
        "mu": rc.mu,
        "equal_rates": rc.equal_rates,
        "block_sizes": rc.basis.block_sizes,
        "block_char_polys": blocks
            .iter()
            .map(|b| char_poly(b).coeffs.iter().map(|&c| c as i64).collect::<Vec<i64>>())
            .collect::<Vec<_>>(),
        "hat_shift_factor": rc.hat_shift_factor,
        "orbit_condition": orbit_report_json(&orbit),
    });
    write_json(&ctx.out, "reducible.json", &report)?;
    Ok(report)
}

fn vector_orbit_json(report: &VectorOrbitConditionReport) -> Value {
    let orbits: Vec<Value> = report
        .orbits
        .iter()
        .map(|o| {
            json!({
                "representative": o.representative,
                "members": o.members.len(),
                "sum_0": { "re": o.orbit_sum[0].re, "im": o.orbit_sum[0].im },
                "sum_1": { "re": o.orbit_sum[1].re, "im": o.orbit_sum[1].im },
            })
        })
        .collect();
    json!({
        "holds": report.holds,
        "witness": report.witness,
        "weight_ratio": report.weight_ratio,
        "orbits": orbits,
    })
}

pub fn counterexample_complex(ctx: &Ctx, cfg: ComplexConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("lambda_abs", cfg.lambda_abs)?;
    config::check_positive("mu_abs", cfg.mu_abs)?;
    let b = config::to_matrix(&cfg.b)?;
    let phi = [
        config::to_poly(b.dim(), &cfg.phi[0])?,
        config::to_poly(b.dim(), &cfg.phi[1])?,
    ];
    let report =
        cohomology::orbit_condition_complex(&phi, &b, cfg.lambda_abs, cfg.mu_abs, cfg.fiber_angle)
            .map_err(numeric)?;
    let mut csv = CsvWriter::create(
        &ctx.out,
        "condition.csv",
        &["orbit_id", "representative", "members", "sum_0", "sum_1"],
    )?;
    for (i, o) in report.orbits.iter().enumerate() {
        let rep = o
            .representative
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(";");
        csv.row(&[
            i.to_string(),
            rep,
            o.members.len().to_string(),
            complex_str(o.orbit_sum[0]),
            complex_str(o.orbit_sum[1]),
        ]);
    }
    csv.finish()?;
    let out = vector_orbit_json(&report);
    write_json(&ctx.out, "complex.json", &out)?;
    Ok(out)
}

pub fn counterexample_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    let cfg = DllaveConfig {
        schema: 1,
        a: vec![vec![2, 1], vec![1, 1]],
        b: vec![vec![3, 1], vec![2, 1]],
        phi: vec![config::TermDef { freq: vec![1, 0], re: 0.0, im: -0.005 }],
        tol: 1e-9,
        samples: 200,
        max_period: 2,
    };
    let report = counterexample_dllave(ctx, cfg)?;
    if report["residual_sup"].as_f64().unwrap() > 2e-9
        || report["orbit_condition"]["holds"].as_bool().unwrap()
    {
        return Err(LabError::Numeric("counterexample selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "counterexample", "ok": true }))
}

pub fn pd_check(ctx: &Ctx, cfg: PdCheckConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("tol", cfg.tol)?;
    let f = cfg.f.build()?;
    let g = cfg.g.build()?;
    let report = periodic::pd_report(&f, &g, cfg.max_period, cfg.tol).map_err(numeric)?;
    let mut csv = CsvWriter::create(
        &ctx.out,
        "pd_report.csv",
        &["period", "orbit_id", "eigenvalues_f", "eigenvalues_g", "equivalent", "ill_conditioned"],
    )?;
    for row in &report.rows {
        let ef = row.eigen_f.iter().map(|&z| complex_str(z)).collect::<Vec<_>>().join(";");
        let eg = row.eigen_g.iter().map(|&z| complex_str(z)).collect::<Vec<_>>().join(";");
        csv.row(&[
            row.period.to_string(),
            row.orbit_id.to_string(),
            ef,
            eg,
            row.verdict.equivalent.to_string(),
            row.verdict.ill_conditioned.to_string(),
        ]);
    }
    csv.finish()?;
    let jordan = jordan_table(ctx, &f, cfg.max_period)?;
    let out = json!({
        "rows": report.rows.len(),
        "all_equivalent": report.all_equivalent,
        "jordan_checked": jordan,
    });
    write_json(&ctx.out, "pd_check.json", &out)?;
    Ok(out)
}

/// When the skew pair is 2+2 with resonant rates, verify the predicted
/// return derivative against the chain rule on every orbit.
fn jordan_table(ctx: &Ctx, f: &SkewProductMap, max_period: u32) -> Result<Option<usize>, LabError> {
    let a = &f.fiber_matrix;
    if a.dim() != 2 || f.base.dim() != 2 || !f.base.is_linear() {
        return Ok(None);
    }
    let b = &f.base.linear;
    let la = weakest_unstable_real(a)?;
    let lb = weakest_unstable_real(b)?;
    if (la - lb).abs() > 1e-9 {
        return Ok(None);
    }
    let frame = maps::dllave_frame(a, b).map_err(numeric)?;
    let full = f.as_torus_map();
    let mut csv = CsvWriter::create(
        &ctx.out,
        "jordan.csv",
        &["period", "orbit_id", "predicted_coupling", "chain_coupling", "max_abs_diff"],
    )?;
    let mut checked = 0usize;
    for p in 1..=max_period {
        let orbits = periodic::enumerate_periodic_orbits(f, p).map_err(numeric)?;
        for (i, orb) in orbits.iter().enumerate() {
            let pred = periodic::jordan_block_prediction(f, orb).map_err(numeric)?;
            let chain = periodic::return_derivative(&full, orb, Some(&frame));
            let mut diff = 0.0f64;
            for r in 0..4 {
                for c in 0..4 {
                    diff = diff.max((pred[(r, c)] - chain[(r, c)]).abs());
                }
            }
            csv.row(&[
                p.to_string(),
                i.to_string(),
                sig12(pred[(1, 3)]),
                sig12(chain[(1, 3)]),
                sig12(diff),
            ]);
            checked += 1;
        }
    }
    csv.finish()?;
    Ok(Some(checked))
}

pub fn pd_check_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    let skew = super::algebra::selftest_skew(0.01);
    let def = || config::SkewDef {
        fiber_matrix: vec![vec![2, 1], vec![1, 1]],
        fiber_shift: vec![
            vec![config::TermDef { freq: vec![1, 0], re: 0.0, im: 0.0 }],
            vec![config::TermDef { freq: vec![1, 0], re: 0.0, im: 0.0 }],
        ],
        base: config::MapDef { linear: vec![vec![2, 1], vec![1, 1]], perturbation: None },
    };
    // identical maps must be periodic-data equivalent
    let mut fd = def();
    let u = {
        let split = lattice::spectral_splitting(&skew.fiber_matrix).unwrap();
        split.real_vector(1).unwrap()
    };
    for (c, poly) in fd.fiber_shift.iter_mut().enumerate() {
        poly[0].im = -0.005 * u[c];
    }
    let gd = fd.clone();
    let report = pd_check(
        ctx,
        PdCheckConfig { schema: 1, f: fd, g: gd, max_period: 2, tol: 1e-9 },
    )?;
    if !report["all_equivalent"].as_bool().unwrap() {
        return Err(LabError::Numeric("pd-check selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "pd-check", "ok": true }))
}
