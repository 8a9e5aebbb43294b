//! Integer-linear-algebra subcommands: spectrum, factor, blockdiag,
//! periodic.

use serde_json::{json, Value};

use anosov_core::lattice::{
    self, char_poly, factor_over_integers, IntPolynomial, UnimodularMatrix,
};
use anosov_core::maps::{SkewProductMap, TorusMap, TrigPolynomial};
use anosov_core::periodic;

use crate::config::{self, BlockdiagConfig, FactorConfig, PeriodicConfig, SpectrumConfig};
use crate::emit::{sig12, write_json, CsvWriter};
use crate::error::{invalid, numeric, LabError};

use super::Ctx;

fn poly_json(p: &IntPolynomial) -> Value {
    json!(p.coeffs.iter().map(|&c| c as i64).collect::<Vec<i64>>())
}

pub fn spectrum(ctx: &Ctx, cfg: SpectrumConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    let m = config::to_matrix(&cfg.matrix)?;
    spectrum_of(ctx, &m)
}

pub fn spectrum_of(ctx: &Ctx, m: &UnimodularMatrix) -> Result<Value, LabError> {
    let p = char_poly(m);
    let split = lattice::spectral_splitting(m).map_err(numeric)?;
    let eigen: Vec<Value> = split
        .eigenvalues()
        .iter()
        .map(|z| json!({ "re": z.re, "im": z.im, "modulus": z.norm() }))
        .collect();
    let report = json!({
        "dim": m.dim(),
        "det": m.det() as i64,
        "char_poly": poly_json(&p),
        "eigenvalues": eigen,
        "hyperbolic": m.is_hyperbolic(),
    });
    write_json(&ctx.out, "spectrum.json", &report)?;
    Ok(report)
}

pub fn spectrum_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    let cat = config::to_matrix(&[vec![2, 1], vec![1, 1]])?;
    let report = spectrum_of(ctx, &cat)?;
    let moduli: Vec<f64> = report["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["modulus"].as_f64().unwrap())
        .collect();
    let golden2 = (3.0 + 5.0f64.sqrt()) / 2.0;
    if !report["hyperbolic"].as_bool().unwrap()
        || (moduli[1] - golden2).abs() > 1e-9
        || (moduli[0] * moduli[1] - 1.0).abs() > 1e-9
    {
        return Err(LabError::Numeric("spectrum selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "spectrum", "ok": true }))
}

pub fn factor(ctx: &Ctx, cfg: FactorConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    let p = IntPolynomial::new(cfg.poly.iter().map(|&c| c as i128).collect());
    let factors = factor_over_integers(&p).map_err(numeric)?;
    let report = json!({
        "degree": p.degree(),
        "factors": factors.iter().map(poly_json).collect::<Vec<_>>(),
        "irreducible": factors.len() == 1,
    });
    write_json(&ctx.out, "factor.json", &report)?;
    Ok(report)
}

pub fn factor_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    let irred = factor(
        ctx,
        FactorConfig { schema: 1, poly: vec![1, -3, 1] },
    )?;
    let split = factor(
        ctx,
        FactorConfig { schema: 1, poly: vec![1, -7, 14, -7, 1] },
    )?;
    if !irred["irreducible"].as_bool().unwrap() || split["factors"].as_array().unwrap().len() != 2 {
        return Err(LabError::Numeric("factor selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "factor", "ok": true }))
}

pub fn blockdiag(ctx: &Ctx, cfg: BlockdiagConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    let m = config::to_matrix(&cfg.matrix)?;
    let basis = lattice::invariant_sublattice_basis(&m).map_err(numeric)?;
    let blocks = basis.blocks();
    let block_polys: Vec<IntPolynomial> = blocks.iter().map(char_poly).collect();
    // exact consistency check: the block polynomials multiply back to the
    // original characteristic polynomial
    let mut prod = IntPolynomial::new(vec![1]);
    for p in &block_polys {
        prod = prod.mul(p);
    }
    let original = char_poly(&m);
    let product_matches = prod.coeffs == original.coeffs;
    let d = m.dim();
    let basis_rows: Vec<Vec<i64>> = (0..d)
        .map(|i| (0..d).map(|j| basis.basis[(i, j)] as i64).collect())
        .collect();
    let block_rows: Vec<Value> = blocks
        .iter()
        .map(|b| {
            let n = b.dim();
            json!((0..n)
                .map(|i| (0..n).map(|j| b.entry(i, j) as i64).collect::<Vec<i64>>())
                .collect::<Vec<_>>())
        })
        .collect();
    let report = json!({
        "basis_columns_row_major": basis_rows,
        "block_sizes": basis.block_sizes,
        "blocks": block_rows,
        "block_char_polys": block_polys.iter().map(poly_json).collect::<Vec<_>>(),
        "lattice_index": basis.index as i64,
        "product_matches": product_matches,
    });
    write_json(&ctx.out, "blockdiag.json", &report)?;
    Ok(report)
}

pub fn blockdiag_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    // blockdiag(cat, [[3,1],[2,1]]) already in block form
    let report = blockdiag(
        ctx,
        BlockdiagConfig {
            schema: 1,
            matrix: vec![
                vec![2, 1, 0, 0],
                vec![1, 1, 0, 0],
                vec![0, 0, 3, 1],
                vec![0, 0, 2, 1],
            ],
        },
    )?;
    let sizes = report["block_sizes"].as_array().unwrap();
    if sizes.len() != 2 || !report["product_matches"].as_bool().unwrap() {
        return Err(LabError::Numeric("blockdiag selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "blockdiag", "ok": true }))
}

fn rational_str(r: &lattice::Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn periodic(ctx: &Ctx, cfg: PeriodicConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    if cfg.max_period == 0 {
        return Err(invalid("max_period must be at least 1"));
    }
    match (&cfg.matrix, &cfg.skew) {
        (Some(rows), None) => periodic_linear(ctx, rows, cfg.max_period),
        (None, Some(skew)) => periodic_skew(ctx, &skew.build()?, cfg.max_period),
        _ => Err(invalid("provide exactly one of `matrix` or `skew`")),
    }
}

fn periodic_linear(ctx: &Ctx, rows: &[Vec<i64>], max_period: u32) -> Result<Value, LabError> {
    let m = config::to_matrix(rows)?;
    let mut counts = CsvWriter::create(&ctx.out, "periodic_counts.csv", &["period", "count", "det_count"])?;
    let mut pts = CsvWriter::create(
        &ctx.out,
        "periodic_points.csv",
        &["period", "point_id", "coordinates"],
    )?;
    let mut per_period = Vec::new();
    for p in 1..=max_period {
        let (points, det_count) = lattice::periodic_points_linear(&m, p);
        counts.row(&[p.to_string(), points.len().to_string(), det_count.to_string()]);
        for (i, pt) in points.iter().enumerate() {
            let coords = pt.iter().map(rational_str).collect::<Vec<_>>().join(";");
            pts.row(&[p.to_string(), i.to_string(), coords]);
        }
        per_period.push(json!({ "period": p, "count": points.len(), "det_count": det_count as i64 }));
    }
    counts.finish()?;
    pts.finish()?;
    let report = json!({ "mode": "linear", "periods": per_period });
    write_json(&ctx.out, "periodic.json", &report)?;
    Ok(report)
}

fn periodic_skew(ctx: &Ctx, skew: &SkewProductMap, max_period: u32) -> Result<Value, LabError> {
    let f = skew.as_torus_map();
    let mut csv = CsvWriter::create(
        &ctx.out,
        "orbits.csv",
        &["period", "orbit_id", "residual", "representative"],
    )?;
    let mut per_period = Vec::new();
    for p in 1..=max_period {
        let orbits = periodic::enumerate_periodic_orbits(skew, p).map_err(numeric)?;
        for (i, orb) in orbits.iter().enumerate() {
            let rep = orb.points[0].iter().map(|&c| sig12(c)).collect::<Vec<_>>().join(";");
            csv.row(&[
                p.to_string(),
                i.to_string(),
                sig12(orb.residual(&f)),
                rep,
            ]);
        }
        per_period.push(json!({ "period": p, "orbits": orbits.len() }));
    }
    csv.finish()?;
    let report = json!({ "mode": "skew", "periods": per_period });
    write_json(&ctx.out, "periodic.json", &report)?;
    Ok(report)
}

pub fn periodic_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    let report = periodic(
        ctx,
        PeriodicConfig {
            schema: 1,
            max_period: 3,
            matrix: Some(vec![vec![2, 1], vec![1, 1]]),
            skew: None,
        },
    )?;
    let counts: Vec<u64> = report["periods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["count"].as_u64().unwrap())
        .collect();
    if counts != vec![1, 5, 16] {
        return Err(LabError::Numeric("periodic selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "periodic", "ok": true }))
}

/// Used by other selftests: cat acting in the fiber over a cat base with
/// a small sine shift along the fiber unstable direction.
pub fn selftest_skew(eps: f64) -> SkewProductMap {
    let cat = UnimodularMatrix::new(&[vec![2, 1], vec![1, 1]]).unwrap();
    let split = lattice::spectral_splitting(&cat).unwrap();
    let u = split.real_vector(1).unwrap();
    let phi = TrigPolynomial::sin_wave(2, &[1, 0], eps);
    let shift: Vec<TrigPolynomial> = u.iter().map(|&c| phi.scale(c)).collect();
    SkewProductMap::new(cat.clone(), shift, TorusMap::linear_map(cat)).unwrap()
}
