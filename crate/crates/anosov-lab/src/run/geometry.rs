//! Foliation-side subcommands: foliation (leaf | tube | density), gibbs,
//! moduli.

use serde_json::{json, Value};

use anosov_core::foliation::{self, ModulusProbe};
use anosov_core::maps;

use crate::config::{self, DensityConfig, GibbsConfig, LeafConfig, ModuliConfig, TubeConfig};
use crate::emit::{sig12, write_json, CsvWriter};
use crate::error::{invalid, numeric, LabError};

use super::{check_dim, Ctx};

pub fn foliation_leaf(ctx: &Ctx, cfg: LeafConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("radius", cfg.radius)?;
    config::check_positive("step", cfg.step)?;
    let f = cfg.map.build()?;
    check_dim("point", &cfg.point, f.dim())?;
    if cfg.bundle >= f.dim() {
        return Err(invalid(format!("bundle {} out of range for dim {}", cfg.bundle, f.dim())));
    }
    let seg = foliation::integrate_leaf(&f, &cfg.point, cfg.bundle, cfg.radius, cfg.step)
        .map_err(numeric)?;
    let report = json!({
        "dim": seg.dim,
        "bundle": seg.bundle,
        "nodes": seg.lift_points.len(),
        "arclength": seg.arclength,
        "lift_points": seg.lift_points,
    });
    write_json(&ctx.out, "leaf.json", &report)?;
    Ok(json!({
        "dim": seg.dim,
        "bundle": seg.bundle,
        "nodes": seg.lift_points.len(),
    }))
}

pub fn foliation_tube(ctx: &Ctx, cfg: TubeConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("ball_radius", cfg.ball_radius)?;
    config::check_positive("r_max", cfg.r_max)?;
    config::check_positive("eps", cfg.eps)?;
    config::check_positive("step", cfg.step)?;
    let f = cfg.map.build()?;
    check_dim("point", &cfg.point, f.dim())?;
    let curve = foliation::tube_minimality_probe(
        &f,
        &cfg.point,
        cfg.ball_radius,
        cfg.bundle,
        cfg.r_max,
        cfg.eps,
        cfg.step,
    )
    .map_err(numeric)?;
    let mut csv = CsvWriter::create(&ctx.out, "coverage.csv", &["radius", "coverage"])?;
    for (&r, &c) in curve.radii.iter().zip(&curve.coverage) {
        csv.row(&[sig12(r), sig12(c)]);
    }
    csv.finish()?;
    let report = json!({
        "density_achieved": curve.density_achieved,
        "final_coverage": curve.coverage.last().copied().unwrap_or(0.0),
        "checkpoints": curve.radii.len(),
    });
    write_json(&ctx.out, "tube.json", &report)?;
    Ok(report)
}

pub fn foliation_density(ctx: &Ctx, cfg: DensityConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("r_max", cfg.r_max)?;
    config::check_positive("step", cfg.step)?;
    config::check_positive("eps", cfg.eps)?;
    if cfg.checkpoints == 0 {
        return Err(invalid("checkpoints must be at least 1"));
    }
    let f = cfg.map.build()?;
    let d = f.dim();
    check_dim("point", &cfg.point, d)?;
    let grid = ((2.0 / cfg.eps) as usize).max(8);
    let spacing = cfg.eps / 4.0;
    // points with |s| <= r, either along the integrated leaf or along a
    // straight control direction
    let sampled: Vec<(f64, Vec<f64>)> = match &cfg.direction {
        Some(dir) => {
            check_dim("direction", dir, d)?;
            let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(invalid("direction must be nonzero"));
            }
            let n = (cfg.r_max / spacing) as i64;
            (-n..=n)
                .map(|k| {
                    let s = k as f64 * spacing;
                    let p: Vec<f64> = cfg
                        .point
                        .iter()
                        .zip(dir)
                        .map(|(&a, &b)| a + s * b / norm)
                        .collect();
                    (s, maps::reduce_mod_1(&p))
                })
                .collect()
        }
        None => {
            let seg = foliation::integrate_leaf(&f, &cfg.point, cfg.bundle, cfg.r_max, cfg.step)
                .map_err(numeric)?;
            let mut out = Vec::new();
            let mut next = -cfg.r_max;
            for (p, &s) in seg.lift_points.iter().zip(&seg.arclength) {
                if s >= next {
                    out.push((s, maps::reduce_mod_1(p)));
                    next = s + spacing;
                }
            }
            out
        }
    };
    let mut csv = CsvWriter::create(&ctx.out, "density.csv", &["radius", "coverage"])?;
    let mut coverages = Vec::with_capacity(cfg.checkpoints);
    for k in 1..=cfg.checkpoints {
        let r = cfg.r_max * k as f64 / cfg.checkpoints as f64;
        let pts: Vec<Vec<f64>> = sampled
            .iter()
            .filter(|(s, _)| s.abs() <= r)
            .map(|(_, p)| p.clone())
            .collect();
        let cov = foliation::epsilon_density(&pts, cfg.eps, grid);
        csv.row(&[sig12(r), sig12(cov)]);
        coverages.push(cov);
    }
    csv.finish()?;
    let monotone = coverages.windows(2).all(|w| w[1] + 1e-12 >= w[0]);
    let report = json!({
        "eps": cfg.eps,
        "grid": grid,
        "final_coverage": coverages.last().copied().unwrap_or(0.0),
        "monotone": monotone,
    });
    write_json(&ctx.out, "density.json", &report)?;
    Ok(report)
}

pub fn foliation_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    // the unstable line of the cat map through a generic point fills the
    // torus at coarse resolution
    let cfg = DensityConfig {
        schema: 1,
        map: config::MapDef { linear: vec![vec![2, 1], vec![1, 1]], perturbation: None },
        point: vec![0.2, 0.7],
        bundle: 1,
        r_max: 40.0,
        step: 0.05,
        eps: 0.25,
        direction: None,
        checkpoints: 4,
    };
    let report = foliation_density(ctx, cfg)?;
    if report["final_coverage"].as_f64().unwrap() < 0.9 || !report["monotone"].as_bool().unwrap() {
        return Err(LabError::Numeric("foliation selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "foliation", "ok": true }))
}

pub fn gibbs(ctx: &Ctx, cfg: GibbsConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("plaque_len", cfg.plaque_len)?;
    if cfg.grid == 0 || cfg.samples == 0 || cfg.iterations == 0 {
        return Err(invalid("grid, samples and iterations must be positive"));
    }
    let f = cfg.map.build()?;
    check_dim("point", &cfg.point, f.dim())?;
    let hist = foliation::ugibbs_measure(
        &f,
        &cfg.point,
        cfg.plaque_len,
        cfg.iterations,
        cfg.skip,
        cfg.grid,
        cfg.samples,
        cfg.depth,
    )
    .map_err(numeric)?;
    let mut csv = CsvWriter::create(&ctx.out, "gibbs.csv", &["cell", "mass"])?;
    for (i, &w) in hist.weights.iter().enumerate() {
        csv.row(&[i.to_string(), sig12(w)]);
    }
    csv.finish()?;
    let report = json!({
        "grid": cfg.grid,
        "plaque_samples": hist.samples,
        "mass": hist.mass(),
        "max_relative_deviation": hist.max_relative_deviation_from_uniform(),
    });
    write_json(&ctx.out, "gibbs.json", &report)?;
    Ok(report)
}

pub fn gibbs_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    let cfg = GibbsConfig {
        schema: 1,
        map: config::MapDef { linear: vec![vec![2, 1], vec![1, 1]], perturbation: None },
        point: vec![0.0, 0.0],
        plaque_len: 1.0,
        iterations: 2000,
        skip: 10,
        grid: 4,
        samples: 500,
        depth: 0,
    };
    let report = gibbs(ctx, cfg)?;
    if (report["mass"].as_f64().unwrap() - 1.0).abs() > 1e-12 {
        return Err(LabError::Numeric("gibbs selftest mass drift".into()));
    }
    Ok(json!({ "selftest": "gibbs", "ok": true }))
}

pub fn moduli(ctx: &Ctx, cfg: ModuliConfig) -> Result<Value, LabError> {
    config::check_schema(cfg.schema)?;
    config::check_positive("tol", cfg.tol)?;
    if cfg.points.is_empty() || cfg.ts.is_empty() {
        return Err(invalid("points and ts must be nonempty"));
    }
    let f = cfg.f.build()?;
    let probe_f = ModulusProbe::new(&f).map_err(numeric)?;
    let g = cfg.g.as_ref().map(|d| d.build()).transpose()?;
    let probe_g = g.as_ref().map(ModulusProbe::new).transpose().map_err(numeric)?;
    let mut header = vec!["point", "t", "phi_f"];
    if probe_g.is_some() {
        header.push("phi_g");
    }
    let mut csv = CsvWriter::create(&ctx.out, "moduli.csv", &header)?;
    let mut max_abs = 0.0f64;
    for x in &cfg.points {
        check_dim("point", x, f.fiber_dim() + f.base.dim())?;
        for &t in &cfg.ts {
            let vf = probe_f.modulus(x, t).map_err(numeric)?;
            max_abs = max_abs.max(vf.abs());
            let coords = x.iter().map(|&c| sig12(c)).collect::<Vec<_>>().join(";");
            let mut row = vec![coords, sig12(t), sig12(vf)];
            if let Some(pg) = &probe_g {
                row.push(sig12(pg.modulus(x, t).map_err(numeric)?));
            }
            csv.row(&row);
        }
    }
    csv.finish()?;
    let matched = match &g {
        Some(gm) => Some(
            foliation::moduli_match(&f, gm, &cfg.points, &cfg.ts, cfg.tol).map_err(numeric)?,
        ),
        None => None,
    };
    let report = json!({
        "max_abs_modulus_f": max_abs,
        "match": matched,
        "tol": cfg.tol,
    });
    write_json(&ctx.out, "moduli.json", &report)?;
    Ok(report)
}

pub fn moduli_selftest(ctx: &Ctx) -> Result<Value, LabError> {
    // the unperturbed 2+2 model has identically vanishing modulus
    let zero_shift = vec![
        vec![config::TermDef { freq: vec![1, 0], re: 0.0, im: 0.0 }],
        vec![config::TermDef { freq: vec![1, 0], re: 0.0, im: 0.0 }],
    ];
    let def = config::SkewDef {
        fiber_matrix: vec![vec![2, 1], vec![1, 1]],
        fiber_shift: zero_shift,
        base: config::MapDef { linear: vec![vec![3, 1], vec![2, 1]], perturbation: None },
    };
    let report = moduli(
        ctx,
        ModuliConfig {
            schema: 1,
            f: def.clone(),
            g: Some(def),
            points: vec![vec![0.13, 0.58, 0.31, 0.72]],
            ts: vec![-0.2, 0.1, 0.3],
            tol: 1e-4,
        },
    )?;
    if report["max_abs_modulus_f"].as_f64().unwrap() > 1e-6
        || report["match"] != json!(true)
    {
        return Err(LabError::Numeric("moduli selftest mismatch".into()));
    }
    Ok(json!({ "selftest": "moduli", "ok": true }))
}
