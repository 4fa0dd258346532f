//! Dispatches a parsed job to the core library and writes its artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fractalfn_core::analysis::{
    check_cn, check_holder, check_lp, check_sobolev_system, estimate_norm, ConditionReport, NormKind,
};
use fractalfn_core::export::{grid_set_csv, grid_set_pgm, sampled_csv, surface_csv, surface_pgm};
use fractalfn_core::geometry::{hausdorff_distance, AffineMap2D, GridSet, Rect};
use fractalfn_core::local_ifs::{
    apply_local_operator, graph_grid_set, graph_ifs_from_rb, iterate_global_attractor, iterate_local_attractor,
    Attractor, IterateOptions, LocalIFS,
};
use fractalfn_core::piecewise::{bspline, PiecewisePoly};
use fractalfn_core::rb::{
    build_affine_fif, build_property_s_system, check_property_j, linear_lambdas, solve_fixed_point,
    verify_self_referential, FixedPoint, InterpolationData, PartitionSpec, RBSystem, SampledFunction, SolveOptions,
};
use fractalfn_core::tensor::tensor_fixed_point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{print_config, Builder, JobConfig, Mode, PartitionKind, ScaleSpec, Start, SystemSpec};

/// Largest data-site error accepted by `interp`.
pub const INTERPOLATION_TOLERANCE: f64 = 1e-9;

/// Result of a completed job; `status` is 0, or 2 when a check failed.
#[derive(Debug)]
pub struct Outcome {
    pub status: i32,
    pub report: String,
    pub artifacts: Vec<PathBuf>,
}

struct Built {
    sys: RBSystem,
    data: Option<InterpolationData>,
}

fn scale_poly(spec: &ScaleSpec, domain: fractalfn_core::geometry::Interval) -> fractalfn_core::Result<PiecewisePoly> {
    match spec {
        ScaleSpec::Poly(c) => PiecewisePoly::polynomial(domain, c.clone()),
        ScaleSpec::Bspline { order, amplitude } => bspline(*order, domain, *amplitude),
    }
}

fn build_system(spec: &SystemSpec) -> Result<Built> {
    let part: PartitionSpec = spec.partition_spec()?;
    let data = match (&spec.data, spec.partition) {
        (None, _) => None,
        (Some(ys), PartitionKind::Binary) => Some(InterpolationData::binary(ys)?),
        (Some(ys), PartitionKind::General) => Some(InterpolationData::from_values(part.knots().to_vec(), ys)?),
    };
    let scale: Vec<PiecewisePoly> = spec
        .pieces
        .iter()
        .zip(part.subsets())
        .map(|(p, x)| scale_poly(p.scale.as_ref().expect("validated"), *x))
        .collect::<fractalfn_core::Result<_>>()?;
    let sys = match spec.builder {
        Builder::None => {
            let lambda = spec
                .pieces
                .iter()
                .zip(part.subsets())
                .map(|(p, x)| PiecewisePoly::polynomial(*x, p.lambda.clone().expect("validated")))
                .collect::<fractalfn_core::Result<_>>()?;
            RBSystem::new(part, lambda, scale)?
        }
        Builder::AffineFif => {
            let s: Vec<f64> = scale.iter().map(|p| p.as_constant().expect("validated")).collect();
            build_affine_fif(data.as_ref().expect("validated"), &s, spec.midpoints.as_deref())?
        }
        Builder::PropertyS => {
            let data = data.as_ref().expect("validated");
            let lambda = linear_lambdas(part.subsets(), &data.ys())?;
            build_property_s_system(part.knots().to_vec(), part.subsets().to_vec(), data, scale, lambda)?
        }
    };
    Ok(Built { sys, data })
}

fn start_function(cfg: &JobConfig, built: &Built, seed_offset: u64) -> Result<SampledFunction> {
    let base = built.sys.partition().base();
    Ok(match cfg.start {
        Start::Zero => SampledFunction::zeros(base, cfg.grid)?,
        Start::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(seed_offset));
            let mut f = SampledFunction::zeros(base, cfg.grid)?;
            for v in f.values_mut() {
                *v = rng.gen_range(-1.0..=1.0);
            }
            f
        }
        Start::Data => built
            .data
            .as_ref()
            .context("`start = data` needs `data`")?
            .piecewise_affine(base, cfg.grid)?,
    })
}

fn solve_options(cfg: &JobConfig) -> SolveOptions {
    SolveOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..Default::default()
    }
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }
}

fn residual_csv(residuals: &[f64]) -> String {
    let mut out = String::from("iteration,residual\n");
    for (k, r) in residuals.iter().enumerate() {
        writeln!(out, "{},{r}", k + 1).unwrap();
    }
    out
}

fn trace_csv(a: &Attractor) -> String {
    let mut out = String::from("iteration,cells,distance\n");
    for r in &a.trace.records {
        let d = r.distance.map(|d| d.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{d}", r.iteration, r.cells).unwrap();
    }
    out
}

fn kv(report: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(report, "{key} = {value}").unwrap();
}

fn solver_summary(report: &mut String, sys: &RBSystem, fp: &FixedPoint) {
    let s = sys.contraction_factor();
    kv(report, "contraction_factor", s);
    kv(report, "iterations", fp.iterations());
    kv(report, "final_residual", fp.residuals.last().copied().unwrap_or(0.0));
    let ratio = fp
        .residuals
        .windows(2)
        .skip(1)
        .filter(|w| w[0] > 1e-12)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    kv(report, "max_residual_ratio", ratio);
    if sys.partition().is_binary() {
        kv(
            report,
            "self_referential_residual",
            verify_self_referential(sys, &fp.function),
        );
    }
}

fn norm_estimates(report: &mut String, cfg: &JobConfig, f: &SampledFunction) -> Result<()> {
    for kind in &cfg.norms {
        kv(report, &format!("estimate {kind}"), estimate_norm(f, *kind)?);
    }
    Ok(())
}

fn condition(sys: &RBSystem, kind: NormKind) -> Result<ConditionReport> {
    Ok(match kind {
        NormKind::Sup => check_lp(sys, f64::INFINITY)?,
        NormKind::Lp(p) => check_lp(sys, p)?,
        NormKind::Holder(s) => check_holder(sys, s)?,
        NormKind::Cn(n) => check_cn(sys, n)?,
        NormKind::Sobolev { m, p } => check_sobolev_system(sys, m, p)?,
    })
}

fn local_ifs(cfg: &JobConfig) -> Result<(LocalIFS, Rect)> {
    let spec = cfg.ifs.as_ref().expect("validated");
    let [x0, x1, y0, y1] = spec.bounds;
    let bounds = Rect::new(x0, x1, y0, y1)?;
    let pieces = spec
        .maps
        .iter()
        .map(|m| {
            let [a, b, c, d] = m.linear;
            let [dx0, dx1, dy0, dy1] = m.domain;
            Ok((
                Rect::new(dx0, dx1, dy0, dy1)?,
                AffineMap2D::new([[a, b], [c, d]], m.translation),
            ))
        })
        .collect::<fractalfn_core::Result<Vec<_>>>()?;
    Ok((LocalIFS::new(bounds, pieces)?, bounds))
}

/// Runs `cfg`, writing artifacts and `report.txt` into `out`.
pub fn run(cfg: &JobConfig, out: &Path) -> Result<Outcome> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = Writer {
        dir: out.to_path_buf(),
        written: Vec::new(),
    };
    let mut report = String::new();
    kv(&mut report, "mode", cfg.mode);
    let mut status = 0;

    match cfg.mode {
        Mode::Solve | Mode::Interp => {
            let built = build_system(cfg.system.as_ref().expect("validated")).context("building the system")?;
            let f0 = start_function(cfg, &built, 0)?;
            let fp = solve_fixed_point(&built.sys, &f0, &solve_options(cfg)).context("solving for the fixed point")?;
            solver_summary(&mut report, &built.sys, &fp);
            if cfg.mode == Mode::Interp {
                let data = built.data.as_ref().expect("validated");
                let mut worst = 0.0_f64;
                for (j, &x) in data.sites().iter().enumerate() {
                    let err = (fp.function.value_at(x) - data.y(j)).abs();
                    kv(&mut report, &format!("site {j} error"), err);
                    worst = worst.max(err);
                }
                kv(&mut report, "max_site_error", worst);
                let mut pass = worst <= INTERPOLATION_TOLERANCE;
                if built.sys.partition().is_binary() {
                    let j = check_property_j(&built.sys, data)?;
                    kv(&mut report, "join_up_max_residual", j.max_residual);
                    kv(&mut report, "join_up_pass", j.pass);
                    pass &= j.pass;
                }
                kv(&mut report, "pass", pass);
                if !pass {
                    status = 2;
                }
            }
            norm_estimates(&mut report, cfg, &fp.function)?;
            w.put("fixed_point.csv", &sampled_csv(&fp.function))?;
            w.put("residuals.csv", &residual_csv(&fp.residuals))?;
        }
        Mode::Check => {
            let built = build_system(cfg.system.as_ref().expect("validated")).context("building the system")?;
            let checks = if cfg.checks.is_empty() {
                vec![NormKind::Sup]
            } else {
                cfg.checks.clone()
            };
            let mut all = true;
            for kind in checks {
                let rep = condition(&built.sys, kind).with_context(|| format!("condition {kind}"))?;
                report.push_str(&format!("\n[condition {kind}]\n"));
                report.push_str(&rep.to_text());
                all &= rep.pass;
            }
            kv(&mut report, "\nall_pass", all);
            if !all {
                status = 2;
            }
        }
        Mode::Attract | Mode::GlobalAttract => {
            let (ifs, bounds) = local_ifs(cfg)?;
            let k0 = GridSet::full(bounds, cfg.resolution)?;
            let opts = IterateOptions {
                max_iter: cfg.max_iter,
                ..Default::default()
            };
            let a = if cfg.mode == Mode::Attract {
                iterate_local_attractor(&ifs, &k0, &opts)
            } else {
                iterate_global_attractor(&ifs.affine_maps().expect("affine maps"), &k0, &opts)?
            };
            kv(&mut report, "resolution", cfg.resolution);
            kv(&mut report, "iterations", a.trace.len());
            kv(&mut report, "cells", a.set.len());
            kv(&mut report, "converged", a.converged);
            kv(&mut report, "became_empty", a.became_empty);
            if let Some(d) = a.trace.last_distance() {
                kv(&mut report, "last_distance", d);
            }
            w.put("attractor.pgm", &grid_set_pgm(&a.set))?;
            w.put("attractor.csv", &grid_set_csv(&a.set))?;
            w.put("trace.csv", &trace_csv(&a))?;
        }
        Mode::Tensor => {
            let a = build_system(cfg.system.as_ref().expect("validated")).context("building the first system")?;
            let b = build_system(cfg.second.as_ref().expect("validated")).context("building the second system")?;
            let f0 = start_function(cfg, &a, 0)?;
            let g0 = start_function(cfg, &b, 1)?;
            let tp = tensor_fixed_point(&a.sys, &b.sys, &f0, &g0, &solve_options(cfg)).context("tensor iteration")?;
            kv(&mut report, "iterations", tp.residuals.len());
            kv(
                &mut report,
                "final_residual",
                tp.residuals.last().copied().unwrap_or(0.0),
            );
            let (nx, ny) = tp.surface.dims();
            kv(&mut report, "surface", format!("{nx} x {ny}"));
            if nx * ny <= 257 * 257 {
                kv(&mut report, "rank_one_defect", tp.surface.rank_one_defect());
            }
            let (pgm, side) = surface_pgm(&tp.surface);
            w.put("surface.csv", &surface_csv(&tp.surface))?;
            w.put("surface.pgm", &pgm)?;
            w.put("surface_pgm.txt", &side)?;
            w.put("residuals.csv", &residual_csv(&tp.residuals))?;
        }
        Mode::GraphIfs => {
            let built = build_system(cfg.system.as_ref().expect("validated")).context("building the system")?;
            let f0 = start_function(cfg, &built, 0)?;
            let fp = solve_fixed_point(&built.sys, &f0, &solve_options(cfg)).context("solving for the fixed point")?;
            solver_summary(&mut report, &built.sys, &fp);
            let h = cfg.resolution;
            let g = graph_ifs_from_rb(&built.sys, &fp.function, h)?;
            let graph = graph_grid_set(&fp.function, g.ifs.bounds(), h)?;
            let image = apply_local_operator(&g.ifs, &graph);
            kv(&mut report, "resolution", h);
            kv(&mut report, "y_range", format!("{} {}", g.y_range.0, g.y_range.1));
            kv(&mut report, "lipschitz", g.lipschitz);
            kv(&mut report, "theta", g.theta);
            kv(&mut report, "q", g.q);
            kv(&mut report, "graph_cells", graph.len());
            kv(
                &mut report,
                "hausdorff_image_graph",
                hausdorff_distance(&image, &graph)?,
            );
            w.put("fixed_point.csv", &sampled_csv(&fp.function))?;
            w.put("graph.pgm", &grid_set_pgm(&graph))?;
            w.put("image.pgm", &grid_set_pgm(&image))?;
        }
    }

    kv(&mut report, "status", status);
    let full = format!("[config]\n{}\n[result]\n{report}", print_config(cfg));
    w.put("report.txt", &full)?;
    Ok(Outcome {
        status,
        report: full,
        artifacts: w.written,
    })
}
