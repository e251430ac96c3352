//! One function per subcommand. Each returns buffered artifacts and whether
//! every verification it ran passed.

use std::io::Write;

use hotspots::experiments::{
    domain_family, eigenvalue_scaling, fit_gaussian_bounds, solve_in_place, solve_normalized, theorem1_report,
    verify_hitting_time, verify_lemma1, verify_lemma3, verify_lemma4, verify_main_theorem, verify_nodal_width,
    verify_volume_comparability, write_reports_csv, LemmaId, MainTheoremOptions, SolvedDomain, SweepConfig,
    VerificationReport,
};
use hotspots::geometry::{diameter, inradius_incenter, normalize, DomainSpec, NormalizationReport};
use hotspots::mesh::triangulate;
use hotspots::spectral::{eigen_header_json, hot_spots, nodal_line_report, write_eigen_csv};
use hotspots::stochastic::{
    estimate_heat_kernel, feynman_kac_check, rng::sub_seed, simulate_snapshots, HittingConfig, PathEnsemble,
};
use hotspots::{fmt_f64, Domain, Error, Point, Result};
use serde::Serialize;
use serde_json::json;

use crate::config::{Command, Resolved};
use crate::output::Artifacts;

pub struct Outcome {
    pub artifacts: Artifacts,
    pub pass: bool,
}

pub fn run(r: &Resolved) -> Result<Outcome> {
    match r.command {
        Command::Solve => solve(r),
        Command::Hotspots => hotspots_cmd(r),
        Command::Simulate => simulate(r),
        Command::FeynmanKac => feynman_kac(r),
        Command::HeatKernel => heat_kernel(r),
        Command::Verify => verify(r),
        Command::Sweep => sweep(r),
    }
}

fn spec(r: &Resolved) -> &DomainSpec {
    r.domain.as_ref().expect("validated: domain present")
}

/// Domain in the working frame, its inradius, and the normalization applied (if any).
fn frame(r: &Resolved) -> Result<(Domain, f64, Option<NormalizationReport<f64>>)> {
    let raw = spec(r).build()?;
    if r.normalize {
        let (nd, rep) = normalize(&raw)?;
        Ok((nd, 1.0, Some(rep)))
    } else {
        let (inr, _) = inradius_incenter(&raw)?;
        Ok((raw, inr, None))
    }
}

fn solved(r: &Resolved) -> Result<SolvedDomain> {
    let (d, inr, _) = frame(r)?;
    let h = r.h.unwrap_or(0.1 * inr);
    if r.normalize {
        solve_normalized(&spec(r).build()?, h)
    } else {
        solve_in_place(&d, h)
    }
}

fn start_point(r: &Resolved, d: &Domain) -> Result<Point> {
    match r.start {
        Some([x, y]) => Ok(Point::new(x, y)),
        None => Ok(inradius_incenter(d)?.1),
    }
}

fn frame_label(r: &Resolved) -> &'static str {
    if r.normalize {
        "normalized"
    } else {
        "input"
    }
}

fn dumps(r: &Resolved, s: &SolvedDomain, out: &mut Artifacts) -> Result<()> {
    if r.dump_mesh {
        out.csv("mesh_nodes.csv", |w| s.mesh.write_nodes_csv(w))?;
        out.csv("mesh_triangles.csv", |w| s.mesh.write_triangles_csv(w))?;
    }
    if r.dump_eigen {
        out.csv("eigen.csv", |w| write_eigen_csv(&s.pair, &s.mesh, w))?;
        out.json("eigen_header.json", &eigen_header_json(&s.pair, &s.mesh))?;
    }
    Ok(())
}

fn solve(r: &Resolved) -> Result<Outcome> {
    let s = solved(r)?;
    let mut out = Artifacts::default();
    out.json(
        "solve.json",
        &json!({
            "domain": spec(r),
            "frame": frame_label(r),
            "normalization": s.normalization,
            "mu1": s.pair.mu1,
            "summary": s.summary(),
        }),
    )?;
    dumps(r, &s, &mut out)?;
    Ok(Outcome { artifacts: out, pass: true })
}

fn hotspots_cmd(r: &Resolved) -> Result<Outcome> {
    let s = solved(r)?;
    let hs = hot_spots(&s.pair, &s.mesh, r.band_epsilon)?;
    let nl = nodal_line_report(&s.pair, &s.mesh);
    let mut out = Artifacts::default();
    out.json(
        "hotspots.json",
        &json!({
            "domain": spec(r),
            "frame": frame_label(r),
            "summary": s.summary(),
            "hot_spots": hs,
            "nodal_line": nl,
        }),
    )?;
    out.csv("extrema.csv", |w| {
        writeln!(w, "kind,x,y,value,component_size")?;
        for (kind, set) in [("max", &hs.maxima), ("min", &hs.minima)] {
            for e in set {
                writeln!(w, "{kind},{},{},{},{}", fmt_f64(e.point.x), fmt_f64(e.point.y), fmt_f64(e.value), e.component_size)?;
            }
        }
        Ok(())
    })?;
    out.csv("nodal_line.csv", |w| {
        writeln!(w, "x0,y0,x1,y1")?;
        for [a, b] in &nl.crossing_segments {
            writeln!(w, "{},{},{},{}", fmt_f64(a.x), fmt_f64(a.y), fmt_f64(b.x), fmt_f64(b.y))?;
        }
        Ok(())
    })?;
    dumps(r, &s, &mut out)?;
    Ok(Outcome { artifacts: out, pass: true })
}

#[derive(Serialize)]
struct EnsembleSummary {
    t: f64,
    mean_x: f64,
    mean_y: f64,
    var_x: f64,
    var_y: f64,
    reflections: u64,
    fallbacks: u64,
}

fn summarize(e: &PathEnsemble) -> EnsembleSummary {
    let n = e.endpoints.len().max(1) as f64;
    let mx = e.endpoints.iter().map(|p| p.x).sum::<f64>() / n;
    let my = e.endpoints.iter().map(|p| p.y).sum::<f64>() / n;
    let vx = e.endpoints.iter().map(|p| (p.x - mx).powi(2)).sum::<f64>() / n;
    let vy = e.endpoints.iter().map(|p| (p.y - my).powi(2)).sum::<f64>() / n;
    EnsembleSummary {
        t: e.t_final,
        mean_x: mx,
        mean_y: my,
        var_x: vx,
        var_y: vy,
        reflections: e.reflections,
        fallbacks: e.fallbacks,
    }
}

fn simulate(r: &Resolved) -> Result<Outcome> {
    let (d, inr, rep) = frame(r)?;
    let start = start_point(r, &d)?;
    let times = r.t.clone().unwrap_or_else(|| vec![1.0]);
    let dt = r.dt.unwrap_or(1e-3 * inr * inr);
    let n = r.n_paths.unwrap_or(10_000);
    let ens = simulate_snapshots(&d, start, &times, dt, n, r.seed)?;
    let sums: Vec<EnsembleSummary> = ens.iter().map(summarize).collect();
    let mut out = Artifacts::default();
    out.json(
        "simulate.json",
        &json!({
            "domain": spec(r),
            "frame": frame_label(r),
            "normalization": rep,
            "start": start,
            "dt": dt,
            "n_paths": n,
            "seed": r.seed,
            "snapshots": sums,
        }),
    )?;
    out.csv("simulate.csv", |w| {
        writeln!(w, "t,mean_x,mean_y,var_x,var_y,reflections,fallbacks")?;
        for s in &sums {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_f64(s.t),
                fmt_f64(s.mean_x),
                fmt_f64(s.mean_y),
                fmt_f64(s.var_x),
                fmt_f64(s.var_y),
                s.reflections,
                s.fallbacks
            )?;
        }
        Ok(())
    })?;
    if r.dump_endpoints {
        for (i, e) in ens.iter().enumerate() {
            out.csv(&format!("endpoints_{i}.csv"), |w| e.write_endpoints_csv(w))?;
        }
    }
    Ok(Outcome { artifacts: out, pass: true })
}

fn feynman_kac(r: &Resolved) -> Result<Outcome> {
    let s = solved(r)?;
    let (inr, _) = inradius_incenter(&s.domain)?;
    let start = start_point(r, &s.domain)?;
    let times = r.t.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let dt = r.dt.unwrap_or(1e-3 * inr * inr);
    let n = r.n_paths.unwrap_or(20_000);
    let reps = feynman_kac_check(&s.domain, &s.mesh, &s.pair, start, &times, n, dt, r.seed)?;
    let pass = reps.iter().all(|x| x.pass);
    let mut out = Artifacts::default();
    out.json(
        "feynman_kac.json",
        &json!({ "domain": spec(r), "frame": frame_label(r), "summary": s.summary(), "checks": reps }),
    )?;
    out.csv("feynman_kac.csv", |w| {
        writeln!(w, "t,lhs,rhs,stderr,z_score,rel_error,pass")?;
        for c in &reps {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_f64(c.t),
                fmt_f64(c.lhs),
                fmt_f64(c.rhs),
                fmt_f64(c.stderr),
                fmt_f64(c.z_score),
                fmt_f64(c.rel_error),
                c.pass
            )?;
        }
        Ok(())
    })?;
    dumps(r, &s, &mut out)?;
    Ok(Outcome { artifacts: out, pass })
}

fn heat_kernel(r: &Resolved) -> Result<Outcome> {
    let (d, inr, rep) = frame(r)?;
    let bins = triangulate(&d, r.h.unwrap_or(0.25 * inr))?;
    let source = start_point(r, &d)?;
    let times = r.t.clone().unwrap_or_else(|| vec![inr * inr]);
    let dt = r.dt.unwrap_or(1e-3 * inr * inr);
    let n = r.n_paths.unwrap_or(20_000);
    let ks = estimate_heat_kernel(&d, &bins, source, &times, n, dt, r.seed)?;
    let mut out = Artifacts::default();
    let masses: Vec<f64> = ks.iter().map(|k| k.mass()).collect();
    out.json(
        "heat_kernel.json",
        &json!({
            "domain": spec(r),
            "frame": frame_label(r),
            "normalization": rep,
            "source": source,
            "times": times,
            "dt": dt,
            "n_paths": n,
            "seed": r.seed,
            "n_cells": bins.n_triangles(),
            "mass": masses,
        }),
    )?;
    for (i, k) in ks.iter().enumerate() {
        out.csv(&format!("heat_kernel_{i}.csv"), |w| {
            writeln!(w, "t,cell,center_x,center_y,area,count,density")?;
            for c in 0..k.counts.len() {
                writeln!(
                    w,
                    "{},{c},{},{},{},{},{}",
                    fmt_f64(k.time),
                    fmt_f64(k.cell_centers[c].x),
                    fmt_f64(k.cell_centers[c].y),
                    fmt_f64(k.cell_areas[c]),
                    k.counts[c],
                    fmt_f64(k.density[c])
                )?;
            }
            Ok(())
        })?;
    }
    Ok(Outcome { artifacts: out, pass: true })
}

/// Default Monte Carlo settings for single-domain verification, normalized units.
const VERIFY_N_PATHS: usize = 20_000;
const VERIFY_DT: f64 = 1e-3;

fn verify_one(r: &Resolved, lemma: LemmaId) -> Result<Vec<VerificationReport>> {
    if lemma == LemmaId::EigenvalueScaling {
        return scaling_reports(r);
    }
    let spec = spec(r);
    let raw = spec.build()?;
    let h = r.h.unwrap_or(0.1);
    let n = r.n_paths.unwrap_or(VERIFY_N_PATHS);
    let dt = r.dt.unwrap_or(VERIFY_DT);
    let report = match lemma {
        LemmaId::MainTheorem => {
            let s = solve_normalized(&raw, h)?;
            let opts = MainTheoremOptions { band_epsilon: r.band_epsilon, c_max: r.c_max.unwrap_or(10.0), ..Default::default() };
            verify_main_theorem(spec, &s, &opts)?
        }
        LemmaId::Lemma1 => {
            let (nd, _) = normalize(&raw)?;
            verify_lemma1(spec, &nd, 1e-3, r.c_max.unwrap_or(10.0))?
        }
        LemmaId::Lemma2 => {
            let (nd, _) = normalize(&raw)?;
            verify_volume_comparability(spec, &nd, r.delta, 200, r.seed)?
        }
        LemmaId::Lemma3 => {
            let (nd, _) = normalize(&raw)?;
            let bins = triangulate(&nd, r.h.unwrap_or(0.25))?;
            let x = start_point(r, &nd)?;
            let y = r.target.map_or(x, |[a, b]| Point::new(a, b));
            verify_lemma3(spec, &nd, &bins, x, y, r.delta, n, dt, r.seed)?
        }
        LemmaId::Lemma4 => verify_lemma4(spec, &solve_normalized(&raw, h)?, r.c_max.unwrap_or(100.0))?,
        LemmaId::NodalWidth => verify_nodal_width(spec, &solve_normalized(&raw, h)?, 0.5, 10.0)?,
        LemmaId::Theorem1Bounds => {
            let (nd, _) = normalize(&raw)?;
            let bins = triangulate(&nd, r.h.unwrap_or(0.25))?;
            let (_, inc) = inradius_incenter(&nd)?;
            let (a, _, _) = diameter(&nd);
            let u = inc - a;
            let tip = a + u * (0.5f64.min(u.norm()) / u.norm());
            let sources = match r.start {
                Some([x, y]) => vec![Point::new(x, y), inc],
                None => vec![inc, tip],
            };
            let times = r.t.clone().unwrap_or_else(|| vec![0.5, 2.0]);
            let fit = fit_gaussian_bounds(&nd, &bins, &sources, &times, n, dt, r.seed)?;
            theorem1_report(spec, &fit, r.seed)?
        }
        LemmaId::HittingTime => {
            let s = solve_normalized(&raw, h)?;
            let cfg = HittingConfig {
                barrier: r.barrier,
                offset_c2: r.offset_c2,
                start_y: r.start.map(|p| p[1]),
                t_budget: r.t_budget,
                n_paths: n,
                dt,
                seed: r.seed,
            };
            verify_hitting_time(spec, &s, &cfg, 0.01)?
        }
        LemmaId::EigenvalueScaling => unreachable!(),
    };
    Ok(vec![report])
}

fn scaling_reports(r: &Resolved) -> Result<Vec<VerificationReport>> {
    let families = r
        .families
        .clone()
        .or_else(|| r.sweep.as_ref().map(|s| s.families.clone()))
        .ok_or_else(|| Error::InvalidParameter {
            field: "families",
            reason: "eigenvalue_scaling needs `families` in the config file".into(),
        })?;
    let h = r.h.unwrap_or(0.1);
    let bound = r.c_max.unwrap_or(4.0 * std::f64::consts::PI.powi(2));
    families
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let members = domain_family(f, sub_seed(r.seed, k as u64))?;
            eigenvalue_scaling(&members, h, bound, 0.01)
        })
        .collect()
}

fn bundle(out: &mut Artifacts, r: &Resolved, reports: &[VerificationReport], extra: serde_json::Value) -> Result<()> {
    out.json("reports.json", &json!({ "config": r, "reports": reports, "extra": extra }))?;
    out.csv("reports.csv", |w| write_reports_csv(reports, w))?;
    Ok(())
}

fn verify(r: &Resolved) -> Result<Outcome> {
    let lemma = r.lemma.expect("validated: lemma present");
    let reports = verify_one(r, lemma)?;
    let pass = reports.iter().all(|x| x.pass);
    let mut out = Artifacts::default();
    bundle(&mut out, r, &reports, serde_json::Value::Null)?;
    Ok(Outcome { artifacts: out, pass })
}

/// Sweep settings: the file's `sweep` block, or defaults over its `families`,
/// with command-line overrides applied on top.
pub fn sweep_config(r: &Resolved) -> Result<SweepConfig> {
    let mut cfg = match (&r.sweep, &r.families) {
        (Some(s), _) => s.clone(),
        (None, Some(f)) => SweepConfig::new(f.clone(), r.seed),
        (None, None) => unreachable!("validated: sweep or families present"),
    };
    if let Some(f) = &r.families {
        cfg.families = f.clone();
    }
    if r.seed_explicit || r.sweep.is_none() {
        cfg.seed = r.seed;
    }
    if let Some(h) = r.h {
        cfg.h = h;
    }
    if let Some(dt) = r.dt {
        cfg.dt = dt;
    }
    if let Some(n) = r.n_paths {
        cfg.n_paths = n;
    }
    if let Some(c) = r.c_max {
        cfg.c_max_main = c;
    }
    if let Some(l) = r.lemma {
        cfg.lemmas = vec![l];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep(r: &Resolved) -> Result<Outcome> {
    let cfg = sweep_config(r)?;
    let res = hotspots::experiments::run_sweep(&cfg)?;
    let pass = res.all_pass();
    let mut out = Artifacts::default();
    out.json("sweep.json", &res)?;
    out.csv("sweep.csv", |w| write_reports_csv(&res.reports, w))?;
    out.csv("skipped.csv", |w| {
        writeln!(w, "domain,lemma,reason")?;
        for s in &res.skipped {
            writeln!(w, "{},{},{}", s.domain.replace(',', ";"), s.lemma, s.reason.replace(',', ";"))?;
        }
        Ok(())
    })?;
    Ok(Outcome { artifacts: out, pass })
}
