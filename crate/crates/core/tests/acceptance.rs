//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::AssertUnwindSafe;
use std::sync::OnceLock;
use std::time::Instant;

use common::*;
use hotspots::experiments::{
    domain_family, fit_gaussian_bounds, main_theorem_fit, plateau_fit, run_sweep, solve_in_place, solve_normalized,
    verify_lemma3, FamilySpec, LemmaId, MainTheoremOptions, SweepConfig, SweepOutput,
    VerificationReport,
};
use hotspots::geometry::{all_diameter_pairs, inradius_incenter, normalize, verify_diameter_clustering, ConvexDomain, DomainSpec};
use hotspots::mesh::triangulate;
use hotspots::stochastic::{
    feynman_kac_check, feynman_kac_field, hitting_time_experiment, hitting_times,
    stationarity_test, verify_kernel_domination, Analytic, Barrier, HittingConfig,
};
use hotspots::{Domain, Point, Result};

const SEED: u64 = 20_240_601;

type Verdict = (bool, String);

fn rect(l: f64, h: f64) -> Domain {
    ConvexDomain::rectangle(l, h).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// The main family: ellipses {4,8,16}, stadiums {8,16}, rectangles {5,10,20}, 50 random hulls.
fn family() -> Vec<FamilySpec> {
    FamilySpec::standard_sweep(50)
}

fn sweep_at(h: f64) -> SweepOutput {
    let mut cfg = SweepConfig::new(family(), SEED);
    cfg.h = h;
    cfg.lemmas = vec![LemmaId::MainTheorem, LemmaId::Lemma4, LemmaId::NodalWidth];
    run_sweep(&cfg).expect("sweep runs")
}

/// Sweeps at `h = 0.1` and `h = 0.05`, shared by several criteria.
fn sweeps() -> &'static (SweepOutput, SweepOutput) {
    static S: OnceLock<(SweepOutput, SweepOutput)> = OnceLock::new();
    S.get_or_init(|| (sweep_at(0.1), sweep_at(0.05)))
}

fn by_lemma(out: &SweepOutput, lemma: LemmaId) -> BTreeMap<String, &VerificationReport> {
    out.reports.iter().filter(|r| r.lemma_id == lemma).map(|r| (r.domain_label.clone(), r)).collect()
}

fn ac1() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [5.0, 10.0, 20.0] {
        let t0 = Instant::now();
        let s = solve_in_place(&rect(n, 1.0), 0.05)?;
        let secs = t0.elapsed().as_secs_f64();
        let e = rel(s.pair.mu1, PI * PI / (n * n));
        ok &= e <= 0.01 && secs < 30.0;
        parts.push(format!("N={n}: rel err {e:.2e} in {secs:.1}s"));
    }
    Ok((ok, parts.join("; ")))
}

fn ac2() -> Result<Verdict> {
    let d = DomainSpec::disk(1.0).with_k(256).build()?;
    let s = solve_in_place(&d, 0.05)?;
    let j = j1_prime_first_zero();
    let e = rel(s.pair.mu1, j * j);
    Ok((
        e <= 0.01 && s.pair.multiplicity_flag,
        format!("mu1 = {:.6}, (j'11)^2 = {:.6}, rel err {e:.2e}, multiplicity flag {}", s.pair.mu1, j * j, s.pair.multiplicity_flag),
    ))
}

fn ac3() -> Result<Verdict> {
    let d = DomainSpec::disk(1.0).with_k(256).build()?;
    let s = solve_normalized(&d, 0.05)?;
    let fit = main_theorem_fit(&s, &MainTheoremOptions::default())?;
    let e = rel(fit.c_orthogonal_pair, 2f64.sqrt());
    Ok((e <= 0.02, format!("dist(max, orthogonal pair)/inrad = {:.4}, rel err vs sqrt 2 {e:.2e}", fit.c_orthogonal_pair)))
}

fn ac4() -> Result<Verdict> {
    let (coarse, fine) = sweeps();
    let (a, b) = (by_lemma(coarse, LemmaId::MainTheorem), by_lemma(fine, LemmaId::MainTheorem));
    let mut ok = a.len() == 58 && b.len() == 58;
    let (mut c_max, mut drift): (f64, f64) = (0.0, 0.0);
    for (label, r) in &a {
        let c = r.fitted_constants["c_best"];
        let c2 = b.get(label).map_or(f64::NAN, |r| r.fitted_constants["c_best"]);
        ok &= r.pass && c <= 10.0 && c2 <= 10.0;
        c_max = c_max.max(c).max(c2);
        drift = drift.max(rel(c2, c));
    }
    ok &= drift <= 0.10;
    Ok((ok, format!("{} members, max c = {c_max:.3}, max change under h/2 = {:.1}%", a.len(), 100.0 * drift)))
}

fn ac5() -> Result<Verdict> {
    let fam = FamilySpec::random_hulls(100);
    let specs = domain_family(&fam, SEED ^ 5)?;
    let tol = 1e-3;
    let mut ok = specs.len() == 100;
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    let mut multi = 0;
    for spec in &specs {
        let (nd, rep) = normalize(&spec.build()?)?;
        ok &= rep.aspect_n >= 4.0;
        let report = verify_diameter_clustering(&nd, tol, 10.0)?;
        let set = all_diameter_pairs(&nd, tol)?;
        // Brute force: every vertex pair, endpoints split by the nearer end of the exact diameter.
        let v = nd.vertices();
        let mut diam: f64 = 0.0;
        let mut ends = (0, 0);
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i].dist(v[j]) > diam {
                    diam = v[i].dist(v[j]);
                    ends = (i, j);
                }
            }
        }
        let mut pairs = Vec::new();
        let mut cluster: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i].dist(v[j]) >= (1.0 - tol) * diam {
                    pairs.push((i, j));
                    for k in [i, j] {
                        cluster.insert(k, usize::from(v[k].dist(v[ends.0]) > v[k].dist(v[ends.1])));
                    }
                }
            }
        }
        let mut radius: f64 = 0.0;
        for c in 0..2 {
            let members: Vec<Point> = cluster.iter().filter(|(_, &g)| g == c).map(|(&k, _)| v[k]).collect();
            let center = members.iter().fold(Point::new(0.0, 0.0), |s, &p| s + p) * (1.0 / members.len() as f64);
            radius = radius.max(members.iter().map(|p| p.dist(center)).fold(0.0, f64::max));
        }
        let (inr, _) = inradius_incenter(&nd)?;
        let brute_c = radius / inr;
        let mut got: Vec<(usize, usize)> = set.pairs.iter().map(|p| (p.i, p.j)).collect();
        got.sort();
        // Partitions agree up to the label swap.
        let labels: Vec<(usize, usize)> = set.endpoint_clusters.iter().map(|&(k, c)| (c, cluster[&k])).collect();
        let same = labels.iter().all(|&(a, b)| a == b) || labels.iter().all(|&(a, b)| a != b);
        let exact = got == pairs && same && set.endpoint_clusters.len() == cluster.len() && (report.c_estimate - brute_c).abs() <= 1e-9 * brute_c.max(1.0);
        mismatches += usize::from(!exact);
        multi += usize::from(pairs.len() > 1);
        ok &= report.pass && report.c_estimate <= 10.0;
        worst = worst.max(report.c_estimate);
    }
    ok &= mismatches == 0;
    Ok((
        ok,
        format!("{} hulls, max cluster radius/inrad = {worst:.3}, {multi} with several near-diameter pairs, oracle mismatches {mismatches}", specs.len()),
    ))
}

fn ac6() -> Result<Verdict> {
    let (coarse, fine) = sweeps();
    let (a, b) = (by_lemma(coarse, LemmaId::Lemma4), by_lemma(fine, LemmaId::Lemma4));
    let mut ok = !a.is_empty() && a.len() == b.len();
    let mut drift: f64 = 0.0;
    for (label, r) in &a {
        let c = r.fitted_constants["c"];
        let c2 = b.get(label).map_or(f64::NAN, |r| r.fitted_constants["c"]);
        ok &= c.is_finite() && c > 0.0 && c2.is_finite() && c2 > 0.0;
        drift = drift.max(rel(c2, c));
    }
    ok &= drift <= 0.10;
    // Closed form on the 20 × 1 rectangle: φ₁ = cos(πx/20), ball of radius 1 at the end.
    let closed = -(PI / 20.0).cos().ln() / (PI * PI / 400.0);
    let s = solve_in_place(&rect(20.0, 1.0), 0.05)?;
    let fit = plateau_fit(&s, 1.0)?;
    let e = rel(fit.c, closed);
    ok &= e <= 0.05;
    Ok((
        ok,
        format!("{} elongated members, max change under h/2 = {:.1}%; 20x1 rectangle c = {:.4} vs {closed:.4} (rel {e:.2e})", a.len(), 100.0 * drift, fit.c),
    ))
}

fn ac7() -> Result<Verdict> {
    let (n, dt, times) = (100_000, 1e-4, [0.5, 1.0]);
    let mut ok = true;
    let mut parts = Vec::new();
    let l = 5.0;
    let t0 = Instant::now();
    let phi = Analytic(move |p: Point| (PI * p.x / l).cos());
    let rect_reps = feynman_kac_field(&rect(l, 1.0), &phi, (PI / l).powi(2), 0.0, Point::new(1.0, 0.5), &times, n, dt, SEED)?;
    let secs_rect = t0.elapsed().as_secs_f64();
    let t0 = Instant::now();
    let ell = DomainSpec::ellipse(4.0, 1.0).build()?;
    let s = solve_in_place(&ell, 0.05)?;
    let ell_reps = feynman_kac_check(&s.domain, &s.mesh, &s.pair, Point::new(2.5, 0.3), &times, n, dt, SEED + 1)?;
    let secs_ell = t0.elapsed().as_secs_f64();
    for (name, reps, secs) in [("rectangle(5,1)", rect_reps, secs_rect), ("ellipse(4,1)", ell_reps, secs_ell)] {
        ok &= secs < 120.0;
        for r in reps {
            ok &= r.rel_error <= 0.02 && r.z_score.abs() <= 3.0;
            parts.push(format!("{name} t={}: rel {:.2e} z {:+.2}", r.t, r.rel_error, r.z_score));
        }
        parts.push(format!("{name} {secs:.0}s"));
    }
    Ok((ok, parts.join("; ")))
}

fn ac8() -> Result<Verdict> {
    let mut fits = Vec::new();
    for n in [5.0, 10.0, 20.0] {
        let (nd, _) = normalize(&rect(n, 1.0))?;
        let bins = triangulate(&nd, 0.25)?;
        let (_, inc) = inradius_incenter(&nd)?;
        let (lo, _) = nd.bbox();
        let corner = Point::new(lo.x + 0.5, lo.y + 0.5);
        fits.push(fit_gaussian_bounds(&nd, &bins, &[corner, inc], &[0.5, 2.0], 20_000, 1e-3, SEED + n as u64)?);
    }
    let mut ok = fits.iter().all(|f| f.violation_count == 0);
    let mut parts = Vec::new();
    for (name, get) in [("c1", 0), ("c2", 1), ("c3", 2), ("c4", 3)] {
        let v: Vec<f64> = fits.iter().map(|f| [f.c1, f.c2, f.c3, f.c4][get]).collect();
        let (lo, hi) = (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(0.0, f64::max));
        ok &= lo > 0.0 && hi.is_finite() && hi / lo < 4.0;
        parts.push(format!("{name} in [{lo:.3}, {hi:.3}]"));
    }
    let viol: usize = fits.iter().map(|f| f.violation_count).sum();
    Ok((ok, format!("{}; violations {viol}", parts.join(", "))))
}

fn ac9() -> Result<Verdict> {
    let (l, h, delta, t_ref) = (10.0, 1.0, 0.25, 1.0);
    let d = rect(l, h);
    let bins = triangulate(&d, 0.25)?;
    let x = Point::new(5.0, 0.5);
    let n = 100_000;
    let rep = verify_kernel_domination(&d, &bins, x, x, delta, t_ref, n, 2.5e-4, SEED)?;
    // Analytic supremum over the cells a histogram of this size would admit.
    let mut sup: f64 = 0.0;
    for c in 0..bins.n_triangles() {
        let p = bins.triangle_points(c).map(|q| [q.x, q.y]);
        let num = triangle_mean(p, 6, |z| rect_kernel(l, h, delta, [x.x, x.y], z));
        let den = triangle_mean(p, 6, |z| rect_kernel(l, h, t_ref, [x.x, x.y], z));
        if den * bins.triangle_area(c) * n as f64 >= 20.0 {
            sup = sup.max(num / den);
        }
    }
    let e = rel(rep.c_delta_hat, sup);
    // A domain with only a finite element description.
    let (ell, _) = normalize(&DomainSpec::ellipse(8.0, 1.0).build()?)?;
    let ell_bins = triangulate(&ell, 0.25)?;
    let (_, inc) = inradius_incenter(&ell)?;
    let spec = DomainSpec::ellipse(8.0, 1.0);
    let fem = verify_lemma3(&spec, &ell, &ell_bins, inc, inc, delta, 20_000, 1e-3, SEED + 9)?;
    let c_fem = fem.fitted_constants["c_delta_hat"];
    Ok((
        e <= 0.20 && fem.pass && c_fem.is_finite(),
        format!("c_hat = {:.4} vs analytic {sup:.4} (rel {e:.2e}); ellipse(8,1) c_hat = {c_fem:.4}", rep.c_delta_hat),
    ))
}

fn ac10() -> Result<Verdict> {
    let spec = DomainSpec::ellipse(16.0, 1.0);
    let s = solve_normalized(&spec.build()?, 0.1)?;
    let cfg = |seed| HittingConfig {
        barrier: Barrier::LeftOfHotSpot(3.0),
        offset_c2: 2.0,
        start_y: None,
        t_budget: 50.0,
        n_paths: 10_000,
        dt: 1e-3,
        seed,
    };
    let a = hitting_time_experiment(&s.domain, &s.mesh, &s.pair, &cfg(SEED))?;
    let b = hitting_time_experiment(&s.domain, &s.mesh, &s.pair, &cfg(SEED + 1))?;
    let sigma = (a.exp_weighted_stderr.powi(2) + b.exp_weighted_stderr.powi(2)).sqrt();
    let agree = (a.exp_weighted - b.exp_weighted).abs() <= 3.0 * sigma;
    let mech = [&a, &b].iter().all(|h| h.p_b <= 0.01 && h.exp_weighted > 1.0);
    // Control: a fiber far from both ends of a long rectangle behaves like a half-line.
    let c = 2.0;
    let ctl = hitting_times(&rect(40.0, 2.0), 20.0, Point::new(20.0 + c, 1.0), 0.0, 20.0, 10_000, 1e-3, SEED + 2)?;
    let oracle = first_passage_median(c);
    let e = rel(ctl.median_t, oracle);
    Ok((
        mech && agree && e <= 0.20,
        format!(
            "P(B) = {:.4}/{:.4}, E = {:.4}±{:.4} / {:.4}±{:.4}; control median {:.3} vs {oracle:.3} (rel {e:.2e})",
            a.p_b, b.p_b, a.exp_weighted, a.exp_weighted_stderr, b.exp_weighted, b.exp_weighted_stderr, ctl.median_t
        ),
    ))
}

fn ac11() -> Result<Verdict> {
    let mut specs = Vec::new();
    for (k, f) in family().iter().enumerate() {
        specs.extend(domain_family(f, hotspots::stochastic::rng::sub_seed(SEED, k as u64))?);
    }
    let m = specs.len();
    // Family-wise level 0.01, split evenly over the members.
    let alpha = 0.01 / m as f64;
    let mut min_p: f64 = 1.0;
    let mut raw_rejections = 0;
    let mut ok = true;
    for (i, spec) in specs.iter().enumerate() {
        let (nd, rep) = normalize(&spec.build()?)?;
        let t = 20.0 * rep.aspect_n * rep.aspect_n;
        let r = stationarity_test(&nd, None, t, 100, 5, alpha, SEED + i as u64)?;
        ok &= r.pass;
        min_p = min_p.min(r.p_value);
        raw_rejections += usize::from(r.p_value < 0.01);
    }
    Ok((ok, format!("{m} members, min p = {min_p:.4}, per-member alpha {alpha:.1e}, uncorrected rejections at 0.01: {raw_rejections}")))
}

fn ac12() -> Result<Verdict> {
    let (coarse, _) = sweeps();
    let reps = by_lemma(coarse, LemmaId::NodalWidth);
    let mut ok = !reps.is_empty();
    let (mut w, mut wn): (f64, f64) = (0.0, 0.0);
    for r in reps.values() {
        ok &= r.fitted_constants["aspect_N"] >= 8.0 && r.pass;
        w = w.max(r.fitted_constants["width"]);
        wn = wn.max(r.fitted_constants["width_times_N"]);
    }
    ok &= w <= 0.5 && wn <= 10.0;
    Ok((ok, format!("{} elongated members, max width = {w:.4}, max width*N = {wn:.3}", reps.len())))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Result<Verdict>); 12] = [
        (1, "rectangle eigenvalue", ac1),
        (2, "disk eigenvalue", ac2),
        (3, "disk hot-spot geometry", ac3),
        (4, "hot spots near diameter tips", ac4),
        (5, "diameter pair clustering", ac5),
        (6, "plateau constant", ac6),
        (7, "Feynman-Kac identity", ac7),
        (8, "Gaussian kernel bounds", ac8),
        (9, "kernel domination", ac9),
        (10, "hitting times", ac10),
        (11, "stationarity", ac11),
        (12, "nodal line width", ac12),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let (pass, detail) = match std::panic::catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok(v)) => v,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("AC{id:02} {verdict} {name}: {detail} [{:.1}s]", t0.elapsed().as_secs_f64());
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
