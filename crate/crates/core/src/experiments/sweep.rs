//! Family sweeps: every requested check on every member.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{domain_family, FamilySpec};
use super::gaussian::fit_gaussian_bounds;
use super::lemma4::{verify_lemma4, verify_nodal_width, LEMMA4_MIN_ASPECT};
use super::report::{LemmaId, VerificationReport};
use super::scaling::{scaling_report, verify_volume_comparability, ScalingEntry};
use super::solve::solve_normalized;
use super::theorem::{verify_main_theorem, MainTheoremOptions};
use super::verify::{theorem1_report, verify_hitting_time, verify_lemma1, verify_lemma3};
use crate::error::{Error, Result};
use crate::geometry::{diameter, inradius_incenter, DomainSpec};
use crate::mesh::triangulate;
use crate::stochastic::rng::sub_seed;
use crate::stochastic::{Barrier, HittingConfig};

fn d_h() -> f64 {
    0.1
}
fn d_c_main() -> f64 {
    10.0
}
fn d_c_lemma1() -> f64 {
    10.0
}
fn d_c_lemma4() -> f64 {
    100.0
}
fn d_rel_tol() -> f64 {
    1e-3
}
fn d_delta() -> f64 {
    0.25
}
fn d_pairs() -> usize {
    200
}
fn d_width() -> f64 {
    0.5
}
fn d_width_n() -> f64 {
    10.0
}
fn d_scaling_bound() -> f64 {
    4.0 * std::f64::consts::PI.powi(2)
}
fn d_n_paths() -> usize {
    20_000
}
fn d_dt() -> f64 {
    1e-3
}
fn d_bin_h() -> f64 {
    0.25
}
fn d_offset() -> f64 {
    2.0
}
fn d_budget() -> f64 {
    50.0
}
fn d_p_b() -> f64 {
    0.01
}
fn d_lemmas() -> Vec<LemmaId> {
    vec![
        LemmaId::MainTheorem,
        LemmaId::Lemma1,
        LemmaId::Lemma2,
        LemmaId::Lemma4,
        LemmaId::NodalWidth,
        LemmaId::EigenvalueScaling,
    ]
}

/// Sweep settings. Lengths are in normalized units (inradius 1).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub families: Vec<FamilySpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_lemmas")]
    pub lemmas: Vec<LemmaId>,
    #[serde(default = "d_h")]
    pub h: f64,
    #[serde(default = "d_c_main")]
    pub c_max_main: f64,
    #[serde(default = "d_c_lemma1")]
    pub c_max_lemma1: f64,
    #[serde(default = "d_c_lemma4")]
    pub c_max_lemma4: f64,
    #[serde(default = "d_rel_tol")]
    pub lemma1_rel_tol: f64,
    #[serde(default = "d_delta")]
    pub delta: f64,
    #[serde(default = "d_pairs")]
    pub volume_pairs: usize,
    #[serde(default = "d_width")]
    pub width_max: f64,
    #[serde(default = "d_width_n")]
    pub width_n_max: f64,
    #[serde(default = "d_scaling_bound")]
    pub scaling_bound: f64,
    #[serde(default = "d_n_paths")]
    pub n_paths: usize,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_bin_h")]
    pub kernel_bin_h: f64,
    #[serde(default = "d_offset")]
    pub offset_c2: f64,
    #[serde(default = "d_budget")]
    pub t_budget: f64,
    #[serde(default = "d_p_b")]
    pub p_b_max: f64,
}

impl SweepConfig {
    pub fn new(families: Vec<FamilySpec>, seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "families": families, "seed": seed })).expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(crate::error::invalid(field, format!("must be positive and finite, got {v}")))
            }
        };
        pos("h", self.h)?;
        pos("c_max_main", self.c_max_main)?;
        pos("c_max_lemma1", self.c_max_lemma1)?;
        pos("c_max_lemma4", self.c_max_lemma4)?;
        pos("dt", self.dt)?;
        pos("kernel_bin_h", self.kernel_bin_h)?;
        pos("t_budget", self.t_budget)?;
        if !(self.lemma1_rel_tol > 0.0 && self.lemma1_rel_tol <= 1e-3) {
            return Err(crate::error::invalid("lemma1_rel_tol", "must lie in (0, 1e-3]"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(crate::error::invalid("delta", "must lie in (0, 1]"));
        }
        if self.families.is_empty() {
            return Err(crate::error::invalid("families", "need at least one family"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Skipped {
    pub domain: String,
    pub lemma: LemmaId,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub reports: Vec<VerificationReport>,
    pub skipped: Vec<Skipped>,
}

impl SweepOutput {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

type MemberOut = (Vec<VerificationReport>, Vec<Skipped>, ScalingEntry);

fn member(cfg: &SweepConfig, idx: usize, spec: &DomainSpec) -> Result<MemberOut> {
    let want = |l: LemmaId| cfg.lemmas.contains(&l);
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    let mut skip = |lemma: LemmaId, reason: String| skipped.push(Skipped { domain: spec.label(), lemma, reason });
    let raw = spec.build()?;
    let s = solve_normalized(&raw, cfg.h)?;
    let n = s.normalization.aspect_n;
    let seed = sub_seed(cfg.seed, 1_000_000 + idx as u64);
    if want(LemmaId::MainTheorem) {
        let opts = MainTheoremOptions { c_max: cfg.c_max_main, ..Default::default() };
        reports.push(verify_main_theorem(spec, &s, &opts)?);
    }
    if want(LemmaId::Lemma1) {
        match verify_lemma1(spec, &s.domain, cfg.lemma1_rel_tol, cfg.c_max_lemma1) {
            Ok(r) => reports.push(r),
            Err(Error::InvalidParameter { field: "domain", reason }) => skip(LemmaId::Lemma1, reason),
            Err(e) => return Err(e),
        }
    }
    if want(LemmaId::Lemma2) {
        reports.push(verify_volume_comparability(spec, &s.domain, cfg.delta, cfg.volume_pairs, seed)?);
    }
    let elongated = n >= LEMMA4_MIN_ASPECT;
    if want(LemmaId::Lemma4) {
        if elongated {
            reports.push(verify_lemma4(spec, &s, cfg.c_max_lemma4)?);
        } else {
            skip(LemmaId::Lemma4, format!("outside elongated regime (aspect_N = {n:.3})"));
        }
    }
    if want(LemmaId::NodalWidth) {
        if elongated {
            reports.push(verify_nodal_width(spec, &s, cfg.width_max, cfg.width_n_max)?);
        } else {
            skip(LemmaId::NodalWidth, format!("outside elongated regime (aspect_N = {n:.3})"));
        }
    }
    let needs_mc = want(LemmaId::Lemma3) || want(LemmaId::Theorem1Bounds);
    if needs_mc {
        let bins = triangulate(&s.domain, cfg.kernel_bin_h)?;
        let (_, inc) = inradius_incenter(&s.domain)?;
        if want(LemmaId::Lemma3) {
            reports.push(verify_lemma3(spec, &s.domain, &bins, inc, inc, cfg.delta, cfg.n_paths, cfg.dt, seed)?);
        }
        if want(LemmaId::Theorem1Bounds) {
            let (a, _, _) = diameter(&s.domain);
            let u = inc - a;
            let tip = a + u * (0.5f64.min(u.norm()) / u.norm());
            let fit = fit_gaussian_bounds(&s.domain, &bins, &[inc, tip], &[0.5, 2.0], cfg.n_paths, cfg.dt, seed)?;
            reports.push(theorem1_report(spec, &fit, seed)?);
        }
    }
    if want(LemmaId::HittingTime) {
        if elongated {
            let hc = HittingConfig {
                barrier: Barrier::LeftOfHotSpot(cfg.offset_c2 + 1.0),
                offset_c2: cfg.offset_c2,
                start_y: None,
                t_budget: cfg.t_budget,
                n_paths: cfg.n_paths,
                dt: cfg.dt,
                seed,
            };
            reports.push(verify_hitting_time(spec, &s, &hc, cfg.p_b_max)?);
        } else {
            skip(LemmaId::HittingTime, format!("outside elongated regime (aspect_N = {n:.3})"));
        }
    }
    let entry = ScalingEntry { spec: spec.clone(), mu1: s.pair.mu1, n: s.normalization.x_extent };
    Ok((reports, skipped, entry))
}

/// Runs the sweep; members are processed in parallel and reported in family order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let mut members = Vec::new();
    for (k, f) in cfg.families.iter().enumerate() {
        for s in domain_family(f, sub_seed(cfg.seed, k as u64))? {
            members.push((k, s));
        }
    }
    let per: Vec<MemberOut> = members
        .par_iter()
        .enumerate()
        .map(|(i, (_, spec))| member(cfg, i, spec))
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    let mut entries: Vec<Vec<ScalingEntry>> = vec![Vec::new(); cfg.families.len()];
    for ((k, _), (r, s, e)) in members.iter().zip(per) {
        reports.extend(r);
        skipped.extend(s);
        entries[*k].push(e);
    }
    if cfg.lemmas.contains(&LemmaId::EigenvalueScaling) {
        for (k, specs) in entries.iter().enumerate() {
            if specs.len() >= 4 {
                reports.push(scaling_report(specs, cfg.h, cfg.scaling_bound, 0.01)?);
            } else {
                skipped.push(Skipped {
                    domain: format!("family {k}"),
                    lemma: LemmaId::EigenvalueScaling,
                    reason: format!("needs at least 4 members, has {}", specs.len()),
                });
            }
        }
    }
    Ok(SweepOutput { config: cfg.clone(), reports, skipped })
}
