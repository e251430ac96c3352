//! Verification reports whose verdict can be recomputed from their contents.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use crate::fmt_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    MainTheorem,
    Lemma1,
    Lemma2,
    Lemma3,
    Lemma4,
    Theorem1Bounds,
    EigenvalueScaling,
    NodalWidth,
    HittingTime,
}

impl LemmaId {
    pub const ALL: [LemmaId; 9] = [
        LemmaId::MainTheorem,
        LemmaId::Lemma1,
        LemmaId::Lemma2,
        LemmaId::Lemma3,
        LemmaId::Lemma4,
        LemmaId::Theorem1Bounds,
        LemmaId::EigenvalueScaling,
        LemmaId::NodalWidth,
        LemmaId::HittingTime,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::MainTheorem => "main_theorem",
            LemmaId::Lemma1 => "lemma1",
            LemmaId::Lemma2 => "lemma2",
            LemmaId::Lemma3 => "lemma3",
            LemmaId::Lemma4 => "lemma4",
            LemmaId::Theorem1Bounds => "theorem1_bounds",
            LemmaId::EigenvalueScaling => "eigenvalue_scaling",
            LemmaId::NodalWidth => "nodal_width",
            LemmaId::HittingTime => "hitting_time",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl std::fmt::Display for LemmaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `constant ≤ tolerance`
    Le,
    /// `constant ≥ tolerance`
    Ge,
    /// `constant > tolerance`
    Gt,
    /// `constant < tolerance`
    Lt,
}

/// One comparison between a fitted constant and a tolerance, both by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub constant: String,
    pub relation: Relation,
    pub tolerance: String,
}

impl Check {
    pub fn new(constant: &str, relation: Relation, tolerance: &str) -> Self {
        Self {
            constant: constant.into(),
            relation,
            tolerance: tolerance.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lemma_id: LemmaId,
    pub domain_label: String,
    pub domain_spec: serde_json::Value,
    pub fitted_constants: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub runtime_seconds: f64,
    pub seed: u64,
    /// Informational remarks, e.g. the domain is outside the elongated regime.
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(lemma_id: LemmaId, domain_label: impl Into<String>, domain_spec: serde_json::Value, seed: u64) -> Self {
        Self {
            lemma_id,
            domain_label: domain_label.into(),
            domain_spec,
            fitted_constants: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
            pass: false,
            runtime_seconds: 0.0,
            seed,
            notes: Vec::new(),
        }
    }

    pub fn constant(&mut self, name: &str, value: f64) -> &mut Self {
        self.fitted_constants.insert(name.into(), value);
        self
    }

    pub fn tolerance(&mut self, name: &str, value: f64) -> &mut Self {
        self.tolerances.insert(name.into(), value);
        self
    }

    /// Adds `constant relation tolerance` with both values.
    pub fn require(&mut self, name: &str, value: f64, relation: Relation, tol_name: &str, tol: f64) -> &mut Self {
        self.constant(name, value);
        self.tolerance(tol_name, tol);
        self.checks.push(Check::new(name, relation, tol_name));
        self
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    /// Verdict recomputed from `fitted_constants`, `tolerances` and `checks`.
    /// Missing or NaN entries fail.
    pub fn audit(&self) -> bool {
        !self.checks.is_empty()
            && self.checks.iter().all(|c| {
                let (Some(&v), Some(&t)) = (self.fitted_constants.get(&c.constant), self.tolerances.get(&c.tolerance)) else {
                    return false;
                };
                match c.relation {
                    Relation::Le => v <= t,
                    Relation::Ge => v >= t,
                    Relation::Gt => v > t,
                    Relation::Lt => v < t,
                }
            })
    }

    pub fn finish(mut self, started: Instant) -> Self {
        self.pass = self.audit();
        self.runtime_seconds = started.elapsed().as_secs_f64();
        self
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks
            .iter()
            .filter(|c| {
                let mut one = self.clone();
                one.checks = vec![(*c).clone()];
                !one.audit()
            })
            .collect()
    }
}

pub const SWEEP_CSV_HEADER: &str = "domain,lemma,pass,seed,fitted_constants";

/// One row per report; constants are `name=value` pairs joined by `;`.
/// Wall-clock time stays in the JSON bundle so the table is reproducible.
pub fn write_reports_csv<W: Write>(reports: &[VerificationReport], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in reports {
        let consts: Vec<String> = r.fitted_constants.iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect();
        writeln!(
            w,
            "{},{},{},{},{}",
            r.domain_label.replace(',', ";"),
            r.lemma_id,
            r.pass,
            r.seed,
            consts.join(";")
        )?;
    }
    Ok(())
}
