//! Run configuration: an optional JSON file overlaid by command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hotspots::experiments::{FamilySpec, LemmaId, SweepConfig};
use hotspots::geometry::{DomainSpec, Shape};
use hotspots::stochastic::Barrier;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Hotspots,
    Simulate,
    FeynmanKac,
    HeatKernel,
    Verify,
    Sweep,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Hotspots => "hotspots",
            Command::Simulate => "simulate",
            Command::FeynmanKac => "feynman-kac",
            Command::HeatKernel => "heat-kernel",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

/// Contents of a `--config` file. Every field is optional; flags win.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub domain: Option<DomainSpec>,
    pub lemma: Option<LemmaId>,
    pub sweep: Option<SweepConfig>,
    pub families: Option<Vec<FamilySpec>>,
    pub h: Option<f64>,
    pub dt: Option<f64>,
    pub n_paths: Option<usize>,
    pub t: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub band_epsilon: Option<f64>,
    pub c_max: Option<f64>,
    pub start: Option<[f64; 2]>,
    pub target: Option<[f64; 2]>,
    pub offset_c2: Option<f64>,
    pub t_budget: Option<f64>,
    pub barrier_x: Option<f64>,
    pub normalize: Option<bool>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub dump_mesh: Option<bool>,
    pub dump_eigen: Option<bool>,
    pub dump_endpoints: Option<bool>,
}

#[derive(Debug, Parser)]
#[command(name = "hotspots", version, about = "Neumann eigenpairs, reflected Brownian motion and hot-spot checks on convex polygons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Mesh the domain and compute the first nontrivial Neumann eigenpair.
    Solve(Common),
    /// Locate global extrema and the nodal line.
    Hotspots(Common),
    /// Simulate reflected Brownian motion and dump the endpoints.
    Simulate(Common),
    /// Compare path averages of the eigenfunction with e^{-mu t} phi(x).
    FeynmanKac(Common),
    /// Histogram of the heat kernel on mesh triangles.
    HeatKernel(Common),
    /// Run one verification.
    Verify(Common),
    /// Run verifications over domain families.
    Sweep(Common),
}

impl Sub {
    pub fn split(self) -> (Command, Common) {
        match self {
            Sub::Solve(c) => (Command::Solve, c),
            Sub::Hotspots(c) => (Command::Hotspots, c),
            Sub::Simulate(c) => (Command::Simulate, c),
            Sub::FeynmanKac(c) => (Command::FeynmanKac, c),
            Sub::HeatKernel(c) => (Command::HeatKernel, c),
            Sub::Verify(c) => (Command::Verify, c),
            Sub::Sweep(c) => (Command::Sweep, c),
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Domain kind (polygon, rectangle, ellipse, stadium, disk, random_hull) or a JSON file.
    #[arg(long)]
    pub domain: Option<String>,
    /// Rectangle length (alias of --length).
    #[arg(long = "N")]
    pub n: Option<f64>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub semi_major: Option<f64>,
    #[arg(long)]
    pub semi_minor: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub box_length: Option<f64>,
    #[arg(long)]
    pub box_height: Option<f64>,
    /// Polygon vertices as "x,y;x,y;...".
    #[arg(long)]
    pub vertices: Option<String>,
    /// Vertex count for curved shapes.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub lemma: Option<String>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub n_paths: Option<usize>,
    /// Output time(s); repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub band_epsilon: Option<f64>,
    #[arg(long)]
    pub c_max: Option<f64>,
    /// Start or source point "x,y".
    #[arg(long)]
    pub start: Option<String>,
    /// Second point "x,y" (kernel domination reference).
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub offset_c2: Option<f64>,
    #[arg(long)]
    pub t_budget: Option<f64>,
    #[arg(long)]
    pub barrier_x: Option<f64>,
    /// Work in the normalized frame (unit inradius, minimal width vertical).
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short = 'o')]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub dump_mesh: bool,
    #[arg(long)]
    pub dump_eigen: bool,
    #[arg(long)]
    pub dump_endpoints: bool,
}

/// Input or configuration problem; maps to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad(field: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("invalid `{field}`: {reason}"))
}

fn parse_point(field: &str, s: &str) -> Result<[f64; 2], ConfigError> {
    let v: Vec<&str> = s.split(',').map(str::trim).collect();
    if v.len() != 2 {
        return Err(bad(field, format!("expected \"x,y\", got {s:?}")));
    }
    let x = v[0].parse::<f64>().map_err(|e| bad(field, e))?;
    let y = v[1].parse::<f64>().map_err(|e| bad(field, e))?;
    Ok([x, y])
}

fn parse_vertices(s: &str) -> Result<Vec<[f64; 2]>, ConfigError> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(|p| parse_point("vertices", p)).collect()
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub command: Command,
    pub domain: Option<DomainSpec>,
    pub lemma: Option<LemmaId>,
    pub sweep: Option<SweepConfig>,
    pub families: Option<Vec<FamilySpec>>,
    pub h: Option<f64>,
    pub dt: Option<f64>,
    pub n_paths: Option<usize>,
    pub t: Option<Vec<f64>>,
    pub delta: f64,
    pub band_epsilon: f64,
    pub c_max: Option<f64>,
    pub start: Option<[f64; 2]>,
    pub target: Option<[f64; 2]>,
    pub offset_c2: f64,
    pub t_budget: f64,
    pub barrier: Barrier,
    pub normalize: bool,
    pub seed: u64,
    /// Whether `seed` came from a flag or the top level of the config file.
    pub seed_explicit: bool,
    pub output_dir: PathBuf,
    pub dump_mesh: bool,
    pub dump_eigen: bool,
    pub dump_endpoints: bool,
}

fn domain_from_flags(c: &Common, base: Option<DomainSpec>) -> Result<Option<DomainSpec>, ConfigError> {
    let Some(kind) = &c.domain else {
        return Ok(base.map(|b| patch(b, c)));
    };
    let mut spec = if kind.ends_with(".json") {
        let text = std::fs::read_to_string(kind).map_err(|e| bad("domain", format!("{kind}: {e}")))?;
        DomainSpec::from_json(&text).map_err(|e| bad("domain", e))?
    } else {
        let len = c.n.or(c.length);
        let shape = match kind.as_str() {
            "rectangle" => Shape::Rectangle {
                length: len.ok_or_else(|| bad("N", "rectangle needs --N or --length"))?,
                height: c.height.unwrap_or(1.0),
            },
            "ellipse" => Shape::Ellipse {
                semi_major: c.semi_major.or(len).ok_or_else(|| bad("semi_major", "ellipse needs --semi-major"))?,
                semi_minor: c.semi_minor.unwrap_or(1.0),
            },
            "stadium" => Shape::Stadium {
                length: len.ok_or_else(|| bad("length", "stadium needs --length"))?,
                radius: c.radius.unwrap_or(0.5),
            },
            "disk" => Shape::Disk { radius: c.radius.unwrap_or(1.0) },
            "random_hull" => Shape::RandomHull {
                points: c.points.unwrap_or(20),
                box_length: c.box_length.or(len).ok_or_else(|| bad("box_length", "random_hull needs --box-length"))?,
                box_height: c.box_height.unwrap_or(1.0),
            },
            "polygon" => Shape::Polygon {
                vertices: parse_vertices(c.vertices.as_deref().ok_or_else(|| bad("vertices", "polygon needs --vertices"))?)?,
            },
            other => return Err(bad("domain", format!("unknown kind {other:?}"))),
        };
        DomainSpec::new(shape)
    };
    if let Some(k) = c.k {
        spec.polygonalization_k = k;
    }
    if let Some(s) = c.seed {
        if matches!(spec.shape, Shape::RandomHull { .. }) {
            spec.seed = s;
        }
    }
    Ok(Some(spec))
}

/// Applies shape flags to a domain that came from the config file.
fn patch(mut spec: DomainSpec, c: &Common) -> DomainSpec {
    let len = c.n.or(c.length);
    match &mut spec.shape {
        Shape::Rectangle { length, height } => {
            set(length, len);
            set(height, c.height);
        }
        Shape::Ellipse { semi_major, semi_minor } => {
            set(semi_major, c.semi_major);
            set(semi_minor, c.semi_minor);
        }
        Shape::Stadium { length, radius } => {
            set(length, len);
            set(radius, c.radius);
        }
        Shape::Disk { radius } => set(radius, c.radius),
        Shape::RandomHull { points, box_length, box_height } => {
            set(points, c.points);
            set(box_length, c.box_length.or(len));
            set(box_height, c.box_height);
        }
        Shape::Polygon { .. } => {}
    }
    if let Some(k) = c.k {
        spec.polygonalization_k = k;
    }
    spec
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn check_pos(field: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(bad(field, format!("must be positive and finite, got {x}"))),
        _ => Ok(()),
    }
}

pub fn resolve(command: Command, c: Common) -> Result<Resolved, ConfigError> {
    let file: RunConfig = match &c.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| bad("config", format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| bad("config", format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(fc) = file.command {
        if fc != command {
            return Err(bad("command", format!("config file is for `{}`, invoked `{}`", fc.as_str(), command.as_str())));
        }
    }
    let domain = domain_from_flags(&c, file.domain.clone())?;
    let lemma = match &c.lemma {
        Some(s) => Some(LemmaId::parse(s).ok_or_else(|| {
            let names: Vec<&str> = LemmaId::ALL.iter().map(|l| l.as_str()).collect();
            bad("lemma", format!("unknown {s:?}; expected one of {}", names.join(", ")))
        })?),
        None => file.lemma,
    };
    let start = match &c.start {
        Some(s) => Some(parse_point("start", s)?),
        None => file.start,
    };
    let target = match &c.target {
        Some(s) => Some(parse_point("target", s)?),
        None => file.target,
    };
    let barrier_x = c.barrier_x.or(file.barrier_x);
    let offset_c2 = c.offset_c2.or(file.offset_c2).unwrap_or(2.0);
    let r = Resolved {
        command,
        domain,
        lemma,
        sweep: file.sweep,
        families: file.families,
        h: c.h.or(file.h),
        dt: c.dt.or(file.dt),
        n_paths: c.n_paths.or(file.n_paths),
        t: c.t.or(file.t),
        delta: c.delta.or(file.delta).unwrap_or(0.25),
        band_epsilon: c.band_epsilon.or(file.band_epsilon).unwrap_or(1e-3),
        c_max: c.c_max.or(file.c_max),
        start,
        target,
        offset_c2,
        t_budget: c.t_budget.or(file.t_budget).unwrap_or(50.0),
        barrier: barrier_x.map_or(Barrier::LeftOfHotSpot(offset_c2 + 1.0), Barrier::At),
        normalize: c.normalize || file.normalize.unwrap_or(false),
        seed: c.seed.or(file.seed).unwrap_or(0),
        seed_explicit: c.seed.or(file.seed).is_some(),
        output_dir: c.output_dir.or(file.output_dir).unwrap_or_else(|| PathBuf::from("hotspots-out")),
        dump_mesh: c.dump_mesh || file.dump_mesh.unwrap_or(false),
        dump_eigen: c.dump_eigen || file.dump_eigen.unwrap_or(false),
        dump_endpoints: c.dump_endpoints || file.dump_endpoints.unwrap_or(false),
    };
    validate(&r)?;
    Ok(r)
}

fn validate(r: &Resolved) -> Result<(), ConfigError> {
    check_pos("h", r.h)?;
    check_pos("dt", r.dt)?;
    check_pos("c_max", r.c_max)?;
    check_pos("t_budget", Some(r.t_budget))?;
    if !(r.delta > 0.0 && r.delta <= 1.0) {
        return Err(bad("delta", format!("must lie in (0, 1], got {}", r.delta)));
    }
    if !(0.0..=0.05).contains(&r.band_epsilon) {
        return Err(bad("band_epsilon", format!("must lie in [0, 0.05], got {}", r.band_epsilon)));
    }
    if !(r.offset_c2 >= 0.0 && r.offset_c2.is_finite()) {
        return Err(bad("offset_c2", format!("must be non-negative, got {}", r.offset_c2)));
    }
    if let Some(n) = r.n_paths {
        if n == 0 {
            return Err(bad("n_paths", "must be positive"));
        }
    }
    if let Some(ts) = &r.t {
        if ts.is_empty() || ts.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(bad("t", "times must be finite and non-negative"));
        }
    }
    if let Some(d) = &r.domain {
        d.build().map_err(|e| bad("domain", e))?;
    }
    let needs_domain = !matches!(r.command, Command::Sweep) && !matches!(r.lemma, Some(LemmaId::EigenvalueScaling));
    if needs_domain && r.domain.is_none() {
        return Err(bad("domain", "no domain given (use --domain or the config file)"));
    }
    if r.command == Command::Verify && r.lemma.is_none() {
        return Err(bad("lemma", "verify needs --lemma"));
    }
    if r.command == Command::Sweep && r.sweep.is_none() && r.families.is_none() {
        return Err(bad("sweep", "sweep needs a config file with `sweep` or `families`"));
    }
    if let Some(s) = &r.sweep {
        s.validate().map_err(|e| bad("sweep", e))?;
    }
    Ok(())
}
