use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hotspots"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--output-dir").arg(out).output().expect("binary runs")
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap()
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

#[test]
fn solve_rectangle_first_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--domain", "rectangle", "--N", "10", "--h", "0.05"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mu1 = read_json(dir.path().join("solve.json"))["mu1"].as_f64().unwrap();
    let exact = std::f64::consts::PI.powi(2) / 100.0;
    assert!((mu1 - exact).abs() / exact < 0.01, "mu1 = {mu1}");
}

#[test]
fn disk_orthogonal_pair_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--lemma", "main_theorem", "--domain", "disk"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(dir.path().join("reports.json"));
    let c = v["reports"][0]["fitted_constants"]["c_orthogonal_pair"].as_f64().unwrap();
    assert!((c - 2f64.sqrt()).abs() < 0.05, "c = {c}");
}

#[test]
fn malformed_config_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"h\": 0.1,").unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"domain": {"kind": "disk"}, "mesh_size": 0.1}"#).unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mesh_size"));
    assert!(!out.exists());
}

#[test]
fn numerical_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for args in [
        &["solve", "--domain", "rectangle", "--N", "-1"][..],
        &["solve", "--domain", "hexagon"],
        &["verify", "--domain", "disk"],
        &["verify", "--lemma", "lemma9", "--domain", "disk"],
        &["simulate", "--domain", "disk", "--start", "5,5"],
    ] {
        let o = run(args, &out);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!out.exists(), "{args:?}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["solve", "--config"])
        .arg(repo("configs/solve_rectangle.json"))
        .args(["--N", "5", "--output-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(dir.path().join("solve.json"));
    assert_eq!(v["domain"]["length"].as_f64(), Some(5.0));
    assert!(dir.path().join("eigen.csv").exists());
    let exact = std::f64::consts::PI.powi(2) / 25.0;
    assert!((v["mu1"].as_f64().unwrap() - exact).abs() / exact < 0.01);
}

#[test]
fn failed_verification_still_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--lemma", "lemma1", "--domain", "rectangle", "--N", "10", "--c-max", "0.5"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let v = read_json(dir.path().join("reports.json"));
    assert_eq!(v["reports"][0]["pass"], Value::Bool(false));
    assert!(dir.path().join("reports.csv").exists());
    assert!(dir.path().join("manifest.json").exists());
}

fn manifest_files(dir: &Path) -> BTreeSet<String> {
    let m = read_json(dir.join("manifest.json"));
    let mut seen = BTreeSet::new();
    for f in m["files"].as_array().unwrap() {
        let name = f["path"].as_str().unwrap();
        let bytes = std::fs::read(dir.join(name)).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"].as_str().unwrap(), digest);
        seen.insert(name.to_string());
    }
    seen
}

#[test]
fn sweep_is_reproducible_and_manifest_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"sweep": {"families": [{"family": "rectangles", "ns": [4, 6, 8, 10]},
                                    {"family": "random_hulls", "count": 2}]}, "seed": 3}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = run(&["sweep", "--config", cfg.to_str().unwrap()], &a);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    let ob = bin()
        .env("HOTSPOTS_WORKERS", "1")
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--output-dir"])
        .arg(&b)
        .output()
        .unwrap();
    assert_eq!(ob.status.code(), Some(0));
    for f in ["sweep.csv", "skipped.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let listed = manifest_files(&a);
    let on_disk: BTreeSet<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    assert_eq!(listed, on_disk);
    let ha = read_json(a.join("manifest.json"))["config_hash"].clone();
    let hb = read_json(b.join("manifest.json"))["config_hash"].clone();
    assert_eq!(ha, hb);
    let csv = std::fs::read_to_string(a.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("domain,lemma,pass,seed,fitted_constants\n"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("true")));
}

#[test]
fn bad_worker_count_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = bin()
        .env("HOTSPOTS_WORKERS", "zero")
        .args(["solve", "--domain", "disk", "--output-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn simulate_dumps_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--domain", "rectangle", "--N", "3", "--t", "0.2,0.4", "--n-paths", "500", "--seed", "9", "--dump-endpoints"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&args, &a).status.code(), Some(0));
    assert_eq!(run(&args, &b).status.code(), Some(0));
    for f in ["simulate.csv", "endpoints_0.csv", "endpoints_1.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let ends = std::fs::read_to_string(a.join("endpoints_1.csv")).unwrap();
    assert_eq!(ends.lines().count(), 501);
    manifest_files(&a);
}

#[test]
fn hotspots_and_heat_kernel_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let o = run(&["hotspots", "--domain", "ellipse", "--semi-major", "4", "--semi-minor", "1", "--normalize", "--dump-mesh"], &a);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(a.join("hotspots.json"));
    let x_max = v["hot_spots"]["maxima"][0]["point"]["x"].as_f64().unwrap();
    assert!(x_max.abs() > 7.0, "normalized ellipse extends to |x| = 8, got {x_max}");
    assert!(a.join("mesh_nodes.csv").exists() && a.join("nodal_line.csv").exists());

    let b = dir.path().join("b");
    let o = run(&["heat-kernel", "--domain", "disk", "--n-paths", "10000", "--t", "0.05"], &b);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mass = read_json(b.join("heat_kernel.json"))["mass"][0].as_f64().unwrap();
    assert!((mass - 1.0).abs() < 1e-9);
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn schemas_match_serialized_types() {
    let sweep = read_json(repo("schema/sweep.schema.json"));
    let cfg = hotspots::experiments::SweepConfig::new(vec![hotspots::experiments::FamilySpec::random_hulls(1)], 0);
    assert_eq!(keys(&sweep["properties"]), keys(&serde_json::to_value(&cfg).unwrap()));

    let domain = read_json(repo("schema/domain.schema.json"));
    let spec = hotspots::geometry::DomainSpec::random_hull(10, 5.0, 1.0, 0);
    let mut expected = keys(&domain["properties"]);
    expected.extend(keys(&domain["oneOf"][5]["properties"]));
    assert_eq!(expected, keys(&serde_json::to_value(&spec).unwrap()));

    let run_cfg = read_json(repo("schema/run_config.schema.json"));
    assert!(keys(&run_cfg["properties"]).contains("domain"));
}

#[test]
fn shipped_configs_parse() {
    for f in ["solve_rectangle.json", "verify_disk.json", "sweep_standard.json", "sweep_monte_carlo.json"] {
        let v = read_json(repo(&format!("configs/{f}")));
        let run_cfg = read_json(repo("schema/run_config.schema.json"));
        let allowed = keys(&run_cfg["properties"]);
        for k in keys(&v) {
            assert!(allowed.contains(&k), "{f}: {k}");
        }
        if let Some(s) = v.get("sweep") {
            serde_json::from_value::<hotspots::experiments::SweepConfig>(s.clone()).unwrap();
        }
        if let Some(d) = v.get("domain") {
            serde_json::from_value::<hotspots::geometry::DomainSpec>(d.clone()).unwrap().build().unwrap();
        }
    }
}
