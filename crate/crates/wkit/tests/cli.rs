use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use wkit::formats::atlas::AtlasJson;
use wkit::formats::certificate::CertificateFile;
use wkit::formats::domain::DomainSpec;
use wkit::formats::jet::parse_jet_text;
use wkit::formats::tables::read_probes;

fn wkit(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wkit")).args(args).output().expect("run wkit");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn experiment(dir: &Path, kind: &str, config: &str, extra: &[&str]) -> (i32, Value) {
    let cfg = dir.join(format!("{kind}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(kind);
    let mut args = vec![kind, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, stderr) = wkit(&args);
    let report = fs::read_to_string(out.join("report.json")).unwrap_or_else(|_| panic!("no report: {stderr}"));
    (code, serde_json::from_str(&report).unwrap())
}

#[test]
fn half_space_roundtrip_reproduces_a_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "domain": {"generator": "half_space", "params": {"dim": 2, "half_width": 1}, "resolution": 0.05},
        "order": 2,
        "function": {"type": "random_polynomial", "degree": 2}
    }"#;
    let (code, report) = experiment(dir.path(), "roundtrip", config, &["--seed", "3"]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["results"]["restriction_defect"], 0.0);
    assert!(report["results"]["polynomial_relative_error"].as_f64().unwrap() <= 5e-3);
    assert_eq!(report["seed"], 3);

    let out = dir.path().join("roundtrip");
    let probes = read_probes(fs::File::open(out.join("probes.csv")).unwrap()).unwrap();
    assert_eq!(probes.len() as u64, report["results"]["probes"].as_u64().unwrap());
    assert!(fs::read_to_string(out.join("probes.csv")).unwrap().starts_with("x1,x2,ef,dist_to_c\n"));
    let jet = parse_jet_text(&fs::read_to_string(out.join("jet.txt")).unwrap()).unwrap();
    assert_eq!((jet.order(), jet.dim()), (2, 2));
}

#[test]
fn default_half_space_roundtrip_has_zero_restriction_defect() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"domain": {"generator": "half_space", "params": {}}, "order": 2}"#;
    let (code, report) = experiment(dir.path(), "roundtrip", config, &[]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["results"]["restriction_defect"], 0.0);
    assert_eq!(report["schema"], 1);
    assert_eq!(report["seed"], 0);
    assert!(report["resolution"].as_f64().unwrap() > 0.0);
    assert!(report["tolerances"]["restriction"].as_f64().unwrap() > 0.0);
}

#[test]
fn exp_cusp_extension_is_refused_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"domain": {"generator": "exp_cusp_domain", "params": {}, "resolution": 0.002}, "order": 1}"#;
    let (code, report) = experiment(dir.path(), "extend", config, &[]);
    assert_eq!(code, 1);
    assert_eq!(report["verdict"], "fail");
    let check = &report["results"]["jet_check"];
    let ratio = check["verdict"]["witness"]["ratio"].as_f64().unwrap();
    assert!((0.99..=1.01).contains(&ratio), "{ratio}");
    assert_eq!(check["q"].as_array().unwrap().len(), 5);
    assert!(!dir.path().join("extend/probes.csv").exists());
}

#[test]
fn koch_cusp_certificate_verifies_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"domain": {"generator": "koch_snowflake", "params": {"iterations": 4}, "resolution": 0.005}}"#;
    let (code, report) = experiment(dir.path(), "check-cusp", config, &[]);
    assert_eq!(code, 0, "{report}");
    let text = fs::read_to_string(dir.path().join("check-cusp/certificate.json")).unwrap();
    let cert = CertificateFile::from_json(&text).unwrap();
    cert.verify_checksum().unwrap();
    assert_eq!(cert.replay().unwrap(), Ok(()));
    assert_eq!(report["results"]["checksum"], cert.checksum.as_str());

    let tampered = text.replacen("\"probe_count\": 100", "\"probe_count\": 99", 1);
    assert_ne!(tampered, text);
    assert!(CertificateFile::from_json(&tampered).unwrap().verify_checksum().is_err());
}

#[test]
fn fjord_check_certifies_the_disk_and_rejects_the_exp_cusp() {
    let dir = tempfile::tempdir().unwrap();
    let disk = r#"{"domain": {"generator": "closed_ball", "params": {"radius": 1}, "resolution": 0.04}}"#;
    let (code, report) = experiment(dir.path(), "check-fjords", disk, &[]);
    assert_eq!(code, 0, "{report}");
    let cert = CertificateFile::from_json(&fs::read_to_string(dir.path().join("check-fjords/certificate.json")).unwrap())
        .unwrap();
    assert_eq!(cert.replay().unwrap(), Ok(()));

    let cusp = r#"{
        "domain": {"generator": "exp_cusp_domain", "params": {}, "resolution": 0.002},
        "fjord": {"base": [0, 0], "radius": 0.2, "stride": 1, "graph_radius": 0.24, "pairs": 40, "p": 6, "constant": 1}
    }"#;
    let sub = tempfile::tempdir().unwrap();
    let (code, report) = experiment(sub.path(), "check-fjords", cusp, &[]);
    assert_eq!(code, 1, "{report}");
    assert_eq!(report["results"]["certified"], false);
}

#[test]
fn gen_domain_writes_a_resolved_spec_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"domain": {"generator": "convex_polytope", "params": {"vertices": [[0,0],[1,0],[0.3,0.8]]}}}"#;
    let (code, report) = experiment(dir.path(), "gen-domain", config, &[]);
    assert_eq!(code, 0, "{report}");
    let out = dir.path().join("gen-domain");
    let spec: DomainSpec = serde_json::from_str(&fs::read_to_string(out.join("domain.json")).unwrap()).unwrap();
    assert_eq!(spec.resolution, Some(report["resolution"].as_f64().unwrap()));
    let samples = fs::read_to_string(out.join("samples.csv")).unwrap();
    let rows = samples.lines().count() - 1;
    let expected = report["results"]["boundary_samples"].as_u64().unwrap() + report["results"]["interior_samples"].as_u64().unwrap();
    assert_eq!(rows as u64, expected);
    assert!(samples.starts_with("x1,x2,kind\n"));
}

#[test]
fn patch_and_submersion_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = experiment(dir.path(), "patch", r#"{"patch": {"trials": 3}}"#, &[]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["results"]["restriction_defect_max"], 0.0);
    let atlas: AtlasJson = serde_json::from_str(&fs::read_to_string(dir.path().join("patch/atlas.json")).unwrap()).unwrap();
    assert_eq!(atlas.build().unwrap().len(), 2);
    let chart = fs::read_to_string(dir.path().join("patch/section_chart0.csv")).unwrap();
    assert!(chart.starts_with("point,u1,v1\n"));

    let (code, report) = experiment(dir.path(), "submersion", r#"{"submersion": {"trials": 5}}"#, &[]);
    assert_eq!(code, 0, "{report}");
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("submersion/submersion.json")).unwrap()).unwrap();
    for key in ["defect_max", "defect_mean", "trials", "grid_spacing"] {
        assert!(summary.get(key).is_some(), "{key} missing");
    }
    assert!(summary["defect_max"].as_f64().unwrap() <= 1e-6);
    let map = fs::read_to_string(dir.path().join("submersion/map.csv")).unwrap();
    assert!(map.starts_with("s1,y1,y2,y3\n"));
}

#[test]
fn reruns_are_byte_identical_and_seeds_matter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("patch.json");
    fs::write(&cfg, r#"{"patch": {"trials": 2}, "seed": 9}"#).unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["patch", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(wkit(&args).0, 0);
        out
    };
    let (a, b, c) = (run("a", &[]), run("b", &[]), run("c", &["--seed", "10"]));
    for f in ["report.json", "atlas.json", "section_chart0.csv", "section_chart1.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(fs::read(a.join("section_chart0.csv")).unwrap(), fs::read(c.join("section_chart0.csv")).unwrap());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let ok = write("ok.json", "{}");
    assert_eq!(wkit(&["no-such-experiment", "--config", &ok]).0, 2);
    assert_eq!(wkit(&["patch"]).0, 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(wkit(&["patch", "--config", missing.to_str().unwrap(), "--out", out]).0, 2);
    for (name, text, kind) in [
        ("unknown.json", r#"{"bogus": 1}"#, "patch"),
        ("syntax.json", "{", "patch"),
        ("mismatch.json", r#"{"kind": "submersion"}"#, "patch"),
        ("nodomain.json", "{}", "check-cusp"),
        ("badres.json", r#"{"domain": {"generator": "closed_ball", "params": {}, "resolution": -1}}"#, "gen-domain"),
        ("badtol.json", r#"{"tolerances": {"seam": 0}}"#, "patch"),
        ("badgen.json", r#"{"domain": {"generator": "torus", "params": {}}}"#, "gen-domain"),
    ] {
        let p = write(name, text);
        let (code, stderr) = wkit(&[kind, "--config", &p, "--out", out]);
        assert_eq!(code, 2, "{name}: {stderr}");
        assert!(stderr.starts_with("wkit: "), "{name}: {stderr}");
    }
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = wkit::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(cfg.kind.is_some(), "{}", path.display());
        count += 1;
    }
    assert!(count >= 7);
}
