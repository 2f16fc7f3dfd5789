use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn gslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gslab")).args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classify_reports_the_split() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let phi = data("eta.json");
    let o = gslab(&["classify", "--phi", phi.to_str().unwrap(), "--p", "3", "--d", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v["M1"], "Divergent");
    assert_eq!(v["M2"], "Convergent");
    assert_eq!(v["verdict"], "spectral_gap");
    assert_eq!(v["manifest"]["subcommand"], "classify");
    assert_eq!(v["manifest"]["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn residual_exit_codes_follow_the_claim() {
    assert_eq!(gslab(&["residual", "--family", "hardy_phi", "--p", "2", "--d", "3"]).status.code(), Some(0));
    assert_eq!(gslab(&["residual", "--family", "mp_supersol", "--p", "2", "--d", "3"]).status.code(), Some(0));
    assert_eq!(gslab(&["residual", "--family", "nonesuch", "--p", "2", "--d", "3"]).status.code(), Some(1));
}

#[test]
fn verdict_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // the geometric schedule decays too slowly for the convention
    let out = dir.path().join("n.csv");
    let o = gslab(&[
        "nullseq",
        "--spec",
        data("problem_hardy_p2_d3.json").to_str().unwrap(),
        "--v",
        data("hardy_p2_d3.json").to_str().unwrap(),
        "--K",
        "8",
        "--schedule",
        "geometric",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let summary = read_json(&dir.path().join("n.csv.json"));
    assert_eq!(summary["status"], "fail");
    assert_eq!(summary["verdict"], "not_null");
}

#[test]
fn usage_errors_exit_with_one() {
    let o = gslab(&["classify", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(gslab(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(gslab(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_spec_names_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"p\": 2,\n  \"domain\": \"whole_space\" }").unwrap();
    let o = gslab(&["nullseq", "--spec", bad.to_str().unwrap(), "--v", data("hardy_p2_d3.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("missing field `d`") && err.contains("line 2"), "{err}");
    let missing = gslab(&["classify", "--phi", "/nonexistent.json", "--p", "3", "--d", "5"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn csv_carries_units_and_manifest_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pc.csv");
    let o = gslab(&["picone-check", "--samples", "2000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header = reader.headers().unwrap().clone();
    assert_eq!(header.iter().next_back(), Some("manifest_sha256"));
    let summary = read_json(&dir.path().join("pc.csv.json"));
    let hash = summary["manifest_sha256"].as_str().unwrap().to_string();
    for row in reader.records() {
        assert_eq!(row.unwrap().iter().next_back(), Some(hash.as_str()));
    }
    // the recorded hash is the digest of the embedded manifest
    let manifest = serde_json::to_string(&summary["manifest"]).unwrap();
    assert_eq!(gslab_cli::sha256_hex(manifest.as_bytes()), hash);
}

#[test]
fn same_seed_same_bytes_different_seed_different_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = gslab(&["residual", "--family", "mp_supersol", "--p", "2", "--d", "3", "--mode", "weak", "--points", "10", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        out
    };
    let a = std::fs::read(run("a.csv", "5")).unwrap();
    let a2 = std::fs::read(run("a.csv", "5")).unwrap();
    assert_eq!(a, a2);
    let b = std::fs::read(run("a.csv", "6")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn report_aggregates_and_flags_failures() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, status: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, format!(r#"{{ "status": "{status}", "verdict": "x", "manifest": {{ "subcommand": "energy" }} }}"#)).unwrap();
        path.to_str().unwrap().to_string()
    };
    let (a, b) = (write("a.json", "pass"), write("b.json", "fail"));
    let out = dir.path().join("r.json");
    let o = gslab(&["report", &a, &b, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let r = read_json(&out);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["failed"], 1);
    assert_eq!(r["items"].as_array().unwrap().len(), 2);
    let o = gslab(&["report", &a, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&out)["status"], "pass");
    assert_eq!(gslab(&["report"]).status.code(), Some(1));
    assert_eq!(gslab(&["report", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn in_process_run_matches_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    assert_eq!(gslab_cli::run(["gslab", "residual", "--family", "hardy_phi", "--p", "3", "--d", "5", "--out", out.to_str().unwrap()]), 0);
    assert_eq!(gslab_cli::run(["gslab", "residual", "--bogus"]), 1);
}
