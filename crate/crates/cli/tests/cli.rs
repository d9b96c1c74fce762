use std::process::Command;

use locc_cli::{run, CommandResult, EXIT_INVALID, EXIT_NEGATIVE, EXIT_OK};
use locc_core::catalog::build;
use locc_core::{BoundReport, ProtocolTree, SearchResult, StateSet, Tolerance, VerificationReport};
use serde_json::Value;

fn lab(args: &[&str]) -> CommandResult {
    run(std::iter::once("locc-lab").chain(args.iter().copied()))
}

fn write_states(dir: &tempfile::TempDir, name: &str) -> String {
    let e = build(name, &[]).unwrap();
    let path = dir.path().join(format!("{name}.json"));
    std::fs::write(&path, e.state_set.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn catalog_verify_yu() {
    let r = lab(&["catalog", "verify", "yu-3x3"]);
    assert_eq!(r.exit_code, EXIT_OK, "{}", r.stdout);
    assert!(r.stdout.contains("verified"));
}

#[test]
fn catalog_verify_all_entries() {
    let list = lab(&["--json", "catalog", "list"]);
    let v: Value = serde_json::from_str(&list.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(names.len(), 16);
    for name in names {
        assert_eq!(lab(&["catalog", "verify", name]).exit_code, EXIT_OK, "{name}");
    }
}

#[test]
fn catalog_show_with_params() {
    let r = lab(&["--json", "catalog", "show", "appd-shift", "--params", "6,2"]);
    assert_eq!(r.exit_code, EXIT_OK);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let set: StateSet = serde_json::from_value(v["state_set"].clone()).unwrap();
    assert_eq!(set.len(), 2);
    assert!(v["grid"].as_str().unwrap().contains("|5>A"));
    let bad = lab(&["catalog", "show", "appc-threestates", "--params", "6"]);
    assert_eq!(bad.exit_code, EXIT_INVALID);
    assert!(!bad.stderr.is_empty());
}

#[test]
fn bounds_from_file_reports_violation() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_states(&dir, "beat-schmidt-5x5");
    let r = lab(&["bounds", "--states", &f, "--r", "2"]);
    assert_eq!(r.exit_code, EXIT_NEGATIVE);
    assert!(r.stdout.contains("12 > 10"), "{}", r.stdout);
    let j = lab(&["--json", "bounds", "--states", &f, "--r", "2"]);
    let reports: Vec<BoundReport> = serde_json::from_str(&j.stdout).unwrap();
    let rs = reports.iter().find(|b| b.formula_id == "rank-sum").unwrap();
    assert_eq!((rs.quantity, rs.bound, rs.satisfied), (12.0, 10.0, false));
}

#[test]
fn render_matches_exstates_occupancy() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_states(&dir, "exstates-4x4");
    let r = lab(&["--json", "render", "--states", &f]);
    assert_eq!(r.exit_code, EXIT_OK);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    for (m, row) in cells.iter().enumerate() {
        for (n, cell) in row.as_array().unwrap().iter().enumerate() {
            // Both states sit on cells with m + n even, one on each diagonal band.
            let expect = if (m + n) % 2 == 1 { 0 } else { 1 };
            assert_eq!(cell.as_array().unwrap().len(), expect, "cell ({m},{n})");
        }
    }
    let text = lab(&["render", "--states", &f]);
    assert_eq!(text.stdout.lines().count(), 10);
}

#[test]
fn verify_exit_codes_and_report() {
    let ok = lab(&["verify", "--states", "exstates-4x4", "--rmin", "2"]);
    assert_eq!(ok.exit_code, EXIT_OK);
    let rep: VerificationReport = serde_json::from_str(&ok.stdout).unwrap();
    assert!(rep.ok);
    let low = lab(&["verify", "--states", "exstates-4x4", "--rmin", "3"]);
    assert_eq!(low.exit_code, EXIT_NEGATIVE);
    let rp = lab(&["verify", "--states", "exstates-4x4", "--rank-preserving"]);
    assert_eq!(rp.exit_code, EXIT_NEGATIVE);
    assert_eq!(lab(&["verify", "--states", "exstates-4x4", "--rmin", "0"]).exit_code, EXIT_INVALID);
}

#[test]
fn verify_with_protocol_and_povm_files() {
    let dir = tempfile::tempdir().unwrap();
    let e = build("ccsp-4x6", &[]).unwrap();
    let states = write_states(&dir, "ccsp-4x6");
    let proto = dir.path().join("p.json");
    std::fs::write(&proto, e.tree().unwrap().to_json()).unwrap();
    let r = lab(&["verify", "--states", &states, "--protocol", proto.to_str().unwrap(), "--rank-preserving"]);
    assert_eq!(r.exit_code, EXIT_OK, "{}{}", r.stdout, r.stderr);

    let yu = build("yu-3x3", &[]).unwrap();
    let povm = dir.path().join("povm.json");
    std::fs::write(&povm, serde_json::to_string(yu.povm().unwrap()).unwrap()).unwrap();
    let r = lab(&["verify", "--states", "yu-3x3", "--povm", povm.to_str().unwrap(), "--rmin", "2"]);
    assert_eq!(r.exit_code, EXIT_OK);
    let r = lab(&["verify", "--states", "yu-3x3", "--povm", povm.to_str().unwrap(), "--rmin", "3"]);
    assert_eq!(r.exit_code, EXIT_NEGATIVE);

    let missing = lab(&["verify", "--states", &states, "--protocol", "/nonexistent.json"]);
    assert_eq!(missing.exit_code, EXIT_INVALID);
}

#[test]
fn partition_writes_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("proto.json");
    let r = lab(&["partition", "--states", "ccsp-4x6", "--out", out.to_str().unwrap()]);
    assert_eq!(r.exit_code, EXIT_OK);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["partition"]["complete"], true);
    assert_eq!(v["partition"]["root"]["split_by"], "B");
    let tree = ProtocolTree::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let set = build("ccsp-4x6", &[]).unwrap().state_set;
    assert!(tree.verify_rank_preserving(&set, Tolerance::default()).unwrap().ok);

    let none = lab(&["partition", "--states", "not-ccsp-3x3", "--first", "A"]);
    assert_eq!(none.exit_code, EXIT_NEGATIVE);
    let v: Value = serde_json::from_str(&none.stdout).unwrap();
    assert!(v["protocol"].is_null());
}

#[test]
fn search_found_and_exhausted() {
    let r = lab(&["search", "--states", "exstates-4x4", "--class", "P0", "--rmin", "2"]);
    assert_eq!(r.exit_code, EXIT_OK);
    let res: SearchResult = serde_json::from_str(&r.stdout).unwrap();
    assert!(res.found);
    let r = lab(&["search", "--states", "bennett9", "--class", "P2", "--rmin", "1", "--max-rounds", "4"]);
    assert_eq!(r.exit_code, EXIT_NEGATIVE);
    let res: SearchResult = serde_json::from_str(&r.stdout).unwrap();
    assert!(res.family_exhausted);
    assert_eq!(lab(&["search", "--states", "yu-3x3", "--class", "K2", "--rmin", "1"]).exit_code, EXIT_INVALID);
    assert_eq!(lab(&["search", "--states", "yu-3x3", "--class", "P2", "--rmin", "1", "--max-rounds", "9"]).exit_code, EXIT_INVALID);
}

#[test]
fn search_with_basis_file() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("basis.json");
    let id = r#"{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[1,0]]}"#;
    std::fs::write(&basis, format!(r#"{{"a": {id}}}"#)).unwrap();
    let r = lab(&["search", "--states", "exstates-4x4", "--class", "P0", "--rmin", "2", "--basis", basis.to_str().unwrap()]);
    // A 2×2 basis for a 4-dimensional party is a dimension error.
    assert_eq!(r.exit_code, EXIT_INVALID);
}

#[test]
fn necessary_purify_and_domino() {
    assert_eq!(lab(&["check-necessary", "--states", "yu-3x3"]).exit_code, EXIT_NEGATIVE);
    assert_eq!(lab(&["check-necessary", "--states", "ccsp-4x6"]).exit_code, EXIT_OK);

    let pa = r#"{"rows":4,"cols":4,"data":[[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[0,0],[1,0]]}"#;
    let pb = r#"{"rows":4,"cols":4,"data":[[1,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#;
    let r = lab(&["purify-check", "--states", "exstates-4x4", "--a", pa, "--b", pb]);
    assert_eq!(r.exit_code, EXIT_OK, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["residual_rank"], 2);

    let id = r#"{"rows":3,"cols":3,"data":[[0.7,0],[0,0],[0,0],[0,0],[0.7,0],[0,0],[0,0],[0,0],[0.7,0]]}"#;
    assert_eq!(lab(&["domino-check", "--a", id, "--party", "B"]).exit_code, EXIT_OK);
    let two = r#"{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[1,0]]}"#;
    assert_eq!(lab(&["domino-check", "--a", two]).exit_code, EXIT_INVALID);
}

#[test]
fn usage_errors_exit_one() {
    let r = lab(&["frobnicate"]);
    assert_eq!(r.exit_code, EXIT_INVALID);
    assert!(r.stderr.contains("Usage"));
    assert_eq!(lab(&["bounds", "--states", "yu-3x3"]).exit_code, EXIT_INVALID);
    assert_eq!(lab(&["render", "--states", "no-such-file.json"]).exit_code, EXIT_INVALID);
    assert_eq!(lab(&["--help"]).exit_code, EXIT_OK);
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["search", "--states", "appc-5dim-3states", "--class", "P2", "--rmin", "1"],
        vec!["--json", "catalog", "show", "sum10-3x3"],
        vec!["partition", "--states", "ccsp-4x6"],
    ] {
        assert_eq!(lab(&args), lab(&args));
    }
}

#[test]
fn binary_reads_tolerance_from_env() {
    let bin = env!("CARGO_BIN_EXE_locc-lab");
    let bad = Command::new(bin)
        .args(["render", "--states", "yu-3x3"])
        .env("LOCC_LAB_TOL_ABS", "-1")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INVALID));
    let fixed = Command::new(bin)
        .args(["render", "--states", "yu-3x3", "--tol-abs", "1e-9"])
        .env("LOCC_LAB_TOL_ABS", "-1")
        .output()
        .unwrap();
    assert_eq!(fixed.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8(fixed.stdout).unwrap().contains("|2>A"));
}
