use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use genbern::optimality::{make_two_atom_family, FunctionalFamily};
use genbern::OperatorSpec;

fn genbern(args: &[&str]) -> Output {
    genbern_env(args, None)
}

fn genbern_env(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_genbern"));
    cmd.args(args).env_remove("GENBERN_THREADS");
    if let Some(t) = threads {
        cmd.env("GENBERN_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SUITE: &[&[&str]] = &[
    &["eval", "--op", "classical", "--n", "5", "--f", "exp(x)"],
    &["nodes", "--op", "power", "--n", "6", "--j", "3"],
    &["fixcheck", "--op", "expmn", "--n", "20", "--mu0", "0", "--mu1", "1"],
    &["shapecheck", "--op", "expmn", "--n", "12", "--f", "exp(2*x)"],
    &["genconvex", "--f", "x^3", "--f0", "1", "--f1", "x^2"],
    &["dominance", "--op", "classical", "--n", "10", "--seed", "7", "--spread", "0.4"],
    &["equality-probe", "--op", "expmn", "--n", "8", "--t", "0.3"],
    &["converge", "--nmax", "1024"],
    &["counterexample", "--which", "mn-convexity", "--n", "8"],
    &["counterexample", "--which", "classical-genconvexity", "--n", "5"],
    &["counterexample", "--which", "power-affine", "--n", "10", "--j", "3"],
];

#[test]
fn every_subcommand_passes() {
    for args in SUITE {
        let out = genbern(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
        let csv = String::from_utf8(out.stdout).unwrap();
        let mut lines = csv.lines();
        let width = lines.next().unwrap().split(',').count();
        for line in lines {
            assert_eq!(line.split(',').count(), width, "{args:?}");
            for cell in line.split(',') {
                cell.parse::<f64>().unwrap_or_else(|_| panic!("{args:?}: bad cell {cell}"));
            }
        }
    }
}

#[test]
fn json_report_carries_config_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = genbern(&["converge", "--nmax", "16", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["config"]["command"], "converge");
    assert_eq!(doc["config"]["nmax"], 16);
    assert!(doc["config"].get("out").is_none());
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5);
    assert_eq!(doc["passed"], true);
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    // Summary goes to stdout when the report goes to a file.
    assert!(String::from_utf8_lossy(&out.stdout).contains("[PASS] slope-n1"));
}

#[test]
fn parse_error_reports_offset() {
    let out = genbern(&["eval", "--f", "exp(x"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("byte 5"), "{err}");
    assert!(err.contains("     ^"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&genbern(&["nope"])), 2);
    assert_eq!(code(&genbern(&["eval"])), 2);
    assert_eq!(code(&genbern(&["counterexample", "--which", "other"])), 2);
    assert_eq!(code(&genbern(&["nodes", "--op", "classical", "--a", "-1"])), 2);
    assert_eq!(code(&genbern(&["dominance", "--f", "-x^2"])), 2);
    assert_eq!(code(&genbern(&["equality-probe", "--t", "0"])), 2);
    assert_eq!(code(&genbern(&["equality-probe", "--psi", "x"])), 2);
    assert_eq!(code(&genbern_env(&["nodes"], Some("zero"))), 2);
    assert_eq!(code(&genbern_env(&["nodes"], Some("0"))), 2);
}

#[test]
fn failed_check_exits_one() {
    let out = genbern(&["fixcheck", "--op", "expmn", "--n", "20", "--tol", "1e-30"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("[FAIL]"));
}

#[test]
fn config_file_is_overlaid_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"op": "power", "n": 5, "j": 3}"#).unwrap();
    let out = genbern(&["nodes", "--config", cfg.to_str().unwrap(), "--n", "7"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 9);

    fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(code(&genbern(&["nodes", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn json_report_config_replays() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    let out = genbern(&["eval", "--op", "expmn", "--n", "9", "--f", "x^2", "--format", "json", "--out", first.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&first).unwrap()).unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, doc["config"].to_string()).unwrap();
    let second = dir.path().join("b.json");
    let out = genbern(&["eval", "--config", cfg.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

fn write_family(path: &Path, fam: &FunctionalFamily) {
    fs::write(path, fam.to_json()).unwrap();
}

#[test]
fn family_documents_drive_dominance_and_probe() {
    let dir = tempfile::tempdir().unwrap();
    let base = OperatorSpec::classical(6).unwrap();
    let (f0, f1) = base.fixed_pair();
    let fam = make_two_atom_family(&base, &f0, &f1, 0.5, None).unwrap();
    let path = dir.path().join("fam.json");
    write_family(&path, &fam);
    let p = path.to_str().unwrap();
    let out = genbern(&["dominance", "--family", p, "--f", "x^4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = genbern(&["equality-probe", "--family", p, "--t", "0.4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("all_dirac = false"));

    let dirac = FunctionalFamily::all_dirac(OperatorSpec::classical(6).unwrap()).unwrap();
    write_family(&path, &dirac);
    let out = genbern(&["equality-probe", "--family", p, "--t", "0.4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("equal_at_t = true"));

    // A family whose measure violates the normalization is reported, not accepted.
    let mut doc: serde_json::Value = serde_json::from_str(&fam.to_json()).unwrap();
    doc["measures"][2][0]["w"] = serde_json::json!(0.9);
    fs::write(&path, doc.to_string()).unwrap();
    let out = genbern(&["dominance", "--family", p]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("[FAIL] admissible"));

    fs::write(&path, "{").unwrap();
    assert_eq!(code(&genbern(&["dominance", "--family", p])), 2);
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    for args in SUITE {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let path = dir.path().join(format!("{threads}.json"));
            let mut full: Vec<&str> = args.to_vec();
            let p = path.to_str().unwrap().to_string();
            full.extend(["--format", "json", "--out", &p]);
            let out = genbern_env(&full, Some(threads));
            assert_eq!(code(&out), 0, "{args:?}");
            outputs.push(fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}
