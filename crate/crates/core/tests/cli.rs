use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use reqshield::batch::{parse_batch, render_batch, PredictionBatch};
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn reqshield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reqshield"))
        .args(args)
        .env_remove("SHIELD_REQUIREMENTS")
        .env_remove("SHIELD_NUM_VARIABLES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_rows(path: &Path) -> Vec<Vec<f64>> {
    parse_batch(&std::fs::read_to_string(path).unwrap(), None).unwrap().rows
}

#[test]
fn compile_prints_a_summary() {
    let o = reqshield(&["compile", "-r", path_str(&fixture("hemoglobin.lin")), "-n", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("Linear"), "{text}");
    assert!(text.contains("derived constraints: 0"), "{text}");

    let o = reqshield(&["compile", "-r", path_str(&fixture("traffic.cnf"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("general"));
}

#[test]
fn compile_errors_exit_2() {
    for name in ["contradiction.cnf", "infeasible.lin", "mixed.txt"] {
        let o = reqshield(&["compile", "-r", path_str(&fixture(name))]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stdout(&o));
        assert!(stderr(&o).starts_with("error:"), "{name}: {}", stderr(&o));
    }
    let o = reqshield(&["compile", "-r", "/nonexistent/file.cnf"]);
    assert_eq!(o.status.code(), Some(2));
    let o = reqshield(&["compile", "-r", path_str(&fixture("traffic.cnf")), "-n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("out of range"), "{}", stderr(&o));
}

#[test]
fn apply_then_check() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.csv");
    let report = dir.path().join("report.json");
    let o = reqshield(&[
        "apply",
        "-r",
        path_str(&fixture("traffic.cnf")),
        "-i",
        path_str(&fixture("traffic.csv")),
        "-o",
        path_str(&out),
        "--report",
        path_str(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_rows(&out)[0], vec![0.9, 0.6, 0.3, 0.2]);
    let header = std::fs::read_to_string(&out).unwrap();
    assert!(header.starts_with("traffic,red,yellow,green\n"));

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["totals"]["rows_corrected"], 1);
    assert_eq!(json["requirements"][0]["violations_before"], 1);
    assert!(json["requirements"].as_array().unwrap().iter().all(|r| r["violations_after"] == 0));

    let before = reqshield(&["check", "-r", path_str(&fixture("traffic.cnf")), "-i", path_str(&fixture("traffic.csv"))]);
    assert_eq!(before.status.code(), Some(1));
    assert!(stdout(&before).contains("1 violations in 3 rows"), "{}", stdout(&before));

    let after = reqshield(&["check", "-r", path_str(&fixture("traffic.cnf")), "-i", path_str(&out)]);
    assert_eq!(after.status.code(), Some(0), "{}", stdout(&after));
}

#[test]
fn linear_apply_golden() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.csv");
    let o = reqshield(&[
        "apply",
        "-r",
        path_str(&fixture("hemoglobin.lin")),
        "-i",
        path_str(&fixture("hemoglobin.csv")),
        "-o",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_rows(&out);
    assert_eq!(rows[0], vec![10.0, 10.0, 38.0, 37.0]);
    assert_eq!(rows[1], vec![10.0, 10.0, 38.0, 38.0]);
}

#[test]
fn environment_supplies_arguments() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_reqshield"))
        .args(["apply", "-i", path_str(&fixture("hemoglobin.csv")), "-o", path_str(&out)])
        .env("SHIELD_REQUIREMENTS", fixture("hemoglobin.lin"))
        .env("SHIELD_NUM_VARIABLES", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_rows(&out)[0], vec![10.0, 10.0, 38.0, 37.0]);
}

#[test]
fn input_problems_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "0.1,0.2,0.3,0.4\n0.1,oops,0.3,0.4\n").unwrap();
    let out = dir.path().join("out.csv");
    let o = reqshield(&["apply", "-r", path_str(&fixture("traffic.cnf")), "-i", path_str(&bad), "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let narrow = dir.path().join("narrow.csv");
    std::fs::write(&narrow, "0.1,0.2\n").unwrap();
    let o = reqshield(&["check", "-r", path_str(&fixture("traffic.cnf")), "-i", path_str(&narrow)]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));

    let o = reqshield(&["apply", "-r", path_str(&fixture("traffic.cnf"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn engine_override_is_honored() {
    let o = reqshield(&["compile", "-r", path_str(&fixture("small.cnf")), "--engine", "hierarchy"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    let o = reqshield(&["compile", "-r", path_str(&fixture("hemoglobin.lin")), "--engine", "general"]);
    assert_eq!(o.status.code(), Some(2));
    let o = reqshield(&["compile", "-r", path_str(&fixture("hemoglobin.lin")), "--ordering", "3,2,1,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

proptest! {
    #[test]
    fn csv_values_round_trip_bit_exactly(rows in prop::collection::vec(prop::collection::vec(-1e12f64..1e12, 3), 1..10)) {
        let batch = PredictionBatch::new(rows.clone(), 3).unwrap();
        let back = parse_batch(&render_batch(&batch).unwrap(), Some(3)).unwrap();
        prop_assert_eq!(back.names, batch.names);
        for (a, b) in back.rows.iter().flatten().zip(rows.iter().flatten()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
