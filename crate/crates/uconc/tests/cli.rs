use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn uconc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uconc"))
        .args(args)
        .env_remove("UCONC_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = uconc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn rows<'a>(report: &'a Value, table: &str) -> &'a Vec<Value> {
    let t = report["tables"].as_array().unwrap().iter().find(|t| t["name"] == table).unwrap();
    t["rows"].as_array().unwrap()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn dims_three_qubits() {
    let r = json(&["dims", "--n", "3", "--d", "2"]);
    let rows = rows(&r, "dims");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "(3,0)");
    assert_eq!(rows[0][1], "1");
    assert_eq!(rows[0][3], "4");
    assert_eq!(rows[1][0], "(2,1)");
    assert_eq!(rows[1][1], "2");
    assert_eq!(rows[1][3], "2");
    let total = check(&r, "sum dimU*dimV = d^n");
    assert_eq!(total["value"], "8");
    assert_eq!(total["pass"], true);
}

#[test]
fn dims_edge_cases() {
    let r = json(&["dims", "--n", "0", "--d", "2"]);
    assert_eq!(rows(&r, "dims").len(), 1);
    assert_eq!(rows(&r, "dims")[0][5], Value::Null);
    let r = json(&["dims", "--n", "6", "--d", "3"]);
    assert_eq!(rows(&r, "dims").len(), 7);
    assert_eq!(check(&r, "sum dimU*dimV = d^n")["value"], "729");
}

#[test]
fn measure_exact_path() {
    let r = json(&["measure", "--n", "4", "-p", "3/4,1/4"]);
    let rows = rows(&r, "outcomes");
    let exact: Vec<&str> = rows.iter().map(|row| row[2].as_str().unwrap()).collect();
    // a_λ = dim V · s_λ(3/4, 1/4)
    assert_eq!(exact, ["121/256", "117/256", "9/128"]);
    assert_eq!(check(&r, "total probability (exact)")["pass"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(uconc(&["dims", "--n", "3", "--d", "0"]).status.code(), Some(2));
    assert_eq!(uconc(&["measure", "--n", "3", "-p", "0.5,0.6"]).status.code(), Some(2));
    assert_eq!(uconc(&["exponents", "-p", "0.5,0.5", "--rate", "3"]).status.code(), Some(2));
    assert_eq!(uconc(&["oracle-check", "-p", "0.5,0.5", "--n", "9"]).status.code(), Some(4));
    assert_eq!(uconc(&["postproc", "-p", "0.5,0.5", "--n", "4", "--level", "0.5"]).status.code(), Some(2));
    assert_eq!(uconc(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["exponents", "-p", "0.8,0.2", "--rate", "0.6", "--n", "20,40", "--monte-carlo", "500", "--seed", "7"][..],
        &["oracle-check", "-p", "0.6,0.4", "--n", "3", "--unitaries", "4", "--seed", "3", "--format", "csv"][..],
        &["compare", "-p", "0.5,0.3,0.2", "--n", "10,20", "--threads", "2"][..],
    ] {
        let a = uconc(args);
        let b = uconc(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_uconc"))
        .args(["dims", "--n", "2", "--d", "2", "--format", "csv"])
        .env("UCONC_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("dims.csv")).unwrap();
    assert!(text.starts_with("# table dims\nindex,dim_v"));
}

#[test]
fn kernel_round_trip_through_apply() {
    let dir = tempfile::tempdir().unwrap();
    let kernel = dir.path().join("k.txt");
    let k = kernel.to_str().unwrap();
    let worst = json(&["postproc", "-p", "0.8,0.2", "--n", "12", "--constraint", "worst", "--level", "0.1", "--kernel-out", k]);
    assert!(Path::new(k).exists());
    assert_eq!(worst["kernel"].as_str().unwrap(), std::fs::read_to_string(&kernel).unwrap());
    let applied = json(&["postproc", "-p", "0.8,0.2", "--n", "12", "--constraint", "apply", "--kernel-in", k]);
    let value = |r: &Value| rows(r, "summary").iter().find(|row| row[0] == "value").unwrap()[1].as_f64().unwrap();
    assert_eq!(value(&worst), value(&applied));
    assert_eq!(worst["kernel"], applied["kernel"]);
}

#[test]
fn postproc_checks_pass() {
    for args in [
        &["postproc", "-p", "0.8,0.2", "--n", "6", "--level", "1.5"][..],
        &["postproc", "-p", "0.7,0.2,0.1", "--n", "8", "--constraint", "average", "--level", "0.05"][..],
        &["postproc", "-p", "0.7,0.3", "--n", "10", "--f", "step@0.5", "--constraint", "worst", "--level", "0.2"][..],
    ] {
        let r = json(args);
        assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true), "{args:?}");
    }
}

#[test]
fn oracle_check_passes() {
    let r = json(&["oracle-check", "-p", "1/2,1/3,1/6", "--n", "3", "--unitaries", "5"]);
    assert!(r["checks"].as_array().unwrap().len() >= 8);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert_eq!(rows(&r, "outcomes").len(), 3);
}

#[test]
fn compare_and_estimate_shapes() {
    let r = json(&["compare", "-p", "0.8,0.2", "--n", "20,40"]);
    let rows_c = rows(&r, "yields");
    assert_eq!(rows_c.len(), 2);
    for row in rows_c {
        let universal = row[1].as_f64().unwrap();
        let bbps = row[2].as_f64().unwrap();
        assert!(universal < bbps);
        assert!(row[10].is_f64());
    }
    let r = json(&["estimate", "-p", "0.7,0.3", "--n", "20,40", "--format", "json"]);
    assert_eq!(rows(&r, "estimation").len(), 2);
}
