use std::process::{Command, Output};

use serde_json::Value;

fn qbern(args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbern")).args(args.split_whitespace()).output().expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("valid JSON line")).collect()
}

fn field(rows: &[Value], key: &str) -> Vec<String> {
    rows.iter().map(|r| r[key].as_str().unwrap_or_default().to_string()).collect()
}

#[test]
fn compute_k1_values() {
    let out = qbern("compute --n 0..2 --k 1 --a 1 --b 1 --w 0 --q 2");
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    assert_eq!(field(&rows, "beta")[..2], ["1".to_string(), "-1/3".to_string()]);
}

#[test]
fn compute_two_fold_single_term() {
    let rows = json_lines(&qbern("compute --n 0 --k 2 --a 1,1 --b 1,2 --w 0 --q 2"));
    assert_eq!(field(&rows, "beta"), ["2/3"]);
}

#[test]
fn compute_n0_ignores_w() {
    let rows = json_lines(&qbern("compute --n 0 --k 1 --a 1 --b 1 --w 5 --q 2"));
    assert_eq!(field(&rows, "beta"), ["1"]);
}

#[test]
fn compute_csv_with_padic_column() {
    let out = qbern("compute --n 0 --q 4 --padic 3 --format csv");
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,k,a,b,w,q,beta,padic"));
    assert!(lines.next().unwrap().starts_with("0,1,1,1,0,4,1/3,"));
}

#[test]
fn compute_padic_outside_domain_is_usage_error() {
    assert_eq!(qbern("compute --n 0 --q 2 --padic 3").status.code(), Some(2));
}

#[test]
fn verify_shift_recurrence_passes() {
    let out = qbern("verify --identity thm2.3 --max-n 6 --max-k 3 --no-timing");
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    assert!(!rows.is_empty());
    for r in &rows {
        assert_eq!(r["schema"], 1);
        assert_eq!(r["status"], "pass");
        assert_eq!(r["residual"], "0");
        assert!(r["params"]["a"].is_array() && r["params"]["n"].is_u64());
        assert!(r["q"].is_string() && r["elapsed_ms"].is_u64());
    }
}

#[test]
fn verify_literal_distribution_is_diagnostic() {
    let out = qbern("verify --identity eq2.9-distribution --mode paper-literal --n 0 --k 1 --l 2");
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    assert!(rows.iter().all(|r| r["status"] == "diagnostic"));
    assert!(rows.iter().any(|r| r["residual"] != "0"));
}

#[test]
fn verify_carlitz_prints_residual() {
    let out = qbern("verify --identity carlitz-series --n 1");
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    assert!(rows.iter().all(|r| r["status"] == "diagnostic"));
    assert!(rows.iter().any(|r| r["residual"] != "0"));
}

#[test]
fn verify_output_is_deterministic() {
    let args = "verify --identity eq2.12 --max-n 3 --max-k 2 --no-timing";
    assert_eq!(qbern(args).stdout, qbern(args).stdout);
}

#[test]
fn verify_unknown_identity_exits_2() {
    assert_eq!(qbern("verify --identity thm9.9").status.code(), Some(2));
}

#[test]
fn verify_unsupported_mode_exits_2() {
    assert_eq!(qbern("verify --identity thm2.7-series --mode paper-literal --n 0").status.code(), Some(2));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(qbern("compute --n 3..1").status.code(), Some(2));
    assert_eq!(qbern("compute --frobnicate").status.code(), Some(2));
    assert_eq!(qbern("compute --k 2 --a 1,2,3").status.code(), Some(2));
}

#[test]
fn oracle_classical_congruence() {
    let out = qbern("oracle --classical --n 1 --p 3 --levels 2..6 --format csv");
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,distance_exponent,elapsed_ms"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let level: i64 = cells[0].parse().unwrap();
        assert!(cells[1] == "inf" || cells[1].parse::<i64>().unwrap() >= level, "{line}");
    }
}

#[test]
fn oracle_changhee_strictly_decreasing() {
    let out = qbern("oracle --changhee --n 1 --k 1 --q 4 --p 3 --levels 2..5");
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let exps: Vec<i64> = report["rows"].as_array().unwrap().iter().map(|r| r["distance_exponent"].as_str().unwrap().parse().unwrap()).collect();
    assert!(exps.windows(2).all(|w| w[1] > w[0]), "{exps:?}");
}

#[test]
fn oracle_constant_function_is_exact() {
    let out = qbern("oracle --classical --n 0 --p 5 --levels 2..3 --format csv --no-timing");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "level,distance_exponent,elapsed_ms\n2,inf,0\n3,inf,0\n");
}

#[test]
fn oracle_budget_exits_3() {
    assert_eq!(qbern("oracle --classical --n 1 --p 7 --levels 9").status.code(), Some(3));
    assert_eq!(qbern("oracle --changhee --k 2 --p 3 --levels 5 --budget 1000").status.code(), Some(3));
}

#[test]
fn limit_values() {
    for (args, value) in [
        ("limit --n 2 --k 1 --a 1 --w 0", "1/6"),
        ("limit --n 0 --k 2 --a 1,2 --w 0", "1"),
        ("limit --n 1 --k 1 --a 2 --w 0", "-1"),
    ] {
        let out = qbern(args);
        assert_eq!(out.status.code(), Some(0));
        let rows = json_lines(&out);
        assert_eq!(rows[0]["limit"], value, "{args}");
        assert_eq!(rows[0]["barnes_reference"], value);
        assert_eq!(rows[0]["equal"], true);
    }
}

#[test]
fn limit_insufficient_order_exits_2() {
    assert_eq!(qbern("limit --n 5 --k 2 --order 4").status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("qbern-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rows.csv");
    let out = qbern(&format!("limit --n 0..2 --format csv --out {}", path.display()));
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,k,a,w,limit,barnes_reference,equal\n"));
    assert_eq!(text.lines().count(), 4);
    std::fs::remove_dir_all(&dir).unwrap();
}
