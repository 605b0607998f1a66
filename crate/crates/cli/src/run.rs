//! Command execution. Each command returns its rendered output and an exit code.

use std::fmt::Write as _;

use qbern::changhee::{padic_closed_form, q_limit, reduced_closed_form, ChangheeParams, IdentityId, IdentityReport, SweepGrid, Verifier};
use qbern::exactq::default_q_samples;
use qbern::oracle::{Oracle, Target};
use qbern::series::barnes_series;
use qbern::{Error, PadicContext, PadicNumber, Rational};
use serde_json::{json, Value};

use crate::config::{Command, ComputeArgs, Format, LimitArgs, OracleArgs, RunConfig, VerifyArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// A fatal condition with the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            Error::NonvanishingPole { .. } => EXIT_FAILURE,
            _ => EXIT_USAGE,
        };
        CliError { code, message: e.to_string() }
    }
}

/// Rendered output plus the exit code for a completed run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::Compute(c) => compute(c),
        Command::Verify(c) => verify(c),
        Command::Oracle(c) => oracle(c),
        Command::Limit(c) => limit(c),
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(csv_cell).collect::<Vec<_>>().join(";"),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// JSON lines, or CSV with `columns` as the header. Missing keys become empty cells.
fn render(rows: &[Value], columns: &[&str], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            for row in rows {
                let _ = writeln!(out, "{row}");
            }
        }
        Format::Csv => {
            let _ = writeln!(out, "{}", columns.join(","));
            for row in rows {
                let cells: Vec<String> = columns.iter().map(|c| csv_cell(row.get(*c).unwrap_or(&Value::Null))).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
    }
    out
}

fn compute(c: &ComputeArgs) -> Result<Outcome, CliError> {
    let samples = c.q.as_ref().map_or_else(default_q_samples, |q| q.0.clone());
    let ctx = c.padic.map(|p| PadicContext::new(p, c.precision)).transpose()?;
    let mut rows = Vec::new();
    for &n in &c.n.0 {
        for &k in &c.k.0 {
            let a = c.a.for_k(k).map_err(CliError::usage)?;
            let b = c.b.for_k(k).map_err(CliError::usage)?;
            for &w in &c.w.0 {
                let params = ChangheeParams::new(n, a.clone(), b.clone(), w)?;
                for q in &samples {
                    let mut row = json!({
                        "n": n, "k": k, "a": a, "b": b, "w": w,
                        "q": q.to_string(),
                        "beta": reduced_closed_form(&params, q).to_string(),
                    });
                    if let Some(ctx) = ctx {
                        let qp = PadicNumber::from_rational(q.value(), ctx);
                        row["padic"] = json!(padic_closed_form(&params, &qp)?.to_string());
                    }
                    rows.push(row);
                }
            }
        }
    }
    let mut columns = vec!["n", "k", "a", "b", "w", "q", "beta"];
    if ctx.is_some() {
        columns.push("padic");
    }
    Ok(Outcome { text: render(&rows, &columns, c.output.format), code: EXIT_OK })
}

const REPORT_COLUMNS: [&str; 14] = ["identity", "mode", "n", "k", "a", "b", "w", "l", "h", "i", "q", "residual", "status", "elapsed_ms"];

fn flatten_report_row(row: &Value) -> Value {
    let mut flat = row.clone();
    if let (Some(obj), Some(Value::Object(params))) = (flat.as_object_mut(), row.get("params")) {
        for (key, v) in params {
            obj.insert(key.clone(), v.clone());
        }
    }
    flat
}

fn verify_grid(c: &VerifyArgs) -> Result<SweepGrid, CliError> {
    let mut grid = SweepGrid::default();
    if let Some(n) = &c.n {
        grid.ns = n.0.clone();
    } else if let Some(m) = c.max_n {
        grid.ns = (0..=m).collect();
    }
    if let Some(k) = &c.k {
        grid.ks = k.0.clone();
    } else if let Some(m) = c.max_k {
        grid.ks = (1..=m).collect();
    }
    // a single k lets one-entry weight lists broadcast
    let single_k = (grid.ks.len() == 1).then(|| grid.ks[0]);
    let fixed = |w: &Option<crate::config::Weights>| -> Result<Option<Vec<u32>>, CliError> {
        match (w, single_k) {
            (None, _) => Ok(None),
            (Some(w), Some(k)) => w.for_k(k).map(Some).map_err(CliError::usage),
            (Some(w), None) => Ok(Some(w.0.clone())),
        }
    };
    grid.fixed_a = fixed(&c.a)?;
    grid.fixed_b = fixed(&c.b)?;
    if let (Some(a), Some(b)) = (&grid.fixed_a, &grid.fixed_b) {
        if a.len() != b.len() {
            return Err(CliError::usage(format!("--a has {} entries but --b has {}", a.len(), b.len())));
        }
    }
    if let Some(v) = &c.weights {
        grid.weights = v.0.clone();
    }
    if let Some(v) = &c.w {
        grid.ws = v.0.clone();
    }
    if let Some(v) = &c.l {
        grid.ls = v.0.clone();
    }
    if let Some(v) = &c.h {
        grid.hs = Some(v.0.clone());
    }
    if let Some(v) = &c.i {
        grid.is = v.0.clone();
    }
    grid.order = c.order;
    Ok(grid)
}

fn verify(c: &VerifyArgs) -> Result<Outcome, CliError> {
    let id: IdentityId = c.identity;
    let mode = c.mode.unwrap_or_else(|| id.default_mode());
    if !id.supports(mode) {
        return Err(CliError::usage(format!("identity {id} does not run in mode {mode}")));
    }
    let grid = verify_grid(c)?;
    let cases = grid.cases(id, mode);
    if cases.is_empty() {
        return Err(CliError::usage(format!("no valid parameter tuples for {id} in the requested ranges")));
    }
    let samples = c.q.as_ref().map_or_else(default_q_samples, |q| q.0.clone());
    let mut verifier = Verifier::new(samples).certify(c.certify);
    let mut rows = Vec::new();
    let mut reports = Vec::with_capacity(cases.len());
    for case in &cases {
        let report = verifier.verify(case)?;
        for row in report.to_json_rows(!c.output.no_timing) {
            rows.push(match c.output.format {
                Format::Json => row,
                Format::Csv => flatten_report_row(&row),
            });
        }
        reports.push(report);
    }
    Ok(Outcome { text: render(&rows, &REPORT_COLUMNS, c.output.format), code: verify_exit_code(&reports) })
}

/// 1 if any report failed outside diagnostic mode, else 0.
pub fn verify_exit_code(reports: &[IdentityReport]) -> i32 {
    if reports.iter().any(IdentityReport::failed) {
        EXIT_FAILURE
    } else {
        EXIT_OK
    }
}

fn oracle(c: &OracleArgs) -> Result<Outcome, CliError> {
    let ctx = PadicContext::new(c.p, c.precision)?;
    let target = if c.classical {
        Target::Classical { r: c.r, n: c.n, x: c.x.clone() }
    } else {
        let a = c.a.for_k(c.k).map_err(CliError::usage)?;
        let b = c.b.for_k(c.k).map_err(CliError::usage)?;
        let params = ChangheeParams::new(c.n, a, b, c.w)?;
        let q = c.q.clone().unwrap_or_else(|| Rational::from(1 + c.p));
        Target::Changhee { params, q: PadicNumber::from_rational(&q, ctx) }
    };
    let report = Oracle::new(ctx).with_budget(c.budget).convergence_report(&target, &c.levels.0)?;
    let timing = !c.output.no_timing;
    let text = match c.output.format {
        Format::Json => format!("{}\n", report.to_json(timing)),
        Format::Csv => report.to_csv(timing),
    };
    Ok(Outcome { text, code: EXIT_OK })
}

fn limit(c: &LimitArgs) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut all_equal = true;
    for &n in &c.n.0 {
        for &k in &c.k.0 {
            let a = c.a.for_k(k).map_err(CliError::usage)?;
            let weights: Vec<Rational> = a.iter().map(|&x| Rational::from(x)).collect();
            for &w in &c.w.0 {
                let params = ChangheeParams::new(n, a.clone(), vec![1; k as usize], w)?;
                let value = q_limit(&params, c.order)?;
                let reference = barnes_series(&Rational::from(w), &weights, n as usize)?[n as usize].clone();
                let equal = value == reference;
                all_equal &= equal;
                rows.push(json!({
                    "n": n, "k": k, "a": a, "w": w,
                    "limit": value.to_string(),
                    "barnes_reference": reference.to_string(),
                    "equal": equal,
                }));
            }
        }
    }
    let columns = ["n", "k", "a", "w", "limit", "barnes_reference", "equal"];
    Ok(Outcome { text: render(&rows, &columns, c.output.format), code: if all_equal { EXIT_OK } else { EXIT_FAILURE } })
}
