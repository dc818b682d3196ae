//! Suite execution and deterministic report rendering.
//!
//! A run executes config entries in order, collects one row per sub-check,
//! and renders csv/markdown/plotdata. Everything except the metadata file
//! is byte-deterministic for a fixed config: timings go to `run_meta.txt`
//! and the csv `runtime_ms` column stays empty.

use std::fmt::Write as _;
use std::time::Instant;

use hadamard::Status;
use sha2::{Digest, Sha256};

use crate::config::Entry;
use crate::ops::{OpContext, OpRegistry};

/// One csv row: a single sub-check outcome.
#[derive(Clone, Debug)]
pub struct Row {
    pub suite_entry: String,
    pub operation: String,
    pub theorem_id: String,
    pub sub_check: String,
    pub verdict: Status,
    pub witness_x: String,
    pub witness_lambda: Option<f64>,
    pub witness_n: Option<usize>,
    pub residual: Option<f64>,
}

/// A named two-column series for external plotting.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub points: Vec<(f64, f64)>,
}

/// Everything a run produced, keyed by entry label where relevant.
#[derive(Default)]
pub struct RunReport {
    pub rows: Vec<Row>,
    pub series: Vec<(String, Series)>,
    pub notes: Vec<(String, String)>,
    /// Per-entry wall time in milliseconds, in execution order.
    pub timings: Vec<(String, u128)>,
    pub errors: usize,
    pub config_digest: String,
}

pub fn config_digest(config_text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_text.as_bytes());
    format!("{:x}", hasher.finalize())
}

/// Runs every entry in order. Entry-level failures become an Inconclusive
/// `error` row plus a note; the run always continues.
pub fn execute_suite(ctx: &OpContext, registry: &OpRegistry, entries: &[Entry]) -> RunReport {
    let mut report = RunReport::default();
    for entry in entries {
        let label = entry.label();
        let start = Instant::now();
        match registry.run(ctx, entry) {
            Ok(out) => {
                for mut row in out.rows {
                    row.suite_entry = label.clone();
                    row.operation = entry.op.clone();
                    report.rows.push(row);
                }
                for s in out.series {
                    report.series.push((label.clone(), s));
                }
                for n in out.notes {
                    report.notes.push((label.clone(), n));
                }
            }
            Err(e) => {
                report.errors += 1;
                report.rows.push(Row {
                    suite_entry: label.clone(),
                    operation: entry.op.clone(),
                    theorem_id: String::new(),
                    sub_check: "error".into(),
                    verdict: Status::Inconclusive,
                    witness_x: String::new(),
                    witness_lambda: None,
                    witness_n: None,
                    residual: None,
                });
                report.notes.push((label.clone(), format!("error: {e}")));
            }
        }
        report.timings.push((label, start.elapsed().as_millis()));
    }
    report
}

/// 0 when every row is consistent, 1 on any violation, 2 on inconclusive
/// rows or entry errors (violations take precedence).
pub fn exit_code(report: &RunReport) -> i32 {
    if report.rows.iter().any(|r| r.verdict == Status::Violated) {
        1
    } else if report.errors > 0 || report.rows.iter().any(|r| r.verdict == Status::Inconclusive) {
        2
    } else {
        0
    }
}

// ---------------------------------------------------------------------------
// Rendering

pub const CSV_HEADER: &str =
    "suite_entry,operation,theorem_id,sub_check,verdict,witness_x,witness_lambda,witness_n,residual,runtime_ms";

/// 17 significant digits: round-trip exact for f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let fields = [
            csv_field(&r.suite_entry),
            csv_field(&r.operation),
            csv_field(&r.theorem_id),
            csv_field(&r.sub_check),
            r.verdict.to_string(),
            csv_field(&r.witness_x),
            r.witness_lambda.map(num).unwrap_or_default(),
            r.witness_n.map(|n| n.to_string()).unwrap_or_default(),
            r.residual.map(num).unwrap_or_default(),
            // runtime_ms lives in run_meta.txt so reruns stay byte-identical
            String::new(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn render_markdown(report: &RunReport, version: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Verification run\n");
    let _ = writeln!(out, "- tool version: {version}");
    let _ = writeln!(out, "- config digest: {}", report.config_digest);
    let (mut ok, mut bad, mut undecided) = (0usize, 0usize, 0usize);
    for r in &report.rows {
        match r.verdict {
            Status::ConsistentWith => ok += 1,
            Status::Violated => bad += 1,
            Status::Inconclusive => undecided += 1,
        }
    }
    let _ = writeln!(
        out,
        "- sub-checks: {} consistent, {} violated, {} inconclusive\n",
        ok, bad, undecided
    );
    if report.rows.is_empty() {
        return out;
    }
    let _ = writeln!(out, "| entry | operation | theorem | sub-check | verdict | residual |");
    let _ = writeln!(out, "|---|---|---|---|---|---|");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            r.suite_entry,
            r.operation,
            r.theorem_id,
            r.sub_check,
            r.verdict,
            r.residual.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into())
        );
    }
    if !report.notes.is_empty() {
        let _ = writeln!(out, "\n## Notes\n");
        for (label, note) in &report.notes {
            let _ = writeln!(out, "- `{label}`: {note}");
        }
    }
    out
}

pub fn render_plotdata(report: &RunReport) -> String {
    let mut out = String::new();
    for (label, s) in &report.series {
        let _ = writeln!(out, "# series {label}/{} ({}, {})", s.name, s.x_label, s.y_label);
        for (x, y) in &s.points {
            let _ = writeln!(out, "{}\t{}", num(*x), num(*y));
        }
        out.push('\n');
    }
    out
}

/// Timing and provenance sidecar; the only non-deterministic output.
pub fn render_meta(report: &RunReport, version: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tool_version={version}");
    let _ = writeln!(out, "config_sha256={}", report.config_digest);
    let total: u128 = report.timings.iter().map(|(_, ms)| ms).sum();
    let _ = writeln!(out, "total_ms={total}");
    for (label, ms) in &report.timings {
        let _ = writeln!(out, "entry_ms {label}={ms}");
    }
    out
}

/// Console summary: one line per sub-check plus an overall tally.
pub fn render_summary(report: &RunReport) -> String {
    let mut out = String::new();
    for r in &report.rows {
        let residual = r.residual.map(|v| format!(" residual={v:.6e}")).unwrap_or_default();
        let theorem = if r.theorem_id.is_empty() {
            String::new()
        } else {
            format!(" [{}]", r.theorem_id)
        };
        let _ = writeln!(
            out,
            "{}{} {}: {}{}",
            r.suite_entry, theorem, r.sub_check, r.verdict, residual
        );
    }
    for (label, note) in &report.notes {
        let _ = writeln!(out, "  note {label}: {note}");
    }
    let code = exit_code(report);
    let _ = writeln!(
        out,
        "overall: {} ({} rows, {} errors)",
        match code {
            0 => "ConsistentWith",
            1 => "Violated",
            _ => "Inconclusive",
        },
        report.rows.len(),
        report.errors
    );
    out
}
