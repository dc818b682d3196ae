//! Suite operations as a name-keyed strategy registry.
//!
//! Every verification the toolkit can run is a [`SuiteOp`] behind a trait
//! object, looked up by the operation name in a config entry or a
//! subcommand. Ops resolve their own parameters from the entry, call into
//! the core library, and return report rows plus optional plot series.

use std::collections::BTreeMap;

use hadamard::functional::{ConvexFunctional, FunctionSequence, RegionSequence};
use hadamard::lab::{
    asymptotic_slope_check, cone_closure_check, equi_lipschitz_check, limit_mode_check,
    mosco_check, normalization_check, set_mosco_check, sufficient_condition_check,
    theorem_verify, Mode, ModeSpec, TheoremExtras,
};
use hadamard::prox::{moreau_envelope, prox, slope, verify_prox_lemmas, ProxParams};
use hadamard::region::Region;
use hadamard::space::{distance, Point, Space, WindowSpec};
use hadamard::{Status, TheoremId, Verdict};

use crate::config::{Config, Entry};
use crate::report::{Row, Series};

/// Shared state for one run: the resolved config plus run-level overrides.
pub struct OpContext<'a> {
    pub config: &'a Config,
    pub seed: u64,
    pub window: WindowSpec,
    /// Emit per-check plot series (requested via the plotdata format).
    pub plots: bool,
}

impl OpContext<'_> {
    fn space(&self) -> &Space {
        &self.config.space
    }
}

/// What one suite entry produced.
#[derive(Debug, Default)]
pub struct OpOutput {
    pub rows: Vec<Row>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

/// A runnable suite operation.
pub trait SuiteOp: Sync {
    fn name(&self) -> &'static str;
    /// One-line parameter summary for usage errors and `--help` text.
    fn usage(&self) -> &'static str;
    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String>;
}

/// Name-keyed registry of every operation the tool can execute.
pub struct OpRegistry {
    ops: BTreeMap<&'static str, Box<dyn SuiteOp>>,
}

impl OpRegistry {
    pub fn builtin() -> Self {
        let mut ops: BTreeMap<&'static str, Box<dyn SuiteOp>> = BTreeMap::new();
        let all: Vec<Box<dyn SuiteOp>> = vec![
            Box::new(ProxOp { as_envelope: false }),
            Box::new(ProxOp { as_envelope: true }),
            Box::new(SlopeOp),
            Box::new(LemmasOp),
            Box::new(LimitModeOp),
            Box::new(MoscoOp),
            Box::new(SetMoscoOp),
            Box::new(AsymptoticSlopeOp),
            Box::new(ConeClosureOp),
            Box::new(SufficientConditionOp),
            Box::new(NormalizationOp),
            Box::new(EquiLipschitzOp),
            Box::new(TheoremVerifyOp),
        ];
        for op in all {
            ops.insert(op.name(), op);
        }
        OpRegistry { ops }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.ops.keys().copied().collect()
    }

    pub fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        match self.ops.get(entry.op.as_str()) {
            Some(op) => op.run(ctx, entry).map_err(|e| {
                if e.contains("missing required parameter") {
                    format!("{e}; usage: {} {}", op.name(), op.usage())
                } else {
                    e
                }
            }),
            None => Err(format!(
                "unknown suite op `{}`; valid ops: {}",
                entry.op,
                self.names().join(", ")
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// Parameter resolution

fn param_err(key: &str, detail: impl std::fmt::Display) -> String {
    format!("parameter `{key}`: {detail}")
}

fn parse_point(ctx: &OpContext, key: &str, text: &str) -> Result<Point, String> {
    ctx.space().parse_point(text).map_err(|e| param_err(key, e))
}

fn point(ctx: &OpContext, entry: &Entry, key: &str) -> Result<Point, String> {
    parse_point(ctx, key, entry.require(key)?)
}

fn points(ctx: &OpContext, entry: &Entry, key: &str) -> Result<Vec<Point>, String> {
    entry
        .require(key)?
        .split(';')
        .map(|t| parse_point(ctx, key, t.trim()))
        .collect()
}

fn opt_points(ctx: &OpContext, entry: &Entry, key: &str) -> Result<Vec<Point>, String> {
    match entry.get(key) {
        Some(v) => v.split(';').map(|t| parse_point(ctx, key, t.trim())).collect(),
        None => Ok(Vec::new()),
    }
}

fn f64_list(entry: &Entry, key: &str) -> Result<Vec<f64>, String> {
    entry
        .require(key)?
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| param_err(key, format!("bad number `{t}`"))))
        .collect()
}

fn f64_value(entry: &Entry, key: &str) -> Result<f64, String> {
    let t = entry.require(key)?;
    t.parse::<f64>().map_err(|_| param_err(key, format!("bad number `{t}`")))
}

fn usize_value(entry: &Entry, key: &str, default: usize) -> Result<usize, String> {
    match entry.get(key) {
        Some(t) => t.parse::<usize>().map_err(|_| param_err(key, format!("bad count `{t}`"))),
        None => Ok(default),
    }
}

/// Named lookup first, inline descriptor second.
fn functional(ctx: &OpContext, entry: &Entry, key: &str) -> Result<ConvexFunctional, String> {
    let v = entry.require(key)?;
    if let Some(f) = ctx.config.functionals.get(v) {
        return Ok(f.clone());
    }
    ConvexFunctional::from_descriptor(ctx.space(), v)
        .map_err(|e| param_err(key, format!("`{v}` is not a defined functional name, and {e}")))
}

fn sequence(ctx: &OpContext, entry: &Entry, key: &str) -> Result<FunctionSequence, String> {
    let v = entry.require(key)?;
    if let Some(s) = ctx.config.sequences.get(v) {
        return Ok(s.clone());
    }
    hadamard::functional::FamilyRegistry::builtin()
        .build(ctx.space(), v)
        .map_err(|e| param_err(key, format!("`{v}` is not a defined sequence name, and {e}")))
}

fn region_family(ctx: &OpContext, entry: &Entry, key: &str) -> Result<RegionSequence, String> {
    let v = entry.require(key)?;
    if let Some(s) = ctx.config.region_families.get(v) {
        return Ok(s.clone());
    }
    hadamard::functional::SetFamilyRegistry::builtin()
        .build(ctx.space(), v)
        .map_err(|e| param_err(key, format!("`{v}` is not a defined region family, and {e}")))
}

fn region(ctx: &OpContext, entry: &Entry, key: &str) -> Result<Region, String> {
    let v = entry.require(key)?;
    if let Some(r) = ctx.config.regions.get(v) {
        return Ok(r.clone());
    }
    Region::from_descriptor(ctx.space(), v)
        .map_err(|e| param_err(key, format!("`{v}` is not a defined region name, and {e}")))
}

/// Run window with per-entry overrides.
fn window(ctx: &OpContext, entry: &Entry) -> Result<WindowSpec, String> {
    let base = ctx.window;
    let get_usize = |key: &str, d: usize| -> Result<usize, String> { usize_value(entry, key, d) };
    let n_min = get_usize("n_min", base.n_min)?;
    let n_max = get_usize("n_max", base.n_max)?;
    let tol = match entry.get("tol_seq") {
        Some(t) => t.parse::<f64>().map_err(|_| param_err("tol_seq", format!("bad number `{t}`")))?,
        None => base.tol_seq,
    };
    WindowSpec::new(n_min, n_max, tol).map_err(|e| e.to_string())
}

fn seed(ctx: &OpContext, entry: &Entry) -> Result<u64, String> {
    match entry.get("seed") {
        Some(t) => t.parse::<u64>().map_err(|_| param_err("seed", format!("bad seed `{t}`"))),
        None => Ok(ctx.seed),
    }
}

fn mode_spec(ctx: &OpContext, entry: &Entry, mode: Mode) -> Result<ModeSpec, String> {
    let pts = points(ctx, entry, "points")?;
    let lams = f64_list(entry, "lambdas")?;
    let win = window(ctx, entry)?;
    ModeSpec::new(mode, pts, lams, win).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Rows from verdicts

fn witness_fields(v: &Verdict) -> (String, Option<f64>, Option<usize>) {
    match v.witnesses.first() {
        Some(w) => (w.point.clone().unwrap_or_default(), w.lambda, w.n),
        None => (String::new(), None, None),
    }
}

fn verdict_row(sub_check: &str, theorem_id: &str, v: &Verdict) -> Row {
    let (wx, wl, wn) = witness_fields(v);
    Row {
        suite_entry: String::new(),
        operation: String::new(),
        theorem_id: theorem_id.to_string(),
        sub_check: sub_check.to_string(),
        verdict: v.status,
        witness_x: wx,
        witness_lambda: wl,
        witness_n: wn,
        residual: v.residual,
    }
}

fn collect_notes(out: &mut OpOutput, sub_check: &str, v: &Verdict) {
    for w in &v.witnesses {
        if !w.label.is_empty() {
            out.notes.push(format!("{sub_check}: witness measures {}: {:.6e}", w.label, w.value));
        }
    }
    for n in &v.notes {
        out.notes.push(format!("{sub_check}: {n}"));
    }
    if v.one_sided {
        out.notes.push(format!(
            "{sub_check}: pass is one-sided (finitely many probes of an infinite family)"
        ));
    }
}

fn push_verdict(out: &mut OpOutput, sub_check: &str, theorem_id: &str, v: &Verdict) {
    out.rows.push(verdict_row(sub_check, theorem_id, v));
    collect_notes(out, sub_check, v);
}

// ---------------------------------------------------------------------------
// Plot curves

/// Log-spaced sequence indices across the window for residual plots.
fn curve_ns(win: &WindowSpec) -> Vec<usize> {
    let (a, b) = (win.n_min as f64, win.n_max as f64);
    let mut ns: Vec<usize> = (0..16)
        .map(|i| (a * (b / a).powf(i as f64 / 15.0)).round() as usize)
        .collect();
    ns.push(win.n_max);
    ns.sort_unstable();
    ns.dedup();
    ns
}

/// Worst residual over the grid points at each sampled index, for one mode
/// and step size. Solver failures just drop the sample.
fn residual_curve(
    seq: &FunctionSequence,
    f: &ConvexFunctional,
    mode: Mode,
    xs: &[Point],
    lambda: f64,
    win: &WindowSpec,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for n in curve_ns(win) {
        let fn_cur = seq.at(n);
        let mut worst: Option<f64> = None;
        for x in xs {
            let r = match mode {
                Mode::Pointwise => {
                    let (Ok(a), Ok(b)) = (fn_cur.evaluate(x), f.evaluate(x)) else { continue };
                    match (a.is_infinite(), b.is_infinite()) {
                        (true, true) => 0.0,
                        (false, false) => (a.value() - b.value()).abs(),
                        _ => continue,
                    }
                }
                Mode::Envelope => {
                    let (Ok(a), Ok(b)) =
                        (moreau_envelope(&fn_cur, x, lambda, seed), moreau_envelope(f, x, lambda, seed))
                    else {
                        continue;
                    };
                    (a - b).abs()
                }
                Mode::Prox => {
                    let Ok(params) = ProxParams::new(lambda) else { continue };
                    let params = params.with_seed(seed);
                    let (Ok(a), Ok(b)) = (prox(&fn_cur, x, &params), prox(f, x, &params)) else {
                        continue;
                    };
                    distance(&a.minimizer, &b.minimizer).unwrap_or(f64::NAN)
                }
                _ => continue,
            };
            if r.is_finite() {
                worst = Some(worst.map_or(r, |w: f64| w.max(r)));
            }
        }
        if let Some(w) = worst {
            out.push((n as f64, w));
        }
    }
    out
}

fn mode_curves(
    out: &mut OpOutput,
    seq: &FunctionSequence,
    f: &ConvexFunctional,
    modes: &[Mode],
    spec: &ModeSpec,
    seed: u64,
) {
    for mode in modes {
        for &lam in &spec.lambdas {
            let pts = residual_curve(seq, f, *mode, &spec.points, lam, &spec.window, seed);
            if !pts.is_empty() {
                out.series.push(Series {
                    name: format!("{},lambda={lam}", mode.name()),
                    x_label: "n",
                    y_label: "residual",
                    points: pts,
                });
            }
            if *mode == Mode::Pointwise {
                // The pointwise residual does not depend on lambda.
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Operations

struct ProxOp {
    as_envelope: bool,
}

impl SuiteOp for ProxOp {
    fn name(&self) -> &'static str {
        if self.as_envelope {
            "envelope"
        } else {
            "prox"
        }
    }

    fn usage(&self) -> &'static str {
        "f=<functional> x=<point> lambdas=<l1,l2,...> [seed=N]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let f = functional(ctx, entry, "f")?;
        let x = point(ctx, entry, "x")?;
        let lams = f64_list(entry, "lambdas")?;
        let seed = seed(ctx, entry)?;
        let mut out = OpOutput::default();
        let mut series = Vec::new();
        for &lam in &lams {
            let params = ProxParams::new(lam).map_err(|e| e.to_string())?.with_seed(seed);
            let res = prox(&f, &x, &params).map_err(|e| e.to_string())?;
            let verdict = if res.converged {
                Status::ConsistentWith
            } else {
                out.notes.push(format!(
                    "lambda={lam}: solver did not certify convergence (certificate residual {:.3e})",
                    res.certificate_residual
                ));
                Status::Inconclusive
            };
            out.rows.push(Row {
                suite_entry: String::new(),
                operation: String::new(),
                theorem_id: String::new(),
                sub_check: self.name().to_string(),
                verdict,
                witness_x: res.minimizer.coords_text(),
                witness_lambda: Some(lam),
                witness_n: None,
                residual: Some(res.envelope),
            });
            out.notes.push(format!(
                "lambda={lam}: J(x) = {}, f(J(x)) = {:.12e}, f_lambda(x) = {:.12e}",
                res.minimizer.coords_text(),
                res.f_value,
                res.envelope
            ));
            series.push((lam, res.envelope));
        }
        if ctx.plots {
            out.series.push(Series {
                name: "f_lambda".into(),
                x_label: "lambda",
                y_label: "value",
                points: series,
            });
        }
        Ok(out)
    }
}

struct SlopeOp;

impl SuiteOp for SlopeOp {
    fn name(&self) -> &'static str {
        "slope"
    }

    fn usage(&self) -> &'static str {
        "f=<functional> x=<point> [budget=200] [seed=N]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let f = functional(ctx, entry, "f")?;
        let x = point(ctx, entry, "x")?;
        let budget = usize_value(entry, "budget", 200)?;
        let seed = seed(ctx, entry)?;
        let est = slope(&f, &x, budget, seed).map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        let (value, note) = if est.value.is_infinite() {
            (None, format!("slope at {} is unbounded (+inf)", x.coords_text()))
        } else {
            (Some(est.value.value()), format!(
                "slope at {} is {:.12e} from {} samples",
                x.coords_text(),
                est.value.value(),
                est.samples
            ))
        };
        out.rows.push(Row {
            suite_entry: String::new(),
            operation: String::new(),
            theorem_id: String::new(),
            sub_check: "slope".into(),
            verdict: Status::ConsistentWith,
            witness_x: est.witness.map(|w| w.coords_text()).unwrap_or_default(),
            witness_lambda: None,
            witness_n: None,
            residual: value,
        });
        out.notes.push(note);
        Ok(out)
    }
}

struct LemmasOp;

impl SuiteOp for LemmasOp {
    fn name(&self) -> &'static str {
        "verify_prox_lemmas"
    }

    fn usage(&self) -> &'static str {
        "f=<functional> x=<point> lambdas=<l1,l2,...> [seed=N]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let f = functional(ctx, entry, "f")?;
        let x = point(ctx, entry, "x")?;
        let lams = f64_list(entry, "lambdas")?;
        let seed = seed(ctx, entry)?;
        let checks = verify_prox_lemmas(&f, &x, &lams, seed).map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        for c in &checks {
            push_verdict(&mut out, &c.name, "", &c.verdict);
        }
        Ok(out)
    }
}

struct LimitModeOp;

impl SuiteOp for LimitModeOp {
    fn name(&self) -> &'static str {
        "limit_mode_check"
    }

    fn usage(&self) -> &'static str {
        "mode=<pointwise|envelope|prox> sequence=<seq> limit=<functional> points=<p1;p2> lambdas=<l1,...> [n_min= n_max= tol_seq= seed=]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let mode_text = entry.require("mode")?;
        let mode = Mode::parse(mode_text)
            .ok_or_else(|| param_err("mode", format!("unknown mode `{mode_text}`")))?;
        let seq = sequence(ctx, entry, "sequence")?;
        let f = functional(ctx, entry, "limit")?;
        let spec = mode_spec(ctx, entry, mode)?;
        let seed = seed(ctx, entry)?;
        let v = limit_mode_check(&seq, &f, &spec, seed).map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        push_verdict(&mut out, mode.name(), "", &v);
        if ctx.plots {
            mode_curves(&mut out, &seq, &f, &[mode], &spec, seed);
        }
        Ok(out)
    }
}

struct MoscoOp;

impl SuiteOp for MoscoOp {
    fn name(&self) -> &'static str {
        "mosco_check"
    }

    fn usage(&self) -> &'static str {
        "sequence=<seq> limit=<functional> points=<p1;p2> lambdas=<l1,...> [window/seed overrides]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let seq = sequence(ctx, entry, "sequence")?;
        let f = functional(ctx, entry, "limit")?;
        let spec = mode_spec(ctx, entry, Mode::Mosco)?;
        let seed = seed(ctx, entry)?;
        let v = mosco_check(&seq, &f, &spec, &[], seed).map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        push_verdict(&mut out, "mosco", "", &v);
        Ok(out)
    }
}

struct SetMoscoOp;

impl SuiteOp for SetMoscoOp {
    fn name(&self) -> &'static str {
        "set_mosco_check"
    }

    fn usage(&self) -> &'static str {
        "regions=<region family> [limit=<region>] points=<p1;p2> lambdas=<l1,...> [window/seed overrides]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let regions = region_family(ctx, entry, "regions")?;
        let limit = match entry.get("limit") {
            Some(_) => Some(region(ctx, entry, "limit")?),
            None => None,
        };
        let spec = mode_spec(ctx, entry, Mode::Mosco)?;
        let seed = seed(ctx, entry)?;
        let v = set_mosco_check(&regions, limit.as_ref(), &spec, seed).map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        push_verdict(&mut out, "set_mosco", "", &v);
        Ok(out)
    }
}

struct AsymptoticSlopeOp;

impl SuiteOp for AsymptoticSlopeOp {
    fn name(&self) -> &'static str {
        "asymptotic_slope_check"
    }

    fn usage(&self) -> &'static str {
        "sequence=<seq> points=<p1;p2> [window/seed overrides]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let seq = sequence(ctx, entry, "sequence")?;
        let pts = points(ctx, entry, "points")?;
        let win = window(ctx, entry)?;
        let seed = seed(ctx, entry)?;
        let profile = asymptotic_slope_check(&seq, &pts, &win, seed).map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        push_verdict(&mut out, "asymptotic_slopes", "", &profile.verdict());
        for e in &profile.entries {
            out.notes.push(format!(
                "tail slope bound at {}: {}{}",
                e.point.coords_text(),
                if e.tail_bound.is_infinite() {
                    "+inf".to_string()
                } else {
                    format!("{:.6e}", e.tail_bound.value())
                },
                if e.divergent { " (divergent)" } else { "" }
            ));
        }
        Ok(out)
    }
}

struct ConeClosureOp;

impl SuiteOp for ConeClosureOp {
    fn name(&self) -> &'static str {
        "cone_closure_check"
    }

    fn usage(&self) -> &'static str {
        "sequence_a=<seq> sequence_b=<seq> alpha=<a> beta=<b> points=<p1;p2> [window/seed overrides]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let a = sequence(ctx, entry, "sequence_a")?;
        let b = sequence(ctx, entry, "sequence_b")?;
        let alpha = f64_value(entry, "alpha")?;
        let beta = f64_value(entry, "beta")?;
        let pts = points(ctx, entry, "points")?;
        let win = window(ctx, entry)?;
        let seed = seed(ctx, entry)?;
        let v = cone_closure_check(&a, &b, alpha, beta, &pts, &win, seed).map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        push_verdict(&mut out, "cone_combination", "", &v);
        Ok(out)
    }
}

struct SufficientConditionOp;

impl SuiteOp for SufficientConditionOp {
    fn name(&self) -> &'static str {
        "sufficient_condition_check"
    }

    fn usage(&self) -> &'static str {
        "sequence=<seq> limit=<functional> points=<p1;p2> [samples=64] [window/seed overrides]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let seq = sequence(ctx, entry, "sequence")?;
        let f = functional(ctx, entry, "limit")?;
        let pts = points(ctx, entry, "points")?;
        let samples = usize_value(entry, "samples", 64)?;
        let win = window(ctx, entry)?;
        let seed = seed(ctx, entry)?;
        let v = sufficient_condition_check(&seq, &f, &pts, samples, &win, seed)
            .map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        push_verdict(&mut out, "sufficient_condition", "", &v);
        Ok(out)
    }
}

struct NormalizationOp;

impl SuiteOp for NormalizationOp {
    fn name(&self) -> &'static str {
        "normalization_check"
    }

    fn usage(&self) -> &'static str {
        "sequence=<seq> limit=<functional> x0=<point> lambda=<l> points=<p1;p2> lambdas=<l1,...> [window/seed overrides]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let seq = sequence(ctx, entry, "sequence")?;
        let f = functional(ctx, entry, "limit")?;
        let x0 = point(ctx, entry, "x0")?;
        let lambda = f64_value(entry, "lambda")?;
        let spec = mode_spec(ctx, entry, Mode::Mosco)?;
        let seed = seed(ctx, entry)?;
        let v = normalization_check(&seq, &f, &x0, lambda, &spec, seed).map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        push_verdict(&mut out, "normalization", "", &v);
        Ok(out)
    }
}

struct EquiLipschitzOp;

impl SuiteOp for EquiLipschitzOp {
    fn name(&self) -> &'static str {
        "equi_lipschitz_check"
    }

    fn usage(&self) -> &'static str {
        "sequence=<seq> lambda=<l> x0=<point> region=<region> [samples=24] [window/seed overrides]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let seq = sequence(ctx, entry, "sequence")?;
        let lambda = f64_value(entry, "lambda")?;
        let x0 = point(ctx, entry, "x0")?;
        let reg = region(ctx, entry, "region")?;
        let samples = usize_value(entry, "samples", 24)?;
        let win = window(ctx, entry)?;
        let seed = seed(ctx, entry)?;
        let v = equi_lipschitz_check(&seq, lambda, &x0, &reg, samples, &win, seed)
            .map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        push_verdict(&mut out, "equi_lipschitz", "", &v);
        Ok(out)
    }
}

struct TheoremVerifyOp;

impl SuiteOp for TheoremVerifyOp {
    fn name(&self) -> &'static str {
        "theorem_verify"
    }

    fn usage(&self) -> &'static str {
        "id=<bacak_fwd|bacak2_bwd|thm1|thm2|mainthm|attouch_hadamard> sequence=<seq> limit=<functional> points=<p1;p2> lambdas=<l1,...> [anchor=<point>] [bundle=<p1;p2>] [window/seed overrides]"
    }

    fn run(&self, ctx: &OpContext, entry: &Entry) -> Result<OpOutput, String> {
        let id_text = entry.require("id")?;
        let id = TheoremId::parse(id_text).ok_or_else(|| {
            param_err(
                "id",
                format!(
                    "unknown theorem `{id_text}`; valid ids: {}",
                    TheoremId::ALL.map(|t| t.name()).join(", ")
                ),
            )
        })?;
        let seq = sequence(ctx, entry, "sequence")?;
        let f = functional(ctx, entry, "limit")?;
        let spec = mode_spec(ctx, entry, Mode::Mosco)?;
        let seed = seed(ctx, entry)?;
        let extras = TheoremExtras {
            probes: Vec::new(),
            anchor: match entry.get("anchor") {
                Some(_) => Some(point(ctx, entry, "anchor")?),
                None => None,
            },
            bundle: opt_points(ctx, entry, "bundle")?,
        };
        let report = theorem_verify(id, &seq, &f, &spec, &extras, seed).map_err(|e| e.to_string())?;
        let mut out = OpOutput::default();
        for c in &report.checks {
            let name = format!(
                "{}:{}",
                match c.role {
                    hadamard::CheckRole::Hypothesis => "hyp",
                    hadamard::CheckRole::Conclusion => "concl",
                    hadamard::CheckRole::Auxiliary => "aux",
                },
                c.name
            );
            push_verdict(&mut out, &name, id.name(), &c.verdict);
        }
        // Summary row carrying the implication-level verdict.
        out.rows.push(Row {
            suite_entry: String::new(),
            operation: String::new(),
            theorem_id: id.name().to_string(),
            sub_check: "conclusion".into(),
            verdict: report.conclusion_verdict,
            witness_x: String::new(),
            witness_lambda: None,
            witness_n: None,
            residual: None,
        });
        if report.falsified {
            out.notes.push(
                "FALSIFICATION PATTERN: all hypotheses passed and a conclusion check violated"
                    .into(),
            );
        }
        for n in &report.notes {
            out.notes.push(format!("{}: {n}", id.name()));
        }
        if ctx.plots {
            mode_curves(
                &mut out,
                &seq,
                &f,
                &[Mode::Pointwise, Mode::Envelope, Mode::Prox],
                &spec,
                seed,
            );
        }
        Ok(out)
    }
}
