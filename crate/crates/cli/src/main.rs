//! Batch experiment runner for the geodesic convex-analysis toolkit.
//!
//! Single computations (`prox`, `envelope`, `slope`, `verify`) synthesize a
//! one-entry suite; `run` executes every entry of a config document; `demo`
//! ships canned configs. All randomness derives from one seed, and report
//! files under `--out` are byte-deterministic except `run_meta.txt`.

mod config;
mod ops;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Config, Entry};
use ops::{OpContext, OpRegistry};
use report::RunReport;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Oscillating family: prox limits exist while envelope and Mosco limits
/// fail, so the three convergence notions genuinely differ.
const DEMO_COUNTEREXAMPLE: &str = "\
# Alternating constants 0, 1, 0, 1, ... against the candidate limit 0.
# Proximal maps are blind to constant offsets, so the prox mode passes;
# envelope values oscillate with the tail, and no recovery sequence can
# meet the Mosco upper condition.

space
  kind=euclidean,dim=1

run
  seed=7
  n_min=64
  n_max=256
  tol_seq=0.01

functional zero_limit
  f=const,value=0

sequence osc
  family=oscillating,low=0,high=1

suite limit_mode_check
  mode=prox
  sequence=osc
  limit=zero_limit
  points=(0.5)
  lambdas=1

suite limit_mode_check
  mode=envelope
  sequence=osc
  limit=zero_limit
  points=(0.5)
  lambdas=1

suite mosco_check
  sequence=osc
  limit=zero_limit
  points=(0.5)
  lambdas=1
";

#[derive(Parser)]
#[command(
    name = "hadamard",
    version,
    about = "Proximal maps, Moreau envelopes, slopes, and convergence checks on Hadamard spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Proximal point of a functional at a base point, one solve per step size
    Prox(PointCmd),
    /// Moreau envelope values at a base point
    Envelope(PointCmd),
    /// Descent slope estimate of a functional at a point
    Slope(SlopeCmd),
    /// Check one theorem's hypotheses and conclusion on a sequence family
    Verify(VerifyCmd),
    /// Execute every suite entry of a config document
    Run(RunCmd),
    /// Canned demonstration suites
    Demo(DemoCmd),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file providing the space and named functionals/sequences
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for report files (created if missing)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Base seed for all derived randomness
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Tail tolerance for sequence checks
    #[arg(long, value_name = "X")]
    tol_seq: Option<f64>,
    /// Comma-separated report formats: csv, markdown, plotdata
    #[arg(long, value_name = "LIST", default_value = "csv,markdown")]
    format: String,
}

#[derive(Args)]
struct PointCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Space descriptor, e.g. kind=euclidean,dim=2 (default: config space or the line)
    #[arg(long, value_name = "DESC")]
    space: Option<String>,
    /// Functional: a config name or an inline descriptor like f=abs
    #[arg(short, long, value_name = "F")]
    f: String,
    /// Base point, e.g. (2) or (0 1)
    #[arg(short, long, value_name = "POINT")]
    x: String,
    /// Comma-separated step sizes
    #[arg(long, value_name = "LIST", default_value = "1")]
    lambdas: String,
}

#[derive(Args)]
struct SlopeCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Space descriptor (default: config space or the line)
    #[arg(long, value_name = "DESC")]
    space: Option<String>,
    /// Functional: a config name or an inline descriptor
    #[arg(short, long, value_name = "F")]
    f: String,
    /// Base point
    #[arg(short, long, value_name = "POINT")]
    x: String,
    /// Sampling budget for the descent-ratio search
    #[arg(long, value_name = "N", default_value_t = 200)]
    budget: usize,
}

#[derive(Args)]
struct VerifyCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Theorem id: bacak_fwd, bacak2_bwd, thm1, thm2, mainthm, attouch_hadamard
    #[arg(value_name = "THEOREM")]
    theorem_id: String,
    /// Space descriptor (default: config space or the line)
    #[arg(long, value_name = "DESC")]
    space: Option<String>,
    /// Sequence family: a config name or a family descriptor
    #[arg(long, value_name = "SEQ", default_value = "family=shifted_abs")]
    sequence: String,
    /// Candidate limit functional
    #[arg(long, value_name = "F", default_value = "f=abs")]
    limit: String,
    /// Semicolon-separated probe grid
    #[arg(long, value_name = "PTS", default_value = "(2);(-1);(0);(0.5)")]
    points: String,
    /// Comma-separated step sizes
    #[arg(long, value_name = "LIST", default_value = "1,0.5,0.1")]
    lambdas: String,
    /// Anchor point for normalization hypotheses
    #[arg(long, value_name = "POINT")]
    anchor: Option<String>,
    /// Extra probe points, semicolon-separated
    #[arg(long, value_name = "PTS")]
    bundle: Option<String>,
    /// Tail window start
    #[arg(long, value_name = "N", default_value_t = 128)]
    n_min: usize,
    /// Tail window end
    #[arg(long, value_name = "N", default_value_t = 256)]
    n_max: usize,
}

#[derive(Args)]
struct RunCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Config document with suite entries (or use --config)
    #[arg(value_name = "CONFIG")]
    path: Option<PathBuf>,
}

#[derive(Args)]
struct DemoCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Demo name; `counterexample` is the oscillating-family suite
    #[arg(value_name = "NAME")]
    name: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, String> {
    let registry = OpRegistry::builtin();
    match cli.command {
        Command::Prox(cmd) => {
            let entry = Entry::synthetic(
                "prox",
                &[("f", cmd.f.clone()), ("x", cmd.x.clone()), ("lambdas", cmd.lambdas.clone())],
            );
            one_entry(&registry, &cmd.common, cmd.space.as_deref(), entry)
        }
        Command::Envelope(cmd) => {
            let entry = Entry::synthetic(
                "envelope",
                &[("f", cmd.f.clone()), ("x", cmd.x.clone()), ("lambdas", cmd.lambdas.clone())],
            );
            one_entry(&registry, &cmd.common, cmd.space.as_deref(), entry)
        }
        Command::Slope(cmd) => {
            let entry = Entry::synthetic(
                "slope",
                &[
                    ("f", cmd.f.clone()),
                    ("x", cmd.x.clone()),
                    ("budget", cmd.budget.to_string()),
                ],
            );
            one_entry(&registry, &cmd.common, cmd.space.as_deref(), entry)
        }
        Command::Verify(cmd) => {
            let mut pairs = vec![
                ("id", cmd.theorem_id.clone()),
                ("sequence", cmd.sequence.clone()),
                ("limit", cmd.limit.clone()),
                ("points", cmd.points.clone()),
                ("lambdas", cmd.lambdas.clone()),
                ("n_min", cmd.n_min.to_string()),
                ("n_max", cmd.n_max.to_string()),
            ];
            if let Some(a) = &cmd.anchor {
                pairs.push(("anchor", a.clone()));
            }
            if let Some(b) = &cmd.bundle {
                pairs.push(("bundle", b.clone()));
            }
            let entry = Entry::synthetic("theorem_verify", &pairs);
            one_entry(&registry, &cmd.common, cmd.space.as_deref(), entry)
        }
        Command::Run(cmd) => {
            let path = cmd
                .path
                .as_ref()
                .or(cmd.common.config.as_ref())
                .ok_or("run needs a config document (positional or --config)")?;
            let text = read_config(path)?;
            suite_from_text(&registry, &cmd.common, &text)
        }
        Command::Demo(cmd) => match cmd.name.as_str() {
            "counterexample" => suite_from_text(&registry, &cmd.common, DEMO_COUNTEREXAMPLE),
            other => Err(format!("unknown demo `{other}`; available demos: counterexample")),
        },
    }
}

fn read_config(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// Base config for a synthesized single-op run: the `--config` document if
/// given, otherwise a minimal space-only document.
fn base_config(
    common: &CommonArgs,
    space: Option<&str>,
    known_ops: &[&str],
) -> Result<(String, Config), String> {
    if let Some(path) = &common.config {
        if space.is_some() {
            return Err("--space conflicts with --config; the config document fixes the space".into());
        }
        let text = read_config(path)?;
        let cfg = parse_config(&text, known_ops)?;
        return Ok((text, cfg));
    }
    let descriptor = space.unwrap_or("kind=euclidean,dim=1");
    let text = format!("space\n  descriptor={descriptor}\n");
    let cfg = parse_config(&text, known_ops)?;
    Ok((text, cfg))
}

fn parse_config(text: &str, known_ops: &[&str]) -> Result<Config, String> {
    config::parse(text, known_ops).map_err(|errs| {
        errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n")
    })
}

fn one_entry(
    registry: &OpRegistry,
    common: &CommonArgs,
    space: Option<&str>,
    entry: Entry,
) -> Result<u8, String> {
    let names = registry.names();
    let (text, cfg) = base_config(common, space, &names)?;
    // The digest covers everything that determines the run.
    let mut digest_text = text.clone();
    digest_text.push_str(&format!("\nsuite {}\n", entry.op));
    for p in &entry.pairs {
        digest_text.push_str(&format!("  {}={}\n", p.key, p.value));
    }
    execute(registry, common, &cfg, std::slice::from_ref(&entry), &digest_text)
}

fn suite_from_text(registry: &OpRegistry, common: &CommonArgs, text: &str) -> Result<u8, String> {
    let names = registry.names();
    let cfg = parse_config(text, &names)?;
    let entries = cfg.entries.clone();
    execute(registry, common, &cfg, &entries, text)
}

fn execute(
    registry: &OpRegistry,
    common: &CommonArgs,
    cfg: &Config,
    entries: &[Entry],
    digest_text: &str,
) -> Result<u8, String> {
    let formats: Vec<&str> = common.format.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    for f in &formats {
        if !matches!(*f, "csv" | "markdown" | "plotdata") {
            return Err(format!("unknown format `{f}`; expected csv, markdown, plotdata"));
        }
    }
    let mut window = cfg.window;
    if let Some(tol) = common.tol_seq {
        if !(tol > 0.0) {
            return Err(format!("--tol-seq must be positive, got {tol}"));
        }
        window.tol_seq = tol;
    }
    let ctx = OpContext {
        config: cfg,
        seed: common.seed.unwrap_or(cfg.seed),
        window,
        plots: formats.contains(&"plotdata"),
    };
    let mut report = report::execute_suite(&ctx, registry, entries);
    report.config_digest = report::config_digest(digest_text);
    if let Some(dir) = &common.out {
        write_reports(dir, &report, &formats)?;
        // Canonical echo of the resolved sections, reparse-stable.
        let path = dir.join("config_resolved.cfg");
        std::fs::write(&path, cfg.print())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    print!("{}", report::render_summary(&report));
    Ok(report::exit_code(&report) as u8)
}

fn write_reports(dir: &Path, report: &RunReport, formats: &[&str]) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let write = |name: &str, content: String| -> Result<(), String> {
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
    };
    for f in formats {
        match *f {
            "csv" => write("report.csv", report::render_csv(report))?,
            "markdown" => write("report.md", report::render_markdown(report, VERSION))?,
            "plotdata" => write("plotdata.tsv", report::render_plotdata(report))?,
            _ => unreachable!("formats validated above"),
        }
    }
    write("run_meta.txt", report::render_meta(report, VERSION))
}
