//! Line-oriented experiment configs.
//!
//! A document is a sequence of sections. A section starts with an
//! unindented header `kind` or `kind name` and is followed by indented
//! `key=value` lines; values run to the end of the line, so they may
//! contain `=`, commas, and spaces. Blank lines and `#` comment lines are
//! skipped. Section kinds:
//!
//! ```text
//! space                 body pairs form the space descriptor
//! run                   seed, n_min, n_max, tol_seq
//! functional NAME       body pairs form a functional descriptor
//! sequence NAME         body pairs form a sequence-family descriptor
//! regions NAME          body pairs form a region-family descriptor
//! region NAME           body pairs form a region descriptor
//! suite OP              one verification-suite entry; parameters are
//!                       op-specific and resolved when the entry runs
//! ```
//!
//! Parsing reports every located error it can find rather than stopping
//! at the first; printing produces canonical text whose reparse yields the
//! same sections.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hadamard::functional::{
    ConvexFunctional, FamilyRegistry, FunctionSequence, RegionSequence, SetFamilyRegistry,
};
use hadamard::region::Region;
use hadamard::space::{Space, SpaceRegistry, WindowSpec};

/// One `key=value` body line.
#[derive(Clone, Debug, PartialEq)]
pub struct Pair {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// A raw section before resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSection {
    pub kind: String,
    pub name: Option<String>,
    pub line: usize,
    pub pairs: Vec<Pair>,
}

/// A parse or resolution problem, anchored to a source line.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// One suite entry, still holding raw parameters; ops resolve them.
#[derive(Clone, Debug)]
pub struct Entry {
    pub index: usize,
    pub op: String,
    pub line: usize,
    pub pairs: Vec<Pair>,
}

impl Entry {
    /// Synthesizes an entry that did not come from a document.
    pub fn synthetic(op: &str, pairs: &[(&str, String)]) -> Entry {
        Entry {
            index: 1,
            op: op.to_string(),
            line: 0,
            pairs: pairs
                .iter()
                .map(|(k, v)| Pair { key: (*k).to_string(), value: v.clone(), line: 0 })
                .collect(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().find(|p| p.key == key).map(|p| p.value.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, String> {
        self.get(key).ok_or_else(|| {
            format!("suite op `{}` (line {}) is missing required parameter `{key}`", self.op, self.line)
        })
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.index, self.op)
    }
}

/// A fully resolved experiment configuration.
pub struct Config {
    raw: Vec<RawSection>,
    pub space: Space,
    pub seed: u64,
    pub window: WindowSpec,
    pub functionals: BTreeMap<String, ConvexFunctional>,
    pub sequences: BTreeMap<String, FunctionSequence>,
    pub region_families: BTreeMap<String, RegionSequence>,
    pub regions: BTreeMap<String, Region>,
    pub entries: Vec<Entry>,
}

impl Config {
    /// Canonical text whose reparse yields the same sections.
    pub fn print(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.raw.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            match &s.name {
                Some(n) => {
                    let _ = writeln!(out, "{} {}", s.kind, n);
                }
                None => {
                    let _ = writeln!(out, "{}", s.kind);
                }
            }
            for p in &s.pairs {
                let _ = writeln!(out, "  {}={}", p.key, p.value);
            }
        }
        out
    }
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Splits a document into raw sections.
fn lex(text: &str) -> Result<Vec<RawSection>, Vec<ConfigError>> {
    let mut sections: Vec<RawSection> = Vec::new();
    let mut errors: Vec<ConfigError> = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = raw_line.trim_end();
        if trimmed.trim_start().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let indented = trimmed.starts_with(' ') || trimmed.starts_with('\t');
        if !indented {
            let mut words = trimmed.split_whitespace();
            let kind = words.next().unwrap_or_default().to_string();
            let name = words.next().map(str::to_string);
            if let Some(extra) = words.next() {
                errors.push(ConfigError {
                    line: line_no,
                    message: format!("unexpected token `{extra}` after section header"),
                });
            }
            if trimmed.contains('=') {
                errors.push(ConfigError {
                    line: line_no,
                    message: "section headers carry no `key=value` pairs; indent the pair under the header".into(),
                });
                continue;
            }
            if let Some(n) = &name {
                if !is_name(n) {
                    errors.push(ConfigError {
                        line: line_no,
                        message: format!("invalid section name `{n}`"),
                    });
                }
            }
            sections.push(RawSection { kind, name, line: line_no, pairs: Vec::new() });
        } else {
            let body = trimmed.trim_start();
            let Some(section) = sections.last_mut() else {
                errors.push(ConfigError {
                    line: line_no,
                    message: "indented line before any section header".into(),
                });
                continue;
            };
            match body.split_once('=') {
                Some((k, v)) if is_name(k.trim()) => {
                    section.pairs.push(Pair {
                        key: k.trim().to_string(),
                        value: v.trim().to_string(),
                        line: line_no,
                    });
                }
                _ => errors.push(ConfigError {
                    line: line_no,
                    message: format!("expected `key=value`, got `{body}`"),
                }),
            }
        }
    }
    if errors.is_empty() {
        Ok(sections)
    } else {
        Err(errors)
    }
}

/// Joins body pairs into descriptor text; a single `descriptor` key passes
/// its value through verbatim.
fn descriptor_text(s: &RawSection) -> String {
    if s.pairs.len() == 1 && s.pairs[0].key == "descriptor" {
        return s.pairs[0].value.clone();
    }
    s.pairs
        .iter()
        .map(|p| format!("{}={}", p.key, p.value))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_u64(p: &Pair, errors: &mut Vec<ConfigError>) -> Option<u64> {
    match p.value.parse::<u64>() {
        Ok(v) => Some(v),
        Err(_) => {
            errors.push(ConfigError {
                line: p.line,
                message: format!("`{}` needs an unsigned integer, got `{}`", p.key, p.value),
            });
            None
        }
    }
}

fn parse_f64(p: &Pair, errors: &mut Vec<ConfigError>) -> Option<f64> {
    match p.value.parse::<f64>() {
        Ok(v) => Some(v),
        Err(_) => {
            errors.push(ConfigError {
                line: p.line,
                message: format!("`{}` needs a number, got `{}`", p.key, p.value),
            });
            None
        }
    }
}

/// Parses and resolves a document. `known_ops` is the suite-op vocabulary,
/// used to reject unknown operations with the valid list.
pub fn parse(text: &str, known_ops: &[&str]) -> Result<Config, Vec<ConfigError>> {
    let raw = lex(text)?;
    let mut errors: Vec<ConfigError> = Vec::new();

    let mut space: Option<Space> = None;
    let mut saw_space = false;
    let mut seed = 0u64;
    let mut n_min: Option<usize> = None;
    let mut n_max: Option<usize> = None;
    let mut tol_seq: Option<f64> = None;
    let mut saw_run = false;

    // Space and run settings first: named sections need the space.
    for s in &raw {
        match s.kind.as_str() {
            "space" => {
                if s.name.is_some() {
                    errors.push(ConfigError { line: s.line, message: "`space` takes no name".into() });
                }
                if saw_space {
                    errors.push(ConfigError {
                        line: s.line,
                        message: "duplicate `space` section".into(),
                    });
                    continue;
                }
                saw_space = true;
                match SpaceRegistry::builtin().build(&descriptor_text(s)) {
                    Ok(sp) => space = Some(sp),
                    Err(e) => errors.push(ConfigError { line: s.line, message: e.to_string() }),
                }
            }
            "run" => {
                if saw_run {
                    errors.push(ConfigError { line: s.line, message: "duplicate `run` section".into() });
                    continue;
                }
                saw_run = true;
                for p in &s.pairs {
                    match p.key.as_str() {
                        "seed" => {
                            if let Some(v) = parse_u64(p, &mut errors) {
                                seed = v;
                            }
                        }
                        "n_min" => n_min = parse_u64(p, &mut errors).map(|v| v as usize),
                        "n_max" => n_max = parse_u64(p, &mut errors).map(|v| v as usize),
                        "tol_seq" => tol_seq = parse_f64(p, &mut errors),
                        other => errors.push(ConfigError {
                            line: p.line,
                            message: format!(
                                "unknown `run` key `{other}`; expected seed, n_min, n_max, tol_seq"
                            ),
                        }),
                    }
                }
            }
            _ => {}
        }
    }

    let Some(space) = space else {
        if !saw_space {
            errors.push(ConfigError {
                line: 1,
                message: "config needs exactly one `space` section".into(),
            });
        }
        return Err(errors);
    };

    let defaults = WindowSpec::default();
    let window = WindowSpec::new(
        n_min.unwrap_or(defaults.n_min),
        n_max.unwrap_or(defaults.n_max),
        tol_seq.unwrap_or(defaults.tol_seq),
    )
    .unwrap_or_else(|e| {
        errors.push(ConfigError { line: 1, message: e.to_string() });
        defaults
    });

    let mut functionals = BTreeMap::new();
    let mut sequences = BTreeMap::new();
    let mut region_families = BTreeMap::new();
    let mut regions = BTreeMap::new();
    let mut entries = Vec::new();

    let families = FamilyRegistry::builtin();
    let set_families = SetFamilyRegistry::builtin();

    for s in &raw {
        let named = |errors: &mut Vec<ConfigError>| -> Option<String> {
            match &s.name {
                Some(n) => Some(n.clone()),
                None => {
                    errors.push(ConfigError {
                        line: s.line,
                        message: format!("`{}` section needs a name", s.kind),
                    });
                    None
                }
            }
        };
        match s.kind.as_str() {
            "space" | "run" => {}
            "functional" => {
                let Some(name) = named(&mut errors) else { continue };
                match ConvexFunctional::from_descriptor(&space, &descriptor_text(s)) {
                    Ok(f) => {
                        if functionals.insert(name.clone(), f).is_some() {
                            errors.push(ConfigError {
                                line: s.line,
                                message: format!("duplicate functional `{name}`"),
                            });
                        }
                    }
                    Err(e) => errors.push(ConfigError { line: s.line, message: e.to_string() }),
                }
            }
            "sequence" => {
                let Some(name) = named(&mut errors) else { continue };
                match families.build(&space, &descriptor_text(s)) {
                    Ok(f) => {
                        if sequences.insert(name.clone(), f).is_some() {
                            errors.push(ConfigError {
                                line: s.line,
                                message: format!("duplicate sequence `{name}`"),
                            });
                        }
                    }
                    Err(e) => errors.push(ConfigError { line: s.line, message: e.to_string() }),
                }
            }
            "regions" => {
                let Some(name) = named(&mut errors) else { continue };
                match set_families.build(&space, &descriptor_text(s)) {
                    Ok(f) => {
                        if region_families.insert(name.clone(), f).is_some() {
                            errors.push(ConfigError {
                                line: s.line,
                                message: format!("duplicate region family `{name}`"),
                            });
                        }
                    }
                    Err(e) => errors.push(ConfigError { line: s.line, message: e.to_string() }),
                }
            }
            "region" => {
                let Some(name) = named(&mut errors) else { continue };
                match Region::from_descriptor(&space, &descriptor_text(s)) {
                    Ok(r) => {
                        if regions.insert(name.clone(), r).is_some() {
                            errors.push(ConfigError {
                                line: s.line,
                                message: format!("duplicate region `{name}`"),
                            });
                        }
                    }
                    Err(e) => errors.push(ConfigError { line: s.line, message: e.to_string() }),
                }
            }
            "suite" => {
                let Some(op) = s.name.clone() else {
                    errors.push(ConfigError {
                        line: s.line,
                        message: "`suite` needs an operation name".into(),
                    });
                    continue;
                };
                if !known_ops.contains(&op.as_str()) {
                    errors.push(ConfigError {
                        line: s.line,
                        message: format!(
                            "unknown suite op `{op}`; valid ops: {}",
                            known_ops.join(", ")
                        ),
                    });
                    continue;
                }
                entries.push(Entry {
                    index: entries.len() + 1,
                    op,
                    line: s.line,
                    pairs: s.pairs.clone(),
                });
            }
            other => errors.push(ConfigError {
                line: s.line,
                message: format!(
                    "unknown section `{other}`; expected space, run, functional, sequence, regions, region, suite"
                ),
            }),
        }
    }

    if errors.is_empty() {
        Ok(Config {
            raw,
            space,
            seed,
            window,
            functionals,
            sequences,
            region_families,
            regions,
            entries,
        })
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expect_errs(r: Result<Config, Vec<ConfigError>>) -> Vec<ConfigError> {
        match r {
            Ok(_) => panic!("config unexpectedly parsed"),
            Err(errs) => errs,
        }
    }

    const OPS: &[&str] = &["prox", "mosco_check", "theorem_verify"];

    const MINIMAL: &str = "\
space
  kind=euclidean,dim=1

run
  seed=7

functional target
  f=abs
  weight=1

suite prox
  f=target
  x=(2)
  lambdas=1
";

    #[test]
    fn minimal_config_resolves() {
        let cfg = parse(MINIMAL, OPS).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.space.descriptor(), "kind=euclidean,dim=1");
        assert!(cfg.functionals.contains_key("target"));
        assert_eq!(cfg.entries.len(), 1);
        assert_eq!(cfg.entries[0].op, "prox");
        assert_eq!(cfg.entries[0].get("x"), Some("(2)"));
    }

    #[test]
    fn print_parse_is_a_fixpoint() {
        let cfg = parse(MINIMAL, OPS).unwrap();
        let printed = cfg.print();
        let again = parse(&printed, OPS).unwrap();
        assert_eq!(again.print(), printed);
        assert_eq!(again.raw, cfg.raw);
    }

    #[test]
    fn bad_spider_legs_is_a_located_error() {
        let text = "space\n  kind=spider\n  legs=1\n";
        let errs = expect_errs(parse(text, OPS));
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, 1);
        assert!(errs[0].message.contains("legs >= 2"), "{}", errs[0].message);
    }

    #[test]
    fn unknown_suite_op_lists_valid_ops() {
        let text = "space\n  kind=euclidean,dim=1\nsuite frobnicate\n  x=(0)\n";
        let errs = expect_errs(parse(text, OPS));
        assert!(errs[0].message.contains("unknown suite op `frobnicate`"));
        assert!(errs[0].message.contains("prox, mosco_check, theorem_verify"));
    }

    #[test]
    fn errors_are_collected_not_first_only() {
        let text = "space\n  kind=euclidean,dim=1\nfunctional\n  f=abs\nsuite nope\n";
        let errs = expect_errs(parse(text, OPS));
        assert_eq!(errs.len(), 2, "{errs:?}");
        assert!(errs[0].message.contains("needs a name"));
        assert!(errs[1].message.contains("unknown suite op"));
    }

    #[test]
    fn verbatim_descriptor_key_passes_through() {
        let text = "space\n  descriptor=kind=product,factors=[kind=euclidean,dim=2;kind=spider,legs=3]\n";
        let cfg = parse(text, OPS).unwrap();
        assert!(cfg.space.descriptor().starts_with("kind=product"));
    }
}
