//! Three-valued verdicts, witnesses, and theorem reports.
//!
//! Numerical checks never prove a statement; they either stay consistent
//! with it on the probed instances, exhibit a concrete violation witness,
//! or decline to judge. Theorem reports compose sub-check verdicts under
//! implication semantics: a conclusion is only judged when every hypothesis
//! passed.

use std::fmt;

/// Outcome of a single numerical check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Every probed instance satisfied the claim within tolerance.
    ConsistentWith,
    /// A probed instance violated the claim; a witness is attached.
    Violated,
    /// The check could not be carried out (precondition failed, sampling
    /// came up empty, or a solver did not certify convergence).
    Inconclusive,
}

impl Status {
    /// Conjunction: consistent only if all parts are.
    pub fn and(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => ConsistentWith,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::ConsistentWith => "ConsistentWith",
            Status::Violated => "Violated",
            Status::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Location data for a violating or extremal probe.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Witness {
    /// Serialized point, when the probe has one.
    pub point: Option<String>,
    pub lambda: Option<f64>,
    pub n: Option<usize>,
    /// Measured quantity at the witness (residual, ratio, gap...).
    pub value: f64,
    /// What the value measures.
    pub label: String,
}

/// A check outcome with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    /// Worst measured residual for the check, when meaningful.
    pub residual: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    /// True when the check probed finitely many directions/probes of an
    /// infinite family, so a pass is necessarily one-sided.
    pub one_sided: bool,
}

impl Verdict {
    pub fn consistent() -> Self {
        Verdict { status: Status::ConsistentWith, residual: None, witnesses: Vec::new(), notes: Vec::new(), one_sided: false }
    }

    pub fn violated(witness: Witness) -> Self {
        Verdict { status: Status::Violated, residual: Some(witness.value), witnesses: vec![witness], notes: Vec::new(), one_sided: false }
    }

    pub fn inconclusive(reason: impl Into<String>) -> Self {
        Verdict { status: Status::Inconclusive, residual: None, witnesses: Vec::new(), notes: vec![reason.into()], one_sided: false }
    }

    pub fn with_residual(mut self, r: f64) -> Self {
        self.residual = Some(r);
        self
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn one_sided(mut self) -> Self {
        self.one_sided = true;
        self
    }
}

/// Statements the convergence lab knows how to probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremId {
    /// Mosco convergence implies envelope and prox convergence.
    BacakFwd,
    /// Envelope convergence implies Mosco convergence.
    Bacak2Bwd,
    /// Pointwise + bounded asymptotic slopes + prox implies envelope.
    Thm1,
    /// Bounded asymptotic slopes + envelope implies prox + pointwise.
    Thm2,
    /// Under bounded asymptotic slopes, Mosco is equivalent to
    /// pointwise together with prox convergence.
    MainThm,
    /// Prox convergence + normalization + directional-derivative
    /// convergence of envelopes implies envelope convergence.
    AttouchHadamard,
}

impl TheoremId {
    pub const ALL: [TheoremId; 6] = [
        TheoremId::BacakFwd,
        TheoremId::Bacak2Bwd,
        TheoremId::Thm1,
        TheoremId::Thm2,
        TheoremId::MainThm,
        TheoremId::AttouchHadamard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::BacakFwd => "bacak_fwd",
            TheoremId::Bacak2Bwd => "bacak2_bwd",
            TheoremId::Thm1 => "thm1",
            TheoremId::Thm2 => "thm2",
            TheoremId::MainThm => "mainthm",
            TheoremId::AttouchHadamard => "attouch_hadamard",
        }
    }

    pub fn parse(s: &str) -> Option<TheoremId> {
        Self::ALL.iter().copied().find(|t| t.name() == s)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Role of a sub-check inside a theorem report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckRole {
    Hypothesis,
    Conclusion,
    /// Measured for the report but not verdict-bearing.
    Auxiliary,
}

#[derive(Clone, Debug)]
pub struct SubCheck {
    pub name: String,
    pub role: CheckRole,
    pub verdict: Verdict,
}

/// Composite report for one theorem instance.
#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub theorem_id: TheoremId,
    pub checks: Vec<SubCheck>,
    /// Combined conclusion verdict. `Inconclusive` whenever any hypothesis
    /// failed to pass, regardless of what the conclusion probes measured.
    pub conclusion_verdict: Status,
    /// Set only when every hypothesis passed and a conclusion check
    /// violated: the falsification pattern. Expected never to fire.
    pub falsified: bool,
    pub notes: Vec<String>,
}

impl TheoremReport {
    /// Builds a report from sub-checks, enforcing implication semantics.
    pub fn from_checks(theorem_id: TheoremId, checks: Vec<SubCheck>, mut notes: Vec<String>) -> Self {
        let hyps_pass = checks
            .iter()
            .filter(|c| c.role == CheckRole::Hypothesis)
            .all(|c| c.verdict.status == Status::ConsistentWith);
        let conclusion_raw = checks
            .iter()
            .filter(|c| c.role == CheckRole::Conclusion)
            .fold(Status::ConsistentWith, |acc, c| acc.and(c.verdict.status));
        let (conclusion_verdict, falsified) = if hyps_pass {
            (conclusion_raw, conclusion_raw == Status::Violated)
        } else {
            if conclusion_raw != Status::ConsistentWith {
                notes.push(format!(
                    "conclusion probes measured {conclusion_raw} but a hypothesis did not pass; theorem not applicable"
                ));
            }
            (Status::Inconclusive, false)
        };
        if falsified {
            notes.push("FALSIFICATION PATTERN: all hypotheses passed and a conclusion check violated".to_string());
        }
        TheoremReport { theorem_id, checks, conclusion_verdict, falsified, notes }
    }

    pub fn hypothesis_verdicts(&self) -> impl Iterator<Item = (&str, &Verdict)> {
        self.checks
            .iter()
            .filter(|c| c.role == CheckRole::Hypothesis)
            .map(|c| (c.name.as_str(), &c.verdict))
    }

    pub fn hypotheses_pass(&self) -> bool {
        self.hypothesis_verdicts().all(|(_, v)| v.status == Status::ConsistentWith)
    }
}
