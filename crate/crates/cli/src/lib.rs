//! Orchestration behind the `kat-horn` binary: parse a Horn-formula file,
//! then check it, print its eliminated form, hunt for countermodels, or run
//! the proof search. Reports carry only evidence the tool has re-verified
//! itself, and they render identically as text or JSON.

use std::fmt::Write as _;
use std::time::Instant;

use serde_json::{json, Value};
use thiserror::Error;

use kat_core::decide::{accepts_guarded_word, DecideError, MAX_SUPPORTED_TESTS};
use kat_core::elim::{tests_to_programs, ElimError};
use kat_core::model::{is_countermodel, InterpSpace, ModelError, OracleOutcome};
use kat_core::parse::ParseError;
use kat_core::proof::{decompose_leq, ProofError};
use kat_core::term::TermError;
use kat_core::{
    decide_equal, eliminate_all, find_counterexample, parse_horn, search, DeciderConfig,
    ElimOptions, ElimOutcome, ElimTrace, GuardedWord, HornFormula, OracleConfig,
    Relation, RelInterp, SearchBounds, SearchOutcome, SearchProblem, Term,
};

/// Longest left-hand side words the prove command will enumerate before
/// declaring the goal out of reach.
const DECOMPOSE_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Eliminate,
    Oracle,
    Prove,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Eliminate => "eliminate",
            Command::Oracle => "oracle",
            Command::Prove => "prove",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Oracle searches bases 1 through this.
    pub max_base: usize,
    /// Interpretations examined per base.
    pub budget: u64,
    /// Hypothesis applications along a proof branch.
    pub depth: usize,
    /// Length cap for hypothesis right-hand-side words.
    pub tau_max: usize,
    /// Length cap for matched left-hand-side words.
    pub rho_max: usize,
    /// Declared tests the decider will accept.
    pub max_tests: usize,
    /// Rewrite `x;b = x` hypotheses to `x;!b = 0` before eliminating.
    pub normalize_postguards: bool,
    /// Emit the refutation automaton in dot format when there is one.
    pub dot: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_base: 3,
            budget: 200_000,
            depth: 8,
            tau_max: 3,
            rho_max: 4,
            max_tests: MAX_SUPPORTED_TESTS,
            normalize_postguards: false,
            dot: false,
            seed: OracleConfig::default().seed,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("--max-base", self.max_base),
            ("--depth", self.depth),
            ("--tau-max", self.tau_max),
            ("--rho-max", self.rho_max),
            ("--max-tests", self.max_tests),
        ];
        for (flag, v) in positive {
            if v == 0 {
                return Err(CliError::Config(format!("{flag} must be positive")));
            }
        }
        if self.budget == 0 {
            return Err(CliError::Config("--budget must be positive".into()));
        }
        if self.max_tests > MAX_SUPPORTED_TESTS {
            return Err(CliError::Config(format!(
                "--max-tests is capped at {MAX_SUPPORTED_TESTS}"
            )));
        }
        Ok(())
    }

    fn decider(&self) -> DeciderConfig {
        DeciderConfig { max_tests: self.max_tests, ..DeciderConfig::default() }
    }

    fn oracle(&self) -> OracleConfig {
        OracleConfig { max_base: self.max_base, budget: self.budget, seed: self.seed }
    }

    fn bounds(&self) -> SearchBounds {
        SearchBounds { depth: self.depth, tau_max: self.tau_max, rho_max: self.rho_max }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Elim(#[from] ElimError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("internal: {0}")]
    Internal(String),
}

/// A countermodel in whichever form the pipeline produced it.
#[derive(Debug, Clone)]
pub enum Evidence {
    Word(GuardedWord),
    Model(RelInterp),
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Valid,
    Invalid(Evidence),
    Residual(HornFormula),
    Unknown,
}

impl Verdict {
    fn kind(&self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid(_) => "invalid",
            Verdict::Residual(_) => "residual",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: Command,
    pub verdict: Verdict,
    pub trace: ElimTrace,
    pub notes: Vec<String>,
    pub elapsed_ms: u128,
    pub dot: Option<String>,
}

impl Report {
    /// 0 valid/proved, 1 invalid/refuted, 2 residual/unknown. `eliminate`
    /// never decides anything, so its success is plain 0.
    pub fn exit_code(&self) -> i32 {
        if self.command == Command::Eliminate {
            return 0;
        }
        match self.verdict {
            Verdict::Valid => 0,
            Verdict::Invalid(_) => 1,
            Verdict::Residual(_) | Verdict::Unknown => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        let verdict = match &self.verdict {
            Verdict::Valid => json!({ "kind": "valid" }),
            Verdict::Invalid(Evidence::Word(w)) => json!({
                "kind": "invalid",
                "witness": {
                    "type": "word",
                    "text": w.to_string(),
                    "atoms": w.atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                    "programs": w.progs.clone(),
                },
            }),
            Verdict::Invalid(Evidence::Model(m)) => json!({
                "kind": "invalid",
                "witness": { "type": "model", "model": m.to_json() },
            }),
            Verdict::Residual(f) => json!({ "kind": "residual", "formula": f.to_string() }),
            Verdict::Unknown => json!({ "kind": "unknown" }),
        };
        json!({
            "command": self.command.name(),
            "verdict": verdict,
            "trace": self.trace.to_json(),
            "notes": self.notes,
            "elapsed_ms": self.elapsed_ms,
            "dot": self.dot,
        })
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.verdict.kind());
        match &self.verdict {
            Verdict::Invalid(Evidence::Word(w)) => {
                let _ = writeln!(out, "witness word: {w}");
            }
            Verdict::Invalid(Evidence::Model(m)) => {
                let _ = writeln!(out, "countermodel: {}", render_model(m));
            }
            Verdict::Residual(f) => {
                let _ = writeln!(out, "formula:");
                for line in f.to_string().lines() {
                    let _ = writeln!(out, "  {line}");
                }
            }
            Verdict::Valid | Verdict::Unknown => {}
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        if !self.trace.steps.is_empty() {
            let _ = writeln!(out, "trace:");
            for (i, step) in self.trace.steps.iter().enumerate() {
                let consumed: Vec<String> =
                    step.consumed.iter().map(|e| e.to_string()).collect();
                let _ = writeln!(out, "  {}. {}: consumed {}", i + 1, step.rule, consumed.join(", "));
            }
        }
        if let Some(dot) = &self.dot {
            let _ = writeln!(out, "dot:");
            for line in dot.lines() {
                let _ = writeln!(out, "  {line}");
            }
        }
        let _ = writeln!(out, "elapsed: {} ms", self.elapsed_ms);
        out
    }
}

fn render_model(m: &RelInterp) -> String {
    let mut s = format!("base {}", m.base);
    for (name, rel) in &m.progs {
        let pairs: Vec<String> =
            rel.pairs().iter().map(|(i, j)| format!("({i},{j})")).collect();
        let _ = write!(s, "\n  {name} = {{{}}}", pairs.join(","));
    }
    for (name, rel) in &m.tests {
        let points: Vec<String> =
            rel.pairs().iter().map(|(i, _)| i.to_string()).collect();
        let _ = write!(s, "\n  {name} = {{{}}}", points.join(","));
    }
    s
}

pub fn run(command: Command, text: &str, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let f = parse_horn(text)?;
    let mut report = match command {
        Command::Check => cmd_check(&f, cfg)?,
        Command::Eliminate => cmd_eliminate(&f, cfg)?,
        Command::Oracle => cmd_oracle(&f, cfg)?,
        Command::Prove => cmd_prove(&f, cfg)?,
    };
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

fn cmd_check(f: &HornFormula, cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = ElimOptions { normalize_postguards: cfg.normalize_postguards };
    let dec = cfg.decider();
    let (outcome, trace) = eliminate_all(f, &opts, &dec)?;
    let mut notes = Vec::new();
    let mut dot = None;
    let verdict = match &outcome {
        ElimOutcome::Equation(eq) => {
            if !trace.steps.is_empty() {
                notes.push(format!("deciding the transformed equation {eq}"));
            }
            let v = decide_equal(&eq.lhs, &eq.rhs, &f.signature, &dec)?;
            match v.witness {
                None => Verdict::Valid,
                Some(w) => {
                    if accepts_guarded_word(&eq.lhs, &w) == accepts_guarded_word(&eq.rhs, &w) {
                        return Err(CliError::Internal(
                            "witness failed re-verification against the decided equation".into(),
                        ));
                    }
                    if !trace.steps.is_empty() {
                        notes.push("the witness refutes the transformed equation".into());
                    }
                    Verdict::Invalid(Evidence::Word(w))
                }
            }
        }
        ElimOutcome::Residual(g) => {
            notes.push(format!(
                "{} hypothesis(es) fit no elimination shape",
                g.hypotheses.len()
            ));
            let sweep = find_counterexample(f, &cfg.oracle())?;
            notes.extend(oracle_notes(&sweep, &f.signature));
            match sweep.counterexample {
                Some(m) => {
                    if !is_countermodel(&m, f)? {
                        return Err(CliError::Internal(
                            "oracle countermodel failed re-verification".into(),
                        ));
                    }
                    Verdict::Invalid(Evidence::Model(m))
                }
                None => match prove_formula(f, cfg, &mut notes)? {
                    Proven::Proved => {
                        notes.push(
                            "proof search succeeded; certificate is over relational interpretations"
                                .into(),
                        );
                        Verdict::Valid
                    }
                    Proven::Refuted { model, dot: d } => {
                        dot = d;
                        Verdict::Invalid(Evidence::Model(model))
                    }
                    Proven::Unknown => Verdict::Residual(g.clone()),
                },
            }
        }
    };
    Ok(Report { command: Command::Check, verdict, trace, notes, elapsed_ms: 0, dot })
}

fn cmd_eliminate(f: &HornFormula, cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = ElimOptions { normalize_postguards: cfg.normalize_postguards };
    let (outcome, trace) = eliminate_all(f, &opts, &cfg.decider())?;
    let transformed = match outcome {
        ElimOutcome::Equation(eq) => HornFormula::new(f.signature.clone(), Vec::new(), eq)?,
        ElimOutcome::Residual(g) => g,
    };
    Ok(Report {
        command: Command::Eliminate,
        verdict: Verdict::Residual(transformed),
        trace,
        notes: Vec::new(),
        elapsed_ms: 0,
        dot: None,
    })
}

fn cmd_oracle(f: &HornFormula, cfg: &RunConfig) -> Result<Report, CliError> {
    let sweep = find_counterexample(f, &cfg.oracle())?;
    let mut notes = oracle_notes(&sweep, &f.signature);
    let verdict = match sweep.counterexample {
        Some(m) => {
            if !is_countermodel(&m, f)? {
                return Err(CliError::Internal(
                    "oracle countermodel failed re-verification".into(),
                ));
            }
            Verdict::Invalid(Evidence::Model(m))
        }
        None => {
            notes.push(format!("none found (bases 1..={})", cfg.max_base));
            Verdict::Unknown
        }
    };
    Ok(Report {
        command: Command::Oracle,
        verdict,
        trace: ElimTrace::default(),
        notes,
        elapsed_ms: 0,
        dot: None,
    })
}

fn cmd_prove(f: &HornFormula, cfg: &RunConfig) -> Result<Report, CliError> {
    let mut notes = Vec::new();
    let mut dot = None;
    let verdict = match prove_formula(f, cfg, &mut notes)? {
        Proven::Proved => Verdict::Valid,
        Proven::Refuted { model, dot: d } => {
            dot = d;
            Verdict::Invalid(Evidence::Model(model))
        }
        Proven::Unknown => Verdict::Unknown,
    };
    Ok(Report {
        command: Command::Prove,
        verdict,
        trace: ElimTrace::default(),
        notes,
        elapsed_ms: 0,
        dot,
    })
}

enum Proven {
    Proved,
    Refuted { model: RelInterp, dot: Option<String> },
    Unknown,
}

/// Splits the conclusion into inclusion goals, enumerates the left-hand
/// words of each, and searches per word. Tests are first traded for
/// constrained program pairs; a refutation model is translated back to the
/// original signature and re-verified before it is reported.
fn prove_formula(
    f: &HornFormula,
    cfg: &RunConfig,
    notes: &mut Vec<String>,
) -> Result<Proven, CliError> {
    let (g, renaming) = tests_to_programs(f)?;
    if !renaming.is_empty() {
        notes.push(format!(
            "{} test(s) traded for constrained program pairs",
            renaming.len()
        ));
    }
    let goals: Vec<(Term, Term)> = match g.conclusion.relation {
        Relation::Leq => vec![(g.conclusion.lhs.clone(), g.conclusion.rhs.clone())],
        Relation::Eq => vec![
            (g.conclusion.lhs.clone(), g.conclusion.rhs.clone()),
            (g.conclusion.rhs.clone(), g.conclusion.lhs.clone()),
        ],
    };
    let bounds = cfg.bounds();
    let mut all_proved = true;
    for (s, t) in goals {
        let (words, truncated) = decompose_leq(&s, DECOMPOSE_CAP)?;
        if truncated {
            notes.push(format!(
                "left side {s} has words longer than {DECOMPOSE_CAP}; goal out of reach"
            ));
            all_proved = false;
        }
        for sigma in words {
            let problem =
                SearchProblem::new(g.signature.clone(), &g.hypotheses, sigma.clone(), t.clone())?;
            match search(&problem, &bounds)? {
                SearchOutcome::Proved(_) => {}
                SearchOutcome::Refuted(r) => {
                    let model = translate_model_back(&r.model, f, &renaming)?;
                    if !is_countermodel(&model, f)? {
                        return Err(CliError::Internal(
                            "refutation model failed re-verification".into(),
                        ));
                    }
                    let dot = cfg.dot.then(|| r.automaton.to_dot());
                    return Ok(Proven::Refuted { model, dot });
                }
                SearchOutcome::Unknown(report) => {
                    let mut hit = Vec::new();
                    if report.depth_limit_hit {
                        hit.push("depth");
                    }
                    if report.tau_truncation_hit {
                        hit.push("child word length");
                    }
                    if report.rho_limit_hit {
                        hit.push("match word length");
                    }
                    notes.push(format!(
                        "search for {} <= {t} gave up ({} limit, {} nodes)",
                        sigma.join(";"),
                        hit.join(" and "),
                        report.nodes_expanded,
                    ));
                    all_proved = false;
                }
            }
        }
    }
    Ok(if all_proved { Proven::Proved } else { Proven::Unknown })
}

/// A model over the translated signature, pulled back: programs carry over,
/// and each test takes the relation of its positive program (a subidentity,
/// forced by the translation axioms the model satisfies).
fn translate_model_back(
    m: &RelInterp,
    f: &HornFormula,
    renaming: &std::collections::BTreeMap<String, (String, String)>,
) -> Result<RelInterp, CliError> {
    let mut back = RelInterp::new(m.base)?;
    for p in f.signature.program_names() {
        back.set_prog(p, m.eval(&Term::prog(p))?);
    }
    for b in f.signature.test_names() {
        let (pos, _) = renaming
            .get(b)
            .ok_or_else(|| CliError::Internal(format!("no translation recorded for test {b}")))?;
        let rel = m.eval(&Term::prog(pos))?;
        if !rel.is_subidentity() {
            return Err(CliError::Internal(format!(
                "translated test {b} came back as a non-subidentity relation"
            )));
        }
        back.set_test(b, rel);
    }
    Ok(back)
}

fn oracle_notes(sweep: &OracleOutcome, sig: &kat_core::Signature) -> Vec<String> {
    let mut notes = Vec::new();
    for s in &sweep.searched {
        let total = InterpSpace::new(sig, s.base).map(|sp| sp.count()).unwrap_or(0);
        if s.exhaustive {
            notes.push(format!("base {}: exhaustive ({} interpretations)", s.base, s.examined));
        } else if sweep.counterexample.is_some() && Some(s) == sweep.searched.last() {
            notes.push(format!(
                "base {}: stopped after {} of {} interpretations",
                s.base, s.examined, total
            ));
        } else {
            notes.push(format!("base {}: sampled {} of {}", s.base, s.examined, total));
        }
    }
    notes
}
