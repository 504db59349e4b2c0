//! Hypothesis elimination for Horn formulas.
//!
//! The pipeline turns a formula `E -> s = t` into one with fewer, simpler
//! hypotheses, preserving validity over the intended model classes:
//!
//! 1. Optionally, hypotheses of the shape `x;b = x` with `b` Boolean are
//!    rewritten to `x;!b = 0`. Each rewrite is double-checked by the decider
//!    on the two equations that justify it.
//! 2. Hypotheses `c;p = c` with `c` Boolean and `p` an atomic program are
//!    removed by substituting `!c;p + c` for `p` everywhere else. Several
//!    guards on the same program merge into their sum first, and the
//!    substitution is checked to be idempotent before it is applied.
//! 3. All hypotheses `r = 0` are combined into one by summing the left sides
//!    and then absorbed into the conclusion: `s = t` becomes
//!    `s + u;r;u = t + u;r;u` where `u` is the star of the sum of all
//!    declared programs.
//!
//! What remains is either a bare equation, decidable directly, or a residual
//! formula whose hypotheses fit none of the shapes above. Every step is
//! recorded in an [`ElimTrace`] that can be replayed and serialized.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::decide::{decide_equal, DecideError, DeciderConfig};
use crate::term::{
    is_boolean, push_negations, substitute, Equation, HornFormula, Relation, Signature, Symbol,
    SymbolKind, Term, TermError,
};

#[derive(Debug, Error)]
pub enum ElimError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error("no hypothesis of the shape r = 0 to eliminate")]
    NoZeroHypothesis,
    #[error("substitution for `{symbol}` failed its idempotence check")]
    IdempotenceFailed { symbol: Symbol },
}

/// The shapes of hypotheses the pipeline knows how to eliminate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HypClass {
    /// `r = 0`, `0 = r`, or `r <= 0`; carries `r`.
    ZeroForm(Term),
    /// `c;p = c` (or its mirror image `c = c;p`) with `c` Boolean and `p` an
    /// atomic program.
    Guarded { guard: Term, prog: Symbol },
    Other,
}

fn as_guarded(lhs: &Term, rhs: &Term) -> Option<(Term, Symbol)> {
    if let Term::Dot(c, p) = lhs {
        if let Term::Prog(sym) = &**p {
            if is_boolean(c) && **c == *rhs {
                return Some(((**c).clone(), sym.clone()));
            }
        }
    }
    None
}

pub fn classify(e: &Equation) -> HypClass {
    match e.relation {
        Relation::Leq => {
            if e.rhs == Term::Zero {
                HypClass::ZeroForm(e.lhs.clone())
            } else {
                HypClass::Other
            }
        }
        Relation::Eq => {
            if e.lhs == Term::Zero {
                return HypClass::ZeroForm(e.rhs.clone());
            }
            if e.rhs == Term::Zero {
                return HypClass::ZeroForm(e.lhs.clone());
            }
            if let Some((guard, prog)) = as_guarded(&e.lhs, &e.rhs).or_else(|| as_guarded(&e.rhs, &e.lhs))
            {
                return HypClass::Guarded { guard, prog };
            }
            HypClass::Other
        }
    }
}

/// A substitution of terms for symbols, applied homomorphically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynHom {
    pub map: BTreeMap<Symbol, Term>,
}

impl SynHom {
    pub fn new(map: BTreeMap<Symbol, Term>) -> SynHom {
        SynHom { map }
    }

    pub fn apply(&self, t: &Term) -> Result<Term, TermError> {
        substitute(t, &self.map)
    }

    pub fn apply_equation(&self, e: &Equation) -> Result<Equation, TermError> {
        e.map_sides(|t| self.apply(t))
    }

    /// Checks `H(H(x)) = H(x)` for every mapped symbol, using the decider.
    pub fn is_idempotent(
        &self,
        sig: &Signature,
        cfg: &DeciderConfig,
    ) -> Result<bool, ElimError> {
        for image in self.map.values() {
            let twice = self.apply(image)?;
            if !decide_equal(image, &twice, sig, cfg)?.valid {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The hypotheses `x = H(x)` for the signature's symbols, skipping the
    /// symbols the substitution fixes syntactically.
    pub fn fixed_hypotheses(&self, sig: &Signature) -> Vec<Equation> {
        let mut out = Vec::new();
        for sym in sig.symbols() {
            let x = match sym.kind {
                SymbolKind::Program => Term::Prog(sym.clone()),
                SymbolKind::Test => Term::Test(sym.clone()),
            };
            if let Some(image) = self.map.get(&sym) {
                if *image != x {
                    out.push(Equation::eq(x, image.clone()));
                }
            }
        }
        out
    }
}

/// Merges guards that target the same program into their sum, keeping the
/// first-occurrence order of programs. Sound because `c1;p = c1` and
/// `c2;p = c2` together are equivalent to `(c1+c2);p = c1+c2`.
pub fn merge_guards(pairs: Vec<(Term, Symbol)>) -> Vec<(Term, Symbol)> {
    let mut order: Vec<Symbol> = Vec::new();
    let mut acc: BTreeMap<Symbol, Term> = BTreeMap::new();
    for (c, p) in pairs {
        match acc.get_mut(&p) {
            Some(g) => *g = Term::plus(g.clone(), c),
            None => {
                order.push(p.clone());
                acc.insert(p, c);
            }
        }
    }
    order.into_iter().map(|p| (acc.remove(&p).unwrap(), p)).collect()
}

/// The substitution `p -> !c;p + c` for each merged guard. Applying it makes
/// `c;p = c` a tautology: `c;(!c;p + c) = c;!c;p + c;c = c`.
pub fn guarded_identity_hom(pairs: &[(Term, Symbol)]) -> SynHom {
    let map = pairs
        .iter()
        .map(|(c, p)| {
            let nc = Term::not(c.clone()).expect("guards are Boolean");
            let image = Term::plus(Term::dot(nc, Term::Prog(p.clone())), c.clone());
            (p.clone(), image)
        })
        .collect();
    SynHom::new(map)
}

/// One elimination step: the rule applied, the hypotheses it consumed, and
/// the whole formula afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ElimStep {
    pub rule: &'static str,
    pub consumed: Vec<Equation>,
    pub formula: HornFormula,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ElimTrace {
    pub steps: Vec<ElimStep>,
}

impl ElimTrace {
    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "rule": s.rule,
                    "consumed": s.consumed.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "formula": s.formula.to_string(),
                })
            })
            .collect();
        Value::Array(steps)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElimOptions {
    /// Rewrite `x;b = x` into `x;!b = 0` before classifying.
    pub normalize_postguards: bool,
}

/// What the pipeline ends on: a bare equation when every hypothesis was
/// eliminated, otherwise the residual formula.
#[derive(Debug, Clone, PartialEq)]
pub enum ElimOutcome {
    Equation(Equation),
    Residual(HornFormula),
}

/// Rewrites hypotheses `x;b = x` (either orientation, `b` Boolean) into the
/// zero form `x;!b = 0`. The equivalence leans on `x;(b + !b) = x` and
/// `x;(b;!b) = 0`; both are checked by the decider for the actual `x` and
/// `b` before the rewrite is taken.
pub fn normalize_postguards(
    f: &HornFormula,
    cfg: &DeciderConfig,
) -> Result<(HornFormula, Vec<ElimStep>), ElimError> {
    let mut cur = f.clone();
    let mut steps = Vec::new();
    for i in 0..cur.hypotheses.len() {
        let hyp = cur.hypotheses[i].clone();
        if hyp.relation != Relation::Eq {
            continue;
        }
        let split = |big: &Term, small: &Term| -> Option<(Term, Term)> {
            if let Term::Dot(x, b) = big {
                if is_boolean(b) && **x == *small {
                    return Some(((**x).clone(), (**b).clone()));
                }
            }
            None
        };
        let Some((x, b)) = split(&hyp.lhs, &hyp.rhs).or_else(|| split(&hyp.rhs, &hyp.lhs)) else {
            continue;
        };
        let nb = Term::not(b.clone())?;
        let absorb = decide_equal(
            &Term::dot(x.clone(), Term::plus(b.clone(), nb.clone())),
            &x,
            &cur.signature,
            cfg,
        )?;
        let annihilate = decide_equal(
            &Term::dot(x.clone(), Term::dot(b.clone(), nb.clone())),
            &Term::Zero,
            &cur.signature,
            cfg,
        )?;
        if !absorb.valid || !annihilate.valid {
            continue;
        }
        cur.hypotheses[i] = Equation::eq(Term::dot(x, nb), Term::Zero);
        steps.push(ElimStep {
            rule: "absorb-postguard",
            consumed: vec![hyp],
            formula: cur.clone(),
        });
    }
    Ok((cur, steps))
}

/// Removes every guarded-program hypothesis at once by substituting
/// `!c;p + c` for each guarded `p` in the remaining hypotheses and the
/// conclusion. Returns `None` when there is nothing to do.
pub fn eliminate_guarded(
    f: &HornFormula,
    cfg: &DeciderConfig,
) -> Result<Option<(HornFormula, ElimStep, SynHom)>, ElimError> {
    let mut consumed = Vec::new();
    let mut kept = Vec::new();
    let mut pairs = Vec::new();
    for hyp in &f.hypotheses {
        match classify(hyp) {
            HypClass::Guarded { guard, prog } => {
                consumed.push(hyp.clone());
                pairs.push((guard, prog));
            }
            _ => kept.push(hyp.clone()),
        }
    }
    if pairs.is_empty() {
        return Ok(None);
    }
    let hom = guarded_identity_hom(&merge_guards(pairs));
    for (sym, image) in &hom.map {
        let twice = hom.apply(image)?;
        if !decide_equal(image, &twice, &f.signature, cfg)?.valid {
            return Err(ElimError::IdempotenceFailed { symbol: sym.clone() });
        }
    }
    let hyps = kept
        .iter()
        .map(|h| hom.apply_equation(h))
        .collect::<Result<Vec<_>, _>>()?;
    let conclusion = hom.apply_equation(&f.conclusion)?;
    let next = HornFormula::new(f.signature.clone(), hyps, conclusion)?;
    let step = ElimStep {
        rule: "eliminate-guarded-programs",
        consumed,
        formula: next.clone(),
    };
    Ok(Some((next, step, hom)))
}

/// Replaces two or more zero-form hypotheses with the single hypothesis that
/// their sum is zero. In an idempotent semiring a sum is zero exactly when
/// every summand is.
pub fn combine_zero_hypotheses(f: &HornFormula) -> Result<(HornFormula, Option<ElimStep>), ElimError> {
    let mut zero_rs = Vec::new();
    let mut consumed = Vec::new();
    for hyp in &f.hypotheses {
        if let HypClass::ZeroForm(r) = classify(hyp) {
            zero_rs.push(r);
            consumed.push(hyp.clone());
        }
    }
    if zero_rs.len() < 2 {
        return Ok((f.clone(), None));
    }
    let combined = Equation::eq(Term::sum(zero_rs), Term::Zero);
    let mut hyps = Vec::new();
    let mut placed = false;
    for hyp in &f.hypotheses {
        if matches!(classify(hyp), HypClass::ZeroForm(_)) {
            if !placed {
                hyps.push(combined.clone());
                placed = true;
            }
        } else {
            hyps.push(hyp.clone());
        }
    }
    let next = HornFormula::new(f.signature.clone(), hyps, f.conclusion.clone())?;
    let step = ElimStep { rule: "combine-zero-hypotheses", consumed, formula: next.clone() };
    Ok((next, Some(step)))
}

/// Absorbs the first zero-form hypothesis into the conclusion: `s = t`
/// becomes `s + u;r;u = t + u;r;u` with `u` the star of the sum of all
/// declared programs. The other hypotheses ride along unchanged.
pub fn eliminate_zero(f: &HornFormula) -> Result<(HornFormula, ElimStep), ElimError> {
    let position = f
        .hypotheses
        .iter()
        .position(|h| matches!(classify(h), HypClass::ZeroForm(_)))
        .ok_or(ElimError::NoZeroHypothesis)?;
    let HypClass::ZeroForm(r) = classify(&f.hypotheses[position]) else { unreachable!() };
    let u = f.signature.universal_expression();
    let pad = Term::product([u.clone(), r, u]);
    let normalized = f.conclusion.normalize();
    let conclusion = Equation::eq(
        Term::plus(normalized.lhs, pad.clone()),
        Term::plus(normalized.rhs, pad),
    );
    let mut hyps = f.hypotheses.clone();
    let consumed = vec![hyps.remove(position)];
    let next = HornFormula::new(f.signature.clone(), hyps, conclusion)?;
    let step = ElimStep { rule: "eliminate-zero-hypothesis", consumed, formula: next.clone() };
    Ok((next, step))
}

/// Runs the whole pipeline. The outcome is a bare equation when no
/// hypothesis survives, otherwise the residual formula; either way the trace
/// records each step.
pub fn eliminate_all(
    f: &HornFormula,
    opts: &ElimOptions,
    cfg: &DeciderConfig,
) -> Result<(ElimOutcome, ElimTrace), ElimError> {
    let mut cur = f.clone();
    let mut steps = Vec::new();
    if opts.normalize_postguards {
        let (next, more) = normalize_postguards(&cur, cfg)?;
        cur = next;
        steps.extend(more);
    }
    if let Some((next, step, _)) = eliminate_guarded(&cur, cfg)? {
        cur = next;
        steps.push(step);
    }
    debug_assert!(
        !cur.hypotheses.iter().any(|h| matches!(classify(h), HypClass::Guarded { .. })),
        "one guarded pass consumes every guarded hypothesis"
    );
    let (next, step) = combine_zero_hypotheses(&cur)?;
    cur = next;
    steps.extend(step);
    if cur.hypotheses.iter().any(|h| matches!(classify(h), HypClass::ZeroForm(_))) {
        let (next, step) = eliminate_zero(&cur)?;
        cur = next;
        steps.push(step);
    }
    let outcome = if cur.hypotheses.is_empty() {
        ElimOutcome::Equation(cur.conclusion.clone())
    } else {
        ElimOutcome::Residual(cur.clone())
    };
    Ok((outcome, ElimTrace { steps }))
}

/// Re-runs the pipeline and compares against a recorded trace and outcome.
pub fn replay_trace(
    f: &HornFormula,
    outcome: &ElimOutcome,
    trace: &ElimTrace,
    opts: &ElimOptions,
    cfg: &DeciderConfig,
) -> Result<bool, ElimError> {
    let (fresh_outcome, fresh_trace) = eliminate_all(f, opts, cfg)?;
    Ok(fresh_outcome == *outcome && fresh_trace == *trace)
}

/// Replaces every test with a pair of fresh programs, one for the test and
/// one for its negation, constrained by `pos + neg = 1` and `pos;neg = 0`.
/// Negations are pushed down to the tests first. Relational countermodels
/// transfer in both directions without changing the base, so bounded-base
/// searches before and after the translation agree. The returned map sends
/// each test name to its (positive, negative) program pair, which is what a
/// caller needs to move models back.
pub fn tests_to_programs(
    f: &HornFormula,
) -> Result<(HornFormula, BTreeMap<String, (String, String)>), ElimError> {
    let mut sig = Signature::new();
    for p in f.signature.program_names() {
        sig.declare_program(p)?;
    }
    let fresh = |sig: &mut Signature, base: String| -> Result<String, TermError> {
        let mut name = base;
        while sig.kind_of(&name).is_some() {
            name.push('_');
        }
        sig.declare_program(&name)?;
        Ok(name)
    };
    let mut replacements: BTreeMap<String, (String, String)> = BTreeMap::new();
    for b in f.signature.test_names() {
        let pos = fresh(&mut sig, format!("{b}_pos"))?;
        let neg = fresh(&mut sig, format!("{b}_neg"))?;
        replacements.insert(b.to_owned(), (pos, neg));
    }

    fn rewrite(
        t: &Term,
        replacements: &BTreeMap<String, (String, String)>,
    ) -> Term {
        match t {
            Term::Zero => Term::Zero,
            Term::One => Term::One,
            Term::Prog(s) => Term::Prog(s.clone()),
            Term::Test(s) => Term::prog(&replacements[&s.name].0),
            Term::Not(inner) => match &**inner {
                Term::Test(s) => Term::prog(&replacements[&s.name].1),
                Term::Zero => Term::One,
                Term::One => Term::Zero,
                other => unreachable!("negations were pushed to tests, found !({other})"),
            },
            Term::Plus(a, b) => {
                Term::plus(rewrite(a, replacements), rewrite(b, replacements))
            }
            Term::Dot(a, b) => Term::dot(rewrite(a, replacements), rewrite(b, replacements)),
            Term::Star(a) => Term::star(rewrite(a, replacements)),
        }
    }

    let translate = |e: &Equation| -> Equation {
        e.map_sides(|t| Ok(rewrite(&push_negations(t), &replacements)))
            .expect("rewriting cannot fail")
    };
    let mut hyps: Vec<Equation> = f.hypotheses.iter().map(&translate).collect();
    for (pos, neg) in replacements.values() {
        hyps.push(Equation::eq(
            Term::plus(Term::prog(pos), Term::prog(neg)),
            Term::One,
        ));
        hyps.push(Equation::eq(
            Term::dot(Term::prog(pos), Term::prog(neg)),
            Term::Zero,
        ));
    }
    let conclusion = translate(&f.conclusion);
    Ok((HornFormula::new(sig, hyps, conclusion)?, replacements))
}
