//! Relational interpretations over a finite base set.
//!
//! A program denotes a binary relation on the base, a test a subset of the
//! identity relation. Composition, union, and reflexive-transitive closure
//! interpret the term operations; complement of a test is taken inside the
//! identity. Relations are stored as one bitmask row per source state, so the
//! base is capped at 64.
//!
//! The module provides three layers on top of [`Rel`]:
//!
//! * [`RelInterp`] with [`satisfies`] and [`find_counterexample`]: the
//!   brute-force oracle. Small bases are searched exhaustively; once the
//!   space outgrows the budget it falls back to seeded uniform sampling and
//!   says so in the outcome.
//! * [`chain_of_word`] turns a guarded word into the interpretation whose
//!   base is the word itself, linking the language view and the relational
//!   view: a term accepts the word exactly when its relation connects the
//!   endpoints.
//! * [`generated_subalgebra`] and [`quotient_construction`] build the finite
//!   algebra generated by an interpretation and audit the bounded quotient:
//!   the interval between the image of `u r u` and the image of `u` with the
//!   bottom element glued on. The audit re-checks every defining equation of
//!   the algebra class on the quotient carrier, rather than trusting the
//!   construction.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::term::{Equation, HornFormula, Signature, Term};

pub const MAX_BASE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("base of {base} states exceeds the representable maximum {cap}")]
    BaseTooLarge { base: usize, cap: usize },
    #[error("interpretation space needs {bits} choice bits; at most 127 are supported")]
    SpaceTooLarge { bits: u32 },
    #[error("generated algebra exceeded the cap of {cap} elements")]
    ClosureCapExceeded { cap: usize },
    #[error("symbol `{0}` has no interpretation")]
    Undeclared(String),
    #[error("malformed interpretation: {0}")]
    BadJson(String),
}

/// A binary relation on `{0, .., n-1}`, one bitmask row per source state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rel {
    n: usize,
    rows: Vec<u64>,
}

impl Rel {
    pub fn empty(n: usize) -> Rel {
        assert!(n <= MAX_BASE);
        Rel { n, rows: vec![0; n] }
    }

    pub fn identity(n: usize) -> Rel {
        let mut r = Rel::empty(n);
        for i in 0..n {
            r.rows[i] = 1 << i;
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Rel {
        let mut r = Rel::empty(n);
        for &(i, j) in pairs {
            assert!(i < n && j < n, "pair ({i},{j}) outside base {n}");
            r.rows[i] |= 1 << j;
        }
        r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            let mut row = self.rows[i];
            while row != 0 {
                let j = row.trailing_zeros() as usize;
                row &= row - 1;
                out.push((i, j));
            }
        }
        out
    }

    pub fn union(&self, other: &Rel) -> Rel {
        assert_eq!(self.n, other.n);
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a | b).collect();
        Rel { n: self.n, rows }
    }

    pub fn compose(&self, other: &Rel) -> Rel {
        assert_eq!(self.n, other.n);
        let mut out = Rel::empty(self.n);
        for i in 0..self.n {
            let mut row = self.rows[i];
            while row != 0 {
                let k = row.trailing_zeros() as usize;
                row &= row - 1;
                out.rows[i] |= other.rows[k];
            }
        }
        out
    }

    /// Reflexive-transitive closure by repeated squaring of `id + self`.
    pub fn star(&self) -> Rel {
        let mut x = self.union(&Rel::identity(self.n));
        loop {
            let next = x.compose(&x);
            if next == x {
                return x;
            }
            x = next;
        }
    }

    /// Complement inside the identity relation; meaningful for tests only.
    pub fn complement_in_identity(&self) -> Rel {
        let mut out = Rel::empty(self.n);
        for i in 0..self.n {
            if !self.contains(i, i) {
                out.rows[i] = 1 << i;
            }
        }
        out
    }

    pub fn is_subidentity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &row)| row & !(1 << i) == 0)
    }

    pub fn subset(&self, other: &Rel) -> bool {
        assert_eq!(self.n, other.n);
        self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }
}

/// An interpretation of a signature's symbols as relations on a common base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelInterp {
    pub base: usize,
    pub progs: BTreeMap<String, Rel>,
    pub tests: BTreeMap<String, Rel>,
}

impl RelInterp {
    pub fn new(base: usize) -> Result<RelInterp, ModelError> {
        if base > MAX_BASE {
            return Err(ModelError::BaseTooLarge { base, cap: MAX_BASE });
        }
        Ok(RelInterp { base, progs: BTreeMap::new(), tests: BTreeMap::new() })
    }

    pub fn set_prog(&mut self, name: &str, rel: Rel) {
        assert_eq!(rel.n(), self.base);
        self.progs.insert(name.to_owned(), rel);
    }

    pub fn set_test(&mut self, name: &str, rel: Rel) {
        assert_eq!(rel.n(), self.base);
        assert!(rel.is_subidentity(), "a test denotes a subset of the identity");
        self.tests.insert(name.to_owned(), rel);
    }

    pub fn eval(&self, t: &Term) -> Result<Rel, ModelError> {
        match t {
            Term::Zero => Ok(Rel::empty(self.base)),
            Term::One => Ok(Rel::identity(self.base)),
            Term::Prog(s) => {
                self.progs.get(&s.name).cloned().ok_or_else(|| ModelError::Undeclared(s.name.clone()))
            }
            Term::Test(s) => {
                self.tests.get(&s.name).cloned().ok_or_else(|| ModelError::Undeclared(s.name.clone()))
            }
            Term::Not(a) => Ok(self.eval(a)?.complement_in_identity()),
            Term::Plus(a, b) => Ok(self.eval(a)?.union(&self.eval(b)?)),
            Term::Dot(a, b) => Ok(self.eval(a)?.compose(&self.eval(b)?)),
            Term::Star(a) => Ok(self.eval(a)?.star()),
        }
    }

    pub fn satisfies_equation(&self, e: &Equation) -> Result<bool, ModelError> {
        let n = e.normalize();
        Ok(self.eval(&n.lhs)? == self.eval(&n.rhs)?)
    }

    pub fn to_json(&self) -> Value {
        let progs: serde_json::Map<String, Value> = self
            .progs
            .iter()
            .map(|(name, rel)| {
                let pairs: Vec<Value> = rel.pairs().iter().map(|&(i, j)| json!([i, j])).collect();
                (name.clone(), Value::Array(pairs))
            })
            .collect();
        let tests: serde_json::Map<String, Value> = self
            .tests
            .iter()
            .map(|(name, rel)| {
                let states: Vec<Value> =
                    rel.pairs().iter().map(|&(i, _)| json!(i)).collect();
                (name.clone(), Value::Array(states))
            })
            .collect();
        json!({ "base": self.base, "progs": progs, "tests": tests })
    }

    pub fn from_json(v: &Value) -> Result<RelInterp, ModelError> {
        let bad = |msg: &str| ModelError::BadJson(msg.to_owned());
        let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
        let base = obj
            .get("base")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing numeric `base`"))? as usize;
        let mut m = RelInterp::new(base)?;
        if let Some(progs) = obj.get("progs") {
            let progs = progs.as_object().ok_or_else(|| bad("`progs` must be an object"))?;
            for (name, pairs) in progs {
                let pairs = pairs.as_array().ok_or_else(|| bad("program value must be an array"))?;
                let mut decoded = Vec::new();
                for p in pairs {
                    let p = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("pair must be [i,j]"))?;
                    let i = p[0].as_u64().ok_or_else(|| bad("pair entries must be numbers"))? as usize;
                    let j = p[1].as_u64().ok_or_else(|| bad("pair entries must be numbers"))? as usize;
                    if i >= base || j >= base {
                        return Err(bad("pair outside the base"));
                    }
                    decoded.push((i, j));
                }
                m.set_prog(name, Rel::from_pairs(base, &decoded));
            }
        }
        if let Some(tests) = obj.get("tests") {
            let tests = tests.as_object().ok_or_else(|| bad("`tests` must be an object"))?;
            for (name, states) in tests {
                let states = states.as_array().ok_or_else(|| bad("test value must be an array"))?;
                let mut decoded = Vec::new();
                for s in states {
                    let i = s.as_u64().ok_or_else(|| bad("test entries must be numbers"))? as usize;
                    if i >= base {
                        return Err(bad("test state outside the base"));
                    }
                    decoded.push((i, i));
                }
                m.set_test(name, Rel::from_pairs(base, &decoded));
            }
        }
        Ok(m)
    }
}

/// Does the formula hold in the interpretation: all hypotheses satisfied
/// implies the conclusion satisfied.
pub fn satisfies(m: &RelInterp, f: &HornFormula) -> Result<bool, ModelError> {
    for hyp in &f.hypotheses {
        if !m.satisfies_equation(hyp)? {
            return Ok(true);
        }
    }
    m.satisfies_equation(&f.conclusion)
}

/// All hypotheses satisfied and the conclusion refuted.
pub fn is_countermodel(m: &RelInterp, f: &HornFormula) -> Result<bool, ModelError> {
    Ok(!satisfies(m, f)?)
}

/// The space of all interpretations of a signature on a fixed base, indexed
/// by the bits of a `u128`: one bit per potential program pair, one per
/// potential test state.
pub struct InterpSpace {
    base: usize,
    prog_names: Vec<String>,
    test_names: Vec<String>,
    total_bits: u32,
}

impl InterpSpace {
    pub fn new(sig: &Signature, base: usize) -> Result<InterpSpace, ModelError> {
        if base > MAX_BASE {
            return Err(ModelError::BaseTooLarge { base, cap: MAX_BASE });
        }
        let prog_names: Vec<String> = sig.program_names().map(str::to_owned).collect();
        let test_names: Vec<String> = sig.test_names().map(str::to_owned).collect();
        let bits = (base * base * prog_names.len() + base * test_names.len()) as u32;
        if bits > 127 {
            return Err(ModelError::SpaceTooLarge { bits });
        }
        Ok(InterpSpace { base, prog_names, test_names, total_bits: bits })
    }

    pub fn count(&self) -> u128 {
        1u128 << self.total_bits
    }

    pub fn decode(&self, idx: u128) -> RelInterp {
        let n = self.base;
        let mut m = RelInterp::new(n).expect("base checked at construction");
        let mut cursor = 0u32;
        for name in &self.prog_names {
            let mut rel = Rel::empty(n);
            for i in 0..n {
                for j in 0..n {
                    if idx >> cursor & 1 == 1 {
                        rel.rows[i] |= 1 << j;
                    }
                    cursor += 1;
                }
            }
            m.progs.insert(name.clone(), rel);
        }
        for name in &self.test_names {
            let mut rel = Rel::empty(n);
            for i in 0..n {
                if idx >> cursor & 1 == 1 {
                    rel.rows[i] |= 1 << i;
                }
                cursor += 1;
            }
            m.tests.insert(name.clone(), rel);
        }
        m
    }
}

/// Every interpretation of the signature on the given base, in index order.
pub fn enumerate_interpretations(
    sig: &Signature,
    base: usize,
) -> Result<impl Iterator<Item = RelInterp>, ModelError> {
    let space = InterpSpace::new(sig, base)?;
    Ok((0..space.count()).map(move |i| space.decode(i)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Bases 1 through this are searched in order.
    pub max_base: usize,
    /// Interpretations examined per base before giving up on it.
    pub budget: u64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_base: 3, budget: 200_000, seed: 0x6b61_7468 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchedBase {
    pub base: usize,
    pub examined: u64,
    /// True when every interpretation of this base was checked.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    pub counterexample: Option<RelInterp>,
    pub searched: Vec<SearchedBase>,
}

impl OracleOutcome {
    /// True when every base in range was searched exhaustively, so the
    /// absence of a counterexample is a theorem about those bases.
    pub fn exhaustive(&self) -> bool {
        self.searched.iter().all(|s| s.exhaustive)
    }
}

/// Searches small relational interpretations for a countermodel of the
/// formula. Returns the first one found in enumeration order, along with a
/// per-base account of how much was searched.
pub fn find_counterexample(
    f: &HornFormula,
    cfg: &OracleConfig,
) -> Result<OracleOutcome, ModelError> {
    let mut searched = Vec::new();
    for base in 1..=cfg.max_base {
        let space = InterpSpace::new(&f.signature, base)?;
        let exhaustive = space.count() <= cfg.budget as u128;
        let mut examined = 0u64;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (base as u64).wrapping_mul(0x9e37_79b9));
        let found = if exhaustive {
            let mut hit = None;
            for idx in 0..space.count() {
                examined += 1;
                let m = space.decode(idx);
                if is_countermodel(&m, f)? {
                    hit = Some(m);
                    break;
                }
            }
            hit
        } else {
            let mut hit = None;
            for _ in 0..cfg.budget {
                examined += 1;
                let m = space.decode(rng.random_range(0..space.count()));
                if is_countermodel(&m, f)? {
                    hit = Some(m);
                    break;
                }
            }
            hit
        };
        searched.push(SearchedBase { base, examined, exhaustive: exhaustive && found.is_none() });
        if found.is_some() {
            return Ok(OracleOutcome { counterexample: found, searched });
        }
    }
    Ok(OracleOutcome { counterexample: None, searched })
}

/// The interpretation whose base is the guarded word itself: state `i` is the
/// position before atom `i`, program edges step along the word, and a test
/// holds at the states whose atom satisfies it. A term's relation then
/// connects state 0 to the last state exactly when the term accepts the word.
pub fn chain_of_word(w: &crate::decide::GuardedWord, sig: &Signature) -> RelInterp {
    let n = w.atoms.len();
    let mut m = RelInterp::new(n).expect("witness words are short");
    for name in sig.program_names() {
        let pairs: Vec<(usize, usize)> = w
            .progs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.as_str() == name)
            .map(|(i, _)| (i, i + 1))
            .collect();
        m.set_prog(name, Rel::from_pairs(n, &pairs));
    }
    for name in sig.test_names() {
        let pairs: Vec<(usize, usize)> = w
            .atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.assignment.get(name).copied().unwrap_or(false))
            .map(|(i, _)| (i, i))
            .collect();
        m.set_test(name, Rel::from_pairs(n, &pairs));
    }
    m
}

/// The finite algebra of relations generated by an interpretation: closure
/// of the assigned relations, the empty and identity relations, and the test
/// complements under union, composition, and star.
#[derive(Debug, Clone)]
pub struct FiniteKat {
    pub base: usize,
    pub elements: Vec<Rel>,
    index: HashMap<Rel, usize>,
    /// Indices of the elements generated from tests alone (the Boolean part).
    pub boolean: Vec<usize>,
}

impl FiniteKat {
    pub fn contains(&self, r: &Rel) -> bool {
        self.index.contains_key(r)
    }

    pub fn index_of(&self, r: &Rel) -> Option<usize> {
        self.index.get(r).copied()
    }
}

pub fn generated_subalgebra(m: &RelInterp, cap: usize) -> Result<FiniteKat, ModelError> {
    let n = m.base;
    // The Boolean part first: closure of literals under union and
    // intersection. Composition of subidentities is intersection, so this is
    // the test subalgebra, and it is closed under complement because every
    // element is a union of minterms.
    let mut boolean_rels: BTreeSet<Rel> = BTreeSet::new();
    boolean_rels.insert(Rel::empty(n));
    boolean_rels.insert(Rel::identity(n));
    for t in m.tests.values() {
        boolean_rels.insert(t.clone());
        boolean_rels.insert(t.complement_in_identity());
    }
    loop {
        let snapshot: Vec<Rel> = boolean_rels.iter().cloned().collect();
        let before = boolean_rels.len();
        for a in &snapshot {
            for b in &snapshot {
                boolean_rels.insert(a.union(b));
                boolean_rels.insert(a.compose(b));
            }
        }
        if boolean_rels.len() == before {
            break;
        }
    }

    let mut elements: Vec<Rel> = Vec::new();
    let mut index: HashMap<Rel, usize> = HashMap::new();
    let push = |r: Rel, elements: &mut Vec<Rel>, index: &mut HashMap<Rel, usize>| -> bool {
        if index.contains_key(&r) {
            return false;
        }
        index.insert(r.clone(), elements.len());
        elements.push(r);
        true
    };
    for r in &boolean_rels {
        push(r.clone(), &mut elements, &mut index);
    }
    for r in m.progs.values() {
        push(r.clone(), &mut elements, &mut index);
    }

    // Close under the three term operations to a fixpoint.
    loop {
        let before = elements.len();
        let snapshot = elements.clone();
        for a in &snapshot {
            push(a.star(), &mut elements, &mut index);
            for b in &snapshot {
                push(a.union(b), &mut elements, &mut index);
                push(a.compose(b), &mut elements, &mut index);
            }
            if elements.len() > cap {
                return Err(ModelError::ClosureCapExceeded { cap });
            }
        }
        if elements.len() == before {
            break;
        }
    }
    let boolean = boolean_rels.iter().map(|r| index[r]).collect();
    Ok(FiniteKat { base: n, elements, index, boolean })
}

/// Is the down-set `{y in K : y <= x}` closed under union, composition, and
/// star? Union and sum closure always hold; the interesting direction is
/// star, which forces `x` to be reflexive and transitive.
pub fn downset_is_subalgebra(k: &FiniteKat, x: &Rel) -> bool {
    let down: Vec<&Rel> = k.elements.iter().filter(|y| y.subset(x)).collect();
    for a in &down {
        if !a.star().subset(x) {
            return false;
        }
        for b in &down {
            if !a.union(b).subset(x) || !a.compose(b).subset(x) {
                return false;
            }
        }
    }
    true
}

/// The quotient carrier: the interval from `bottom` to `top` inside the
/// generated algebra, with `bottom` glued onto every element.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub bottom: Rel,
    pub top: Rel,
    pub elements: Vec<Rel>,
    index: HashMap<Rel, usize>,
    /// The Boolean part of the carrier: images of the test subalgebra.
    pub boolean: Vec<Rel>,
}

impl Quotient {
    pub fn contains(&self, r: &Rel) -> bool {
        self.index.contains_key(r)
    }

    /// Collapse onto the carrier: glue `bottom` on.
    pub fn send(&self, x: &Rel) -> Rel {
        x.union(&self.bottom)
    }

    pub fn zero(&self) -> Rel {
        self.bottom.clone()
    }

    pub fn one(&self) -> Rel {
        self.send(&Rel::identity(self.bottom.n()))
    }

    pub fn plus(&self, v: &Rel, w: &Rel) -> Rel {
        v.union(w)
    }

    pub fn times(&self, v: &Rel, w: &Rel) -> Rel {
        v.compose(w).union(&self.bottom)
    }

    pub fn star(&self, v: &Rel) -> Rel {
        v.star()
    }

    pub fn leq(&self, v: &Rel, w: &Rel) -> bool {
        v.subset(w)
    }

    /// Complement on the Boolean part. The canonical test representative of
    /// `v` is its diagonal minus the bottom's diagonal; complementing that
    /// inside the identity and gluing the bottom back on is independent of
    /// which test mapped onto `v`, which the audit re-checks.
    pub fn tilde(&self, v: &Rel) -> Option<Rel> {
        if !self.boolean.contains(v) {
            return None;
        }
        let n = self.bottom.n();
        let pairs: Vec<(usize, usize)> = (0..n)
            .filter(|&i| v.contains(i, i) && !self.bottom.contains(i, i))
            .map(|i| (i, i))
            .collect();
        let rep = Rel::from_pairs(n, &pairs);
        Some(self.send(&rep.complement_in_identity()))
    }
}

#[derive(Debug, Clone)]
pub struct AuditCheck {
    pub name: &'static str,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct QuotientAudit {
    pub checks: Vec<AuditCheck>,
    /// False when the axiom sweep sampled triples instead of enumerating.
    pub exhaustive: bool,
    pub carrier_size: usize,
}

impl QuotientAudit {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.ok).map(|c| c.name).collect()
    }
}

/// Builds the quotient of the algebra generated by `m` that forces `r` to
/// zero, and audits it: the carrier must be closed under the operations, the
/// collapse must be a homomorphism on the interval, complement must be well
/// defined, every defining axiom of the class (semiring, star, Boolean) must
/// hold on the carrier, and `r` must actually land on the new zero.
pub fn quotient_construction(
    m: &RelInterp,
    r: &Term,
    sig: &Signature,
    cap: usize,
) -> Result<(Quotient, QuotientAudit), ModelError> {
    let u = sig.universal_expression();
    let top = m.eval(&u)?;
    let bottom = m.eval(&Term::product([u.clone(), r.clone(), u.clone()]))?;
    let k = generated_subalgebra(m, cap)?;

    let interval: Vec<&Rel> = k.elements.iter().filter(|x| x.subset(&top)).collect();
    let mut elements: Vec<Rel> = Vec::new();
    let mut index: HashMap<Rel, usize> = HashMap::new();
    for x in &interval {
        let v = x.union(&bottom);
        if !index.contains_key(&v) {
            index.insert(v.clone(), elements.len());
            elements.push(v);
        }
    }
    let boolean: Vec<Rel> = {
        let mut seen = BTreeSet::new();
        for &i in &k.boolean {
            seen.insert(k.elements[i].union(&bottom));
        }
        seen.into_iter().collect()
    };
    let q = Quotient { bottom: bottom.clone(), top: top.clone(), elements, index, boolean };

    let mut checks = Vec::new();
    let check = |name: &'static str, ok: bool, checks: &mut Vec<AuditCheck>| {
        checks.push(AuditCheck { name, ok });
    };

    check("bottom below top", bottom.subset(&top), &mut checks);
    check("r lands on zero", m.eval(r)?.union(&bottom) == bottom, &mut checks);

    // Closure of the carrier under the operations.
    let closed = q.elements.iter().all(|v| {
        q.contains(&q.star(v))
            && q.elements
                .iter()
                .all(|w| q.contains(&q.plus(v, w)) && q.contains(&q.times(v, w)))
    });
    check("carrier closed under operations", closed, &mut checks);
    check("zero in carrier", q.contains(&q.zero()), &mut checks);
    check("one in carrier", q.contains(&q.one()), &mut checks);

    // The collapse is a homomorphism from the interval onto the carrier.
    let mut hom = true;
    for x in &interval {
        hom &= q.send(&x.star()) == q.star(&q.send(x));
        for y in &interval {
            hom &= q.send(&x.union(y)) == q.plus(&q.send(x), &q.send(y));
            hom &= q.send(&x.compose(y)) == q.times(&q.send(x), &q.send(y));
        }
    }
    check("collapse is a homomorphism", hom, &mut checks);

    // Complement well defined: interval elements of the test subalgebra with
    // the same image have complements with the same image.
    let mut tilde_ok = true;
    let boolean_reps: Vec<&Rel> = k.boolean.iter().map(|&i| &k.elements[i]).collect();
    for c in &boolean_reps {
        for d in &boolean_reps {
            if q.send(c) == q.send(d)
                && q.send(&c.complement_in_identity()) != q.send(&d.complement_in_identity())
            {
                tilde_ok = false;
            }
        }
    }
    for c in &boolean_reps {
        if let Some(t) = q.tilde(&q.send(c)) {
            tilde_ok &= t == q.send(&c.complement_in_identity());
        } else {
            tilde_ok = false;
        }
    }
    check("complement well defined", tilde_ok, &mut checks);

    // Defining axioms on the carrier. Exhaustive for small carriers, seeded
    // sampling beyond that.
    let size = q.elements.len();
    let exhaustive = size.saturating_pow(3) <= 125_000;
    let triples: Vec<(usize, usize, usize)> = if exhaustive {
        let mut v = Vec::with_capacity(size.pow(3));
        for a in 0..size {
            for b in 0..size {
                for c in 0..size {
                    v.push((a, b, c));
                }
            }
        }
        v
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (0..125_000)
            .map(|_| {
                (
                    rng.random_range(0..size),
                    rng.random_range(0..size),
                    rng.random_range(0..size),
                )
            })
            .collect()
    };

    let zero = q.zero();
    let one = q.one();
    let mut semiring = true;
    let mut star_unfold = true;
    let mut star_horn = true;
    for &(ai, bi, ci) in &triples {
        let (x, y, z) = (&q.elements[ai], &q.elements[bi], &q.elements[ci]);
        semiring &= q.plus(x, x) == *x;
        semiring &= q.plus(x, &zero) == *x;
        semiring &= q.plus(x, y) == q.plus(y, x);
        semiring &= q.plus(x, &q.plus(y, z)) == q.plus(&q.plus(x, y), z);
        semiring &= q.times(&zero, x) == zero && q.times(x, &zero) == zero;
        semiring &= q.times(&one, x) == *x && q.times(x, &one) == *x;
        semiring &= q.times(x, &q.times(y, z)) == q.times(&q.times(x, y), z);
        semiring &= q.times(x, &q.plus(y, z)) == q.plus(&q.times(x, y), &q.times(x, z));
        semiring &= q.times(&q.plus(y, z), x) == q.plus(&q.times(y, x), &q.times(z, x));

        let xs = q.star(x);
        star_unfold &= q.leq(&q.plus(&one, &q.times(x, &xs)), &xs);
        star_unfold &= q.leq(&q.plus(&one, &q.times(&xs, x)), &xs);
        // The two implications: from x*y <= y conclude star(x)*y <= y, and
        // symmetrically on the right.
        if q.leq(&q.times(x, y), y) {
            star_horn &= q.leq(&q.times(&xs, y), y);
        }
        if q.leq(&q.times(y, x), y) {
            star_horn &= q.leq(&q.times(y, &xs), y);
        }
        if !semiring || !star_unfold || !star_horn {
            break;
        }
    }
    check("semiring equations", semiring, &mut checks);
    check("star unfolding", star_unfold, &mut checks);
    check("star implications", star_horn, &mut checks);

    // Boolean axioms on the Boolean part of the carrier.
    let mut boolean_ok = true;
    for v in &q.boolean {
        match q.tilde(v) {
            Some(nv) => {
                boolean_ok &= q.plus(v, &nv) == one;
                boolean_ok &= q.times(v, &nv) == zero;
                boolean_ok &= q.tilde(&nv).as_ref() == Some(v);
                boolean_ok &= q.contains(&nv) && q.boolean.contains(&nv);
                boolean_ok &= q.leq(v, &one);
            }
            None => boolean_ok = false,
        }
    }
    check("boolean part", boolean_ok, &mut checks);

    let audit = QuotientAudit { checks, exhaustive, carrier_size: size };
    Ok((q, audit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decide::{accepts_guarded_word, decide_equal, DeciderConfig};
    use crate::gen::random_term;
    use crate::parse::parse_horn;

    fn naive_star(r: &Rel) -> Rel {
        let mut acc = Rel::identity(r.n());
        let mut cur = Rel::identity(r.n());
        for _ in 0..r.n() + 2 {
            cur = cur.compose(r);
            acc = acc.union(&cur);
        }
        acc
    }

    #[test]
    fn star_matches_the_power_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if rng.random_bool(0.3) {
                        pairs.push((i, j));
                    }
                }
            }
            let r = Rel::from_pairs(n, &pairs);
            assert_eq!(r.star(), naive_star(&r));
        }
    }

    #[test]
    fn eval_on_a_known_interpretation() {
        let mut m = RelInterp::new(3).unwrap();
        m.set_prog("p", Rel::from_pairs(3, &[(0, 1), (1, 2)]));
        m.set_test("b", Rel::from_pairs(3, &[(0, 0), (2, 2)]));
        let sig = Signature::with(&["p"], &["b"]);

        let t = crate::parse::parse_term("b;p;p;b", &sig).unwrap();
        assert_eq!(m.eval(&t).unwrap(), Rel::from_pairs(3, &[(0, 2)]));

        let s = crate::parse::parse_term("p*", &sig).unwrap();
        assert_eq!(
            m.eval(&s).unwrap(),
            Rel::from_pairs(3, &[(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)])
        );

        let nb = crate::parse::parse_term("!b", &sig).unwrap();
        assert_eq!(m.eval(&nb).unwrap(), Rel::from_pairs(3, &[(1, 1)]));
    }

    // The chain interpretation of a guarded word agrees with direct
    // membership: the endpoints are related exactly when the word is
    // accepted. This ties the relational oracle to the language decider.
    #[test]
    fn chain_interpretation_matches_membership() {
        let sig = Signature::with(&["p", "q"], &["b"]);
        let cfg = DeciderConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut checked = 0;
        for _ in 0..300 {
            let s = random_term(&mut rng, &sig, 8, true);
            let t = random_term(&mut rng, &sig, 8, true);
            let v = decide_equal(&s, &t, &sig, &cfg).unwrap();
            let Some(w) = v.witness else { continue };
            checked += 1;
            let m = chain_of_word(&w, &sig);
            let last = w.atoms.len() - 1;
            for term in [&s, &t] {
                let rel = m.eval(term).unwrap();
                assert_eq!(
                    rel.contains(0, last),
                    accepts_guarded_word(term, &w),
                    "chain model disagrees with membership for {term}"
                );
            }
        }
        assert!(checked > 50, "want a meaningful number of invalid pairs, got {checked}");
    }

    #[test]
    fn oracle_refutes_commutativity() {
        let f = parse_horn("program p q\nshow p;q = q;p").unwrap();
        let out = find_counterexample(&f, &OracleConfig { max_base: 2, ..Default::default() })
            .unwrap();
        let m = out.counterexample.expect("composition does not commute");
        assert!(is_countermodel(&m, &f).unwrap());
        assert!(!satisfies(&m, &f).unwrap());
    }

    #[test]
    fn oracle_exhausts_small_bases_on_a_valid_formula() {
        let f = parse_horn("program p q\nhyp p = 0\nshow p;q = 0").unwrap();
        let out = find_counterexample(&f, &OracleConfig { max_base: 2, ..Default::default() })
            .unwrap();
        assert!(out.counterexample.is_none());
        assert!(out.exhaustive());
        assert_eq!(out.searched.len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let mut m = RelInterp::new(4).unwrap();
        m.set_prog("p", Rel::from_pairs(4, &[(0, 1), (2, 3), (3, 3)]));
        m.set_prog("q", Rel::empty(4));
        m.set_test("b", Rel::from_pairs(4, &[(1, 1)]));
        let v = m.to_json();
        let back = RelInterp::from_json(&v).unwrap();
        assert_eq!(m, back);

        let bad = serde_json::json!({ "base": 2, "progs": { "p": [[0, 5]] } });
        assert!(RelInterp::from_json(&bad).is_err());
    }

    #[test]
    fn downset_subalgebra_iff_star_fixed() {
        let mut m = RelInterp::new(3).unwrap();
        m.set_prog("p", Rel::from_pairs(3, &[(0, 1), (1, 2)]));
        m.set_test("b", Rel::from_pairs(3, &[(0, 0)]));
        let k = generated_subalgebra(&m, 4000).unwrap();
        let mut fixed = 0;
        for x in &k.elements {
            let ideal = downset_is_subalgebra(&k, x);
            let star_fixed = x.star() == *x;
            assert_eq!(ideal, star_fixed, "down-set characterization failed at {:?}", x);
            fixed += usize::from(star_fixed);
        }
        assert!(fixed >= 1, "the full star of anything is a fixed point");
    }

    #[test]
    fn quotient_audit_passes_on_small_models() {
        let sig = Signature::with(&["p", "q"], &["b"]);
        let mut m = RelInterp::new(3).unwrap();
        m.set_prog("p", Rel::from_pairs(3, &[(0, 1)]));
        m.set_prog("q", Rel::from_pairs(3, &[(1, 2), (2, 0)]));
        m.set_test("b", Rel::from_pairs(3, &[(1, 1), (2, 2)]));

        let r = crate::parse::parse_term("b;p + q;b;q", &sig).unwrap();
        let (q, audit) = quotient_construction(&m, &r, &sig, 40_000).unwrap();
        assert!(audit.all_ok(), "failed checks: {:?}", audit.failed());
        assert!(q.contains(&q.zero()) && q.contains(&q.one()));
        assert!(m.eval(&r).unwrap().union(&q.bottom) == q.bottom);
    }

    #[test]
    fn quotient_zero_is_not_the_old_zero_in_general() {
        let sig = Signature::with(&["p"], &[]);
        let mut m = RelInterp::new(2).unwrap();
        m.set_prog("p", Rel::from_pairs(2, &[(0, 1)]));
        let r = Term::prog("p");
        let (q, audit) = quotient_construction(&m, &r, &sig, 4000).unwrap();
        assert!(audit.all_ok(), "failed checks: {:?}", audit.failed());
        assert_ne!(q.zero(), Rel::empty(2), "collapsing p to zero moves the bottom");
    }
}
