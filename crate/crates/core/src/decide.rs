//! Equational validity for terms over programs and tests.
//!
//! Validity of `s = t` is language equality of the guarded words of the two
//! terms. A guarded word alternates atoms (total truth assignments to the
//! declared tests) and program symbols, beginning and ending with an atom.
//! Both terms compile to small automata ([`Fa`]) whose edges are labeled with
//! program symbols, sets of atoms, or epsilon. After epsilon elimination the
//! two automata are compared by an on-the-fly bisimulation over subset states
//! with a union find; when they disagree, a separate breadth-first pass
//! recovers a shortest separating guarded word.
//!
//! Atom expansion is exponential in the number of declared tests, so the
//! decider enforces a configurable cap on the test count and a cap on the
//! number of distinct subset states, each reported as its own error.
//!
//! The module also hosts the word-language view of test-free terms used by
//! the proof search: exact bounded enumeration ([`words_of`]), emptiness, and
//! the maximum word length ([`max_word_len`]). These are computed structurally
//! on the term, independent of the automata, which makes them usable as a
//! cross-check oracle for the decider itself.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::term::{is_boolean, Signature, SymbolKind, Term};

/// Tests beyond this count cannot be represented; atom sets live in a `u64`.
pub const MAX_SUPPORTED_TESTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeciderConfig {
    /// Cap on the number of declared tests (atom expansion is `2^tests`).
    pub max_tests: usize,
    /// Cap on distinct subset states explored during equivalence checking.
    pub max_states: usize,
}

impl Default for DeciderConfig {
    fn default() -> Self {
        DeciderConfig { max_tests: MAX_SUPPORTED_TESTS, max_states: 200_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecideError {
    #[error("{tests} tests declared, but the atom expansion is capped at {cap}")]
    AtomCapExceeded { tests: usize, cap: usize },
    #[error("subset-state budget of {cap} states exceeded")]
    StateBudgetExceeded { cap: usize },
    #[error("term `{0}` mentions tests; a test-free term is required")]
    NotTestFree(String),
    #[error("symbol `{0}` is not declared in the signature")]
    Undeclared(String),
}

/// A total truth assignment to the declared tests.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub assignment: BTreeMap<String, bool>,
}

impl Atom {
    /// The assignment sending test `i` of `tests` to bit `i` of `bits`.
    pub fn from_bits(tests: &[String], bits: u64) -> Self {
        let assignment = tests
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), bits >> i & 1 == 1))
            .collect();
        Atom { assignment }
    }

    /// Evaluates a Boolean term under this assignment. Tests missing from the
    /// assignment are false.
    pub fn satisfies(&self, t: &Term) -> bool {
        match t {
            Term::Zero => false,
            Term::One => true,
            Term::Test(s) => self.assignment.get(&s.name).copied().unwrap_or(false),
            Term::Not(a) => !self.satisfies(a),
            Term::Plus(a, b) => self.satisfies(a) || self.satisfies(b),
            Term::Dot(a, b) => self.satisfies(a) && self.satisfies(b),
            Term::Prog(_) | Term::Star(_) => {
                unreachable!("atom evaluation of a non-Boolean term")
            }
        }
    }
}

impl fmt::Display for Atom {
    /// Prints the set of true tests, e.g. `{b,c}` or `{}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (name, value) in &self.assignment {
            if *value {
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "{name}")?;
                first = false;
            }
        }
        write!(f, "}}")
    }
}

/// An alternating word `atom program atom ... program atom`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedWord {
    pub atoms: Vec<Atom>,
    pub progs: Vec<String>,
}

impl GuardedWord {
    pub fn new(atoms: Vec<Atom>, progs: Vec<String>) -> Self {
        assert_eq!(atoms.len(), progs.len() + 1, "guarded words alternate atom/program/atom");
        GuardedWord { atoms, progs }
    }

    /// Length counted in atoms; the shortest guarded word has length 1.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false // there is always at least one atom
    }
}

impl fmt::Display for GuardedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atoms[0])?;
        for (p, a) in self.progs.iter().zip(&self.atoms[1..]) {
            write!(f, ";{p};{a}")?;
        }
        Ok(())
    }
}

/// Result of an equality or inequality check. An invalid verdict always
/// carries a witness accepted by exactly one of the two terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    pub witness: Option<GuardedWord>,
}

/// Edge labels of [`Fa`]: a program symbol, a set of atoms (one bit per
/// atom), or epsilon. An atom-set edge may be crossed without consuming a
/// program as long as the current atom belongs to the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FaLabel {
    Eps,
    Atoms(u64),
    Prog(usize),
}

/// A nondeterministic automaton over guarded words.
///
/// A word `a0 p1 a1 ... pn an` is accepted when some path from `start` to an
/// accepting state reads `p1 ... pn` on its program edges, and every atom-set
/// edge crossed between consecutive program edges (or before the first or
/// after the last) contains the atom current at that point. Composition of
/// terms is then plain concatenation: the shared atom at the junction has to
/// satisfy the trailing constraints of the left part and the leading
/// constraints of the right part.
#[derive(Debug, Clone)]
pub struct Fa {
    pub states: usize,
    pub start: usize,
    pub accepts: BTreeSet<usize>,
    pub edges: Vec<(usize, FaLabel, usize)>,
}

/// The atom/program alphabet extracted from a signature.
#[derive(Debug, Clone)]
struct Alphabet {
    tests: Vec<String>,
    progs: Vec<String>,
}

impl Alphabet {
    fn new(sig: &Signature, cfg: &DeciderConfig) -> Result<Self, DecideError> {
        let tests: Vec<String> = sig.test_names().map(str::to_owned).collect();
        let cap = cfg.max_tests.min(MAX_SUPPORTED_TESTS);
        if tests.len() > cap {
            return Err(DecideError::AtomCapExceeded { tests: tests.len(), cap });
        }
        let progs = sig.program_names().map(str::to_owned).collect();
        Ok(Alphabet { tests, progs })
    }

    fn atom_count(&self) -> usize {
        1 << self.tests.len()
    }

    fn prog_index(&self, name: &str) -> Result<usize, DecideError> {
        self.progs
            .binary_search_by(|p| p.as_str().cmp(name))
            .map_err(|_| DecideError::Undeclared(name.to_owned()))
    }

    /// Bitmask of atoms satisfying a Boolean term.
    fn sat_mask(&self, t: &Term) -> Result<u64, DecideError> {
        for sym in t.symbols() {
            if sym.kind == SymbolKind::Test && !self.tests.contains(&sym.name) {
                return Err(DecideError::Undeclared(sym.name));
            }
        }
        let mut mask = 0u64;
        for bits in 0..self.atom_count() as u64 {
            if Atom::from_bits(&self.tests, bits).satisfies(t) {
                mask |= 1 << bits;
            }
        }
        Ok(mask)
    }
}

impl Fa {
    /// Thompson-style compilation of a term over the signature's alphabet.
    pub fn compile(t: &Term, sig: &Signature, cfg: &DeciderConfig) -> Result<Fa, DecideError> {
        let alphabet = Alphabet::new(sig, cfg)?;
        let mut fa = Fa { states: 0, start: 0, accepts: BTreeSet::new(), edges: Vec::new() };
        let (start, accept) = fa.build(t, &alphabet)?;
        fa.start = start;
        fa.accepts.insert(accept);
        Ok(fa)
    }

    fn fresh(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    fn build(&mut self, t: &Term, alphabet: &Alphabet) -> Result<(usize, usize), DecideError> {
        if is_boolean(t) {
            let mask = alphabet.sat_mask(t)?;
            let (s, a) = (self.fresh(), self.fresh());
            self.edges.push((s, FaLabel::Atoms(mask), a));
            return Ok((s, a));
        }
        match t {
            Term::Prog(sym) => {
                let idx = alphabet.prog_index(&sym.name)?;
                let (s, a) = (self.fresh(), self.fresh());
                self.edges.push((s, FaLabel::Prog(idx), a));
                Ok((s, a))
            }
            Term::Plus(x, y) => {
                let (xs, xa) = self.build(x, alphabet)?;
                let (ys, ya) = self.build(y, alphabet)?;
                let (s, a) = (self.fresh(), self.fresh());
                self.edges.push((s, FaLabel::Eps, xs));
                self.edges.push((s, FaLabel::Eps, ys));
                self.edges.push((xa, FaLabel::Eps, a));
                self.edges.push((ya, FaLabel::Eps, a));
                Ok((s, a))
            }
            Term::Dot(x, y) => {
                let (xs, xa) = self.build(x, alphabet)?;
                let (ys, ya) = self.build(y, alphabet)?;
                self.edges.push((xa, FaLabel::Eps, ys));
                Ok((xs, ya))
            }
            Term::Star(x) => {
                let (xs, xa) = self.build(x, alphabet)?;
                let (s, a) = (self.fresh(), self.fresh());
                self.edges.push((s, FaLabel::Eps, a));
                self.edges.push((s, FaLabel::Eps, xs));
                self.edges.push((xa, FaLabel::Eps, a));
                self.edges.push((xa, FaLabel::Eps, xs));
                Ok((s, a))
            }
            Term::Zero | Term::One | Term::Test(_) | Term::Not(_) => {
                unreachable!("Boolean terms are compiled to atom-set edges")
            }
        }
    }

    /// Removes epsilon edges: every state inherits the outgoing non-epsilon
    /// edges and the acceptance of its epsilon closure.
    pub fn eliminate_epsilon(&self) -> Fa {
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); self.states];
        for &(v, label, w) in &self.edges {
            if label == FaLabel::Eps {
                succ[v].push(w);
            }
        }
        let mut out = Fa {
            states: self.states,
            start: self.start,
            accepts: BTreeSet::new(),
            edges: Vec::new(),
        };
        let mut edges = BTreeSet::new();
        for v in 0..self.states {
            let mut seen = vec![false; self.states];
            let mut stack = vec![v];
            seen[v] = true;
            while let Some(u) = stack.pop() {
                if self.accepts.contains(&u) {
                    out.accepts.insert(v);
                }
                for &n in &succ[u] {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            for &(u, label, w) in &self.edges {
                if label != FaLabel::Eps && seen[u] {
                    edges.insert((v, label, w));
                }
            }
        }
        out.edges = edges.into_iter().collect();
        out
    }
}

/// Transition tables of an epsilon-free [`Fa`], organized for subset stepping.
struct Machine {
    accepts: Vec<bool>,
    atom_edges: Vec<Vec<(u64, usize)>>,
    prog_edges: Vec<Vec<(usize, usize)>>,
    start: usize,
}

impl Machine {
    fn new(fa: &Fa) -> Machine {
        let mut accepts = vec![false; fa.states];
        for &a in &fa.accepts {
            accepts[a] = true;
        }
        let mut atom_edges = vec![Vec::new(); fa.states];
        let mut prog_edges = vec![Vec::new(); fa.states];
        for &(v, label, w) in &fa.edges {
            match label {
                FaLabel::Atoms(mask) => atom_edges[v].push((mask, w)),
                FaLabel::Prog(p) => prog_edges[v].push((p, w)),
                FaLabel::Eps => panic!("epsilon edge in an epsilon-free automaton"),
            }
        }
        Machine { accepts, atom_edges, prog_edges, start: fa.start }
    }

    /// Saturates a subset under atom-set edges containing `atom`.
    fn closure(&self, set: &[usize], atom: usize) -> Vec<usize> {
        let mut seen: BTreeSet<usize> = set.iter().copied().collect();
        let mut stack: Vec<usize> = set.to_vec();
        while let Some(v) = stack.pop() {
            for &(mask, w) in &self.atom_edges[v] {
                if mask >> atom & 1 == 1 && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn observes(&self, closed: &[usize]) -> bool {
        closed.iter().any(|&v| self.accepts[v])
    }

    fn step(&self, closed: &[usize], prog: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for &v in closed {
            for &(p, w) in &self.prog_edges[v] {
                if p == prog {
                    out.insert(w);
                }
            }
        }
        out.into_iter().collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new() -> Self {
        UnionFind { parent: Vec::new() }
    }

    fn make(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Decides whether `s = t` is valid over the given signature. An invalid
/// verdict carries a shortest separating guarded word.
pub fn decide_equal(
    s: &Term,
    t: &Term,
    sig: &Signature,
    cfg: &DeciderConfig,
) -> Result<Verdict, DecideError> {
    let alphabet = Alphabet::new(sig, cfg)?;
    let left = Machine::new(&Fa::compile(s, sig, cfg)?.eliminate_epsilon());
    let right = Machine::new(&Fa::compile(t, sig, cfg)?.eliminate_epsilon());
    let atoms = alphabet.atom_count();
    let progs = alphabet.progs.len();

    if bisimilar(&left, &right, atoms, progs, cfg)? {
        return Ok(Verdict { valid: true, witness: None });
    }
    let witness = shortest_witness(&left, &right, &alphabet, cfg)?;
    debug_assert!(
        accepts_guarded_word(s, &witness) != accepts_guarded_word(t, &witness),
        "witness must separate the two terms"
    );
    Ok(Verdict { valid: false, witness: Some(witness) })
}

/// `s <= t` reduced to the equation `s + t = t`.
pub fn decide_leq(
    s: &Term,
    t: &Term,
    sig: &Signature,
    cfg: &DeciderConfig,
) -> Result<Verdict, DecideError> {
    decide_equal(&Term::plus(s.clone(), t.clone()), t, sig, cfg)
}

/// Hopcroft-Karp style bisimulation on subset states of the two machines.
fn bisimilar(
    left: &Machine,
    right: &Machine,
    atoms: usize,
    progs: usize,
    cfg: &DeciderConfig,
) -> Result<bool, DecideError> {
    let mut uf = UnionFind::new();
    let mut intern: [HashMap<Vec<usize>, usize>; 2] = [HashMap::new(), HashMap::new()];
    let mut queue = VecDeque::new();
    let mut states = 0usize;
    let mut get = |side: usize,
                   set: Vec<usize>,
                   uf: &mut UnionFind,
                   states: &mut usize|
     -> Result<usize, DecideError> {
        if let Some(&id) = intern[side].get(&set) {
            return Ok(id);
        }
        *states += 1;
        if *states > cfg.max_states {
            return Err(DecideError::StateBudgetExceeded { cap: cfg.max_states });
        }
        let id = uf.make();
        intern[side].insert(set, id);
        Ok(id)
    };

    let ls = vec![left.start];
    let rs = vec![right.start];
    let l0 = get(0, ls.clone(), &mut uf, &mut states)?;
    let r0 = get(1, rs.clone(), &mut uf, &mut states)?;
    queue.push_back((l0, ls, r0, rs));

    while let Some((lid, lset, rid, rset)) = queue.pop_front() {
        if uf.find(lid) == uf.find(rid) {
            continue;
        }
        for atom in 0..atoms {
            let lclosed = left.closure(&lset, atom);
            let rclosed = right.closure(&rset, atom);
            if left.observes(&lclosed) != right.observes(&rclosed) {
                return Ok(false);
            }
            for prog in 0..progs {
                let lnext = left.step(&lclosed, prog);
                let rnext = right.step(&rclosed, prog);
                let lnid = get(0, lnext.clone(), &mut uf, &mut states)?;
                let rnid = get(1, rnext.clone(), &mut uf, &mut states)?;
                if uf.find(lnid) != uf.find(rnid) {
                    queue.push_back((lnid, lnext, rnid, rnext));
                }
            }
        }
        uf.union(lid, rid);
    }
    Ok(true)
}

/// Breadth-first search over pairs of subset states for a shortest guarded
/// word observed by exactly one side. Only called when the languages differ.
fn shortest_witness(
    left: &Machine,
    right: &Machine,
    alphabet: &Alphabet,
    cfg: &DeciderConfig,
) -> Result<GuardedWord, DecideError> {
    struct Node {
        lset: Vec<usize>,
        rset: Vec<usize>,
        parent: Option<(usize, usize, usize)>, // (node, atom, prog)
    }
    let atoms = alphabet.atom_count();
    let mut nodes = vec![Node { lset: vec![left.start], rset: vec![right.start], parent: None }];
    let mut visited: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
    visited.insert((nodes[0].lset.clone(), nodes[0].rset.clone()));
    let mut frontier = VecDeque::from([0usize]);

    while let Some(idx) = frontier.pop_front() {
        for atom in 0..atoms {
            let lclosed = left.closure(&nodes[idx].lset, atom);
            let rclosed = right.closure(&nodes[idx].rset, atom);
            if left.observes(&lclosed) != right.observes(&rclosed) {
                // Rebuild the path of (atom, prog) inputs leading here.
                let mut inputs = Vec::new();
                let mut at = idx;
                while let Some((prev, a, p)) = nodes[at].parent {
                    inputs.push((a, p));
                    at = prev;
                }
                inputs.reverse();
                let mut word_atoms = Vec::new();
                let mut word_progs = Vec::new();
                for (a, p) in inputs {
                    word_atoms.push(Atom::from_bits(&alphabet.tests, a as u64));
                    word_progs.push(alphabet.progs[p].clone());
                }
                word_atoms.push(Atom::from_bits(&alphabet.tests, atom as u64));
                return Ok(GuardedWord::new(word_atoms, word_progs));
            }
            for prog in 0..alphabet.progs.len() {
                let lnext = left.step(&lclosed, prog);
                let rnext = right.step(&rclosed, prog);
                if visited.insert((lnext.clone(), rnext.clone())) {
                    if visited.len() > cfg.max_states {
                        return Err(DecideError::StateBudgetExceeded { cap: cfg.max_states });
                    }
                    nodes.push(Node { lset: lnext, rset: rnext, parent: Some((idx, atom, prog)) });
                    frontier.push_back(nodes.len() - 1);
                }
            }
        }
    }
    unreachable!("languages differ, so some reachable pair must disagree")
}

/// Membership of a guarded word in the language of a term, computed directly
/// on the term structure. Used to re-verify witnesses independently of the
/// automata path.
pub fn accepts_guarded_word(t: &Term, w: &GuardedWord) -> bool {
    segment(t, w, 0, w.progs.len())
}

/// Does `t` accept the segment of `w` from atom `i` to atom `j`?
fn segment(t: &Term, w: &GuardedWord, i: usize, j: usize) -> bool {
    if is_boolean(t) {
        return i == j && w.atoms[i].satisfies(t);
    }
    match t {
        Term::Prog(sym) => j == i + 1 && w.progs[i] == sym.name,
        Term::Plus(a, b) => segment(a, w, i, j) || segment(b, w, i, j),
        Term::Dot(a, b) => (i..=j).any(|k| segment(a, w, i, k) && segment(b, w, k, j)),
        Term::Star(a) => {
            i == j || (i + 1..=j).any(|k| segment(a, w, i, k) && segment(t, w, k, j))
        }
        Term::Zero | Term::One | Term::Test(_) | Term::Not(_) => {
            unreachable!("Boolean terms handled above")
        }
    }
}

fn check_test_free(t: &Term) -> Result<(), DecideError> {
    match t {
        Term::Test(_) | Term::Not(_) => Err(DecideError::NotTestFree(t.to_string())),
        Term::Zero | Term::One | Term::Prog(_) => Ok(()),
        Term::Star(a) => check_test_free(a),
        Term::Plus(a, b) | Term::Dot(a, b) => {
            check_test_free(a)?;
            check_test_free(b)
        }
    }
}

/// Program words of a test-free term, exactly those of length at most
/// `max_len`. Computed structurally; star iterates concatenation under the
/// length bound to a fixpoint, which is exact because every piece of a short
/// word is short.
pub fn words_of(t: &Term, max_len: usize) -> Result<BTreeSet<Vec<String>>, DecideError> {
    check_test_free(t)?;
    Ok(words(t, max_len))
}

fn words(t: &Term, max_len: usize) -> BTreeSet<Vec<String>> {
    match t {
        Term::Zero => BTreeSet::new(),
        Term::One => BTreeSet::from([Vec::new()]),
        Term::Prog(sym) => {
            if max_len >= 1 {
                BTreeSet::from([vec![sym.name.clone()]])
            } else {
                BTreeSet::new()
            }
        }
        Term::Plus(a, b) => {
            let mut out = words(a, max_len);
            out.extend(words(b, max_len));
            out
        }
        Term::Dot(a, b) => {
            let left = words(a, max_len);
            let right = words(b, max_len);
            let mut out = BTreeSet::new();
            for x in &left {
                for y in &right {
                    if x.len() + y.len() <= max_len {
                        out.insert(x.iter().chain(y).cloned().collect());
                    }
                }
            }
            out
        }
        Term::Star(a) => {
            let base = words(a, max_len);
            let mut out = BTreeSet::from([Vec::new()]);
            loop {
                let mut grew = false;
                let snapshot: Vec<Vec<String>> = out.iter().cloned().collect();
                for x in &base {
                    for y in &snapshot {
                        if x.len() + y.len() <= max_len {
                            let w: Vec<String> = x.iter().chain(y.iter()).cloned().collect();
                            grew |= out.insert(w);
                        }
                    }
                }
                if !grew {
                    return out;
                }
            }
        }
        Term::Test(_) | Term::Not(_) => unreachable!("checked test-free"),
    }
}

/// Structural emptiness of the word language of a test-free term. Star is
/// never empty: it always contains the empty word.
pub fn is_empty_language(t: &Term) -> bool {
    match t {
        Term::Zero => true,
        Term::One | Term::Prog(_) | Term::Star(_) => false,
        Term::Plus(a, b) => is_empty_language(a) && is_empty_language(b),
        Term::Dot(a, b) => is_empty_language(a) || is_empty_language(b),
        // Tests do not occur in the word-language fragment; treat them as
        // nonempty so that a precondition slip fails toward more work.
        Term::Test(_) | Term::Not(_) => false,
    }
}

/// The maximum word length of a test-free term's language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxLen {
    /// The language is empty.
    Empty,
    Finite(usize),
    Unbounded,
}

impl MaxLen {
    /// Is some word strictly longer than `bound`?
    pub fn exceeds(&self, bound: usize) -> bool {
        match self {
            MaxLen::Empty => false,
            MaxLen::Finite(n) => *n > bound,
            MaxLen::Unbounded => true,
        }
    }
}

/// Exact maximum word length, computed structurally.
pub fn max_word_len(t: &Term) -> MaxLen {
    use MaxLen::*;
    match t {
        Term::Zero => Empty,
        Term::One => Finite(0),
        Term::Prog(_) => Finite(1),
        Term::Plus(a, b) => match (max_word_len(a), max_word_len(b)) {
            (Empty, x) | (x, Empty) => x,
            (Unbounded, _) | (_, Unbounded) => Unbounded,
            (Finite(x), Finite(y)) => Finite(x.max(y)),
        },
        Term::Dot(a, b) => match (max_word_len(a), max_word_len(b)) {
            (Empty, _) | (_, Empty) => Empty,
            (Unbounded, _) | (_, Unbounded) => Unbounded,
            (Finite(x), Finite(y)) => Finite(x + y),
        },
        Term::Star(a) => match max_word_len(a) {
            Empty | Finite(0) => Finite(0),
            _ => Unbounded,
        },
        Term::Test(_) | Term::Not(_) => Finite(0),
    }
}
