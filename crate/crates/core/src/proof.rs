//! Proof search for Horn formulas over test-free terms.
//!
//! A goal `E -> sigma <= t`, with `sigma` a single word, is explored as an
//! and-or tree of automata. Each node is a small automaton with start state 0
//! and accept state 1 whose language only ever grows. The root accepts
//! exactly `sigma`. A node closes as proved when some accepted word belongs
//! to the target language, checked exactly by a product construction. An
//! inner node picks a hypothesis `r <= r'` and a path between two states
//! reading a word of `r`, and gets one child per word of `r'`, each child
//! extending the automaton with a path for that word between the same two
//! states; the empty word inserts a pair of epsilon edges, identifying the
//! states. All children must be proved. A hypothesis with an empty
//! right-hand language closes the branch outright: its match is
//! contradictory.
//!
//! Refutation does not wait for saturation. Before expanding, every node is
//! collapsed along its epsilon edges into a finite relational model; if that
//! model satisfies all hypotheses it is a countermodel, since the node
//! automaton accepts `sigma` but reaches no target word. The countermodel is
//! re-verified by direct evaluation before it is reported.
//!
//! Word enumeration for hypothesis sides is bounded (`rho_max` for matches,
//! `tau_max` for children) and the search reports which bound, if any, it
//! ran into, so an inconclusive answer says why it is inconclusive.

use std::collections::{BTreeSet, VecDeque};

use serde_json::{json, Value};
use thiserror::Error;

use crate::decide::{max_word_len, words_of, DecideError};
use crate::model::{ModelError, Rel, RelInterp};
use crate::term::{Equation, Relation, Signature, SymbolKind, Term, TermError};

#[derive(Debug, Error)]
pub enum ProofError {
    #[error("state {state} out of range for an automaton with {states} states")]
    BadState { state: usize, states: usize },
    #[error("symbol `{0}` is not a declared program")]
    NotAProgram(String),
    #[error("a reported countermodel failed re-verification; this is a bug")]
    RefutationUnverified,
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// A word automaton with fixed start state 0 and accept state 1. Edges carry
/// a program name or `None` for epsilon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub states: usize,
    pub edges: Vec<(usize, Option<String>, usize)>,
}

impl Nfa {
    /// Two unconnected states: the start and the accept.
    pub fn initial() -> Nfa {
        Nfa { states: 2, edges: Vec::new() }
    }

    /// The automaton accepting exactly the given word.
    pub fn for_word(word: &[String]) -> Nfa {
        Nfa::initial().insert_path(0, 1, word).expect("states 0 and 1 exist")
    }

    /// Adds a path from `v` to `w` reading `word`, with fresh states in
    /// between. The empty word becomes a pair of epsilon edges in both
    /// directions, making `v` and `w` interchangeable.
    pub fn insert_path(&self, v: usize, w: usize, word: &[String]) -> Result<Nfa, ProofError> {
        for s in [v, w] {
            if s >= self.states {
                return Err(ProofError::BadState { state: s, states: self.states });
            }
        }
        let mut out = self.clone();
        if word.is_empty() {
            out.edges.push((v, None, w));
            out.edges.push((w, None, v));
        } else {
            let mut cur = v;
            for (i, p) in word.iter().enumerate() {
                let next = if i + 1 == word.len() {
                    w
                } else {
                    out.states += 1;
                    out.states - 1
                };
                out.edges.push((cur, Some(p.clone()), next));
                cur = next;
            }
        }
        // Every state stays reachable from the start and co-reachable to the
        // accept; the closed-leaf argument depends on it.
        debug_assert!(out.fully_connected(), "insertion broke connectedness");
        Ok(out)
    }

    fn reachable(&self, origin: usize, backwards: bool) -> Vec<bool> {
        let mut seen = vec![false; self.states];
        seen[origin] = true;
        let mut stack = vec![origin];
        while let Some(x) = stack.pop() {
            for &(a, _, b) in &self.edges {
                let (from, to) = if backwards { (b, a) } else { (a, b) };
                if from == x && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen
    }

    /// Every state lies on some path from the start to the accept, counting
    /// epsilon edges.
    pub fn fully_connected(&self) -> bool {
        let fwd = self.reachable(0, false);
        let bwd = self.reachable(1, true);
        (0..self.states).all(|s| fwd[s] && bwd[s])
    }

    fn eps_closure(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut seen = set.clone();
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(x) = stack.pop() {
            for &(a, ref label, b) in &self.edges {
                if a == x && label.is_none() && seen.insert(b) {
                    stack.push(b);
                }
            }
        }
        seen
    }

    /// Is `word` readable along some path from `v` to `w`?
    pub fn accepts_between(&self, v: usize, w: usize, word: &[String]) -> bool {
        let mut set = self.eps_closure(&BTreeSet::from([v]));
        for p in word {
            let mut next = BTreeSet::new();
            for &(a, ref label, b) in &self.edges {
                if set.contains(&a) && label.as_deref() == Some(p) {
                    next.insert(b);
                }
            }
            set = self.eps_closure(&next);
            if set.is_empty() {
                return false;
            }
        }
        set.contains(&w)
    }

    /// Collapses the automaton along its epsilon edges into a relational
    /// interpretation: base elements are the epsilon classes, each program
    /// relates the classes its edges connect, and any declared tests come
    /// out empty. Returns the interpretation and the classes of the start
    /// and accept states.
    pub fn quotient_model(&self, sig: &Signature) -> (RelInterp, usize, usize) {
        // Epsilon edges come in symmetric pairs, so plain union-find fits.
        let mut parent: Vec<usize> = (0..self.states).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, ref label, b) in &self.edges {
            if label.is_none() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let mut class_of = vec![usize::MAX; self.states];
        let mut classes = 0usize;
        for s in 0..self.states {
            let root = find(&mut parent, s);
            if class_of[root] == usize::MAX {
                class_of[root] = classes;
                classes += 1;
            }
            class_of[s] = class_of[root];
        }
        let mut m = RelInterp::new(classes).expect("node automata are small");
        for name in sig.program_names() {
            let pairs: Vec<(usize, usize)> = self
                .edges
                .iter()
                .filter(|(_, label, _)| label.as_deref() == Some(name))
                .map(|&(a, _, b)| (class_of[a], class_of[b]))
                .collect();
            m.set_prog(name, Rel::from_pairs(classes, &pairs));
        }
        for name in sig.test_names() {
            m.set_test(name, Rel::empty(classes));
        }
        (m, class_of[0], class_of[1])
    }

    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|(a, label, b)| json!([a, label, b]))
            .collect();
        json!({ "states": self.states, "edges": edges })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph proof_node {\n  rankdir=LR;\n");
        out.push_str("  node [shape=circle];\n  1 [shape=doublecircle];\n");
        out.push_str("  entry [shape=point];\n  entry -> 0;\n");
        for (a, label, b) in &self.edges {
            match label {
                Some(p) => out.push_str(&format!("  {a} -> {b} [label=\"{p}\"];\n")),
                None => out.push_str(&format!("  {a} -> {b} [style=dashed];\n")),
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A word automaton for a test-free term, used for exact intersection with
/// node automata.
struct WordNfa {
    start: usize,
    accept: usize,
    edges: Vec<(usize, Option<String>, usize)>,
}

fn word_nfa(t: &Term) -> WordNfa {
    fn build(t: &Term, states: &mut usize, edges: &mut Vec<(usize, Option<String>, usize)>) -> (usize, usize) {
        let fresh = |states: &mut usize| {
            *states += 1;
            *states - 1
        };
        match t {
            Term::Zero => (fresh(states), fresh(states)),
            Term::One => {
                let (s, a) = (fresh(states), fresh(states));
                edges.push((s, None, a));
                (s, a)
            }
            Term::Prog(sym) => {
                let (s, a) = (fresh(states), fresh(states));
                edges.push((s, Some(sym.name.clone()), a));
                (s, a)
            }
            Term::Plus(x, y) => {
                let (xs, xa) = build(x, states, edges);
                let (ys, ya) = build(y, states, edges);
                let (s, a) = (fresh(states), fresh(states));
                edges.push((s, None, xs));
                edges.push((s, None, ys));
                edges.push((xa, None, a));
                edges.push((ya, None, a));
                (s, a)
            }
            Term::Dot(x, y) => {
                let (xs, xa) = build(x, states, edges);
                let (ys, ya) = build(y, states, edges);
                edges.push((xa, None, ys));
                (xs, ya)
            }
            Term::Star(x) => {
                let (xs, xa) = build(x, states, edges);
                let (s, a) = (fresh(states), fresh(states));
                edges.push((s, None, a));
                edges.push((s, None, xs));
                edges.push((xa, None, a));
                edges.push((xa, None, xs));
                (s, a)
            }
            Term::Test(_) | Term::Not(_) => unreachable!("problems are validated test-free"),
        }
    }
    let mut states = 0;
    let mut edges = Vec::new();
    let (start, accept) = build(t, &mut states, &mut edges);
    WordNfa { start, accept, edges }
}

/// Does some word readable from `v` to `w` in `a` belong to the term's
/// language? Exact: a breadth-first product of the two automata.
fn intersects_between(a: &Nfa, v: usize, w: usize, t: &WordNfa) -> bool {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([(v, t.start)]);
    seen.insert((v, t.start));
    while let Some((x, y)) = queue.pop_front() {
        if x == w && y == t.accept {
            return true;
        }
        for &(ea, ref label, eb) in &a.edges {
            if ea != x {
                continue;
            }
            match label {
                None => {
                    if seen.insert((eb, y)) {
                        queue.push_back((eb, y));
                    }
                }
                Some(p) => {
                    for &(fa, ref flabel, fb) in &t.edges {
                        if fa == y && flabel.as_deref() == Some(p) && seen.insert((eb, fb)) {
                            queue.push_back((eb, fb));
                        }
                    }
                }
            }
        }
        for &(fa, ref flabel, fb) in &t.edges {
            if fa == y && flabel.is_none() && seen.insert((x, fb)) {
                queue.push_back((x, fb));
            }
        }
    }
    false
}

fn check_test_free(t: &Term) -> Result<(), ProofError> {
    match t {
        Term::Test(s) => Err(ProofError::NotAProgram(s.name.clone())),
        Term::Not(_) => Err(ProofError::NotAProgram(t.to_string())),
        Term::Zero | Term::One | Term::Prog(_) => Ok(()),
        Term::Star(a) => check_test_free(a),
        Term::Plus(a, b) | Term::Dot(a, b) => {
            check_test_free(a)?;
            check_test_free(b)
        }
    }
}

/// The goal `hypotheses -> sigma <= target`, with every term test-free and
/// `sigma` a word over the declared programs. Equational hypotheses turn
/// into two one-directional ones.
#[derive(Debug, Clone)]
pub struct SearchProblem {
    pub signature: Signature,
    /// Each pair means `lhs <= rhs`.
    pub hypotheses: Vec<(Term, Term)>,
    pub sigma: Vec<String>,
    pub target: Term,
}

impl SearchProblem {
    pub fn new(
        signature: Signature,
        hypotheses: &[Equation],
        sigma: Vec<String>,
        target: Term,
    ) -> Result<SearchProblem, ProofError> {
        let mut pairs = Vec::new();
        for h in hypotheses {
            match h.relation {
                Relation::Leq => pairs.push((h.lhs.clone(), h.rhs.clone())),
                Relation::Eq => {
                    pairs.push((h.lhs.clone(), h.rhs.clone()));
                    pairs.push((h.rhs.clone(), h.lhs.clone()));
                }
            }
        }
        for t in pairs
            .iter()
            .flat_map(|(l, r)| [l, r])
            .chain([&target])
        {
            check_test_free(t)?;
            for sym in t.symbols() {
                if signature.kind_of(&sym.name) != Some(SymbolKind::Program) {
                    return Err(ProofError::NotAProgram(sym.name));
                }
            }
        }
        for p in &sigma {
            if signature.kind_of(p) != Some(SymbolKind::Program) {
                return Err(ProofError::NotAProgram(p.clone()));
            }
        }
        Ok(SearchProblem { signature, hypotheses: pairs, sigma, target })
    }

    fn sigma_term(&self) -> Term {
        Term::product(self.sigma.iter().map(|p| Term::prog(p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    /// Hypothesis applications along a branch.
    pub depth: usize,
    /// Length cap for child words (right-hand sides).
    pub tau_max: usize,
    /// Length cap for matched words (left-hand sides).
    pub rho_max: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { depth: 8, tau_max: 3, rho_max: 4 }
    }
}

/// One hypothesis application: at the path from `v` to `w` reading
/// `matched`, a word of hypothesis `hyp`'s left side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub v: usize,
    pub w: usize,
    pub hyp: usize,
    pub matched: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum NodeAutomaton {
    Machine(Nfa),
    /// A branch closed by a hypothesis with an empty right-hand language.
    Contradiction,
}

#[derive(Debug, Clone)]
pub enum NodeChildren {
    LeafClosed,
    Expanded(Vec<ProofNode>),
}

#[derive(Debug, Clone)]
pub struct ProofNode {
    pub automaton: NodeAutomaton,
    pub applied: Option<Application>,
    pub children: NodeChildren,
}

impl ProofNode {
    pub fn to_json(&self) -> Value {
        let automaton = match &self.automaton {
            NodeAutomaton::Machine(a) => a.to_json(),
            NodeAutomaton::Contradiction => json!("con"),
        };
        let applied = self.applied.as_ref().map(|a| {
            json!({ "v": a.v, "w": a.w, "hyp": a.hyp, "matched": a.matched })
        });
        let children = match &self.children {
            NodeChildren::LeafClosed => json!("leaf"),
            NodeChildren::Expanded(kids) => {
                Value::Array(kids.iter().map(ProofNode::to_json).collect())
            }
        };
        json!({ "automaton": automaton, "applied": applied, "children": children })
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match &self.children {
            NodeChildren::LeafClosed => 1,
            NodeChildren::Expanded(kids) => 1 + kids.iter().map(ProofNode::size).sum::<usize>(),
        }
    }
}

/// A countermodel found during search, already re-verified: it satisfies
/// every hypothesis and falsifies `sigma <= target`.
#[derive(Debug, Clone)]
pub struct Refutation {
    pub model: RelInterp,
    pub automaton: Nfa,
    pub path: Vec<Application>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BudgetReport {
    pub depth_limit_hit: bool,
    pub tau_truncation_hit: bool,
    pub rho_limit_hit: bool,
    pub nodes_expanded: usize,
}

impl BudgetReport {
    pub fn any_limit(&self) -> bool {
        self.depth_limit_hit || self.tau_truncation_hit || self.rho_limit_hit
    }
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Proved(ProofNode),
    Refuted(Refutation),
    Unknown(BudgetReport),
}

/// Counters for the audit of searches against a padded target; see
/// [`audit_padded_search`].
#[derive(Debug, Clone, Copy, Default)]
pub struct AuditCounters {
    /// Expanded (non-closed) nodes examined for audited-hypothesis sites.
    pub nodes_checked: usize,
    /// Nodes where the audited hypothesis had a matching site.
    pub violations: usize,
}

struct Engine<'a> {
    problem: &'a SearchProblem,
    match_words: Vec<Vec<Vec<String>>>,
    match_truncated: Vec<bool>,
    child_words: Vec<Vec<Vec<String>>>,
    child_truncated: Vec<bool>,
    child_empty: Vec<bool>,
    target_nfa: WordNfa,
    audit_nfa: Option<WordNfa>,
    report: BudgetReport,
    counters: AuditCounters,
}

enum Step {
    Proved(ProofNode),
    Refuted(Refutation),
    Exhausted,
}

fn sorted_words(t: &Term, cap: usize) -> Result<Vec<Vec<String>>, DecideError> {
    let mut ws: Vec<Vec<String>> = words_of(t, cap)?.into_iter().collect();
    ws.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(ws)
}

impl<'a> Engine<'a> {
    fn new(
        problem: &'a SearchProblem,
        tau: usize,
        rho: usize,
        audit_term: Option<&Term>,
    ) -> Result<Engine<'a>, ProofError> {
        let mut match_words = Vec::new();
        let mut match_truncated = Vec::new();
        let mut child_words = Vec::new();
        let mut child_truncated = Vec::new();
        let mut child_empty = Vec::new();
        for (lhs, rhs) in &problem.hypotheses {
            match_words.push(sorted_words(lhs, rho)?);
            match_truncated.push(max_word_len(lhs).exceeds(rho));
            child_words.push(sorted_words(rhs, tau)?);
            child_truncated.push(max_word_len(rhs).exceeds(tau));
            child_empty.push(crate::decide::is_empty_language(rhs));
        }
        Ok(Engine {
            problem,
            match_words,
            match_truncated,
            child_words,
            child_truncated,
            child_empty,
            target_nfa: word_nfa(&problem.target),
            audit_nfa: audit_term.map(word_nfa),
            report: BudgetReport::default(),
            counters: AuditCounters::default(),
        })
    }

    fn model_satisfies_hypotheses(&self, m: &RelInterp) -> Result<bool, ProofError> {
        for (lhs, rhs) in &self.problem.hypotheses {
            if !m.eval(lhs)?.subset(&m.eval(rhs)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn verify_refutation(&self, m: &RelInterp, c0: usize, c1: usize) -> Result<(), ProofError> {
        if !self.model_satisfies_hypotheses(m)? {
            return Err(ProofError::RefutationUnverified);
        }
        let sigma = m.eval(&self.problem.sigma_term())?;
        let target = m.eval(&self.problem.target)?;
        if !sigma.contains(c0, c1) || target.contains(c0, c1) {
            return Err(ProofError::RefutationUnverified);
        }
        Ok(())
    }

    /// Is inserting this word between `v` and `w` a syntactic no-op?
    fn insertion_present(&self, a: &Nfa, v: usize, w: usize, word: &[String]) -> bool {
        match word.len() {
            0 => {
                a.edges.contains(&(v, None, w)) && a.edges.contains(&(w, None, v))
            }
            1 => a.edges.contains(&(v, Some(word[0].clone()), w)),
            _ => false,
        }
    }

    fn node(
        &mut self,
        a: &Nfa,
        depth_left: usize,
        path: &mut Vec<Application>,
    ) -> Result<Step, ProofError> {
        self.report.nodes_expanded += 1;
        if intersects_between(a, 0, 1, &self.target_nfa) {
            return Ok(Step::Proved(ProofNode {
                automaton: NodeAutomaton::Machine(a.clone()),
                applied: None,
                children: NodeChildren::LeafClosed,
            }));
        }

        let (m, c0, c1) = a.quotient_model(&self.problem.signature);
        if self.model_satisfies_hypotheses(&m)? {
            self.verify_refutation(&m, c0, c1)?;
            return Ok(Step::Refuted(Refutation {
                model: m,
                automaton: a.clone(),
                path: path.clone(),
            }));
        }

        if let Some(audit) = &self.audit_nfa {
            self.counters.nodes_checked += 1;
            let hit = (0..a.states)
                .any(|v| (0..a.states).any(|w| intersects_between(a, v, w, audit)));
            if hit {
                self.counters.violations += 1;
            }
        }

        if depth_left == 0 {
            self.report.depth_limit_hit = true;
            return Ok(Step::Exhausted);
        }

        for hyp in 0..self.problem.hypotheses.len() {
            if self.match_truncated[hyp] {
                self.report.rho_limit_hit = true;
            }
            for v in 0..a.states {
                for w in 0..a.states {
                    let Some(matched) = self.match_words[hyp]
                        .iter()
                        .find(|rho| a.accepts_between(v, w, rho))
                        .cloned()
                    else {
                        continue;
                    };
                    let app = Application { v, w, hyp, matched };
                    match self.try_application(a, &app, depth_left, path)? {
                        Step::Proved(node) => return Ok(Step::Proved(node)),
                        Step::Refuted(r) => return Ok(Step::Refuted(r)),
                        Step::Exhausted => {}
                    }
                }
            }
        }
        Ok(Step::Exhausted)
    }

    fn try_application(
        &mut self,
        a: &Nfa,
        app: &Application,
        depth_left: usize,
        path: &mut Vec<Application>,
    ) -> Result<Step, ProofError> {
        if self.child_empty[app.hyp] {
            let con = ProofNode {
                automaton: NodeAutomaton::Contradiction,
                applied: None,
                children: NodeChildren::LeafClosed,
            };
            return Ok(Step::Proved(ProofNode {
                automaton: NodeAutomaton::Machine(a.clone()),
                applied: Some(app.clone()),
                children: NodeChildren::Expanded(vec![con]),
            }));
        }
        let words = &self.child_words[app.hyp];
        // A candidate whose every child would re-insert an already present
        // single edge changes nothing: any proof below it is available at
        // this node directly, so skip the circular detour. With a truncated
        // child set the skip still has to report the truncation, since a
        // deeper level enumerates longer children.
        if !words.is_empty()
            && words.iter().all(|t| self.insertion_present(a, app.v, app.w, t))
        {
            if self.child_truncated[app.hyp] {
                self.report.tau_truncation_hit = true;
            }
            return Ok(Step::Exhausted);
        }
        let incomplete = self.child_truncated[app.hyp];
        let mut children = Vec::new();
        for tau in words.clone() {
            let child = a.insert_path(app.v, app.w, &tau)?;
            path.push(app.clone());
            let step = self.node(&child, depth_left - 1, path);
            path.pop();
            match step? {
                Step::Proved(node) => children.push(node),
                Step::Refuted(r) => return Ok(Step::Refuted(r)),
                Step::Exhausted => return Ok(Step::Exhausted),
            }
        }
        if incomplete {
            // Every enumerated child proved, but longer children were not
            // tried; an honest answer stays inconclusive.
            self.report.tau_truncation_hit = true;
            return Ok(Step::Exhausted);
        }
        Ok(Step::Proved(ProofNode {
            automaton: NodeAutomaton::Machine(a.clone()),
            applied: Some(app.clone()),
            children: NodeChildren::Expanded(children),
        }))
    }
}

fn search_inner(
    problem: &SearchProblem,
    bounds: &SearchBounds,
    audit_term: Option<&Term>,
) -> Result<(SearchOutcome, AuditCounters), ProofError> {
    let top = bounds.depth.max(bounds.tau_max).max(bounds.rho_max).max(1);
    let mut counters = AuditCounters::default();
    let mut last_report = BudgetReport::default();
    for level in 1..=top {
        let mut engine = Engine::new(
            problem,
            bounds.tau_max.min(level),
            bounds.rho_max.min(level),
            audit_term,
        )?;
        let depth = bounds.depth.min(level);
        let root = Nfa::for_word(&problem.sigma);
        let mut path = Vec::new();
        let step = engine.node(&root, depth, &mut path)?;
        counters.nodes_checked += engine.counters.nodes_checked;
        counters.violations += engine.counters.violations;
        last_report = engine.report;
        match step {
            Step::Proved(node) => return Ok((SearchOutcome::Proved(node), counters)),
            Step::Refuted(r) => return Ok((SearchOutcome::Refuted(r), counters)),
            Step::Exhausted => {
                // Without any budget pressure the whole tree was explored;
                // deeper levels would retrace it identically.
                if !engine.report.any_limit() {
                    break;
                }
            }
        }
    }
    Ok((SearchOutcome::Unknown(last_report), counters))
}

/// Searches for a proof or a countermodel of `hypotheses -> sigma <= target`
/// with iterative deepening on every bound. A proof is only reported when no
/// enumeration was cut short below it; a countermodel is always re-verified.
pub fn search(problem: &SearchProblem, bounds: &SearchBounds) -> Result<SearchOutcome, ProofError> {
    Ok(search_inner(problem, bounds, None)?.0)
}

/// Outcome of a padded-target search together with the audit counters.
#[derive(Debug)]
pub struct PaddedAudit {
    pub outcome: SearchOutcome,
    pub counters: AuditCounters,
}

/// Runs the search for `E and r <= 0 -> sigma <= t + u;r;u` (with `u` the
/// star of the sum of all declared programs) and audits that the zero
/// hypothesis never becomes applicable: whenever a node's automaton reads a
/// word of `r` anywhere, the padding already closes that node, so expanded
/// nodes should show no site for `r`. The counters report any violation.
pub fn audit_padded_search(
    signature: &Signature,
    hypotheses: &[Equation],
    r: &Term,
    sigma: Vec<String>,
    t: &Term,
    bounds: &SearchBounds,
) -> Result<PaddedAudit, ProofError> {
    let u = signature.universal_expression();
    let padded = Term::plus(t.clone(), Term::product([u.clone(), r.clone(), u]));
    let mut hyps = hypotheses.to_vec();
    hyps.push(Equation::leq(r.clone(), Term::Zero));
    let problem = SearchProblem::new(signature.clone(), &hyps, sigma, padded)?;
    let (outcome, counters) = search_inner(&problem, bounds, Some(r))?;
    Ok(PaddedAudit { outcome, counters })
}

/// Splits the goal `s <= t` into one word goal per word of `s`, up to the
/// cap. The flag reports whether `s` has longer words than were enumerated.
pub fn decompose_leq(s: &Term, cap: usize) -> Result<(Vec<Vec<String>>, bool), ProofError> {
    let words = sorted_words(s, cap)?;
    Ok((words, max_word_len(s).exceeds(cap)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::with(&["p", "q"], &[])
    }

    fn w(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn eq(text: &str) -> Equation {
        crate::parse::parse_equation(text, &sig()).unwrap()
    }

    fn term(text: &str) -> Term {
        crate::parse::parse_term(text, &sig()).unwrap()
    }

    #[test]
    fn path_insertion_grows_chains_and_identifies_on_empty() {
        let a = Nfa::for_word(&w(&["p", "q"]));
        assert_eq!(a.states, 3, "one fresh state between the endpoints");
        assert!(a.accepts_between(0, 1, &w(&["p", "q"])));
        assert!(!a.accepts_between(0, 1, &w(&["p"])));

        let b = a.insert_path(0, 1, &[]).unwrap();
        assert!(b.accepts_between(0, 1, &[]), "epsilon pair identifies the endpoints");
        assert!(b.accepts_between(1, 0, &[]));
        assert!(b.fully_connected());

        let err = a.insert_path(0, 9, &w(&["p"]));
        assert!(matches!(err, Err(ProofError::BadState { state: 9, .. })));
    }

    #[test]
    fn exact_intersection_with_starred_targets() {
        let a = Nfa::for_word(&w(&["p", "p"]));
        assert!(intersects_between(&a, 0, 1, &word_nfa(&term("(p + q)*"))));
        assert!(intersects_between(&a, 0, 1, &word_nfa(&term("p;p"))));
        assert!(!intersects_between(&a, 0, 1, &word_nfa(&term("(p;q)*"))));
        assert!(!intersects_between(&a, 0, 1, &word_nfa(&term("0"))));
        // Between inner states a single p is readable.
        assert!(intersects_between(&a, 0, 2, &word_nfa(&term("p"))));
        assert!(!intersects_between(&a, 0, 2, &word_nfa(&term("q"))));
    }

    #[test]
    fn quotient_collapses_epsilon_classes() {
        let a = Nfa::for_word(&w(&["p", "q"])).insert_path(0, 1, &[]).unwrap();
        let (m, c0, c1) = a.quotient_model(&sig());
        assert_eq!(m.base, 2, "start and accept collapse, the middle state stays");
        assert_eq!(c0, c1);
        let p = m.progs.get("p").unwrap();
        assert!(p.contains(c0, 1 - c0));
    }

    #[test]
    fn rewriting_a_word_into_the_target_proves() {
        let problem =
            SearchProblem::new(sig(), &[eq("q <= p")], w(&["q"]), term("p")).unwrap();
        let out = search(&problem, &SearchBounds::default()).unwrap();
        let SearchOutcome::Proved(tree) = out else { panic!("one rewrite suffices: {out:?}") };
        let app = tree.applied.as_ref().expect("the root applies the hypothesis");
        assert_eq!((app.v, app.w, app.hyp), (0, 1, 0));
        assert_eq!(app.matched, w(&["q"]));
        assert_eq!(tree.size(), 2);
        let json = tree.to_json();
        assert_eq!(json["applied"]["matched"][0], "q");
        assert_eq!(json["children"][0]["children"], "leaf");
    }

    #[test]
    fn collapsing_a_square_proves_below_one() {
        // p;p <= 1 under p;p = 1: the empty child identifies the endpoints.
        let problem =
            SearchProblem::new(sig(), &[eq("p;p = 1")], w(&["p", "p"]), term("1")).unwrap();
        let out = search(&problem, &SearchBounds::default()).unwrap();
        assert!(matches!(out, SearchOutcome::Proved(_)));
    }

    #[test]
    fn contradictory_hypotheses_close_branches() {
        let problem =
            SearchProblem::new(sig(), &[eq("p <= 0")], w(&["p"]), term("0")).unwrap();
        let out = search(&problem, &SearchBounds::default()).unwrap();
        let SearchOutcome::Proved(tree) = out else { panic!("p <= 0 refutes the p chain") };
        let NodeChildren::Expanded(kids) = &tree.children else { panic!() };
        assert!(matches!(kids[0].automaton, NodeAutomaton::Contradiction));
    }

    #[test]
    fn unprovable_goals_refute_with_a_verified_model() {
        let problem = SearchProblem::new(sig(), &[], w(&["p"]), term("q")).unwrap();
        let out = search(&problem, &SearchBounds::default()).unwrap();
        let SearchOutcome::Refuted(r) = out else { panic!("p <= q has no proof: {out:?}") };
        assert!(r.path.is_empty(), "the root already satisfies the empty hypothesis set");
        let p = r.model.eval(&term("p")).unwrap();
        let q = r.model.eval(&term("q")).unwrap();
        assert!(!p.subset(&q));
    }

    #[test]
    fn trivial_hypotheses_do_not_loop() {
        // p <= p matches everywhere but never helps; the model check settles
        // the goal as refuted instead of looping.
        let problem = SearchProblem::new(sig(), &[eq("p <= p")], w(&["p"]), term("q")).unwrap();
        let out = search(&problem, &SearchBounds::default()).unwrap();
        assert!(matches!(out, SearchOutcome::Refuted(_)));
    }

    #[test]
    fn transitive_growth_needs_two_applications() {
        let problem =
            SearchProblem::new(sig(), &[eq("q <= p;p")], w(&["q"]), term("p;p;p;p")).unwrap();
        let out = search(&problem, &SearchBounds::default()).unwrap();
        // After the one available rewrite the automaton accepts q and p;p,
        // and its collapsed model satisfies q <= p;p while separating q from
        // the four-fold product: a genuine countermodel one level down.
        let SearchOutcome::Refuted(r) = out else { panic!("got something else") };
        assert_eq!(r.path.len(), 1);
    }

    #[test]
    fn padded_targets_close_before_the_zero_hypothesis_matters() {
        let s = sig();
        // q <= p as the only real hypothesis, eliminate r = p.
        let audit = audit_padded_search(
            &s,
            &[eq("q <= p")],
            &term("p"),
            w(&["q"]),
            &term("0"),
            &SearchBounds::default(),
        )
        .unwrap();
        assert!(matches!(audit.outcome, SearchOutcome::Proved(_)));
        assert_eq!(audit.counters.violations, 0);
        assert!(audit.counters.nodes_checked >= 1, "the root is open and gets audited");
    }

    #[test]
    fn padded_refutations_carry_no_zero_sites() {
        let s = sig();
        let audit = audit_padded_search(
            &s,
            &[],
            &term("p"),
            w(&["q"]),
            &term("0"),
            &SearchBounds::default(),
        )
        .unwrap();
        let SearchOutcome::Refuted(r) = &audit.outcome else {
            panic!("q is not below (p+q)*;p;(p+q)*")
        };
        assert_eq!(audit.counters.violations, 0);
        assert!(r.model.eval(&term("p")).unwrap() == Rel::empty(r.model.base));
    }

    #[test]
    fn decomposition_lists_words_and_reports_truncation() {
        let (words, truncated) = decompose_leq(&term("p;q + q"), 4).unwrap();
        assert_eq!(words, vec![w(&["q"]), w(&["p", "q"])]);
        assert!(!truncated);
        let (words, truncated) = decompose_leq(&term("p*"), 2).unwrap();
        assert_eq!(words.len(), 3);
        assert!(truncated);
        assert!(decompose_leq(&crate::term::Term::test("b"), 2).is_err());
    }
}
