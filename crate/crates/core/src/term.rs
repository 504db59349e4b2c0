//! Terms, equations, and Horn formulas over a two-sorted alphabet of program
//! and test symbols.
//!
//! Terms are ordinary Kleene algebra syntax (`0`, `1`, `+`, `;`, `*`) extended
//! with named test symbols and negation. Negation is only meaningful on the
//! Boolean fragment, so [`Term::not`] rejects operands that mention a program
//! symbol or a star. Structural equality is plain `==`; nothing is normalized
//! behind the caller's back.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Program,
    Test,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Program => write!(f, "program"),
            SymbolKind::Test => write!(f, "test"),
        }
    }
}

/// A named atomic symbol. Ordering is lexicographic by name, which is the
/// canonical order used when summing program symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
}

impl Symbol {
    pub fn program(name: impl Into<String>) -> Self {
        Symbol { name: name.into(), kind: SymbolKind::Program }
    }

    pub fn test(name: impl Into<String>) -> Self {
        Symbol { name: name.into(), kind: SymbolKind::Test }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("negation applied to non-Boolean term `{0}`")]
    NotBoolean(String),
    #[error("test symbol `{symbol}` replaced by non-Boolean term `{replacement}`")]
    NonBooleanReplacement { symbol: String, replacement: String },
    #[error("test symbol `{0}` in a universal expression; only programs are allowed")]
    TestInUniversal(String),
    #[error("symbol `{0}` is not declared")]
    Undeclared(String),
    #[error("symbol `{name}` is declared as a {expected} but used as a {found}")]
    KindMismatch { name: String, expected: SymbolKind, found: SymbolKind },
    #[error("symbol `{0}` is already declared with the other kind")]
    DuplicateSymbol(String),
}

/// Syntax of terms. `Dot` is sequential composition, printed `;`.
///
/// Invariant: `Not` only wraps Boolean terms (see [`is_boolean`]). The smart
/// constructors and the parser maintain this; code that builds variants by
/// hand is expected to respect it, and [`validate`] checks a whole tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Zero,
    One,
    Prog(Symbol),
    Test(Symbol),
    Not(Box<Term>),
    Plus(Box<Term>, Box<Term>),
    Dot(Box<Term>, Box<Term>),
    Star(Box<Term>),
}

impl Term {
    pub fn prog(name: impl Into<String>) -> Self {
        Term::Prog(Symbol::program(name))
    }

    pub fn test(name: impl Into<String>) -> Self {
        Term::Test(Symbol::test(name))
    }

    pub fn plus(a: Term, b: Term) -> Self {
        Term::Plus(Box::new(a), Box::new(b))
    }

    pub fn dot(a: Term, b: Term) -> Self {
        Term::Dot(Box::new(a), Box::new(b))
    }

    pub fn star(a: Term) -> Self {
        Term::Star(Box::new(a))
    }

    /// Negation; rejects operands outside the Boolean fragment.
    pub fn not(a: Term) -> Result<Self, TermError> {
        if is_boolean(&a) {
            Ok(Term::Not(Box::new(a)))
        } else {
            Err(TermError::NotBoolean(a.to_string()))
        }
    }

    /// Left-associated sum of `terms`; the empty sum is `0`.
    pub fn sum(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut it = terms.into_iter();
        match it.next() {
            None => Term::Zero,
            Some(first) => it.fold(first, Term::plus),
        }
    }

    /// Left-associated product of `terms`; the empty product is `1`.
    pub fn product(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut it = terms.into_iter();
        match it.next() {
            None => Term::One,
            Some(first) => it.fold(first, Term::dot),
        }
    }

    /// All symbols occurring in the term.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Zero | Term::One => {}
            Term::Prog(s) | Term::Test(s) => {
                out.insert(s.clone());
            }
            Term::Not(a) | Term::Star(a) => a.collect_symbols(out),
            Term::Plus(a, b) | Term::Dot(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    /// True when no program symbol and no star occurs, i.e. the term denotes
    /// an element of the Boolean subalgebra.
    pub fn is_boolean(&self) -> bool {
        is_boolean(self)
    }

    fn prec(&self) -> u8 {
        match self {
            Term::Plus(..) => 1,
            Term::Dot(..) => 2,
            Term::Not(..) => 3,
            Term::Star(..) => 4,
            Term::Zero | Term::One | Term::Prog(..) | Term::Test(..) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.prec() < min;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Term::Zero => write!(f, "0")?,
            Term::One => write!(f, "1")?,
            Term::Prog(s) | Term::Test(s) => write!(f, "{}", s.name)?,
            Term::Not(a) => {
                write!(f, "!")?;
                a.fmt_prec(f, 3)?;
            }
            Term::Plus(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Term::Dot(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, ";")?;
                b.fmt_prec(f, 3)?;
            }
            Term::Star(a) => {
                a.fmt_prec(f, 4)?;
                write!(f, "*")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// See [`Term::is_boolean`]. Star is excluded even over Boolean operands:
/// the Boolean fragment is generated by tests, `0`, `1`, `+`, `;`, `!` only.
pub fn is_boolean(t: &Term) -> bool {
    match t {
        Term::Zero | Term::One | Term::Test(_) => true,
        Term::Prog(_) | Term::Star(_) => false,
        Term::Not(a) => is_boolean(a),
        Term::Plus(a, b) | Term::Dot(a, b) => is_boolean(a) && is_boolean(b),
    }
}

/// Checks the `Not`-over-Boolean invariant on a whole tree.
pub fn validate(t: &Term) -> Result<(), TermError> {
    match t {
        Term::Zero | Term::One | Term::Prog(_) | Term::Test(_) => Ok(()),
        Term::Not(a) => {
            if is_boolean(a) {
                validate(a)
            } else {
                Err(TermError::NotBoolean(a.to_string()))
            }
        }
        Term::Star(a) => validate(a),
        Term::Plus(a, b) | Term::Dot(a, b) => {
            validate(a)?;
            validate(b)
        }
    }
}

/// The universal expression `(p1 + ... + pn)*` over the given program symbols,
/// summed in canonical (lexicographic) order. The empty alphabet yields `0*`.
pub fn universal_expression(
    programs: impl IntoIterator<Item = Symbol>,
) -> Result<Term, TermError> {
    let mut sorted = BTreeSet::new();
    for s in programs {
        if s.kind != SymbolKind::Program {
            return Err(TermError::TestInUniversal(s.name));
        }
        sorted.insert(s);
    }
    Ok(Term::star(Term::sum(sorted.into_iter().map(Term::Prog))))
}

/// Applies `map` homomorphically: occurrences of a mapped symbol are replaced
/// by the image term, everything else is rebuilt unchanged. Replacing a test
/// symbol with a non-Boolean term is an error, since it would break the
/// negation invariant.
pub fn substitute(t: &Term, map: &BTreeMap<Symbol, Term>) -> Result<Term, TermError> {
    match t {
        Term::Zero => Ok(Term::Zero),
        Term::One => Ok(Term::One),
        Term::Prog(s) => Ok(map.get(s).cloned().unwrap_or_else(|| t.clone())),
        Term::Test(s) => match map.get(s) {
            None => Ok(t.clone()),
            Some(img) if is_boolean(img) => Ok(img.clone()),
            Some(img) => Err(TermError::NonBooleanReplacement {
                symbol: s.name.clone(),
                replacement: img.to_string(),
            }),
        },
        Term::Not(a) => Term::not(substitute(a, map)?),
        Term::Plus(a, b) => Ok(Term::plus(substitute(a, map)?, substitute(b, map)?)),
        Term::Dot(a, b) => Ok(Term::dot(substitute(a, map)?, substitute(b, map)?)),
        Term::Star(a) => Ok(Term::star(substitute(a, map)?)),
    }
}

/// Pushes negations inward until they sit on atomic tests only, using
/// `!(a + b) = !a;!b`, `!(a;b) = !a + !b`, `!!a = a`, `!0 = 1`, `!1 = 0`.
/// Subterms outside any negation are rebuilt unchanged.
pub fn push_negations(t: &Term) -> Term {
    match t {
        Term::Zero | Term::One | Term::Prog(_) | Term::Test(_) => t.clone(),
        Term::Not(a) => negate(a),
        Term::Plus(a, b) => Term::plus(push_negations(a), push_negations(b)),
        Term::Dot(a, b) => Term::dot(push_negations(a), push_negations(b)),
        Term::Star(a) => Term::star(push_negations(a)),
    }
}

fn negate(t: &Term) -> Term {
    match t {
        Term::Zero => Term::One,
        Term::One => Term::Zero,
        Term::Test(_) => Term::Not(Box::new(t.clone())),
        Term::Not(a) => push_negations(a),
        Term::Plus(a, b) => Term::dot(negate(a), negate(b)),
        Term::Dot(a, b) => Term::plus(negate(a), negate(b)),
        Term::Prog(_) | Term::Star(_) => unreachable!("negation over non-Boolean term"),
    }
}

/// A two-sorted alphabet: disjoint sets of program and test names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    programs: BTreeSet<String>,
    tests: BTreeSet<String>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    /// Convenience constructor from name lists.
    pub fn with(programs: &[&str], tests: &[&str]) -> Self {
        let mut sig = Signature::new();
        for p in programs {
            sig.declare_program(*p).expect("program/test namespaces overlap");
        }
        for b in tests {
            sig.declare_test(*b).expect("program/test namespaces overlap");
        }
        sig
    }

    pub fn declare_program(&mut self, name: impl Into<String>) -> Result<(), TermError> {
        let name = name.into();
        if self.tests.contains(&name) {
            return Err(TermError::DuplicateSymbol(name));
        }
        self.programs.insert(name);
        Ok(())
    }

    pub fn declare_test(&mut self, name: impl Into<String>) -> Result<(), TermError> {
        let name = name.into();
        if self.programs.contains(&name) {
            return Err(TermError::DuplicateSymbol(name));
        }
        self.tests.insert(name);
        Ok(())
    }

    pub fn kind_of(&self, name: &str) -> Option<SymbolKind> {
        if self.programs.contains(name) {
            Some(SymbolKind::Program)
        } else if self.tests.contains(name) {
            Some(SymbolKind::Test)
        } else {
            None
        }
    }

    /// Program names in lexicographic order.
    pub fn program_names(&self) -> impl Iterator<Item = &str> {
        self.programs.iter().map(String::as_str)
    }

    /// Test names in lexicographic order.
    pub fn test_names(&self) -> impl Iterator<Item = &str> {
        self.tests.iter().map(String::as_str)
    }

    pub fn program_symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.programs.iter().map(Symbol::program)
    }

    pub fn test_symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.tests.iter().map(Symbol::test)
    }

    /// All symbols, programs first, each group in lexicographic order.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.program_symbols().chain(self.test_symbols())
    }

    pub fn program_count(&self) -> usize {
        self.programs.len()
    }

    pub fn test_count(&self) -> usize {
        self.tests.len()
    }

    /// The universal expression over this signature's programs.
    pub fn universal_expression(&self) -> Term {
        universal_expression(self.program_symbols()).expect("program symbols only")
    }

    /// Checks that every symbol in `t` is declared here with the right kind
    /// and that the negation invariant holds.
    pub fn check_term(&self, t: &Term) -> Result<(), TermError> {
        validate(t)?;
        for sym in t.symbols() {
            match self.kind_of(&sym.name) {
                None => return Err(TermError::Undeclared(sym.name)),
                Some(kind) if kind != sym.kind => {
                    return Err(TermError::KindMismatch {
                        name: sym.name,
                        expected: kind,
                        found: sym.kind,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Leq,
}

/// An equation or inequality between two terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
    pub relation: Relation,
}

impl Equation {
    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Equation { lhs, rhs, relation: Relation::Eq }
    }

    pub fn leq(lhs: Term, rhs: Term) -> Self {
        Equation { lhs, rhs, relation: Relation::Leq }
    }

    /// The `Eq` form: `s <= t` becomes `s + t = t`, equations are unchanged.
    pub fn normalize(&self) -> Equation {
        match self.relation {
            Relation::Eq => self.clone(),
            Relation::Leq => {
                Equation::eq(Term::plus(self.lhs.clone(), self.rhs.clone()), self.rhs.clone())
            }
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = self.lhs.symbols();
        out.extend(self.rhs.symbols());
        out
    }

    /// Applies `f` to both sides, keeping the relation.
    pub fn map_sides(&self, mut f: impl FnMut(&Term) -> Result<Term, TermError>) -> Result<Equation, TermError> {
        Ok(Equation { lhs: f(&self.lhs)?, rhs: f(&self.rhs)?, relation: self.relation })
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::Eq => "=",
            Relation::Leq => "<=",
        };
        write!(f, "{} {} {}", self.lhs, rel, self.rhs)
    }
}

/// A universal Horn formula `E -> conclusion` together with its alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HornFormula {
    pub signature: Signature,
    pub hypotheses: Vec<Equation>,
    pub conclusion: Equation,
}

impl HornFormula {
    /// Builds a formula after checking every term against the signature.
    pub fn new(
        signature: Signature,
        hypotheses: Vec<Equation>,
        conclusion: Equation,
    ) -> Result<Self, TermError> {
        for eq in hypotheses.iter().chain(std::iter::once(&conclusion)) {
            signature.check_term(&eq.lhs)?;
            signature.check_term(&eq.rhs)?;
        }
        Ok(HornFormula { signature, hypotheses, conclusion })
    }

    /// Applies `f` to every side of every hypothesis and the conclusion.
    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Result<Term, TermError>) -> Result<HornFormula, TermError> {
        let hypotheses = self
            .hypotheses
            .iter()
            .map(|eq| eq.map_sides(&mut f))
            .collect::<Result<Vec<_>, _>>()?;
        let conclusion = self.conclusion.map_sides(&mut f)?;
        Ok(HornFormula { signature: self.signature.clone(), hypotheses, conclusion })
    }
}

impl fmt::Display for HornFormula {
    /// Prints in the declaration file format, so the output re-parses.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.signature.program_count() > 0 {
            write!(f, "program")?;
            for p in self.signature.program_names() {
                write!(f, " {p}")?;
            }
            writeln!(f)?;
        }
        if self.signature.test_count() > 0 {
            write!(f, "test")?;
            for b in self.signature.test_names() {
                write!(f, " {b}")?;
            }
            writeln!(f)?;
        }
        for hyp in &self.hypotheses {
            writeln!(f, "hyp {hyp}")?;
        }
        write!(f, "show {}", self.conclusion)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Term {
        Term::test("b")
    }

    fn p() -> Term {
        Term::prog("p")
    }

    #[test]
    fn boolean_fragment() {
        assert!(is_boolean(&Term::Zero));
        assert!(is_boolean(&Term::One));
        assert!(is_boolean(&Term::dot(b(), Term::not(b()).unwrap())));
        assert!(!is_boolean(&p()));
        assert!(!is_boolean(&Term::star(b())));
        assert!(!is_boolean(&Term::plus(b(), p())));
    }

    #[test]
    fn negation_rejects_programs() {
        assert!(Term::not(p()).is_err());
        assert!(Term::not(Term::star(b())).is_err());
        assert!(Term::not(Term::plus(b(), Term::test("c"))).is_ok());
    }

    #[test]
    fn universal_expression_is_sorted_star() {
        let u = universal_expression([Symbol::program("q"), Symbol::program("p")]).unwrap();
        assert_eq!(u, Term::star(Term::plus(Term::prog("p"), Term::prog("q"))));
        assert_eq!(universal_expression([]).unwrap(), Term::star(Term::Zero));
        assert!(universal_expression([Symbol::test("b")]).is_err());
    }

    #[test]
    fn substitute_is_homomorphic() {
        // p -> !b;p + b, the rewriting used for c;p = c elimination.
        let image = Term::plus(Term::dot(Term::not(b()).unwrap(), p()), b());
        let map = BTreeMap::from([(Symbol::program("p"), image.clone())]);
        let t = Term::dot(p(), Term::star(p()));
        let expected = Term::dot(image.clone(), Term::star(image));
        assert_eq!(substitute(&t, &map).unwrap(), expected);

        // The identity map is a no-op.
        assert_eq!(substitute(&t, &BTreeMap::new()).unwrap(), t);

        // A test symbol may not become a program term.
        let bad = BTreeMap::from([(Symbol::test("b"), p())]);
        assert!(substitute(&b(), &bad).is_err());
    }

    #[test]
    fn push_negations_examples() {
        let c = Term::test("c");
        let de_morgan = Term::not(Term::plus(b(), c.clone())).unwrap();
        assert_eq!(
            push_negations(&de_morgan),
            Term::dot(Term::not(b()).unwrap(), Term::not(c.clone()).unwrap())
        );
        let double = Term::not(Term::not(b()).unwrap()).unwrap();
        assert_eq!(push_negations(&double), b());
        assert_eq!(push_negations(&Term::not(Term::One).unwrap()), Term::Zero);

        // Negations sitting under programs and stars are rewritten in place.
        let mixed = Term::dot(p(), Term::star(de_morgan));
        let pushed = push_negations(&mixed);
        assert_eq!(
            pushed,
            Term::dot(
                p(),
                Term::star(Term::dot(Term::not(b()).unwrap(), Term::not(c).unwrap()))
            )
        );
    }

    #[test]
    fn display_respects_precedence() {
        let t = Term::star(Term::plus(p(), Term::dot(Term::prog("q"), p())));
        assert_eq!(t.to_string(), "(p + q;p)*");
        let u = Term::dot(Term::plus(p(), Term::One), Term::star(p()));
        assert_eq!(u.to_string(), "(p + 1);p*");
        let n = Term::star(Term::not(b()).unwrap());
        assert_eq!(n.to_string(), "(!b)*");
        // Star binds tighter than negation: !b* is the negation of b*.
        let m = Term::not(Term::dot(b(), Term::test("c"))).unwrap();
        assert_eq!(m.to_string(), "!(b;c)");
    }

    #[test]
    fn signature_namespaces_are_disjoint() {
        let mut sig = Signature::new();
        sig.declare_program("p").unwrap();
        assert!(sig.declare_test("p").is_err());
        sig.declare_test("b").unwrap();
        assert_eq!(sig.kind_of("p"), Some(SymbolKind::Program));
        assert_eq!(sig.kind_of("b"), Some(SymbolKind::Test));
        assert_eq!(sig.kind_of("q"), None);

        assert!(sig.check_term(&Term::dot(b(), p())).is_ok());
        assert!(sig.check_term(&Term::prog("missing")).is_err());
        assert!(sig.check_term(&Term::test("p")).is_err());
    }

    #[test]
    fn equation_normalization() {
        let e = Equation::leq(p(), Term::star(p()));
        let n = e.normalize();
        assert_eq!(n, Equation::eq(Term::plus(p(), Term::star(p())), Term::star(p())));
        assert_eq!(n.normalize(), n);
    }

    #[test]
    fn horn_formula_round_trips_through_display() {
        let sig = Signature::with(&["p", "q"], &["b"]);
        let f = HornFormula::new(
            sig,
            vec![Equation::eq(Term::dot(b(), p()), b())],
            Equation::eq(Term::dot(p(), p()), p()),
        )
        .unwrap();
        let text = f.to_string();
        assert_eq!(text, "program p q\ntest b\nhyp b;p = b\nshow p;p = p");
    }
}
