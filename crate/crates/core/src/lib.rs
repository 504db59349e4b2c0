//! Reasoning tools for Kleene algebra with tests (KAT).
//!
//! The crate centers on universal Horn formulas `E -> s = t` where the
//! hypotheses `E` fall into shapes that can be compiled away:
//!
//! * `r = 0` hypotheses are folded into the conclusion, which becomes
//!   `s + u;r;u = t + u;r;u` for the universal expression `u` over the
//!   program alphabet ([`elim::eliminate_zero`]);
//! * `c;p = c` hypotheses (Boolean `c`, atomic program `p`) are removed by an
//!   idempotent syntactic homomorphism that rewrites `p` to `!c;p + c`
//!   ([`elim::eliminate_guarded`]);
//! * remaining test symbols can be traded for fresh program symbols so that
//!   test-free machinery applies ([`elim::tests_to_programs`]).
//!
//! Once every hypothesis is gone the conclusion is a pure equation, decided by
//! the guarded-word automata in [`decide`]. Alongside the decision pipeline
//! there are finite relational models ([`model`]) for countermodel search and
//! for auditing the quotient construction that justifies the `r = 0` step, and
//! a goal-directed proof search over edge-labeled automata ([`proof`]) for
//! Horn formulas that keep general hypotheses.

pub mod decide;
pub mod elim;
pub mod gen;
pub mod model;
pub mod parse;
pub mod proof;
pub mod term;

pub use decide::{decide_equal, decide_leq, words_of, Atom, DeciderConfig, GuardedWord, Verdict};
pub use elim::{eliminate_all, ElimOptions, ElimOutcome, ElimTrace, HypClass, SynHom};
pub use model::{find_counterexample, satisfies, FiniteKat, OracleConfig, RelInterp};
pub use parse::{parse_equation, parse_horn, parse_term};
pub use proof::{search, SearchBounds, SearchOutcome, SearchProblem};
pub use term::{Equation, HornFormula, Relation, Signature, Symbol, SymbolKind, Term};
