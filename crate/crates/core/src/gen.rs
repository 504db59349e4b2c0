//! Seeded random generation of terms and equations, used by the randomized
//! test suites and handy for fuzzing the pipeline from the outside.
//!
//! All generators are driven by a caller-supplied [`Rng`], so a fixed seed
//! reproduces the same inputs. `size` bounds the number of internal nodes.

use rand::Rng;

use crate::term::{Equation, Relation, Signature, Term};

/// A random term over `sig`. With `allow_tests` the Boolean fragment
/// (tests and negation) is included; otherwise the term is test-free.
pub fn random_term(rng: &mut impl Rng, sig: &Signature, size: usize, allow_tests: bool) -> Term {
    go(rng, sig, size, allow_tests, true)
}

/// A random term in the Boolean fragment: tests, `0`, `1`, `+`, `;`, `!`.
pub fn random_boolean_term(rng: &mut impl Rng, sig: &Signature, size: usize) -> Term {
    let tests: Vec<&str> = sig.test_names().collect();
    if size == 0 || tests.is_empty() {
        return match (tests.is_empty(), rng.random_range(0..4)) {
            (false, 0..=1) => Term::test(tests[rng.random_range(0..tests.len())]),
            (_, 0) => Term::Zero,
            _ if rng.random_bool(0.5) => Term::One,
            _ => Term::Zero,
        };
    }
    match rng.random_range(0..8) {
        0..=2 => Term::test(tests[rng.random_range(0..tests.len())]),
        3 => Term::not(random_boolean_term(rng, sig, size - 1)).expect("boolean operand"),
        4..=5 => {
            let k = size / 2;
            Term::plus(random_boolean_term(rng, sig, k), random_boolean_term(rng, sig, size - 1 - k))
        }
        6 => {
            let k = size / 2;
            Term::dot(random_boolean_term(rng, sig, k), random_boolean_term(rng, sig, size - 1 - k))
        }
        _ => {
            if rng.random_bool(0.5) {
                Term::One
            } else {
                Term::test(tests[rng.random_range(0..tests.len())])
            }
        }
    }
}

/// A random test-free term; `allow_star` off keeps the language finite.
pub fn random_test_free_term(
    rng: &mut impl Rng,
    sig: &Signature,
    size: usize,
    allow_star: bool,
) -> Term {
    go(rng, sig, size, false, allow_star)
}

fn go(rng: &mut impl Rng, sig: &Signature, size: usize, allow_tests: bool, allow_star: bool) -> Term {
    let progs: Vec<&str> = sig.program_names().collect();
    let tests: Vec<&str> = sig.test_names().collect();
    let use_tests = allow_tests && !tests.is_empty();
    if size == 0 {
        return leaf(rng, &progs, &tests, use_tests);
    }
    match rng.random_range(0..10) {
        0..=2 => {
            let k = size / 2;
            Term::plus(
                go(rng, sig, k, allow_tests, allow_star),
                go(rng, sig, size - 1 - k, allow_tests, allow_star),
            )
        }
        3..=5 => {
            let k = size / 2;
            Term::dot(
                go(rng, sig, k, allow_tests, allow_star),
                go(rng, sig, size - 1 - k, allow_tests, allow_star),
            )
        }
        6..=7 if allow_star => Term::star(go(rng, sig, size - 1, allow_tests, allow_star)),
        8 if use_tests => {
            Term::not(random_boolean_term(rng, sig, (size - 1).min(3))).expect("boolean operand")
        }
        _ => leaf(rng, &progs, &tests, use_tests),
    }
}

fn leaf(rng: &mut impl Rng, progs: &[&str], tests: &[&str], use_tests: bool) -> Term {
    let mut choices = 2 + progs.len() * 3;
    if use_tests {
        choices += tests.len() * 2;
    }
    let pick = rng.random_range(0..choices);
    match pick {
        0 => Term::Zero,
        1 => Term::One,
        _ if pick < 2 + progs.len() * 3 => Term::prog(progs[(pick - 2) % progs.len()]),
        _ => Term::test(tests[(pick - 2 - progs.len() * 3) % tests.len()]),
    }
}

/// A random equation or inequality between terms of at most `size` nodes.
pub fn random_equation(rng: &mut impl Rng, sig: &Signature, size: usize, allow_tests: bool) -> Equation {
    let relation = if rng.random_bool(0.7) { Relation::Eq } else { Relation::Leq };
    Equation {
        lhs: random_term(rng, sig, size, allow_tests),
        rhs: random_term(rng, sig, size, allow_tests),
        relation,
    }
}
