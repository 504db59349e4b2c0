//! Properties of the relational semantics: evaluations stay inside the
//! universal relation, grow monotonically with the program assignments, pass
//! the quotient audit on arbitrary interpretations, and back every oracle
//! verdict with a re-checked model.

use kat_core::gen::{random_equation, random_term, random_test_free_term};
use kat_core::model::{is_countermodel, quotient_construction, Rel};
use kat_core::{find_counterexample, HornFormula, OracleConfig, RelInterp, Signature, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sig() -> Signature {
    Signature::with(&["p", "q"], &["b"])
}

fn random_rel(rng: &mut impl Rng, n: usize) -> Rel {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(0.4) {
                pairs.push((i, j));
            }
        }
    }
    Rel::from_pairs(n, &pairs)
}

fn random_subid(rng: &mut impl Rng, n: usize) -> Rel {
    let pairs: Vec<(usize, usize)> = (0..n).filter(|_| rng.random_bool(0.5)).map(|i| (i, i)).collect();
    Rel::from_pairs(n, &pairs)
}

fn random_interp(rng: &mut impl Rng, sig: &Signature, n: usize) -> RelInterp {
    let mut m = RelInterp::new(n).unwrap();
    for p in sig.program_names() {
        let r = random_rel(rng, n);
        m.set_prog(p, r);
    }
    for b in sig.test_names() {
        let r = random_subid(rng, n);
        m.set_test(b, r);
    }
    m
}

#[test]
fn every_evaluation_sits_below_the_universal_expression() {
    let sig = sig();
    let u = sig.universal_expression();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let m = random_interp(&mut rng, &sig, n);
        let top = m.eval(&u).unwrap();
        let t = random_term(&mut rng, &sig, 5, true);
        let v = m.eval(&t).unwrap();
        assert!(v.subset(&top), "eval of {t} escapes the universal relation on base {n}");
    }
}

#[test]
fn evaluation_is_monotone_in_the_program_assignments() {
    // Growing the program relations (tests untouched) can only grow the
    // value of any term, negation included, since negation only ever applies
    // to Boolean subterms.
    let sig = sig();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let small = random_interp(&mut rng, &sig, n);
        let mut big = small.clone();
        for p in sig.program_names() {
            let extra = random_rel(&mut rng, n);
            let grown = small.eval(&Term::prog(p)).unwrap().union(&extra);
            big.set_prog(p, grown);
        }
        let t = random_term(&mut rng, &sig, 5, true);
        let lo = small.eval(&t).unwrap();
        let hi = big.eval(&t).unwrap();
        assert!(lo.subset(&hi), "eval of {t} shrank when programs grew on base {n}");
    }
}

#[test]
fn quotient_audit_passes_on_random_interpretations() {
    let sig = sig();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut exhaustive_sweeps = 0;
    for round in 0..30 {
        let n = if round < 22 { 2 } else { 3 };
        let m = random_interp(&mut rng, &sig, n);
        let r = random_test_free_term(&mut rng, &sig, 3, true);
        let (_, audit) = quotient_construction(&m, &r, &sig, 4096).unwrap();
        assert!(
            audit.all_ok(),
            "audit failed on base {n} with r = {r}: {:?}",
            audit.failed()
        );
        if audit.exhaustive {
            exhaustive_sweeps += 1;
        }
    }
    assert!(exhaustive_sweeps >= 15, "only {exhaustive_sweeps} exhaustive audits");
}

#[test]
fn oracle_counterexamples_survive_reverification() {
    let sig = sig();
    let cfg = OracleConfig { max_base: 2, budget: 50_000, seed: 97 };
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut found = 0;
    for _ in 0..60 {
        let hyp = random_equation(&mut rng, &sig, 3, true);
        let conclusion = random_equation(&mut rng, &sig, 3, true);
        let f = HornFormula::new(sig.clone(), vec![hyp], conclusion).unwrap();
        let outcome = find_counterexample(&f, &cfg).unwrap();
        if let Some(m) = outcome.counterexample {
            found += 1;
            assert!(is_countermodel(&m, &f).unwrap(), "oracle returned a non-countermodel for {f}");
        }
    }
    assert!(found >= 20, "only {found} countermodels; generator drifted");
}

#[test]
fn oracle_exhausts_small_bases_on_instantiated_identities() {
    let sig = sig();
    let cfg = OracleConfig { max_base: 2, budget: 200_000, seed: 98 };
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..10 {
        let x = random_term(&mut rng, &sig, 3, true);
        let y = random_term(&mut rng, &sig, 3, true);
        let eq = kat_core::Equation::eq(
            Term::star(Term::plus(x.clone(), y.clone())),
            Term::dot(Term::star(x.clone()), Term::star(Term::dot(y.clone(), Term::star(x)))),
        );
        let f = HornFormula::new(sig.clone(), Vec::new(), eq).unwrap();
        let outcome = find_counterexample(&f, &cfg).unwrap();
        assert!(outcome.counterexample.is_none(), "found a countermodel to an identity");
        assert!(outcome.exhaustive(), "small bases should be swept exhaustively");
    }
}
