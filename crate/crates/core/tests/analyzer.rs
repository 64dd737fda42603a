mod common;

use bitdiss::analyzer::{
    bound_between_roots, characteristic_poly, classify, drift_bracket, isolate_roots, ClassKind, HardOpinion, RatPoly,
    RootValue, DEFAULT_ROOT_TOL,
};
use bitdiss::dynamics::{expected_next_exact, Configuration};
use bitdiss::protocol::{Builtin, Opinion, Prob, Protocol};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn polynomial_examples() {
    for ell in 1..=10 {
        assert!(characteristic_poly(&Protocol::builtin(Builtin::Voter, ell).unwrap()).exact().unwrap().is_zero());
    }
    assert!(characteristic_poly(&Protocol::builtin(Builtin::Minority, 2).unwrap()).exact().unwrap().is_zero());
    let f = characteristic_poly(&Protocol::builtin(Builtin::Minority, 3).unwrap());
    assert_eq!(f.exact().unwrap(), &RatPoly::from_ints(&[0, 2, -6, 4]));
}

#[test]
fn root_examples() {
    let f = characteristic_poly(&Protocol::builtin(Builtin::Minority, 3).unwrap());
    let roots = isolate_roots(&f, DEFAULT_ROOT_TOL).unwrap();
    let exact: Vec<BigRational> = roots.roots.iter().map(|x| x.exact().unwrap().clone()).collect();
    assert_eq!(exact, vec![r(0, 1), r(1, 2), r(1, 1)]);
    assert!(roots.roots.iter().all(|x| x.multiplicity == 1));

    let voter = characteristic_poly(&Protocol::builtin(Builtin::Voter, 3).unwrap());
    assert!(isolate_roots(&voter, DEFAULT_ROOT_TOL).unwrap().identically_zero);
}

#[test]
fn classification_examples() {
    let voter = classify(&Protocol::builtin(Builtin::Voter, 1).unwrap()).unwrap();
    assert_eq!(voter.kind, ClassKind::IdenticallyZero);
    assert_eq!(voter.hard_opinion, HardOpinion::Either);
    assert_eq!(voter.suggested_x0(1000), 625);

    let m3 = classify(&Protocol::builtin(Builtin::Minority, 3).unwrap()).unwrap();
    assert_eq!(m3.kind, ClassKind::Case1NegativeTop);
    assert_eq!(m3.hard_opinion, HardOpinion::Fixed(Opinion::One));
    assert_eq!(m3.top_interval, (0.5, 1.0));
    assert_eq!(m3.witness, (0.75, -0.1875));

    // g1 = [1/2, 1]: F(p) = (1 - p) p / 2 > 0 on (0, 1)
    let shifted = Protocol::new(
        "shifted",
        1,
        vec![Prob::ratio(0, 1), Prob::ratio(1, 1)],
        vec![Prob::ratio(1, 2), Prob::ratio(1, 1)],
    )
    .unwrap();
    let c = classify(&shifted).unwrap();
    assert_eq!(c.kind, ClassKind::Case2PositiveTop);
    let f = characteristic_poly(&shifted);
    assert_eq!(f.exact().unwrap(), &RatPoly::new(vec![r(0, 1), r(1, 2), r(-1, 2)]));
    assert!(c.witness.1 > 0.0);
}

#[test]
fn bracket_examples() {
    let voter = Protocol::builtin(Builtin::Voter, 1).unwrap();
    let c = Configuration::new(2, Opinion::One, 1).unwrap();
    assert_eq!(drift_bracket(&voter, &c), (0.0, 2.0));
    assert_eq!(expected_next_exact(&voter, &c).unwrap(), r(3, 2));

    let m3 = Protocol::builtin(Builtin::Minority, 3).unwrap();
    let c = Configuration::new(100, Opinion::One, 75).unwrap();
    assert_eq!(drift_bracket(&m3, &c), (55.25, 57.25));
}

#[test]
fn bound_examples() {
    let zero = characteristic_poly(&Protocol::builtin(Builtin::Voter, 2).unwrap());
    assert_eq!(bound_between_roots(&zero, 0.0, 1.0).bound, 0.0);
    // p(1 - p) from g0 = [0, 1], g1 = [1, 1]
    let p = Protocol::new(
        "parabola",
        1,
        vec![Prob::ratio(0, 1), Prob::ratio(1, 1)],
        vec![Prob::ratio(1, 1), Prob::ratio(1, 1)],
    )
    .unwrap();
    let f = characteristic_poly(&p);
    assert_eq!(f.exact().unwrap(), &RatPoly::from_ints(&[0, 1, -1]));
    let b = bound_between_roots(&f, 0.0, 1.0);
    assert!(b.bound >= 0.25 && b.certified);
}

#[test]
fn float_tables_use_tolerance_mode() {
    let p = Protocol::new(
        "decimal",
        3,
        vec![Prob::Float(0.0), Prob::Float(1.0), Prob::Float(0.0), Prob::Float(1.0)],
        vec![Prob::Float(0.0), Prob::Float(1.0), Prob::Float(0.0), Prob::Float(1.0)],
    )
    .unwrap();
    let f = characteristic_poly(&p);
    assert!(!f.is_exact());
    let roots = isolate_roots(&f, DEFAULT_ROOT_TOL).unwrap();
    assert_eq!(roots.roots.len(), 3);
    assert!(roots.roots.iter().all(|x| x.multiplicity == 1 && matches!(x.value, RootValue::Approx { .. })));
    assert_eq!(classify(&p).unwrap().kind, ClassKind::Case1NegativeTop);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn boundary_roots_and_degree(p in common::well_formed_protocol(6)) {
        let f = characteristic_poly(&p);
        let exact = f.exact().unwrap();
        prop_assert!(exact.eval(&r(0, 1)).is_zero());
        prop_assert!(exact.eval(&r(1, 1)).is_zero());
        prop_assert!(exact.degree().is_none_or(|d| d <= p.ell() + 1));
        let roots = isolate_roots(&f, DEFAULT_ROOT_TOL).unwrap();
        if !roots.identically_zero {
            prop_assert!(roots.count_with_multiplicity() as usize <= p.ell() + 1);
        }
    }

    #[test]
    fn bases_agree(p in common::any_protocol(8)) {
        let f = characteristic_poly(&p);
        let scale = f.bernstein().iter().fold(1e-300f64, |m, b| m.max(b.abs()));
        for i in 0..=1024 {
            let t = i as f64 / 1024.0;
            let diff = (f.eval(t) - f.eval_monomial(t)).abs();
            prop_assert!(diff <= scale * 2f64.powi(-40), "t={} diff={}", t, diff);
        }
    }

    #[test]
    fn exact_expectation_in_bracket(p in common::any_protocol(5), (n, z, x) in common::configuration(128)) {
        let c = Configuration::new(n, z, x).unwrap();
        let e = expected_next_exact(&p, &c).unwrap();
        let (lo, hi) = characteristic_poly(&p).drift_bracket_exact(&c).unwrap();
        prop_assert!(lo <= e && e <= hi, "{} not in [{}, {}]", e.to_f64().unwrap(), lo, hi);
    }
}
