mod common;

use bitdiss::protocol::{load_protocol, validate, Builtin, Opinion, Prob, Protocol, ProtocolError, Violation};
use proptest::prelude::*;

fn probs(v: &[(i64, i64)]) -> Vec<Prob> {
    v.iter().map(|&(p, q)| Prob::ratio(p, q)).collect()
}

#[test]
fn builtin_tables() {
    let voter = Protocol::builtin(Builtin::Voter, 2).unwrap();
    assert_eq!(voter.table(Opinion::Zero), probs(&[(0, 1), (1, 2), (1, 1)]).as_slice());
    let m2 = Protocol::builtin(Builtin::Minority, 2).unwrap();
    assert_eq!(m2.table(Opinion::One), probs(&[(0, 1), (1, 2), (1, 1)]).as_slice());
    let m4 = Protocol::builtin(Builtin::Minority, 4).unwrap();
    assert_eq!(m4.table(Opinion::Zero), probs(&[(0, 1), (1, 1), (1, 2), (0, 1), (1, 1)]).as_slice());
    let m3 = Protocol::builtin(Builtin::Minority, 3).unwrap();
    assert_eq!(m3.table(Opinion::Zero), probs(&[(0, 1), (1, 1), (0, 1), (1, 1)]).as_slice());
}

#[test]
fn well_formedness_examples() {
    assert!(validate(&Protocol::builtin(Builtin::Voter, 1).unwrap()).is_well_formed());
    assert!(validate(&Protocol::builtin(Builtin::Minority, 3).unwrap()).is_well_formed());
    let bad = Protocol::new("bad", 1, vec![Prob::Float(0.5), Prob::ratio(1, 1)], probs(&[(0, 1), (1, 1)])).unwrap();
    assert_eq!(validate(&bad).violations, vec![Violation::ZeroNotAbsorbing]);
}

#[test]
fn load_examples() {
    let voter = load_protocol("ell = 1\ng0 = [0, 1]\ng1 = [0, 1]\n").unwrap();
    let builtin = Protocol::builtin(Builtin::Voter, 1).unwrap();
    assert_eq!(voter.table(Opinion::Zero), builtin.table(Opinion::Zero));
    assert_eq!(voter.table(Opinion::One), builtin.table(Opinion::One));

    let err = load_protocol("ell = 1\ng0 = [\"3/2\", 1]\ng1 = [0, 1]\n").unwrap_err();
    assert!(matches!(err.kind(), ProtocolError::Range { table: "g0", index: 0, .. }), "{err}");
    let err = load_protocol("ell = 3\ng0 = [0, 1, 0]\ng1 = [0, 1, 0, 1]\n").unwrap_err();
    assert!(matches!(err.kind(), ProtocolError::Length { expected: 4, got: 3, .. }), "{err}");
}

proptest! {
    #[test]
    fn round_trip(p in common::any_protocol(8)) {
        let back = load_protocol(&p.to_toml()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn builtins_are_well_formed(ell in 1usize..64) {
        for kind in [Builtin::Voter, Builtin::Minority] {
            prop_assert!(validate(&Protocol::builtin(kind, ell).unwrap()).is_well_formed());
        }
    }

    #[test]
    fn minority_complement_symmetry(ell in 1usize..64) {
        let p = Protocol::builtin(Builtin::Minority, ell).unwrap();
        let g = p.table(Opinion::Zero);
        for k in 0..=ell {
            let lhs = g[ell - k].as_exact().unwrap().clone();
            let rhs = num_rational::BigRational::from_integer(1.into()) - g[k].as_exact().unwrap();
            prop_assert_eq!(lhs, rhs, "k = {}", k);
        }
    }
}
