#![allow(dead_code)]

use bitdiss::protocol::{Opinion, Prob, Protocol};
use proptest::prelude::*;

/// Rational entry `p/q` with `q <= 12`.
pub fn prob() -> impl Strategy<Value = Prob> {
    (1i64..=12).prop_flat_map(|q| (0..=q).prop_map(move |p| Prob::ratio(p, q)))
}

/// Random rational protocol with `1 <= ell <= max_ell`, well-formed or not.
pub fn any_protocol(max_ell: usize) -> impl Strategy<Value = Protocol> {
    (1..=max_ell).prop_flat_map(|ell| {
        (
            prop::collection::vec(prob(), ell + 1),
            prop::collection::vec(prob(), ell + 1),
        )
            .prop_map(move |(g0, g1)| Protocol::new("random", ell, g0, g1).unwrap())
    })
}

/// Random rational protocol with `g0(0) = 0` and `g1(ell) = 1`.
pub fn well_formed_protocol(max_ell: usize) -> impl Strategy<Value = Protocol> {
    (1..=max_ell).prop_flat_map(|ell| {
        (
            prop::collection::vec(prob(), ell + 1),
            prop::collection::vec(prob(), ell + 1),
        )
            .prop_map(move |(mut g0, mut g1)| {
                g0[0] = Prob::ratio(0, 1);
                g1[ell] = Prob::ratio(1, 1);
                Protocol::new("random", ell, g0, g1).unwrap()
            })
    })
}

pub fn opinion() -> impl Strategy<Value = Opinion> {
    prop_oneof![Just(Opinion::Zero), Just(Opinion::One)]
}

/// `(n, z, x)` with `x` consistent with the source.
pub fn configuration(max_n: u64) -> impl Strategy<Value = (u64, Opinion, u64)> {
    (2..=max_n, opinion()).prop_flat_map(|(n, z)| {
        let range = match z {
            Opinion::One => 1..=n,
            Opinion::Zero => 0..=n - 1,
        };
        range.prop_map(move |x| (n, z, x))
    })
}
