mod common;

use bitdiss::analyzer::characteristic_poly;
use bitdiss::dynamics::{
    adopt_prob, expected_next_exact, run_until_consensus, step_parallel, step_parallel_agentwise, step_sequential,
    AgentState, Configuration, Convergence, Mode, TraceLevel,
};
use bitdiss::oracle::one_step_pmf;
use bitdiss::protocol::{Builtin, Opinion, Prob, Protocol};
use bitdiss::rng::{rng_from_seed, TrialRng};
use bitdiss::stats::chi_square_gof;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn cfg(n: u64, z: Opinion, x: u64) -> Configuration {
    Configuration::new(n, z, x).unwrap()
}

#[test]
fn adoption_probability_examples() {
    let voter = Protocol::builtin(Builtin::Voter, 1).unwrap();
    assert!((adopt_prob(&voter, Opinion::Zero, 3, 10) - 0.3).abs() < 1e-15);
    let m3 = Protocol::builtin(Builtin::Minority, 3).unwrap();
    assert_eq!(adopt_prob(&m3, Opinion::Zero, 0, 10), 0.0);
    for own in [Opinion::Zero, Opinion::One] {
        assert!((adopt_prob(&m3, own, 50, 100) - 0.5).abs() < 1e-15);
    }
}

#[test]
fn voter_pair_steps() {
    let voter = Protocol::builtin(Builtin::Voter, 1).unwrap();
    let mut rng = rng_from_seed(3);
    for step in [step_parallel::<TrialRng>, step_sequential::<TrialRng>] {
        let mut twos = 0;
        for _ in 0..20_000 {
            let x = step(&cfg(2, Opinion::One, 1), &voter, &mut rng).x();
            assert!(x == 1 || x == 2);
            twos += (x == 2) as u32;
        }
        // 1/2 +- 4 sigma
        assert!((twos as f64 / 20_000.0 - 0.5).abs() < 4.0 * (0.25f64 / 20_000.0).sqrt());
    }
}

#[test]
fn voter_three_parallel_law() {
    let voter = Protocol::builtin(Builtin::Voter, 1).unwrap();
    let mut rng = rng_from_seed(4);
    let mut counts = [0u64; 4];
    for _ in 0..100_000 {
        counts[step_parallel(&cfg(3, Opinion::One, 1), &voter, &mut rng).x() as usize] += 1;
    }
    assert_eq!(counts[0], 0);
    let gof = chi_square_gof(&counts[1..], &[4.0 / 9.0, 4.0 / 9.0, 1.0 / 9.0], 5.0);
    assert!(gof.p_value > 1e-3, "{gof:?}");
}

#[test]
fn agentwise_examples() {
    let voter = Protocol::builtin(Builtin::Voter, 1).unwrap();
    let mut rng = rng_from_seed(5);
    let settled = AgentState::from_configuration(&cfg(6, Opinion::One, 6));
    assert_eq!(step_parallel_agentwise(&settled, &voter, &mut rng, None), settled);

    // n = 2: the non-source agent adopts z exactly when it samples the source
    let start = AgentState::from_configuration(&cfg(2, Opinion::One, 1));
    let mut record = bitdiss::dynamics::SampleRecord::new(2, 1);
    for _ in 0..200 {
        let next = step_parallel_agentwise(&start, &voter, &mut rng, Some(&mut record));
        let sampled = *record.rounds.last().unwrap().last().unwrap();
        assert_eq!(next.opinions()[1], sampled == 0);
    }
}

#[test]
fn agentwise_matches_exact_pmf_minority_example() {
    let p = Protocol::builtin(Builtin::Minority, 3).unwrap();
    let c = cfg(8, Opinion::One, 4);
    let start = AgentState::from_configuration(&c);
    let mut rng = rng_from_seed(6);
    let mut counts = vec![0u64; 9];
    for _ in 0..100_000 {
        counts[step_parallel_agentwise(&start, &p, &mut rng, None).count_ones() as usize] += 1;
    }
    let gof = chi_square_gof(&counts, &one_step_pmf(&p, &c, Mode::Parallel), 5.0);
    assert!(gof.p_value > 1e-3, "{gof:?}");
}

#[test]
fn run_examples() {
    let voter = Protocol::builtin(Builtin::Voter, 1).unwrap();
    let mut rng = rng_from_seed(7);
    let (out, _) =
        run_until_consensus(&cfg(5, Opinion::Zero, 0), &voter, Mode::Parallel, 10, &mut rng, TraceLevel::None).unwrap();
    assert_eq!(out.status, Convergence::Converged { tau: 0 });

    let mut g0: Vec<Prob> = Protocol::builtin(Builtin::Minority, 3).unwrap().table(Opinion::Zero).to_vec();
    g0[0] = Prob::Float(0.1);
    let g1 = Protocol::builtin(Builtin::Minority, 3).unwrap().table(Opinion::One).to_vec();
    let bad = Protocol::new("leaky", 3, g0, g1).unwrap();
    let (out, _) =
        run_until_consensus(&cfg(10, Opinion::Zero, 3), &bad, Mode::Parallel, 50, &mut rng, TraceLevel::None).unwrap();
    assert_eq!(out.status, Convergence::Undefined);
    assert!(out.is_censored());
    assert_eq!(out.steps, 50);
}

#[test]
fn sequential_counts_activations() {
    let voter = Protocol::builtin(Builtin::Voter, 1).unwrap();
    let mut rng = rng_from_seed(8);
    let (out, trace) =
        run_until_consensus(&cfg(16, Opinion::One, 1), &voter, Mode::Sequential, 1000, &mut rng, TraceLevel::Counts)
            .unwrap();
    let tau = out.tau().unwrap();
    assert_eq!(trace.counts.len() as u64, tau + 1);
    assert_eq!(out.tau_rounds().unwrap(), tau as f64 / 16.0);
    assert!(trace.counts.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expectation_bracket(p in common::any_protocol(6), (n, z, x) in common::configuration(256)) {
        let c = cfg(n, z, x);
        let e = expected_next_exact(&p, &c).unwrap().to_f64().unwrap();
        let (lo, hi) = characteristic_poly(&p).drift_bracket(&c);
        prop_assert!(lo - 1e-9 <= e && e <= hi + 1e-9, "{} not in [{}, {}]", e, lo, hi);
    }

    #[test]
    fn steps_preserve_source_and_bounds(
        p in common::any_protocol(5),
        (n, z, x) in common::configuration(64),
        seed in any::<u64>(),
    ) {
        let c = cfg(n, z, x);
        let mut rng = rng_from_seed(seed);
        let par = step_parallel(&c, &p, &mut rng);
        prop_assert_eq!(par.z(), z);
        prop_assert!(Configuration::new(n, z, par.x()).is_ok());
        let seq = step_sequential(&c, &p, &mut rng);
        prop_assert!(seq.x().abs_diff(x) <= 1);
        prop_assert!(Configuration::new(n, z, seq.x()).is_ok());
        let agents = step_parallel_agentwise(&AgentState::from_configuration(&c), &p, &mut rng, None);
        prop_assert_eq!(agents.opinions()[0], z == Opinion::One);
    }

    #[test]
    fn consensus_absorbs(p in common::well_formed_protocol(6), n in 2u64..200, z in common::opinion(), seed in any::<u64>()) {
        let c = cfg(n, z, n * z.bit());
        let mut rng = rng_from_seed(seed);
        prop_assert_eq!(step_parallel(&c, &p, &mut rng), c);
        prop_assert_eq!(step_sequential(&c, &p, &mut rng), c);
        let s = AgentState::from_configuration(&c);
        prop_assert_eq!(step_parallel_agentwise(&s, &p, &mut rng, None), s);
    }

    #[test]
    fn determinism(p in common::well_formed_protocol(4), (n, z, x) in common::configuration(40), seed in any::<u64>()) {
        let c = cfg(n, z, x);
        for (mode, level) in [
            (Mode::Parallel, TraceLevel::Counts),
            (Mode::Sequential, TraceLevel::Counts),
            (Mode::Parallel, TraceLevel::Samples),
        ] {
            let a = run_until_consensus(&c, &p, mode, 30, &mut rng_from_seed(seed), level).unwrap();
            let b = run_until_consensus(&c, &p, mode, 30, &mut rng_from_seed(seed), level).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
