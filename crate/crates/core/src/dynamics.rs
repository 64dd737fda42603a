//! The bit-dissemination process on the complete graph.
//!
//! Agents are indexed `0..n`; agent 0 is the source and always holds the
//! correct opinion `z`. Each activated non-source agent samples `ell`
//! agents uniformly with replacement (itself and the source included),
//! counts the ones `k`, and adopts 1 with probability `g_own(k)`.
//!
//! Three steppers are provided: an aggregated parallel stepper that draws the
//! next count from two binomials (exact because agents are exchangeable), an
//! agent-level parallel stepper that can record every sample, and a
//! sequential stepper that activates one uniformly chosen non-source agent.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::numeric;
use crate::protocol::{validate, Opinion, Protocol};

/// Sample sizes up to this use de Casteljau for the adoption probability.
const SMALL_ELL: usize = 48;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("population size must be at least 2, got {0}")]
    PopulationTooSmall(u64),
    #[error("count x = {x} is outside 0..={n}")]
    CountOutOfRange { n: u64, x: u64 },
    #[error("source holds {z} so x = {x} is impossible for n = {n}")]
    SourceInconsistent { n: u64, z: Opinion, x: u64 },
    #[error("max_rounds must be positive")]
    ZeroMaxRounds,
    #[error("agent 0 is the source and must hold z = {0}")]
    SourceOpinion(Opinion),
    #[error("sample recording needs the parallel agent-level stepper")]
    SamplesNeedParallel,
}

/// Aggregated state `(n, z, x)` where `x` counts agents holding 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    n: u64,
    z: Opinion,
    x: u64,
}

impl Configuration {
    pub fn new(n: u64, z: Opinion, x: u64) -> Result<Configuration, DynamicsError> {
        if n < 2 {
            return Err(DynamicsError::PopulationTooSmall(n));
        }
        if x > n {
            return Err(DynamicsError::CountOutOfRange { n, x });
        }
        let consistent = match z {
            Opinion::One => x >= 1,
            Opinion::Zero => x < n,
        };
        if !consistent {
            return Err(DynamicsError::SourceInconsistent { n, z, x });
        }
        Ok(Configuration { n, z, x })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn z(&self) -> Opinion {
        self.z
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    /// Every agent holds `z`.
    pub fn is_consensus(&self) -> bool {
        self.x == self.n * self.z.bit()
    }

    /// Non-source agents holding 1.
    pub fn non_source_ones(&self) -> u64 {
        self.x - self.z.bit()
    }

    /// Non-source agents holding 0.
    pub fn non_source_zeros(&self) -> u64 {
        self.n - self.x - (1 - self.z.bit())
    }

    fn with_x(self, x: u64) -> Configuration {
        debug_assert!(Configuration::new(self.n, self.z, x).is_ok());
        Configuration { x, ..self }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, z={}, x={})", self.n, self.z, self.x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Parallel,
    Sequential,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "parallel" => Ok(Mode::Parallel),
            "sequential" => Ok(Mode::Sequential),
            other => Err(format!("mode must be `parallel` or `sequential`, got `{other}`")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Parallel => "parallel",
            Mode::Sequential => "sequential",
        })
    }
}

fn de_casteljau(table: &[f64], t: f64) -> f64 {
    let mut work = table.to_vec();
    let s = 1.0 - t;
    for level in 1..work.len() {
        for i in 0..work.len() - level {
            work[i] = s * work[i] + t * work[i + 1];
        }
    }
    work[0]
}

/// Probability that a non-source agent holding `own` adopts 1 when `x` of
/// the `n` agents hold 1: `sum_k C(ell,k) (x/n)^k (1-x/n)^(ell-k) g_own(k)`.
pub fn adopt_prob(p: &Protocol, own: Opinion, x: u64, n: u64) -> f64 {
    debug_assert!(x <= n);
    let table = p.table_f64(own);
    let q = x as f64 / n as f64;
    if x == 0 {
        return table[0];
    }
    if x == n {
        return table[p.ell()];
    }
    let v = if p.ell() <= SMALL_ELL {
        de_casteljau(table, q)
    } else {
        numeric::binomial_mixture(table, q)
    };
    v.clamp(0.0, 1.0)
}

/// Exact adoption probability, when the protocol tables are rational.
pub fn adopt_prob_exact(p: &Protocol, own: Opinion, x: u64, n: u64) -> Option<BigRational> {
    let table = p.table(own);
    let q = BigRational::new(BigInt::from(x), BigInt::from(n));
    let pmf = numeric::binomial_pmf_exact(p.ell() as u64, &q);
    let mut acc = BigRational::zero();
    for (w, g) in pmf.iter().zip(table) {
        acc += w * g.as_exact()?;
    }
    Some(acc)
}

/// Exact one-step expectation `z + (x-z) P1 + (n-x-(1-z)) P0`.
pub fn expected_next(p: &Protocol, c: &Configuration) -> f64 {
    let p1 = adopt_prob(p, Opinion::One, c.x, c.n);
    let p0 = adopt_prob(p, Opinion::Zero, c.x, c.n);
    c.z.bit() as f64 + c.non_source_ones() as f64 * p1 + c.non_source_zeros() as f64 * p0
}

pub fn expected_next_exact(p: &Protocol, c: &Configuration) -> Option<BigRational> {
    let p1 = adopt_prob_exact(p, Opinion::One, c.x, c.n)?;
    let p0 = adopt_prob_exact(p, Opinion::Zero, c.x, c.n)?;
    let int = |v: u64| BigRational::from_integer(BigInt::from(v));
    Some(int(c.z.bit()) + int(c.non_source_ones()) * p1 + int(c.non_source_zeros()) * p0)
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, trials: u64, q: f64) -> u64 {
    if trials == 0 || q <= 0.0 {
        return 0;
    }
    if q >= 1.0 {
        return trials;
    }
    Binomial::new(trials, q)
        .expect("probability lies in (0, 1)")
        .sample(rng)
}

/// One round of the parallel process on the aggregated count:
/// `x' = z + Bin(x - z, P1) + Bin(n - x - (1 - z), P0)`.
pub fn step_parallel<R: Rng + ?Sized>(c: &Configuration, p: &Protocol, rng: &mut R) -> Configuration {
    let p1 = adopt_prob(p, Opinion::One, c.x, c.n);
    let p0 = adopt_prob(p, Opinion::Zero, c.x, c.n);
    let (ones, zeros) = (c.non_source_ones(), c.non_source_zeros());
    let adopted = if p1 == p0 {
        // a sum of independent binomials with one success probability
        binomial(rng, ones + zeros, p1)
    } else {
        binomial(rng, ones, p1) + binomial(rng, zeros, p0)
    };
    c.with_x(c.z.bit() + adopted)
}

/// One activation of the sequential process. Moves `x` by at most one.
pub fn step_sequential<R: Rng + ?Sized>(c: &Configuration, p: &Protocol, rng: &mut R) -> Configuration {
    let picked_one = rng.random_range(0..c.n - 1) < c.non_source_ones();
    let own = if picked_one { Opinion::One } else { Opinion::Zero };
    let adopts = rng.random::<f64>() < adopt_prob(p, own, c.x, c.n);
    c.with_x(c.x - u64::from(picked_one) + u64::from(adopts))
}

/// Per-agent opinions; index 0 is the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentState {
    opinions: Vec<bool>,
    z: Opinion,
}

impl AgentState {
    /// Source at index 0, then the other ones at the lowest indices.
    pub fn from_configuration(c: &Configuration) -> AgentState {
        let mut opinions = vec![false; c.n as usize];
        opinions[0] = c.z == Opinion::One;
        for slot in opinions.iter_mut().skip(1).take(c.non_source_ones() as usize) {
            *slot = true;
        }
        AgentState { opinions, z: c.z }
    }

    pub fn from_opinions(opinions: Vec<bool>, z: Opinion) -> Result<AgentState, DynamicsError> {
        if opinions.len() < 2 {
            return Err(DynamicsError::PopulationTooSmall(opinions.len() as u64));
        }
        if opinions[0] != (z == Opinion::One) {
            return Err(DynamicsError::SourceOpinion(z));
        }
        Ok(AgentState { opinions, z })
    }

    pub fn opinions(&self) -> &[bool] {
        &self.opinions
    }

    pub fn z(&self) -> Opinion {
        self.z
    }

    pub fn n(&self) -> u64 {
        self.opinions.len() as u64
    }

    pub fn count_ones(&self) -> u64 {
        self.opinions.iter().filter(|&&b| b).count() as u64
    }

    pub fn configuration(&self) -> Configuration {
        Configuration {
            n: self.n(),
            z: self.z,
            x: self.count_ones(),
        }
    }
}

/// Every sample drawn in a run of the agent-level stepper.
///
/// Round `t` holds `n * ell` indices: agent `i`'s sample occupies
/// `[i * ell, (i + 1) * ell)`. The source's slots hold 0, i.e. the source
/// samples itself, which makes it a sink for the backward walks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleRecord {
    pub n: usize,
    pub ell: usize,
    pub rounds: Vec<Vec<u32>>,
    /// `counts[t][i]`: ones among agent `i`'s sample in round `t`.
    pub counts: Vec<Vec<u32>>,
}

impl SampleRecord {
    pub fn new(n: usize, ell: usize) -> SampleRecord {
        SampleRecord {
            n,
            ell,
            rounds: Vec::new(),
            counts: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn sample(&self, t: usize, agent: usize) -> &[u32] {
        &self.rounds[t][agent * self.ell..(agent + 1) * self.ell]
    }
}

/// One synchronous round at the agent level. Samples are drawn from the
/// opinions at the start of the round.
pub fn step_parallel_agentwise<R: Rng + ?Sized>(
    s: &AgentState,
    p: &Protocol,
    rng: &mut R,
    record: Option<&mut SampleRecord>,
) -> AgentState {
    let n = s.opinions.len();
    let ell = p.ell();
    let old = &s.opinions;
    let mut next = old.clone();
    let mut samples = record.as_ref().map(|_| Vec::with_capacity(n * ell));
    let mut counts = record.as_ref().map(|_| Vec::with_capacity(n));
    if let (Some(samples), Some(counts)) = (samples.as_mut(), counts.as_mut()) {
        samples.extend(std::iter::repeat_n(0u32, ell));
        counts.push(if old[0] { ell as u32 } else { 0 });
    }
    for (i, slot) in next.iter_mut().enumerate().skip(1) {
        let mut k = 0usize;
        for _ in 0..ell {
            let j = rng.random_range(0..n);
            if old[j] {
                k += 1;
            }
            if let Some(samples) = samples.as_mut() {
                samples.push(j as u32);
            }
        }
        if let Some(counts) = counts.as_mut() {
            counts.push(k as u32);
        }
        let own = if old[i] { Opinion::One } else { Opinion::Zero };
        *slot = rng.random::<f64>() < p.table_f64(own)[k];
    }
    if let Some(record) = record {
        record.rounds.push(samples.unwrap());
        record.counts.push(counts.unwrap());
    }
    AgentState {
        opinions: next,
        z: s.z,
    }
}

/// Convergence status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    /// First hit of `x = n z`, in rounds (parallel) or activations (sequential).
    Converged { tau: u64 },
    /// Budget exhausted without hitting consensus.
    Censored,
    /// The protocol is not well formed, so consensus is not absorbing and
    /// the convergence time is undefined whatever the trajectory did.
    Undefined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub status: Convergence,
    pub mode: Mode,
    pub final_config: Configuration,
    /// Rounds executed (parallel) or activations executed (sequential).
    pub steps: u64,
}

impl RunOutcome {
    pub fn is_censored(&self) -> bool {
        !matches!(self.status, Convergence::Converged { .. })
    }

    /// Convergence time in the mode's native unit.
    pub fn tau(&self) -> Option<u64> {
        match self.status {
            Convergence::Converged { tau } => Some(tau),
            _ => None,
        }
    }

    /// Convergence time in parallel rounds; sequential activations are
    /// divided by `n`.
    pub fn tau_rounds(&self) -> Option<f64> {
        self.tau().map(|t| match self.mode {
            Mode::Parallel => t as f64,
            Mode::Sequential => t as f64 / self.final_config.n as f64,
        })
    }

    /// Individual agent updates performed (`(n-1)` per parallel round).
    pub fn activations(&self) -> u64 {
        match self.mode {
            Mode::Parallel => self.steps * (self.final_config.n - 1),
            Mode::Sequential => self.steps,
        }
    }
}

/// How much of the trajectory to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TraceLevel {
    #[default]
    None,
    Counts,
    /// Agent-level parallel run with every sample and opinion vector kept.
    Samples,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    /// `x_0, x_1, ...`; per activation in sequential mode.
    pub counts: Vec<u64>,
    pub samples: Option<SampleRecord>,
    /// Opinion vectors at rounds `0..=steps`, kept with the samples.
    pub history: Option<Vec<Vec<bool>>>,
}

/// Runs from `c0` until `x = n z` or the budget runs out. The budget is
/// `max_rounds` rounds in parallel mode and `max_rounds * n` activations in
/// sequential mode; consensus is checked after every step.
pub fn run_until_consensus<R: Rng + ?Sized>(
    c0: &Configuration,
    p: &Protocol,
    mode: Mode,
    max_rounds: u64,
    rng: &mut R,
    level: TraceLevel,
) -> Result<(RunOutcome, Trace), DynamicsError> {
    if max_rounds == 0 {
        return Err(DynamicsError::ZeroMaxRounds);
    }
    if level == TraceLevel::Samples && mode != Mode::Parallel {
        return Err(DynamicsError::SamplesNeedParallel);
    }
    let well_formed = validate(p).is_well_formed();
    let budget = match mode {
        Mode::Parallel => max_rounds,
        Mode::Sequential => max_rounds.saturating_mul(c0.n),
    };
    let mut trace = Trace::default();
    if level != TraceLevel::None {
        trace.counts.push(c0.x);
    }
    let finish = |status, final_config, steps, trace| {
        Ok((
            RunOutcome {
                status,
                mode,
                final_config,
                steps,
            },
            trace,
        ))
    };
    if well_formed && c0.is_consensus() {
        return finish(Convergence::Converged { tau: 0 }, *c0, 0, trace);
    }
    let last = || if well_formed { Convergence::Censored } else { Convergence::Undefined };

    if level == TraceLevel::Samples {
        let mut state = AgentState::from_configuration(c0);
        let mut record = SampleRecord::new(c0.n as usize, p.ell());
        let mut history = vec![state.opinions.clone()];
        let mut status = None;
        let mut steps = 0;
        for t in 1..=budget {
            state = step_parallel_agentwise(&state, p, rng, Some(&mut record));
            history.push(state.opinions.clone());
            let c = state.configuration();
            trace.counts.push(c.x);
            steps = t;
            if well_formed && c.is_consensus() {
                status = Some(Convergence::Converged { tau: t });
                break;
            }
        }
        let c = state.configuration();
        trace.samples = Some(record);
        trace.history = Some(history);
        return finish(status.unwrap_or_else(last), c, steps, trace);
    }

    let mut c = *c0;
    for t in 1..=budget {
        c = match mode {
            Mode::Parallel => step_parallel(&c, p, rng),
            Mode::Sequential => step_sequential(&c, p, rng),
        };
        if level == TraceLevel::Counts {
            trace.counts.push(c.x);
        }
        if well_formed && c.is_consensus() {
            return finish(Convergence::Converged { tau: t }, c, t, trace);
        }
    }
    finish(last(), c, budget, trace)
}

/// Default parallel-mode budget `64 n ceil(log2 n)`.
pub fn default_max_rounds(n: u64) -> u64 {
    let log2 = 64 - (n.max(2) - 1).leading_zeros() as u64;
    64 * n * log2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Builtin, Prob};
    use crate::rng::rng_from_seed;

    fn voter() -> Protocol {
        Protocol::builtin(Builtin::Voter, 1).unwrap()
    }

    fn minority(ell: usize) -> Protocol {
        Protocol::builtin(Builtin::Minority, ell).unwrap()
    }

    #[test]
    fn configuration_invariants() {
        assert!(Configuration::new(1, Opinion::One, 1).is_err());
        assert!(Configuration::new(4, Opinion::One, 0).is_err());
        assert!(Configuration::new(4, Opinion::Zero, 4).is_err());
        assert!(Configuration::new(4, Opinion::Zero, 5).is_err());
        let c = Configuration::new(10, Opinion::One, 3).unwrap();
        assert_eq!((c.non_source_ones(), c.non_source_zeros()), (2, 7));
    }

    #[test]
    fn adopt_prob_examples() {
        assert!((adopt_prob(&voter(), Opinion::Zero, 3, 10) - 0.3).abs() < 1e-15);
        assert_eq!(adopt_prob(&minority(3), Opinion::Zero, 0, 10), 0.0);
        // 3 p (1-p)^2 + p^3 at p = 1/2
        assert!((adopt_prob(&minority(3), Opinion::One, 8, 16) - 0.5).abs() < 1e-15);
        assert_eq!(
            adopt_prob_exact(&minority(3), Opinion::Zero, 4, 8),
            Some(BigRational::new(1.into(), 2.into()))
        );
    }

    #[test]
    fn adopt_prob_large_sample_matches_exact() {
        let p = minority(101);
        for x in [1, 17, 50, 64, 99] {
            let exact = adopt_prob_exact(&p, Opinion::One, x, 100).unwrap();
            let exact: f64 = num_traits::ToPrimitive::to_f64(&exact).unwrap();
            assert!((adopt_prob(&p, Opinion::One, x, 100) - exact).abs() < 1e-12, "x = {x}");
        }
        let small = minority(31);
        for x in [1, 33, 70] {
            let exact: f64 =
                num_traits::ToPrimitive::to_f64(&adopt_prob_exact(&small, Opinion::Zero, x, 100).unwrap()).unwrap();
            assert!((adopt_prob(&small, Opinion::Zero, x, 100) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn consensus_is_absorbing_for_both_steppers() {
        let mut rng = rng_from_seed(1);
        for p in [voter(), minority(3), minority(4)] {
            for (n, z) in [(10, Opinion::One), (10, Opinion::Zero)] {
                let c = Configuration::new(n, z, n * z.bit()).unwrap();
                for _ in 0..50 {
                    assert_eq!(step_parallel(&c, &p, &mut rng), c);
                    assert_eq!(step_sequential(&c, &p, &mut rng), c);
                    let s = AgentState::from_configuration(&c);
                    assert_eq!(step_parallel_agentwise(&s, &p, &mut rng, None), s);
                }
            }
        }
    }

    #[test]
    fn sequential_moves_at_most_one() {
        let mut rng = rng_from_seed(2);
        let p = minority(5);
        let mut c = Configuration::new(30, Opinion::Zero, 15).unwrap();
        for _ in 0..2000 {
            let next = step_sequential(&c, &p, &mut rng);
            assert!(next.x().abs_diff(c.x()) <= 1);
            c = next;
        }
    }

    #[test]
    fn voter_pair_frequencies() {
        // n = 2, z = 1, x = 1: the lone non-source agent adopts 1 w.p. 1/2
        let c = Configuration::new(2, Opinion::One, 1).unwrap();
        let mut rng = rng_from_seed(3);
        let trials = 40_000;
        let mut par = 0;
        let mut seq = 0;
        for _ in 0..trials {
            par += (step_parallel(&c, &voter(), &mut rng).x() == 2) as u32;
            seq += (step_sequential(&c, &voter(), &mut rng).x() == 2) as u32;
        }
        // 4 sigma of Binomial(40000, 1/2) is 400
        assert!((par as i64 - 20_000).abs() < 400, "{par}");
        assert!((seq as i64 - 20_000).abs() < 400, "{seq}");
    }

    #[test]
    fn agentwise_records_are_consistent() {
        let p = minority(3);
        let c = Configuration::new(6, Opinion::One, 3).unwrap();
        let s = AgentState::from_configuration(&c);
        let mut record = SampleRecord::new(6, 3);
        let mut rng = rng_from_seed(4);
        let next = step_parallel_agentwise(&s, &p, &mut rng, Some(&mut record));
        assert_eq!(record.len(), 1);
        assert_eq!(record.sample(0, 0), &[0, 0, 0]);
        for i in 0..6 {
            let k = record.sample(0, i).iter().filter(|&&j| s.opinions()[j as usize]).count();
            assert_eq!(record.counts[0][i] as usize, k);
        }
        assert!(next.opinions()[0]);
    }

    #[test]
    fn run_examples() {
        let mut rng = rng_from_seed(5);
        let at = Configuration::new(8, Opinion::One, 8).unwrap();
        let (out, _) = run_until_consensus(&at, &voter(), Mode::Parallel, 10, &mut rng, TraceLevel::None).unwrap();
        assert_eq!(out.status, Convergence::Converged { tau: 0 });

        let c = Configuration::new(2, Opinion::One, 1).unwrap();
        assert_eq!(
            run_until_consensus(&c, &voter(), Mode::Parallel, 0, &mut rng, TraceLevel::None).unwrap_err(),
            DynamicsError::ZeroMaxRounds
        );

        let leaky = Protocol::symmetric(
            "leaky-minority",
            3,
            vec![Prob::Float(0.1), Prob::ratio(1, 1), Prob::ratio(0, 1), Prob::ratio(1, 1)],
        )
        .unwrap();
        let c = Configuration::new(10, Opinion::One, 9).unwrap();
        let (out, trace) =
            run_until_consensus(&c, &leaky, Mode::Parallel, 50, &mut rng, TraceLevel::Counts).unwrap();
        assert_eq!(out.status, Convergence::Undefined);
        assert!(out.is_censored());
        assert_eq!(trace.counts.len(), 51);
    }

    #[test]
    fn voter_pair_mean_time_is_two() {
        let c = Configuration::new(2, Opinion::One, 1).unwrap();
        let mut rng = rng_from_seed(6);
        let trials = 20_000;
        let total: u64 = (0..trials)
            .map(|_| {
                run_until_consensus(&c, &voter(), Mode::Parallel, 1000, &mut rng, TraceLevel::None)
                    .unwrap()
                    .0
                    .tau()
                    .unwrap()
            })
            .sum();
        let mean = total as f64 / trials as f64;
        // sd of Geometric(1/2) is sqrt(2); 5 sigma over 20000 trials is 0.05
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn runs_are_deterministic() {
        let p = minority(3);
        let c = Configuration::new(20, Opinion::Zero, 7).unwrap();
        for mode in [Mode::Parallel, Mode::Sequential] {
            let a = run_until_consensus(&c, &p, mode, 30, &mut rng_from_seed(9), TraceLevel::Counts).unwrap();
            let b = run_until_consensus(&c, &p, mode, 30, &mut rng_from_seed(9), TraceLevel::Counts).unwrap();
            assert_eq!(a, b);
        }
        let a = run_until_consensus(&c, &p, Mode::Parallel, 30, &mut rng_from_seed(9), TraceLevel::Samples).unwrap();
        let b = run_until_consensus(&c, &p, Mode::Parallel, 30, &mut rng_from_seed(9), TraceLevel::Samples).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sequential_trace_steps_by_one_and_reports_rounds() {
        let c = Configuration::new(16, Opinion::One, 1).unwrap();
        let (out, trace) =
            run_until_consensus(&c, &voter(), Mode::Sequential, 10_000, &mut rng_from_seed(10), TraceLevel::Counts)
                .unwrap();
        assert!(trace.counts.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1));
        let tau = out.tau().unwrap();
        assert_eq!(out.tau_rounds().unwrap(), tau as f64 / 16.0);
        assert_eq!(out.activations(), tau);
    }

    #[test]
    fn default_budget() {
        assert_eq!(default_max_rounds(2), 128);
        assert_eq!(default_max_rounds(1024), 64 * 1024 * 10);
        assert_eq!(default_max_rounds(1000), 64 * 1000 * 10);
    }
}
