//! Backward coalescing random walks for the Voter dynamics with `ell = 1`.
//!
//! With one sample per agent and round, agent `j` at round `t + 1` copies the
//! opinion of `S_t(j)` at round `t`, where the source samples itself. Reading
//! the samples backwards from `W_T(i) = i` through `W_t(i) = S_t(W_{t+1}(i))`
//! gives `X_T(i) = X_0(W_0(i))`; a walk that reaches the source (index 0)
//! stays there, and then `X_T(i) = z`.

use rand::Rng;
use thiserror::Error;

use crate::dynamics::{step_parallel_agentwise, AgentState, Configuration, SampleRecord};
use crate::protocol::{Builtin, Opinion, Protocol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualError {
    #[error("record has {have} rounds, horizon needs {need}")]
    RecordTooShort { have: usize, need: usize },
    #[error("dual walks need ell = 1, record has ell = {0}")]
    WrongSampleSize(usize),
    #[error("history and dual disagree: {0}")]
    Mismatch(String),
}

/// `positions[i][t] = W_t(i)` for `t in 0..=horizon`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualTrace {
    pub horizon: usize,
    pub positions: Vec<Vec<u32>>,
    pub coalesced: Vec<bool>,
}

impl DualTrace {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn walk(&self, i: usize) -> &[u32] {
        &self.positions[i]
    }

    pub fn all_coalesced(&self) -> bool {
        self.coalesced.iter().all(|&c| c)
    }

    /// Smallest `s` such that every walk is at the source at round
    /// `horizon - s`, if any.
    pub fn coalescence_steps(&self) -> Option<usize> {
        (0..=self.horizon).find(|&s| self.positions.iter().all(|w| w[self.horizon - s] == 0))
    }

    /// Walks that reach 0 never leave it, going backwards in time.
    pub fn sink_property_holds(&self) -> bool {
        self.positions.iter().all(|w| {
            let first = w.iter().rposition(|&v| v == 0);
            first.is_none_or(|t| w[..=t].iter().all(|&v| v == 0))
        })
    }
}

/// Builds all `n` walks over the first `horizon` recorded rounds.
pub fn backward_walks(record: &SampleRecord, horizon: usize) -> Result<DualTrace, DualError> {
    if record.ell != 1 {
        return Err(DualError::WrongSampleSize(record.ell));
    }
    if record.len() < horizon {
        return Err(DualError::RecordTooShort {
            have: record.len(),
            need: horizon,
        });
    }
    let n = record.n;
    let mut positions = vec![vec![0u32; horizon + 1]; n];
    for (i, walk) in positions.iter_mut().enumerate() {
        walk[horizon] = i as u32;
        for t in (0..horizon).rev() {
            let at = walk[t + 1] as usize;
            walk[t] = if at == 0 { 0 } else { record.rounds[t][at] };
        }
    }
    let coalesced = positions.iter().map(|w| w.contains(&0)).collect();
    Ok(DualTrace {
        horizon,
        positions,
        coalesced,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DualReport {
    pub coalesced: usize,
    pub checked: usize,
    /// Agents whose walk hit the source but who do not hold `z` at the horizon.
    pub violations: Vec<usize>,
    /// Agents with `X_T(i) != X_0(W_0(i))`.
    pub replay_mismatches: Vec<usize>,
}

impl DualReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.replay_mismatches.is_empty()
    }
}

/// Checks the dual implication against the opinion vectors `history[0..=T]`
/// of the forward run that produced the record.
pub fn verify_dual_implication(history: &[Vec<bool>], z: Opinion, dual: &DualTrace) -> Result<DualReport, DualError> {
    let t = dual.horizon;
    if history.len() <= t {
        return Err(DualError::Mismatch(format!(
            "history has {} states, horizon is {t}",
            history.len()
        )));
    }
    if history[0].len() != dual.n() {
        return Err(DualError::Mismatch(format!(
            "history has {} agents, dual has {}",
            history[0].len(),
            dual.n()
        )));
    }
    let zb = z == Opinion::One;
    if history[0][0] != zb {
        return Err(DualError::Mismatch("source opinion differs from z".into()));
    }
    let mut report = DualReport {
        checked: dual.n(),
        ..DualReport::default()
    };
    for i in 0..dual.n() {
        if history[t][i] != history[0][dual.positions[i][0] as usize] {
            report.replay_mismatches.push(i);
        }
        if dual.coalesced[i] {
            report.coalesced += 1;
            if history[t][i] != zb {
                report.violations.push(i);
            }
        }
    }
    Ok(report)
}

/// Runs the Voter dynamics with `ell = 1` at the agent level for exactly
/// `horizon` rounds, recording every sample. Returns the record and the
/// opinion vectors at rounds `0..=horizon`.
pub fn record_voter_run<R: Rng + ?Sized>(
    c0: &Configuration,
    horizon: usize,
    rng: &mut R,
) -> (SampleRecord, Vec<Vec<bool>>) {
    let voter = Protocol::builtin(Builtin::Voter, 1).expect("voter is valid");
    let mut state = AgentState::from_configuration(c0);
    let mut record = SampleRecord::new(c0.n() as usize, 1);
    let mut history = Vec::with_capacity(horizon + 1);
    history.push(state.opinions().to_vec());
    for _ in 0..horizon {
        state = step_parallel_agentwise(&state, &voter, rng, Some(&mut record));
        history.push(state.opinions().to_vec());
    }
    (record, history)
}

/// Steps until every walk has reached the source, with fresh randomness;
/// walks on the same agent share its sample.
pub fn coalescence_time<R: Rng + ?Sized>(n: usize, rng: &mut R) -> u64 {
    let mut occupied: Vec<usize> = (1..n).collect();
    let mut seen = vec![false; n];
    let mut t = 0;
    while !occupied.is_empty() {
        t += 1;
        let mut next = Vec::with_capacity(occupied.len());
        for _ in &occupied {
            let j = rng.random_range(0..n);
            if j != 0 && !seen[j] {
                seen[j] = true;
                next.push(j);
            }
        }
        for &j in &next {
            seen[j] = false;
        }
        occupied = next;
    }
    t
}

/// `Pr[one walk has not reached the source after t steps] = (1 - 1/n)^t`.
pub fn non_coalescence_probability(n: usize, t: u64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    (1.0 - 1.0 / n as f64).powf(t as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoalescenceSummary {
    pub n: usize,
    pub samples: Vec<u64>,
    pub mean: f64,
    pub median: u64,
    pub q90: u64,
    pub max: u64,
}

impl CoalescenceSummary {
    pub fn from_samples(n: usize, mut samples: Vec<u64>) -> CoalescenceSummary {
        samples.sort_unstable();
        let len = samples.len();
        let q = |f: f64| -> u64 {
            if len == 0 {
                0
            } else {
                samples[((f * len as f64).ceil() as usize).clamp(1, len) - 1]
            }
        };
        let mean = if len == 0 {
            0.0
        } else {
            samples.iter().sum::<u64>() as f64 / len as f64
        };
        CoalescenceSummary {
            n,
            mean,
            median: q(0.5),
            q90: q(0.9),
            max: samples.last().copied().unwrap_or(0),
            samples,
        }
    }

    /// Fraction of samples `<= t`.
    pub fn fraction_by(&self, t: u64) -> f64 {
        if self.samples.is_empty() {
            return 1.0;
        }
        self.samples.partition_point(|&s| s <= t) as f64 / self.samples.len() as f64
    }
}

pub fn coalescence_summary<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> CoalescenceSummary {
    let samples = (0..trials).map(|_| coalescence_time(n, rng)).collect();
    CoalescenceSummary::from_samples(n, samples)
}
