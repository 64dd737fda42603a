use std::time::Instant;

use rayon::prelude::*;

use super::spec::{ExperimentSpec, SweepPoint};
use super::HarnessError;
use crate::dynamics::{run_until_consensus, Configuration, Mode, TraceLevel};
use crate::rng::{derive_seed, rng_from_seed};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "BITDISS_WORKERS";

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub n: u64,
    pub ell: usize,
    pub protocol: String,
    pub z: u64,
    pub x0: u64,
    pub seed: u64,
    pub trial: u64,
    /// Convergence time in parallel rounds; `None` when censored.
    pub tau: Option<f64>,
    pub censored: bool,
    pub activations: u64,
    pub wall_ms: f64,
}

/// Worker count: the flag wins, then the environment, then all cores.
pub fn resolve_workers(flag: Option<usize>) -> usize {
    flag.filter(|&w| w > 0)
        .or_else(|| std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&w: &usize| w > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |v| v.get()))
}

/// Seed of one trial.
pub fn trial_seed(master: u64, n: u64, x0: u64, trial: u64) -> u64 {
    derive_seed(master, &[n, x0, trial])
}

pub fn run_trial(point: &SweepPoint, mode: Mode, master: u64, trial: u64) -> ResultRow {
    let seed = trial_seed(master, point.n, point.x0, trial);
    let mut rng = rng_from_seed(seed);
    let c0 = Configuration::new(point.n, point.z, point.x0).expect("points are validated");
    let start = Instant::now();
    let (out, _) = run_until_consensus(&c0, &point.protocol, mode, point.max_rounds, &mut rng, TraceLevel::None)
        .expect("points are validated");
    let wall_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
    ResultRow {
        n: point.n,
        ell: point.protocol.ell(),
        protocol: point.protocol.name().to_string(),
        z: point.z.bit(),
        x0: point.x0,
        seed,
        trial,
        tau: out.tau_rounds(),
        censored: out.is_censored(),
        activations: out.activations(),
        wall_ms,
    }
}

/// Runs every trial of every point. Points are processed in canonical
/// `(n, x0)` order and `emit` sees each point's rows sorted by trial as soon
/// as the point completes; the returned rows are in the same order.
pub fn sweep<F>(spec: &ExperimentSpec, workers: Option<usize>, mut emit: F) -> Result<Vec<ResultRow>, HarnessError>
where
    F: FnMut(&[ResultRow]),
{
    let points = spec.points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(workers))
        .build()
        .map_err(|e| HarnessError::Cap(format!("cannot start workers: {e}")))?;
    let mut all = Vec::new();
    for point in &points {
        let mut rows: Vec<ResultRow> = pool.install(|| {
            (0..spec.trials)
                .into_par_iter()
                .map(|t| run_trial(point, spec.mode, spec.seed, t))
                .collect()
        });
        rows.sort_by_key(|r| r.trial);
        emit(&rows);
        all.extend(rows);
    }
    Ok(all)
}
