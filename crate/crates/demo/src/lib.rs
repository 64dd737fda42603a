//! Browser bindings: each export takes plain arguments and returns a JSON
//! string, `{"error": ...}` on bad input. The `*_json` functions hold the
//! logic and run natively too. Integers cross the boundary as `u32` so
//! JavaScript can pass plain numbers.

use bitdiss::analyzer::{analysis_report, characteristic_poly};
use bitdiss::dual::coalescence_summary;
use bitdiss::dynamics::{run_until_consensus, Configuration, Mode, TraceLevel};
use bitdiss::protocol::{Builtin, Opinion, Prob, Protocol};
use bitdiss::rng::rng_from_seed;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

pub const MAX_N: u64 = 1 << 20;
pub const MAX_TRACE: u64 = 200_000;
pub const MAX_WALK_WORK: u64 = 50_000_000;
const CURVE_POINTS: usize = 201;

fn table(text: &str) -> Result<Vec<Prob>, String> {
    text.split(',').map(Prob::parse).collect()
}

/// A built-in when `builtin` is non-empty, otherwise the comma-separated
/// tables, entries as `p/q`, integers or decimals.
pub fn protocol_from(builtin: &str, ell: usize, g0: &str, g1: &str) -> Result<Protocol, String> {
    if !builtin.trim().is_empty() {
        let kind: Builtin = builtin.trim().parse().map_err(|e| format!("{e}"))?;
        return Protocol::builtin(kind, ell).map_err(|e| e.to_string());
    }
    let (g0, g1) = (table(g0)?, table(g1)?);
    if g0.len() != g1.len() || g0.is_empty() {
        return Err(format!("tables need equal length ell + 1, got {} and {}", g0.len(), g1.len()));
    }
    Protocol::new("custom", g0.len() - 1, g0, g1).map_err(|e| e.to_string())
}

fn error(e: impl std::fmt::Display) -> Value {
    json!({ "error": e.to_string() })
}

pub fn analyze_json(builtin: &str, ell: usize, g0: &str, g1: &str) -> Value {
    let p = match protocol_from(builtin, ell, g0, g1) {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    let f = characteristic_poly(&p);
    let curve: Vec<[f64; 2]> = (0..CURVE_POINTS)
        .map(|i| {
            let x = i as f64 / (CURVE_POINTS - 1) as f64;
            [x, f.eval(x)]
        })
        .collect();
    json!({ "report": analysis_report(&p), "curve": curve })
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_json(
    builtin: &str,
    ell: usize,
    g0: &str,
    g1: &str,
    n: u64,
    z: u8,
    x0: u64,
    max_rounds: u64,
    sequential: bool,
    seed: u64,
) -> Value {
    let p = match protocol_from(builtin, ell, g0, g1) {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    if !(2..=MAX_N).contains(&n) {
        return error(format!("n must lie in 2..={MAX_N}"));
    }
    let mode = if sequential { Mode::Sequential } else { Mode::Parallel };
    let steps = if sequential { max_rounds.saturating_mul(n) } else { max_rounds };
    if steps == 0 || steps > MAX_TRACE {
        return error(format!("at most {MAX_TRACE} recorded steps per run"));
    }
    let Some(z) = Opinion::from_bit(z) else {
        return error("z must be 0 or 1");
    };
    let c0 = match Configuration::new(n, z, x0) {
        Ok(c) => c,
        Err(e) => return error(e),
    };
    let mut rng = rng_from_seed(seed);
    match run_until_consensus(&c0, &p, mode, max_rounds, &mut rng, TraceLevel::Counts) {
        Ok((out, trace)) => json!({
            "n": n,
            "mode": mode.to_string(),
            "status": format!("{:?}", out.status),
            "tau": out.tau(),
            "tau_rounds": out.tau_rounds(),
            "counts": trace.counts,
        }),
        Err(e) => error(e),
    }
}

pub fn coalescence_json(n: u64, trials: u64, seed: u64) -> Value {
    if !(2..=MAX_N).contains(&n) || trials == 0 {
        return error("need n >= 2 and at least one trial");
    }
    // expected work is about 2 n rounds over n walks per trial
    if trials.saturating_mul(n).saturating_mul(n) > MAX_WALK_WORK {
        return error("trials * n^2 too large for the browser");
    }
    let mut rng = rng_from_seed(seed);
    let s = coalescence_summary(n as usize, trials as usize, &mut rng);
    let mut histogram: Vec<[u64; 2]> = Vec::new();
    for &t in &s.samples {
        match histogram.last_mut() {
            Some(last) if last[0] == t => last[1] += 1,
            _ => histogram.push([t, 1]),
        }
    }
    let horizon = 2.0 * n as f64 * (n as f64).ln();
    json!({
        "n": n,
        "trials": trials,
        "mean": s.mean,
        "median": s.median,
        "q90": s.q90,
        "max": s.max,
        "histogram": histogram,
        "two_n_ln_n": horizon,
        "fraction_by_two_n_ln_n": s.fraction_by(horizon.floor() as u64),
    })
}

/// Characteristic polynomial, roots and classification, plus `curve`: F sampled on [0, 1].
#[wasm_bindgen]
pub fn analyze(builtin: &str, ell: usize, g0: &str, g1: &str) -> String {
    analyze_json(builtin, ell, g0, g1).to_string()
}

/// One run; `counts` is the trajectory of the number of ones.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn simulate(
    builtin: &str,
    ell: usize,
    g0: &str,
    g1: &str,
    n: u32,
    z: u8,
    x0: u32,
    max_rounds: u32,
    sequential: bool,
    seed: u32,
) -> String {
    simulate_json(builtin, ell, g0, g1, n.into(), z, x0.into(), max_rounds.into(), sequential, seed.into()).to_string()
}

/// Histogram of Voter coalescence times of the backward walks.
#[wasm_bindgen]
pub fn coalescence(n: u32, trials: u32, seed: u32) -> String {
    coalescence_json(n.into(), trials.into(), seed.into()).to_string()
}
