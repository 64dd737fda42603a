//! Exact Markov-chain computations on the aggregated count.
//!
//! For fixed `(protocol, n, z, mode)` the count `x` is a Markov chain on
//! `{0..n}`. Parallel rows are the law of `z + Bin(x-z, P1) + Bin(n-x-(1-z), P0)`;
//! sequential rows form a birth-death chain.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{adopt_prob, adopt_prob_exact, Configuration, DynamicsError, Mode};
use crate::numeric;
use crate::protocol::{Opinion, Protocol};

/// Largest `n` for which a full parallel matrix is built.
pub const DEFAULT_PARALLEL_CAP: u64 = 4096;
/// Largest `n` for which a full sequential (tridiagonal) matrix is built.
pub const DEFAULT_SEQUENTIAL_CAP: u64 = 1 << 20;
/// Rational rows are built for exact protocols up to this `n`.
pub const EXACT_CAP: u64 = 128;
/// Rational hitting-time solves are attempted up to this many unknowns.
pub const EXACT_SOLVE_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("n = {n} exceeds the oracle cap {cap}; use one_step_pmf for individual rows")]
    CapExceeded { n: u64, cap: u64 },
    #[error("target state {target} is outside 0..={n}")]
    BadTarget { target: u64, n: u64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

fn rat(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// States that violate the source invariant (`x = 0` with `z = 1`, or
/// `x = n` with `z = 0`) are unreachable; their rows are self-loops.
pub fn is_valid_state(n: u64, z: Opinion, x: u64) -> bool {
    Configuration::new(n, z, x).is_ok()
}

/// Exact law of the next count, as a vector over `{0..n}`.
pub fn one_step_pmf(p: &Protocol, c: &Configuration, mode: Mode) -> Vec<f64> {
    let n = c.n() as usize;
    let mut row = vec![0.0; n + 1];
    let x = c.x() as usize;
    let p1 = adopt_prob(p, Opinion::One, c.x(), c.n());
    let p0 = adopt_prob(p, Opinion::Zero, c.x(), c.n());
    match mode {
        Mode::Parallel => {
            let a = numeric::binomial_pmf(c.non_source_ones(), p1);
            let b = numeric::binomial_pmf(c.non_source_zeros(), p0);
            let z = c.z().bit() as usize;
            for (k, w) in numeric::convolve(&a, &b).into_iter().enumerate() {
                row[z + k] = w;
            }
        }
        Mode::Sequential => {
            let others = (c.n() - 1) as f64;
            let down = c.non_source_ones() as f64 / others * (1.0 - p1);
            let up = c.non_source_zeros() as f64 / others * p0;
            if x > 0 {
                row[x - 1] = down;
            }
            if x < n {
                row[x + 1] = up;
            }
            row[x] = 1.0 - down - up;
        }
    }
    row
}

/// Rational version of [`one_step_pmf`]; `None` unless the tables are exact.
pub fn one_step_pmf_exact(p: &Protocol, c: &Configuration, mode: Mode) -> Option<Vec<BigRational>> {
    let n = c.n() as usize;
    let x = c.x() as usize;
    let p1 = adopt_prob_exact(p, Opinion::One, c.x(), c.n())?;
    let p0 = adopt_prob_exact(p, Opinion::Zero, c.x(), c.n())?;
    let mut row = vec![BigRational::zero(); n + 1];
    match mode {
        Mode::Parallel => {
            let z = c.z().bit() as usize;
            let (weights, den) = if p1 == p0 {
                numeric::binomial_weights(c.non_source_ones() + c.non_source_zeros(), &p1)
            } else {
                let (a, da) = numeric::binomial_weights(c.non_source_ones(), &p1);
                let (b, db) = numeric::binomial_weights(c.non_source_zeros(), &p0);
                (numeric::convolve_int(&a, &b), da * db)
            };
            for (k, w) in weights.into_iter().enumerate() {
                row[z + k] = BigRational::new(w, den.clone());
            }
        }
        Mode::Sequential => {
            let others = rat(c.n() - 1);
            let down = rat(c.non_source_ones()) / &others * (BigRational::one() - p1);
            let up = rat(c.non_source_zeros()) / &others * p0;
            row[x] = BigRational::one() - &down - &up;
            if x > 0 {
                row[x - 1] = down;
            }
            if x < n {
                row[x + 1] = up;
            }
        }
    }
    Some(row)
}

/// Row-stochastic matrix over `{0..n}`.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    n: u64,
    z: Opinion,
    mode: Mode,
    rows: Vec<Vec<f64>>,
    exact: Option<Vec<Vec<BigRational>>>,
}

impl TransitionMatrix {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn z(&self) -> Opinion {
        self.z
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn row(&self, x: u64) -> &[f64] {
        &self.rows[x as usize]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn exact_rows(&self) -> Option<&[Vec<BigRational>]> {
        self.exact.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Largest `|sum(row) - 1|`.
    pub fn max_row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (numeric::compensated_sum(r.iter().copied()) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, &w)| w == 0.0 || i.abs_diff(j) <= 1)
        })
    }

    /// `sum_x' x' m[x][x']`.
    pub fn row_mean(&self, x: u64) -> f64 {
        numeric::compensated_sum(self.row(x).iter().enumerate().map(|(j, w)| j as f64 * w))
    }

    pub fn row_mean_exact(&self, x: u64) -> Option<BigRational> {
        let row = &self.exact.as_ref()?[x as usize];
        Some(
            row.iter()
                .enumerate()
                .fold(BigRational::zero(), |acc, (j, w)| acc + rat(j as u64) * w),
        )
    }
}

/// Full transition matrix with the default caps.
pub fn exact_transition_matrix(p: &Protocol, n: u64, z: Opinion, mode: Mode) -> Result<TransitionMatrix, OracleError> {
    let cap = match mode {
        Mode::Parallel => DEFAULT_PARALLEL_CAP,
        Mode::Sequential => DEFAULT_SEQUENTIAL_CAP,
    };
    transition_matrix_with_cap(p, n, z, mode, cap)
}

pub fn transition_matrix_with_cap(
    p: &Protocol,
    n: u64,
    z: Opinion,
    mode: Mode,
    cap: u64,
) -> Result<TransitionMatrix, OracleError> {
    if n > cap {
        return Err(OracleError::CapExceeded { n, cap });
    }
    // validates n >= 2
    Configuration::new(n, z, if z == Opinion::One { n } else { 0 })?;
    let exact = if p.is_exact() && n <= EXACT_CAP {
        let rows: Vec<Vec<BigRational>> = (0..=n)
            .into_par_iter()
            .map(|x| match Configuration::new(n, z, x) {
                Ok(c) => one_step_pmf_exact(p, &c, mode).expect("exact tables"),
                Err(_) => {
                    let mut row = vec![BigRational::zero(); n as usize + 1];
                    row[x as usize] = BigRational::one();
                    row
                }
            })
            .collect();
        Some(rows)
    } else {
        None
    };
    let rows: Vec<Vec<f64>> = match &exact {
        Some(rows) => rows.iter().map(|r| r.iter().map(to_f64).collect()).collect(),
        None => (0..=n)
            .into_par_iter()
            .map(|x| match Configuration::new(n, z, x) {
                Ok(c) => one_step_pmf(p, &c, mode),
                Err(_) => {
                    let mut row = vec![0.0; n as usize + 1];
                    row[x as usize] = 1.0;
                    row
                }
            })
            .collect(),
    };
    Ok(TransitionMatrix {
        n,
        z,
        mode,
        rows,
        exact,
    })
}

/// Expected hitting times of one target state.
#[derive(Clone, Debug)]
pub struct HittingProfile {
    pub target: u64,
    /// `h[x]`; `None` marks states from which the target is not hit almost
    /// surely (infinite expectation) and unreachable states.
    pub h: Vec<Option<f64>>,
    /// Rational solution, when the matrix is exact and small enough.
    pub exact: Option<Vec<Option<BigRational>>>,
    /// Largest relative residual of the first-step equations.
    pub residual: f64,
}

/// States from which the target is hit with probability one.
fn almost_sure_set(rows: &[Vec<f64>], target: usize) -> Vec<bool> {
    let len = rows.len();
    // backward reachability
    let mut reach = vec![false; len];
    reach[target] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..len {
            if !reach[i] && rows[i].iter().enumerate().any(|(j, &w)| w > 0.0 && reach[j]) {
                reach[i] = true;
                changed = true;
            }
        }
    }
    // drop states that can leak into the complement
    let mut good = reach;
    changed = true;
    while changed {
        changed = false;
        for i in 0..len {
            if i != target && good[i] && rows[i].iter().enumerate().any(|(j, &w)| w > 0.0 && !good[j]) {
                good[i] = false;
                changed = true;
            }
        }
    }
    good
}

/// Solves `h(target) = 0`, `h(x) = 1 + sum_y m[x][y] h(y)` on the states that
/// hit the target almost surely; all other states get `None`.
pub fn expected_hitting_time(m: &TransitionMatrix, target: u64) -> Result<HittingProfile, OracleError> {
    if target > m.n {
        return Err(OracleError::BadTarget { target, n: m.n });
    }
    let t = target as usize;
    let good = almost_sure_set(&m.rows, t);
    let unknowns: Vec<usize> = (0..m.rows.len()).filter(|&i| good[i] && i != t).collect();
    let mut index = vec![usize::MAX; m.rows.len()];
    for (k, &i) in unknowns.iter().enumerate() {
        index[i] = k;
    }

    let solution = if m.is_tridiagonal() {
        solve_tridiagonal(&m.rows, &unknowns, &index, t)
    } else {
        solve_dense(&m.rows, &unknowns, &index, t)
    };
    let mut h = vec![None; m.rows.len()];
    h[t] = Some(0.0);
    for (k, &i) in unknowns.iter().enumerate() {
        h[i] = Some(solution[k]);
    }

    let exact = match &m.exact {
        Some(rows) if unknowns.len() <= EXACT_SOLVE_CAP => {
            let sol = solve_exact(rows, &unknowns, &index);
            let mut out = vec![None; rows.len()];
            out[t] = Some(BigRational::zero());
            for (k, &i) in unknowns.iter().enumerate() {
                out[i] = Some(sol[k].clone());
            }
            // the float profile inherits the exact values
            for (k, &i) in unknowns.iter().enumerate() {
                h[i] = Some(to_f64(&sol[k]));
            }
            Some(out)
        }
        _ => None,
    };

    let residual = unknowns
        .iter()
        .map(|&i| {
            let hi = h[i].unwrap();
            let rhs = 1.0
                + numeric::compensated_sum(
                    m.rows[i]
                        .iter()
                        .enumerate()
                        .filter(|(_, &w)| w > 0.0)
                        .map(|(j, &w)| w * h[j].unwrap_or(0.0)),
                );
            (hi - rhs).abs() / hi.abs().max(1.0)
        })
        .fold(0.0, f64::max);

    Ok(HittingProfile {
        target,
        h,
        exact,
        residual,
    })
}

/// State elimination in the style of Grassmann, Taksar and Heyman: every
/// pivot is the total exit probability of the eliminated state, summed from
/// nonnegative terms, so no cancellation occurs even when expected hitting
/// times are astronomically large.
fn solve_dense(rows: &[Vec<f64>], unknowns: &[usize], index: &[usize], target: usize) -> Vec<f64> {
    let k = unknowns.len();
    let mut a = vec![vec![0.0; k]; k];
    let mut exit_target = vec![0.0; k];
    let mut reward = vec![1.0; k];
    for (r, &i) in unknowns.iter().enumerate() {
        for (j, &w) in rows[i].iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            if j == target {
                exit_target[r] += w;
            } else if index[j] != usize::MAX {
                a[r][index[j]] += w;
            }
        }
    }
    let mut exit = vec![0.0; k];
    for p in 0..k {
        exit[p] = numeric::compensated_sum(a[p][p + 1..].iter().copied().chain([exit_target[p]]));
        let (done, rest) = a.split_at_mut(p + 1);
        let pivot = &done[p];
        for (off, row) in rest.iter_mut().enumerate() {
            let i = p + 1 + off;
            let w = row[p];
            if w == 0.0 {
                continue;
            }
            let f = w / exit[p];
            for j in p + 1..k {
                row[j] += f * pivot[j];
            }
            exit_target[i] += f * exit_target[p];
            reward[i] += f * reward[p];
            row[p] = 0.0;
        }
    }
    let mut h = vec![0.0; k];
    for p in (0..k).rev() {
        let s = numeric::compensated_sum((p + 1..k).map(|j| a[p][j] * h[j]).chain([reward[p]]));
        h[p] = s / exit[p];
    }
    h
}

/// The same elimination for birth-death chains, in linear time: unknowns are
/// eliminated in increasing order, each folding into its right neighbour.
fn solve_tridiagonal(rows: &[Vec<f64>], unknowns: &[usize], index: &[usize], target: usize) -> Vec<f64> {
    let k = unknowns.len();
    let (mut left, mut right, mut exit_target, mut reward) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![1.0; k]);
    for (r, &i) in unknowns.iter().enumerate() {
        for j in [i.wrapping_sub(1), i + 1] {
            let Some(&w) = rows[i].get(j) else { continue };
            if w == 0.0 {
                continue;
            }
            if j == target {
                exit_target[r] += w;
            } else if index[j] != usize::MAX {
                if j < i {
                    left[r] = w;
                } else {
                    right[r] = w;
                }
            }
        }
    }
    let mut exit = vec![0.0; k];
    for r in 0..k {
        if r > 0 && left[r] > 0.0 {
            let f = left[r] / exit[r - 1];
            exit_target[r] += f * exit_target[r - 1];
            reward[r] += f * reward[r - 1];
        }
        exit[r] = right[r] + exit_target[r];
    }
    let mut h = vec![0.0; k];
    for r in (0..k).rev() {
        let next = if r + 1 < k { right[r] * h[r + 1] } else { 0.0 };
        h[r] = (reward[r] + next) / exit[r];
    }
    h
}

fn solve_exact(rows: &[Vec<BigRational>], unknowns: &[usize], index: &[usize]) -> Vec<BigRational> {
    let k = unknowns.len();
    let mut a = vec![vec![BigRational::zero(); k + 1]; k];
    for (r, &i) in unknowns.iter().enumerate() {
        a[r][r] = BigRational::one();
        a[r][k] = BigRational::one();
        for (j, w) in rows[i].iter().enumerate() {
            if !w.is_zero() && index[j] != usize::MAX {
                a[r][index[j]] -= w;
            }
        }
    }
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero()).expect("nonsingular system");
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &pivot_row[col];
            for (v, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *v -= &factor * p;
            }
        }
    }
    (0..k).map(|r| &a[r][k] / &a[r][r]).collect()
}

/// `cdf[t] = Pr[first hit of target <= t]` from `start`, for `t in 0..=horizon`.
pub fn first_hit_cdf(m: &TransitionMatrix, start: u64, target: u64, horizon: usize) -> Result<Vec<f64>, OracleError> {
    if target > m.n {
        return Err(OracleError::BadTarget { target, n: m.n });
    }
    if start > m.n {
        return Err(OracleError::BadTarget { target: start, n: m.n });
    }
    let len = m.rows.len();
    let t = target as usize;
    let mut dist = vec![0.0; len];
    dist[start as usize] = 1.0;
    let mut cdf = Vec::with_capacity(horizon + 1);
    let mut hit = dist[t];
    dist[t] = 0.0;
    cdf.push(hit);
    for _ in 0..horizon {
        let mut next = vec![0.0; len];
        for (i, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (j, &w) in m.rows[i].iter().enumerate() {
                next[j] += mass * w;
            }
        }
        hit += next[t];
        next[t] = 0.0;
        dist = next;
        cdf.push(hit.min(1.0));
    }
    Ok(cdf)
}

/// `Pr[x' > threshold | c]` from the exact one-step law, summed from the top
/// so that tiny tails keep their relative precision.
pub fn upper_tail(p: &Protocol, c: &Configuration, threshold: f64) -> f64 {
    let pmf = one_step_pmf(p, c, Mode::Parallel);
    numeric::compensated_sum(
        pmf.iter()
            .enumerate()
            .rev()
            .take_while(|(x, _)| *x as f64 > threshold)
            .map(|(_, &w)| w),
    )
}

/// Upper tail of the exact one-step law in log space, for tails far below
/// the smallest positive double.
pub fn upper_tail_ln(p: &Protocol, c: &Configuration, threshold: f64) -> f64 {
    let n = c.n();
    let p1 = adopt_prob(p, Opinion::One, c.x(), n);
    let p0 = adopt_prob(p, Opinion::Zero, c.x(), n);
    let ln_pmf = |m: u64, q: f64| -> Vec<f64> { (0..=m).map(|k| numeric::binomial_ln_pmf(m, k, q)).collect() };
    let a = ln_pmf(c.non_source_ones(), p1);
    let b = ln_pmf(c.non_source_zeros(), p0);
    let z = c.z().bit();
    let mut terms = Vec::new();
    for (i, la) in a.iter().enumerate() {
        for (j, lb) in b.iter().enumerate() {
            if (z + (i + j) as u64) as f64 > threshold {
                terms.push(la + lb);
            }
        }
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// Whether every entry of `v` is a nonnegative exact rational summing to one.
pub fn is_exact_distribution(v: &[BigRational]) -> bool {
    v.iter().all(|w| !w.is_negative()) && v.iter().fold(BigRational::zero(), |a, w| a + w).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Builtin;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn voter() -> Protocol {
        Protocol::builtin(Builtin::Voter, 1).unwrap()
    }

    #[test]
    fn voter_two_rows() {
        let m = exact_transition_matrix(&voter(), 2, Opinion::One, Mode::Parallel).unwrap();
        let rows = m.exact_rows().unwrap();
        assert_eq!(rows[1], vec![r(0, 1), r(1, 2), r(1, 2)]);
        assert_eq!(rows[2], vec![r(0, 1), r(0, 1), r(1, 1)]);
    }

    #[test]
    fn voter_three_row_one() {
        let m = exact_transition_matrix(&voter(), 3, Opinion::One, Mode::Parallel).unwrap();
        assert_eq!(m.exact_rows().unwrap()[1], vec![r(0, 1), r(4, 9), r(4, 9), r(1, 9)]);
        let float = one_step_pmf(&voter(), &Configuration::new(3, Opinion::One, 1).unwrap(), Mode::Parallel);
        assert!((float[2] - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn consensus_rows_are_point_masses() {
        let p = Protocol::builtin(Builtin::Minority, 5).unwrap();
        for z in [Opinion::Zero, Opinion::One] {
            for mode in [Mode::Parallel, Mode::Sequential] {
                let m = exact_transition_matrix(&p, 12, z, mode).unwrap();
                let target = 12 * z.bit();
                let row = &m.exact_rows().unwrap()[target as usize];
                assert!(row.iter().enumerate().all(|(j, w)| if j as u64 == target { w.is_one() } else { w.is_zero() }));
                assert!(m.exact_rows().unwrap().iter().all(|row| is_exact_distribution(row)));
            }
        }
    }

    #[test]
    fn hitting_times_voter() {
        let m2 = exact_transition_matrix(&voter(), 2, Opinion::One, Mode::Parallel).unwrap();
        let h2 = expected_hitting_time(&m2, 2).unwrap();
        assert_eq!(h2.exact.as_ref().unwrap()[1], Some(r(2, 1)));
        assert_eq!(h2.h[2], Some(0.0));
        assert_eq!(h2.h[0], None);

        let m3 = exact_transition_matrix(&voter(), 3, Opinion::One, Mode::Parallel).unwrap();
        let h3 = expected_hitting_time(&m3, 3).unwrap();
        let exact = h3.exact.unwrap();
        assert_eq!(exact[1], Some(r(27, 7)));
        assert_eq!(exact[2], Some(r(18, 7)));
        assert!(h3.residual < 1e-12);
    }

    #[test]
    fn float_and_tridiagonal_solvers_agree_with_exact() {
        let p = Protocol::builtin(Builtin::Minority, 3).unwrap();
        for mode in [Mode::Parallel, Mode::Sequential] {
            let m = exact_transition_matrix(&p, 16, Opinion::One, mode).unwrap();
            let exact = expected_hitting_time(&m, 16).unwrap();
            let float_only = TransitionMatrix {
                exact: None,
                ..m.clone()
            };
            let float = expected_hitting_time(&float_only, 16).unwrap();
            assert!(float.residual < 1e-12);
            for x in 1..=16 {
                let e = to_f64(exact.exact.as_ref().unwrap()[x].as_ref().unwrap());
                let f = float.h[x].unwrap();
                assert!((e - f).abs() <= 1e-12 * e.max(1.0), "{mode} x={x}: {e} vs {f}");
            }
        }
    }

    #[test]
    fn unreachable_target_is_infinite() {
        // Protocol that never adopts 1: target n is unreachable from below
        let p = Protocol::symmetric("stuck", 1, vec![crate::protocol::Prob::ratio(0, 1); 2]).unwrap();
        let m = exact_transition_matrix(&p, 5, Opinion::One, Mode::Parallel).unwrap();
        let h = expected_hitting_time(&m, 5).unwrap();
        assert_eq!(h.h[5], Some(0.0));
        assert!(h.h[..5].iter().all(Option::is_none));
    }

    #[test]
    fn sequential_matrix_is_tridiagonal() {
        let p = Protocol::builtin(Builtin::Minority, 7).unwrap();
        let m = exact_transition_matrix(&p, 40, Opinion::Zero, Mode::Sequential).unwrap();
        assert!(m.is_tridiagonal());
        assert!(m.max_row_sum_error() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            transition_matrix_with_cap(&voter(), 100, Opinion::One, Mode::Parallel, 64).unwrap_err(),
            OracleError::CapExceeded { n: 100, cap: 64 }
        );
    }

    #[test]
    fn first_hit_cdf_voter_pair_is_geometric() {
        let m = exact_transition_matrix(&voter(), 2, Opinion::One, Mode::Parallel).unwrap();
        let cdf = first_hit_cdf(&m, 1, 2, 5).unwrap();
        for (t, v) in cdf.iter().enumerate() {
            assert!((v - (1.0 - 0.5f64.powi(t as i32))).abs() < 1e-15);
        }
    }

    #[test]
    fn log_tail_matches_linear_tail() {
        let p = Protocol::builtin(Builtin::Minority, 3).unwrap();
        let c = Configuration::new(40, Opinion::One, 20).unwrap();
        let lin = upper_tail(&p, &c, 30.0);
        let log = upper_tail_ln(&p, &c, 30.0);
        assert!((lin.ln() - log).abs() < 1e-9);
    }
}
