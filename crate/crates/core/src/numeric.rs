//! Binomial probabilities, float and exact, and compensated convolution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use statrs::function::factorial::ln_binomial;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Pmf of Binomial(m, q) on {0..m}. Ratios are propagated outward from the
/// mode and the result normalized, so tail entries that underflow become
/// zero without disturbing the rest.
pub fn binomial_pmf(m: u64, q: f64) -> Vec<f64> {
    let len = m as usize + 1;
    let mut pmf = vec![0.0; len];
    if q <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if q >= 1.0 {
        pmf[len - 1] = 1.0;
        return pmf;
    }
    let odds = q / (1.0 - q);
    let mode = (((m + 1) as f64 * q).floor() as usize).min(len - 1);
    pmf[mode] = 1.0;
    for k in mode..len - 1 {
        pmf[k + 1] = pmf[k] * (m as usize - k) as f64 / (k + 1) as f64 * odds;
    }
    for k in (0..mode).rev() {
        pmf[k] = pmf[k + 1] * (k + 1) as f64 / ((m as usize - k) as f64 * odds);
    }
    let total = compensated_sum(pmf.iter().copied());
    pmf.iter_mut().for_each(|w| *w /= total);
    pmf
}

/// `ln Pr[Binomial(m, q) = k]`.
pub fn binomial_ln_pmf(m: u64, k: u64, q: f64) -> f64 {
    if q <= 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q >= 1.0 {
        return if k == m { 0.0 } else { f64::NEG_INFINITY };
    }
    ln_binomial(m, k) + k as f64 * q.ln() + (m - k) as f64 * (-q).ln_1p()
}

/// Mixture `sum_k Binomial(ell, q)[k] * table[k]`.
pub fn binomial_mixture(table: &[f64], q: f64) -> f64 {
    let ell = table.len() as u64 - 1;
    let pmf = binomial_pmf(ell, q);
    compensated_sum(pmf.iter().zip(table).map(|(w, g)| w * g)).clamp(0.0, 1.0)
}

/// Discrete convolution with compensated accumulation per output entry.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = a.len() + b.len() - 1;
    (0..len)
        .map(|s| {
            let lo = s.saturating_sub(b.len() - 1);
            let hi = s.min(a.len() - 1);
            compensated_sum((lo..=hi).map(|i| a[i] * b[s - i]))
        })
        .collect()
}

pub fn choose(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Integer weights of Binomial(m, a/b): `C(m,k) a^k (b-a)^(m-k)`, all over
/// the common denominator `b^m`. `q` must lie in [0, 1].
pub fn binomial_weights(m: u64, q: &BigRational) -> (Vec<BigInt>, BigInt) {
    let a = q.numer().clone();
    let b = q.denom().clone();
    let c = &b - &a;
    let len = m as usize + 1;
    let mut a_pow = vec![BigInt::one(); len];
    let mut c_pow = vec![BigInt::one(); len];
    for i in 1..len {
        a_pow[i] = &a_pow[i - 1] * &a;
        c_pow[i] = &c_pow[i - 1] * &c;
    }
    let mut coeff = BigInt::one();
    let weights = (0..len)
        .map(|k| {
            if k > 0 {
                coeff = &coeff * BigInt::from(m - k as u64 + 1) / BigInt::from(k as u64);
            }
            &coeff * &a_pow[k] * &c_pow[len - 1 - k]
        })
        .collect();
    (weights, num_traits::pow(b, len - 1))
}

/// Exact pmf of Binomial(m, q).
pub fn binomial_pmf_exact(m: u64, q: &BigRational) -> Vec<BigRational> {
    let (w, d) = binomial_weights(m, q);
    w.into_iter().map(|x| BigRational::new(x, d.clone())).collect()
}

/// Integer convolution.
pub fn convolve_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn convolve_exact(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
