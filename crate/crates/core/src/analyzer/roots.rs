//! Real-root isolation on [0, 1].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::poly::RatPoly;
use super::AnalyzerError;

/// Bisection depth for exact isolating intervals (width 2^-64).
const EXACT_REFINE_BITS: u32 = 64;
/// Grid resolution used to bracket sign changes in float mode.
const FLOAT_GRID: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum RootValue {
    /// Exactly known rational root.
    Exact(BigRational),
    /// Irrational (or large-denominator) root in the open interval `(lo, hi)`.
    Isolated { lo: BigRational, hi: BigRational },
    /// Float-mode root bracketed to the requested tolerance.
    Approx { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: RootValue,
    pub approx: f64,
    pub multiplicity: u32,
    /// Float mode only: the derivative is nearly zero at the root, so a
    /// nearby tangency or a multiple root cannot be ruled out.
    pub low_confidence: bool,
}

impl Root {
    pub fn exact(&self) -> Option<&BigRational> {
        match &self.value {
            RootValue::Exact(r) => Some(r),
            _ => None,
        }
    }

    /// Upper end of the root's isolating interval (the root itself when exact).
    pub fn upper(&self) -> f64 {
        match &self.value {
            RootValue::Exact(r) => r.to_f64().unwrap_or(self.approx),
            RootValue::Isolated { hi, .. } => hi.to_f64().unwrap_or(self.approx),
            RootValue::Approx { hi, .. } => *hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub identically_zero: bool,
}

impl RootSet {
    pub fn identically_zero() -> RootSet {
        RootSet {
            roots: Vec::new(),
            identically_zero: true,
        }
    }

    /// Number of roots in [0, 1] counted with multiplicity.
    pub fn count_with_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn approx_values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.approx).collect()
    }
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Rational with the smallest denominator in the closed interval `[lo, hi]`,
/// for `0 <= lo <= hi`.
pub fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    debug_assert!(lo <= hi);
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    let next = &fl + BigRational::one();
    if next <= *hi {
        return next;
    }
    let inner = simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// All roots of `f` in [0, 1] with multiplicities, by square-free
/// decomposition and Sturm bisection. Rational roots are recovered exactly
/// whenever their denominator is below roughly 2^32.
pub fn isolate_exact(f: &RatPoly) -> RootSet {
    if f.is_zero() {
        return RootSet::identically_zero();
    }
    let zero = BigRational::zero();
    let one = BigRational::one();
    let mut roots = Vec::new();
    for (factor, multiplicity) in f.square_free_decomposition() {
        let sturm = factor.sturm_sequence();
        let mut push = |value: RootValue| {
            let approx = match &value {
                RootValue::Exact(r) => to_f64(r),
                RootValue::Isolated { lo, hi } => to_f64(&((lo + hi) * half())),
                RootValue::Approx { lo, hi } => 0.5 * (lo + hi),
            };
            roots.push(Root {
                value,
                approx,
                multiplicity,
                low_confidence: false,
            });
        };
        if factor.eval(&zero).is_zero() {
            push(RootValue::Exact(zero.clone()));
        }
        let mut stack = vec![(zero.clone(), one.clone())];
        while let Some((lo, hi)) = stack.pop() {
            match sturm.count_roots(&lo, &hi) {
                0 => {}
                1 => push(refine(&factor, &sturm, lo, hi)),
                _ => {
                    let mid = (&lo + &hi) * half();
                    stack.push((mid.clone(), hi));
                    stack.push((lo, mid));
                }
            }
        }
    }
    roots.sort_by(|a, b| a.approx.total_cmp(&b.approx));
    RootSet {
        roots,
        identically_zero: false,
    }
}

/// Narrows `(lo, hi]`, known to hold exactly one root of the square-free
/// `factor`, then tries to recognise the root as a small-denominator rational.
fn refine(
    factor: &RatPoly,
    sturm: &super::poly::SturmSequence,
    mut lo: BigRational,
    mut hi: BigRational,
) -> RootValue {
    if factor.eval(&hi).is_zero() {
        return RootValue::Exact(hi);
    }
    for _ in 0..EXACT_REFINE_BITS {
        let mid = (&lo + &hi) * half();
        if factor.eval(&mid).is_zero() {
            return RootValue::Exact(mid);
        }
        if sturm.count_roots(&lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let candidate = simplest_between(&lo, &hi);
    if factor.eval(&candidate).is_zero() {
        return RootValue::Exact(candidate);
    }
    RootValue::Isolated { lo, hi }
}

/// Evaluates a polynomial given by Bernstein coefficients on [0, 1].
pub fn de_casteljau(bernstein: &[f64], t: f64) -> f64 {
    if bernstein.is_empty() {
        return 0.0;
    }
    let mut work = bernstein.to_vec();
    let s = 1.0 - t;
    for level in 1..work.len() {
        for i in 0..work.len() - level {
            work[i] = s * work[i] + t * work[i + 1];
        }
    }
    work[0]
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative_f64(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

/// Float-mode isolation: sign changes on a uniform grid, refined by
/// bisection to width `tol`. Never reports a multiplicity above one; any
/// place where |f| dips near zero without a sign change, or two roots closer
/// than `tol`, is an explicit unresolved cluster.
pub fn isolate_float(bernstein: &[f64], monomial: &[f64], tol: f64) -> Result<RootSet, AnalyzerError> {
    let scale = bernstein.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
    if scale == 0.0 {
        return Ok(RootSet::identically_zero());
    }
    let zero_tol = 1e-12 * scale;
    let f = |t: f64| de_casteljau(bernstein, t);
    let df = derivative_f64(monomial);
    let dscale = df.iter().fold(0.0_f64, |m, c| m.max(c.abs())).max(scale);
    let grid: Vec<f64> = (0..=FLOAT_GRID).map(|i| i as f64 / FLOAT_GRID as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let is_zero = |v: f64| v.abs() <= zero_tol;

    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for i in 0..=FLOAT_GRID {
        let v = values[i];
        if is_zero(v) {
            // grid point sits on a root, or within numerical noise of one
            let left_sign = (0..i).rev().map(|j| values[j]).find(|v| !is_zero(*v));
            let right_sign = values[i + 1..].iter().copied().find(|v| !is_zero(*v));
            let already = brackets.last().is_some_and(|&(_, hi)| hi >= grid[i]);
            if !already {
                let touching = matches!((left_sign, right_sign), (Some(l), Some(r)) if l.signum() == r.signum());
                let interior = i > 0 && i < FLOAT_GRID;
                if touching && interior {
                    return Err(AnalyzerError::UnresolvedCluster { near: grid[i] });
                }
                brackets.push((grid[i], grid[i]));
            }
            continue;
        }
        if i < FLOAT_GRID {
            let w = values[i + 1];
            if !is_zero(w) && v.signum() != w.signum() {
                brackets.push((grid[i], grid[i + 1]));
            }
        }
        if i > 0 && i < FLOAT_GRID {
            let (u, w) = (values[i - 1], values[i + 1]);
            let local_min = v.abs() < u.abs() && v.abs() < w.abs();
            if local_min && u.signum() == v.signum() && w.signum() == v.signum() && v.abs() <= 1e-6 * scale {
                return Err(AnalyzerError::UnresolvedCluster { near: grid[i] });
            }
        }
    }

    let mut roots = Vec::new();
    for (mut lo, mut hi) in brackets {
        if lo < hi {
            let mut flo = f(lo);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
        }
        let approx = 0.5 * (lo + hi);
        let slope = horner(&df, approx).abs();
        roots.push(Root {
            value: RootValue::Approx { lo, hi },
            approx,
            multiplicity: 1,
            low_confidence: slope <= 1e-6 * dscale,
        });
    }
    for pair in roots.windows(2) {
        if pair[1].approx - pair[0].approx < tol {
            return Err(AnalyzerError::UnresolvedCluster { near: pair[0].approx });
        }
    }
    Ok(RootSet {
        roots,
        identically_zero: false,
    })
}
