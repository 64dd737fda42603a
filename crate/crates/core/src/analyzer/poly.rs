//! Dense univariate polynomials over the rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficients in increasing degree; no trailing zeros, so the zero
/// polynomial has an empty coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> RatPoly {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> RatPoly {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> RatPoly {
        RatPoly::new(vec![c])
    }

    /// Convenience for tests and fixtures: integer coefficients, low degree first.
    pub fn from_ints(coeffs: &[i64]) -> RatPoly {
        RatPoly::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        let v = self.eval(x);
        if v.is_zero() {
            Ordering::Equal
        } else if v.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn derivative(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &BigRational) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> RatPoly {
        match self.leading() {
            Some(lc) => self.scale(&lc.recip()),
            None => RatPoly::zero(),
        }
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lc = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree().filter(|&nd| nd >= dd) else {
            return (RatPoly::zero(), self.clone());
        };
        let mut quot = vec![BigRational::zero(); nd - dd + 1];
        for shift in (0..=nd - dd).rev() {
            let top = &rem[shift + dd];
            if top.is_zero() {
                continue;
            }
            let q = top / &lc;
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] = &rem[shift + i] - &q * d;
            }
            quot[shift] = q;
        }
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    /// Exact quotient; the caller guarantees divisibility.
    pub fn exact_div(&self, divisor: &RatPoly) -> RatPoly {
        let (q, r) = self.div_rem(divisor);
        debug_assert!(r.is_zero(), "non-exact polynomial division");
        q
    }

    /// Monic greatest common divisor (zero when both inputs are zero).
    pub fn gcd(a: &RatPoly, b: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Yun's algorithm: returns `(factor, multiplicity)` with square-free,
    /// pairwise coprime, non-constant monic factors whose product (with
    /// multiplicities) equals `self` up to a constant.
    pub fn square_free_decomposition(&self) -> Vec<(RatPoly, u32)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let df = self.derivative();
        let a0 = RatPoly::gcd(self, &df);
        let mut b = self.exact_div(&a0);
        let c = df.exact_div(&a0);
        let mut d = &c - &b.derivative();
        let mut mult = 1u32;
        while b.degree().unwrap_or(0) > 0 {
            let a = RatPoly::gcd(&b, &d);
            let next_b = b.exact_div(&a);
            let next_c = d.exact_div(&a);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a, mult));
            }
            d = &next_c - &next_b.derivative();
            b = next_b;
            mult += 1;
        }
        out
    }

    /// Canonical Sturm sequence `p, p', -rem(p, p'), ...`.
    pub fn sturm_sequence(&self) -> SturmSequence {
        let mut seq = vec![self.clone()];
        if !self.is_zero() {
            let mut prev = self.clone();
            let mut cur = self.derivative();
            while !cur.is_zero() {
                let (_, r) = prev.div_rem(&cur);
                seq.push(cur.clone());
                prev = cur;
                cur = -r;
            }
        }
        SturmSequence { seq }
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;

    fn add(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RatPoly::new(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
                    match rhs.coeffs.get(i) {
                        Some(b) => a + b,
                        None => a,
                    }
                })
                .collect(),
        )
    }
}

impl Neg for RatPoly {
    type Output = RatPoly;

    fn neg(self) -> RatPoly {
        RatPoly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;

    fn sub(self, rhs: &RatPoly) -> RatPoly {
        self + &(-rhs.clone())
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;

    fn mul(self, rhs: &RatPoly) -> RatPoly {
        if self.is_zero() || rhs.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "p")?,
                (1, false) => write!(f, "{a}*p")?,
                (_, true) => write!(f, "p^{i}")?,
                (_, false) => write!(f, "{a}*p^{i}")?,
            }
        }
        Ok(())
    }
}

/// A Sturm sequence of a square-free polynomial.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    seq: Vec<RatPoly>,
}

impl SturmSequence {
    /// Sign changes at `x`, zeros skipped.
    pub fn variations(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut last = Ordering::Equal;
        for p in &self.seq {
            let s = p.sign_at(x);
            if s == Ordering::Equal {
                continue;
            }
            if last != Ordering::Equal && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct roots in the half-open interval `(a, b]`.
    pub fn count_roots(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}
