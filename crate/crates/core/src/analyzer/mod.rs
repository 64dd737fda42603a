//! The characteristic polynomial of a protocol, its roots on [0, 1], and the
//! sign-based classification that locates a slow starting configuration.
//!
//! For a protocol with tables `g0`, `g1` and sample size `ell`,
//!
//! ```text
//! F(p) = -p + sum_k C(ell, k) p^k (1-p)^(ell-k) (p g1(k) + (1-p) g0(k))
//! ```
//!
//! is the expected one-round change of the fraction of ones at fraction `p`,
//! up to an O(1/n) correction from the source. Exact tables give an exact
//! polynomial; tables with decimal entries put the analyzer in float mode.

pub mod poly;
pub mod report;
pub mod roots;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::dynamics::Configuration;
use crate::numeric;
use crate::protocol::{validate, Opinion, Protocol, Violation};

pub use poly::RatPoly;
pub use report::{analysis_report, AnalysisReport, RootReport};
pub use roots::{Root, RootSet, RootValue};

/// Default bracketing tolerance for float-mode roots.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyzerError {
    #[error("protocol is not well formed (violates {})", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))]
    NotWellFormed(Vec<Violation>),
    #[error("float-mode roots near p = {near} cannot be separated; multiplicity unknown")]
    UnresolvedCluster { near: f64 },
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// F in both the monomial basis and the degree `ell+1` Bernstein basis.
#[derive(Clone, Debug)]
pub struct CharacteristicPolynomial {
    ell: usize,
    exact: Option<RatPoly>,
    bernstein_exact: Option<Vec<BigRational>>,
    monomial: Vec<f64>,
    bernstein: Vec<f64>,
}

impl CharacteristicPolynomial {
    /// Builds F from an exact monomial-basis polynomial, e.g. for tests of
    /// the root and bound machinery on polynomials that no protocol yields.
    pub fn from_exact(f: RatPoly) -> CharacteristicPolynomial {
        let degree = f.degree().unwrap_or(0).max(1);
        let bernstein_exact = monomial_to_bernstein(f.coeffs(), degree);
        CharacteristicPolynomial {
            ell: degree - 1,
            monomial: f.to_f64_coeffs(),
            bernstein: bernstein_exact.iter().map(to_f64).collect(),
            bernstein_exact: Some(bernstein_exact),
            exact: Some(f),
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self) -> Option<&RatPoly> {
        self.exact.as_ref()
    }

    /// Monomial coefficients, lowest degree first (trailing zeros trimmed).
    pub fn monomial(&self) -> &[f64] {
        &self.monomial
    }

    pub fn bernstein(&self) -> &[f64] {
        &self.bernstein
    }

    pub fn bernstein_exact(&self) -> Option<&[BigRational]> {
        self.bernstein_exact.as_deref()
    }

    pub fn degree(&self) -> Option<usize> {
        match &self.exact {
            Some(f) => f.degree(),
            None => self.monomial.len().checked_sub(1),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match &self.exact {
            Some(f) => f.is_zero(),
            None => self.bernstein.iter().all(|b| b.abs() <= FLOAT_ZERO),
        }
    }

    /// Stable evaluation on [0, 1] (de Casteljau on the Bernstein form).
    pub fn eval(&self, p: f64) -> f64 {
        roots::de_casteljau(&self.bernstein, p)
    }

    pub fn eval_monomial(&self, p: f64) -> f64 {
        self.monomial.iter().rev().fold(0.0, |acc, c| acc * p + c)
    }

    pub fn eval_exact(&self, p: &BigRational) -> Option<BigRational> {
        self.exact.as_ref().map(|f| f.eval(p))
    }

    /// `(x + n F(x/n) - 1, x + n F(x/n) + 1)`.
    pub fn drift_bracket(&self, c: &Configuration) -> (f64, f64) {
        let n = c.n() as f64;
        let x = c.x() as f64;
        let centre = x + n * self.eval(x / n);
        (centre - 1.0, centre + 1.0)
    }

    pub fn drift_bracket_exact(&self, c: &Configuration) -> Option<(BigRational, BigRational)> {
        let n = rat(c.n() as i64);
        let x = rat(c.x() as i64);
        let centre = &x + &n * self.eval_exact(&(&x / &n))?;
        Some((&centre - BigRational::one(), centre + BigRational::one()))
    }
}

/// Tolerance below which float-mode Bernstein coefficients count as zero.
const FLOAT_ZERO: f64 = 1e-14;

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn monomial_to_bernstein(coeffs: &[BigRational], degree: usize) -> Vec<BigRational> {
    // b_j = sum_{i <= j} C(j, i) / C(d, i) a_i
    (0..=degree)
        .map(|j| {
            coeffs
                .iter()
                .enumerate()
                .take(j + 1)
                .fold(BigRational::zero(), |acc, (i, a)| {
                    acc + a * BigRational::new(
                        numeric::choose(j as u64, i as u64),
                        numeric::choose(degree as u64, i as u64),
                    )
                })
        })
        .collect()
}

/// Bernstein coefficients of F in degree `ell + 1`:
/// `b_j = (j g1(j-1) + (ell+1-j) g0(j) - j) / (ell+1)`.
fn bernstein_coeffs<T>(g0: &[T], g1: &[T], from_int: impl Fn(i64) -> T) -> Vec<T>
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + std::ops::Div<Output = T>,
{
    let ell = g0.len() - 1;
    let d = ell as i64 + 1;
    (0..=ell + 1)
        .map(|j| {
            let ji = j as i64;
            let mut acc = from_int(-ji);
            if j >= 1 {
                acc = acc + from_int(ji) * g1[j - 1].clone();
            }
            if j <= ell {
                acc = acc + from_int(d - ji) * g0[j].clone();
            }
            acc / from_int(d)
        })
        .collect()
}

/// Monomial coefficients by direct expansion of the defining sum.
fn expand_monomial<T>(g0: &[T], g1: &[T], zero: T, from_int: impl Fn(i64) -> T, choose: impl Fn(u64, u64) -> T) -> Vec<T>
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T>,
{
    let ell = g0.len() - 1;
    let mut out = vec![zero.clone(); ell + 2];
    out[1] = from_int(-1);
    for k in 0..=ell {
        // C(ell,k) p^k (1-p)^(ell-k) (g0(k) + p (g1(k) - g0(k)))
        let m = ell - k;
        let c = choose(ell as u64, k as u64);
        let low = g0[k].clone();
        let slope = g1[k].clone() - g0[k].clone();
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let base = c.clone() * choose(m as u64, j as u64) * from_int(sign);
            out[k + j] = out[k + j].clone() + base.clone() * low.clone();
            out[k + j + 1] = out[k + j + 1].clone() + base * slope.clone();
        }
    }
    out
}

/// Builds F for `p`; exact when every table entry is rational.
pub fn characteristic_poly(p: &Protocol) -> CharacteristicPolynomial {
    let g0f = p.table_f64(Opinion::Zero);
    let g1f = p.table_f64(Opinion::One);
    let mut monomial = expand_monomial(g0f, g1f, 0.0, |i| i as f64, |n, k| {
        numeric::choose(n, k).to_f64().unwrap_or(f64::INFINITY)
    });
    let bernstein = bernstein_coeffs(g0f, g1f, |i| i as f64);
    match p.exact_tables() {
        Some((g0, g1)) => {
            let exact = RatPoly::new(expand_monomial(&g0, &g1, BigRational::zero(), rat, |n, k| {
                BigRational::from_integer(numeric::choose(n, k))
            }));
            let bernstein_exact = bernstein_coeffs(&g0, &g1, rat);
            CharacteristicPolynomial {
                ell: p.ell(),
                monomial: exact.to_f64_coeffs(),
                bernstein: bernstein_exact.iter().map(to_f64).collect(),
                bernstein_exact: Some(bernstein_exact),
                exact: Some(exact),
            }
        }
        None => {
            while monomial.last() == Some(&0.0) {
                monomial.pop();
            }
            CharacteristicPolynomial {
                ell: p.ell(),
                exact: None,
                bernstein_exact: None,
                monomial,
                bernstein,
            }
        }
    }
}

/// Roots of F in [0, 1]. Exact polynomials are isolated by Sturm sequences
/// with exact multiplicities; float polynomials by bisection to `tol`.
pub fn isolate_roots(f: &CharacteristicPolynomial, tol: f64) -> Result<RootSet, AnalyzerError> {
    if f.is_identically_zero() {
        return Ok(RootSet::identically_zero());
    }
    match &f.exact {
        Some(poly) => Ok(roots::isolate_exact(poly)),
        None => roots::isolate_float(&f.bernstein, &f.monomial, tol),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassKind {
    IdenticallyZero,
    /// F < 0 between the largest interior root and 1: slow when z = 1.
    Case1NegativeTop,
    /// F > 0 between the largest interior root and 1: slow when z = 0.
    Case2PositiveTop,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassKind::IdenticallyZero => "IDENTICALLY_ZERO",
            ClassKind::Case1NegativeTop => "CASE1_NEGATIVE_TOP",
            ClassKind::Case2PositiveTop => "CASE2_POSITIVE_TOP",
        };
        f.write_str(s)
    }
}

/// Which correct opinion makes the protocol slow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HardOpinion {
    Either,
    Fixed(Opinion),
}

impl HardOpinion {
    /// Concrete opinion to use when one must be picked (`Either` picks 1).
    pub fn pick(self) -> Opinion {
        match self {
            HardOpinion::Either => Opinion::One,
            HardOpinion::Fixed(z) => z,
        }
    }
}

impl fmt::Display for HardOpinion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HardOpinion::Either => f.write_str("either"),
            HardOpinion::Fixed(z) => write!(f, "{z}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub kind: ClassKind,
    pub polynomial: CharacteristicPolynomial,
    pub roots: RootSet,
    /// Open interval on which the sign of F is constant and the slow start lives.
    pub top_interval: (f64, f64),
    pub hard_opinion: HardOpinion,
    /// Suggested starting fraction of ones (midpoint of `top_interval`).
    pub suggested_fraction: f64,
    /// Point inside `top_interval` where the sign of F was decided, and F there.
    pub witness: (f64, f64),
}

impl Classification {
    /// `round(fraction * n)`, clamped to `[1, n-1]` so that the start is a
    /// valid non-consensus configuration for either source opinion.
    pub fn suggested_x0(&self, n: u64) -> u64 {
        suggested_x0(self.suggested_fraction, n)
    }
}

pub fn suggested_x0(fraction: f64, n: u64) -> u64 {
    let x = (fraction * n as f64).round() as u64;
    x.clamp(1, n.saturating_sub(1).max(1))
}

/// Classifies a well-formed protocol by the sign of F just below p = 1.
pub fn classify(p: &Protocol) -> Result<Classification, AnalyzerError> {
    let wf = validate(p);
    if !wf.is_well_formed() {
        return Err(AnalyzerError::NotWellFormed(wf.violations));
    }
    let polynomial = characteristic_poly(p);
    let roots = isolate_roots(&polynomial, DEFAULT_ROOT_TOL)?;
    if roots.identically_zero {
        // a1 = 1/4, a2 = 1/2, a3 = 3/4; start at (a2 + a3) / 2
        return Ok(Classification {
            kind: ClassKind::IdenticallyZero,
            polynomial,
            roots,
            top_interval: (0.5, 0.75),
            hard_opinion: HardOpinion::Either,
            suggested_fraction: 0.625,
            witness: (0.625, 0.0),
        });
    }

    // The last root is p = 1 (well-formedness); the one before bounds the top interval.
    let below_one: Vec<&Root> = roots
        .roots
        .iter()
        .filter(|r| match r.exact() {
            Some(v) => !v.is_one(),
            None => r.approx < 1.0 - DEFAULT_ROOT_TOL,
        })
        .collect();
    let top_root = below_one
        .last()
        .expect("F(0) = 0 for well-formed protocols, so a root below 1 exists");

    let (lower, witness, value, negative) = match (&polynomial.exact, &top_root.value) {
        (Some(f), value) => {
            let lower = match value {
                RootValue::Exact(r) => r.clone(),
                RootValue::Isolated { hi, .. } => hi.clone(),
                RootValue::Approx { .. } => unreachable!("exact polynomial yields exact roots"),
            };
            let w = (&lower + BigRational::one()) / rat(2);
            let fw = f.eval(&w);
            debug_assert!(!fw.is_zero(), "no root of F lies strictly between the top roots");
            (top_root.approx, to_f64(&w), to_f64(&fw), fw.is_negative())
        }
        (None, _) => {
            let w = 0.5 * (top_root.upper() + 1.0);
            let fw = polynomial.eval(w);
            let scale = polynomial.bernstein.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
            if fw.abs() <= 1e-12 * scale {
                return Err(AnalyzerError::UnresolvedCluster { near: w });
            }
            (top_root.approx, w, fw, fw < 0.0)
        }
    };
    let (kind, hard) = if negative {
        (ClassKind::Case1NegativeTop, Opinion::One)
    } else {
        (ClassKind::Case2PositiveTop, Opinion::Zero)
    };
    Ok(Classification {
        kind,
        polynomial,
        roots,
        top_interval: (lower, 1.0),
        hard_opinion: HardOpinion::Fixed(hard),
        suggested_fraction: 0.5 * (lower + 1.0),
        witness: (witness, value),
    })
}

/// Bracket on the one-step expectation at `c`, from F.
pub fn drift_bracket(p: &Protocol, c: &Configuration) -> (f64, f64) {
    characteristic_poly(p).drift_bracket(c)
}

/// Certificate that F is small between two of its roots.
#[derive(Clone, Debug, PartialEq)]
pub struct RootBound {
    /// `max |F'| on [0, 1] / 2`.
    pub c0: f64,
    /// `c0 * (b - a)`.
    pub bound: f64,
    /// Rigorous upper bound on `max |F|` over `[a, b]` from subdivided
    /// Bernstein coefficients.
    pub certified_max: f64,
    /// `max |F|` over `[a, b]` located at critical points, and where.
    pub max_abs: f64,
    pub argmax: f64,
    /// `certified_max <= bound`.
    pub certified: bool,
}

/// Bernstein pieces used to bound |F| on an interval.
const BOUND_PIECES: usize = 256;

/// Bound `C0 (b - a)` on |F| over `[a, b]`, where `F(a) = F(b) = 0` and
/// `C0 = max |F'| / 2` on [0, 1], with an interval-evaluation certificate.
pub fn bound_between_roots(f: &CharacteristicPolynomial, a: f64, b: f64) -> RootBound {
    assert!((0.0..=1.0).contains(&a) && a <= b && b <= 1.0, "need 0 <= a <= b <= 1");
    let coeffs = f.monomial();
    if coeffs.is_empty() {
        return RootBound {
            c0: 0.0,
            bound: 0.0,
            certified_max: 0.0,
            max_abs: 0.0,
            argmax: a,
            certified: true,
        };
    }
    let d1 = derivative(coeffs);
    let d2 = derivative(&d1);
    let (max_slope, _) = max_abs_on(&d1, &d2, 0.0, 1.0);
    let c0 = 0.5 * max_slope;
    let (max_abs, argmax) = max_abs_on(coeffs, &d1, a, b);

    let certified_max = if b > a {
        let h = (b - a) / BOUND_PIECES as f64;
        (0..BOUND_PIECES)
            .map(|i| {
                let u = a + h * i as f64;
                let piece = bernstein_on(coeffs, u, h);
                piece.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
            })
            .fold(0.0_f64, f64::max)
    } else {
        0.0
    };
    // absorb rounding in the piecewise conversion
    let certified_max = certified_max * (1.0 + 1e-12) + f64::EPSILON * max_slope;
    let bound = c0 * (b - a);
    RootBound {
        c0,
        bound,
        certified_max,
        max_abs,
        argmax,
        certified: certified_max <= bound + f64::EPSILON * max_slope,
    }
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect()
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Max of |g| on `[a, b]` over endpoints and the sign changes of `dg`.
fn max_abs_on(g: &[f64], dg: &[f64], a: f64, b: f64) -> (f64, f64) {
    let mut best = (horner(g, a).abs(), a);
    let mut consider = |x: f64| {
        let v = horner(g, x).abs();
        if v > best.0 {
            best = (v, x);
        }
    };
    consider(b);
    if b > a && !dg.is_empty() {
        const STEPS: usize = 2048;
        let h = (b - a) / STEPS as f64;
        let mut prev = horner(dg, a);
        for i in 1..=STEPS {
            let x = a + h * i as f64;
            let cur = horner(dg, x);
            if cur == 0.0 {
                consider(x);
            } else if prev != 0.0 && prev.signum() != cur.signum() {
                let (mut lo, mut hi, mut flo) = (x - h, x, prev);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fm = horner(dg, mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                consider(0.5 * (lo + hi));
            }
            prev = cur;
        }
    }
    best
}

/// Bernstein coefficients of `t -> g(u + h t)` on [0, 1].
fn bernstein_on(g: &[f64], u: f64, h: f64) -> Vec<f64> {
    let d = g.len() - 1;
    // Taylor shift and scale by Horner composition
    let mut shifted = vec![0.0; d + 1];
    for &c in g.iter().rev() {
        let mut next = vec![0.0; d + 1];
        for (i, s) in shifted.iter().enumerate() {
            if *s == 0.0 {
                continue;
            }
            next[i] += s * u;
            if i < d {
                next[i + 1] += s * h;
            }
        }
        next[0] += c;
        shifted = next;
    }
    let choose = |n: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    (0..=d)
        .map(|j| (0..=j).map(|i| choose(j, i) / choose(d, i) * shifted[i]).sum())
        .collect()
}
