//! Memoryless protocols given as adoption-probability tables.
//!
//! A protocol with sample size `ell` is two tables `g0`, `g1` of `ell + 1`
//! probabilities: entry `k` of `g_b` is the probability that an agent holding
//! opinion `b` adopts opinion 1 after seeing `k` ones in its sample.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Deserialize;
use thiserror::Error;

/// A binary opinion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opinion {
    Zero,
    One,
}

impl Opinion {
    pub fn from_bit(bit: u8) -> Option<Opinion> {
        match bit {
            0 => Some(Opinion::Zero),
            1 => Some(Opinion::One),
            _ => None,
        }
    }

    pub fn bit(self) -> u64 {
        match self {
            Opinion::Zero => 0,
            Opinion::One => 1,
        }
    }

    pub fn flip(self) -> Opinion {
        match self {
            Opinion::Zero => Opinion::One,
            Opinion::One => Opinion::Zero,
        }
    }
}

impl fmt::Display for Opinion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

impl FromStr for Opinion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "0" => Ok(Opinion::Zero),
            "1" => Ok(Opinion::One),
            other => Err(format!("opinion must be 0 or 1, got `{other}`")),
        }
    }
}

/// One table entry. Fractions stay exact; decimals are binary floats.
#[derive(Clone, Debug, PartialEq)]
pub enum Prob {
    Exact(BigRational),
    Float(f64),
}

impl Prob {
    pub fn ratio(num: i64, den: i64) -> Prob {
        Prob::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Prob::Float(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Prob::Exact(r) => Some(r),
            Prob::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Prob::Exact(r) => r.is_zero(),
            Prob::Float(v) => *v == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Prob::Exact(r) => r.is_one(),
            Prob::Float(v) => *v == 1.0,
        }
    }

    fn in_unit_interval(&self) -> bool {
        match self {
            Prob::Exact(r) => !r.is_negative() && *r <= BigRational::one(),
            Prob::Float(v) => (0.0..=1.0).contains(v),
        }
    }

    /// Parses `p/q`, an integer, or a decimal literal.
    pub fn parse(s: &str) -> Result<Prob, String> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in `{s}`"))?;
            let den: BigInt = den
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in `{s}`"))?;
            if den.is_zero() {
                return Err(format!("zero denominator in `{s}`"));
            }
            return Ok(Prob::Exact(BigRational::new(num, den)));
        }
        if let Ok(int) = s.parse::<BigInt>() {
            return Ok(Prob::Exact(BigRational::from_integer(int)));
        }
        s.parse::<f64>()
            .map(Prob::Float)
            .map_err(|_| format!("`{s}` is not a number or fraction"))
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Prob::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Prob::Float(v) => write!(f, "{v:?}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("sample size ell must be at least 1")]
    ZeroSampleSize,
    #[error("table {table} has {got} entries, expected ell+1 = {expected}")]
    Length {
        table: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("table {table} entry {index} = {value} lies outside [0, 1]")]
    Range {
        table: &'static str,
        index: usize,
        value: String,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: {inner}")]
    At {
        line: usize,
        column: usize,
        inner: Box<ProtocolError>,
    },
    #[error("unknown builtin protocol `{0}` (expected `voter` or `minority`)")]
    UnknownBuiltin(String),
}

impl ProtocolError {
    /// Strips location wrappers.
    pub fn kind(&self) -> &ProtocolError {
        match self {
            ProtocolError::At { inner, .. } => inner.kind(),
            other => other,
        }
    }
}

/// Which consensus state fails to be absorbing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `g0(0) != 0`: the all-zero consensus is not absorbing.
    ZeroNotAbsorbing,
    /// `g1(ell) != 1`: the all-one consensus is not absorbing.
    OneNotAbsorbing,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroNotAbsorbing => write!(f, "g0(0)=0"),
            Violation::OneNotAbsorbing => write!(f, "g1(ell)=1"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellFormedness {
    pub violations: Vec<Violation>,
}

impl WellFormedness {
    pub fn is_well_formed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Voter,
    Minority,
}

impl FromStr for Builtin {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "voter" => Ok(Builtin::Voter),
            "minority" => Ok(Builtin::Minority),
            _ => Err(ProtocolError::UnknownBuiltin(s.to_string())),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Voter => write!(f, "voter"),
            Builtin::Minority => write!(f, "minority"),
        }
    }
}

/// A structurally valid protocol. Immutable once built.
#[derive(Clone, Debug)]
pub struct Protocol {
    name: String,
    ell: usize,
    g0: Vec<Prob>,
    g1: Vec<Prob>,
    g0_f: Vec<f64>,
    g1_f: Vec<f64>,
}

impl PartialEq for Protocol {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.ell == other.ell && self.g0 == other.g0 && self.g1 == other.g1
    }
}

impl Protocol {
    pub fn new(
        name: impl Into<String>,
        ell: usize,
        g0: Vec<Prob>,
        g1: Vec<Prob>,
    ) -> Result<Protocol, ProtocolError> {
        if ell == 0 {
            return Err(ProtocolError::ZeroSampleSize);
        }
        for (table, entries) in [("g0", &g0), ("g1", &g1)] {
            if entries.len() != ell + 1 {
                return Err(ProtocolError::Length {
                    table,
                    expected: ell + 1,
                    got: entries.len(),
                });
            }
            if let Some((index, value)) = entries
                .iter()
                .enumerate()
                .find(|(_, p)| !p.in_unit_interval())
            {
                return Err(ProtocolError::Range {
                    table,
                    index,
                    value: value.to_string(),
                });
            }
        }
        let g0_f = g0.iter().map(Prob::to_f64).collect();
        let g1_f = g1.iter().map(Prob::to_f64).collect();
        Ok(Protocol {
            name: name.into(),
            ell,
            g0,
            g1,
            g0_f,
            g1_f,
        })
    }

    /// Same table for both opinions.
    pub fn symmetric(name: impl Into<String>, ell: usize, g: Vec<Prob>) -> Result<Protocol, ProtocolError> {
        Protocol::new(name, ell, g.clone(), g)
    }

    pub fn builtin(kind: Builtin, ell: usize) -> Result<Protocol, ProtocolError> {
        if ell == 0 {
            return Err(ProtocolError::ZeroSampleSize);
        }
        let ell_i = ell as i64;
        let g: Vec<Prob> = match kind {
            Builtin::Voter => (0..=ell_i).map(|k| Prob::ratio(k, ell_i)).collect(),
            Builtin::Minority => (0..=ell_i)
                .map(|k| {
                    // compare 2k with ell to avoid halving odd sample sizes
                    if k == ell_i || (k > 0 && 2 * k < ell_i) {
                        Prob::ratio(1, 1)
                    } else if 2 * k == ell_i {
                        Prob::ratio(1, 2)
                    } else {
                        Prob::ratio(0, 1)
                    }
                })
                .collect(),
        };
        Protocol::symmetric(kind.to_string(), ell, g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn table(&self, own: Opinion) -> &[Prob] {
        match own {
            Opinion::Zero => &self.g0,
            Opinion::One => &self.g1,
        }
    }

    pub fn table_f64(&self, own: Opinion) -> &[f64] {
        match own {
            Opinion::Zero => &self.g0_f,
            Opinion::One => &self.g1_f,
        }
    }

    /// Every entry is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.g0.iter().chain(&self.g1).all(|p| p.as_exact().is_some())
    }

    /// Exact tables, when every entry is rational.
    pub fn exact_tables(&self) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
        let collect = |t: &[Prob]| t.iter().map(|p| p.as_exact().cloned()).collect::<Option<Vec<_>>>();
        Some((collect(&self.g0)?, collect(&self.g1)?))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Protocol {
        self.name = name.into();
        self
    }

    pub fn to_toml(&self) -> String {
        let quote = |s: &str| toml::Value::String(s.to_string()).to_string();
        let entry = |p: &Prob| match p {
            Prob::Exact(r) if !r.is_integer() => quote(&p.to_string()),
            _ => p.to_string(),
        };
        let list = |t: &[Prob]| t.iter().map(entry).collect::<Vec<_>>().join(", ");
        format!(
            "name = {}\nell = {}\ng0 = [{}]\ng1 = [{}]\n",
            quote(&self.name),
            self.ell,
            list(&self.g0),
            list(&self.g1)
        )
    }
}

/// Reports whether both consensus states are absorbing.
pub fn validate(p: &Protocol) -> WellFormedness {
    let mut violations = Vec::new();
    if !p.g0[0].is_zero() {
        violations.push(Violation::ZeroNotAbsorbing);
    }
    if !p.g1[p.ell].is_one() {
        violations.push(Violation::OneNotAbsorbing);
    }
    WellFormedness { violations }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    name: Option<String>,
    ell: toml::Spanned<i64>,
    g0: toml::Spanned<Vec<toml::Spanned<RawEntry>>>,
    g1: toml::Spanned<Vec<toml::Spanned<RawEntry>>>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}

/// Parses the TOML protocol format (`name`, `ell`, `g0`, `g1`).
pub fn load_protocol(text: &str) -> Result<Protocol, ProtocolError> {
    let raw: RawProtocol = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        ProtocolError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let at = |offset: usize, inner: ProtocolError| {
        let (line, column) = line_col(text, offset);
        ProtocolError::At {
            line,
            column,
            inner: Box::new(inner),
        }
    };

    let ell = usize::try_from(*raw.ell.get_ref())
        .ok()
        .filter(|&l| l > 0)
        .ok_or_else(|| at(raw.ell.span().start, ProtocolError::ZeroSampleSize))?;

    let convert = |table: &'static str,
                   spanned: &toml::Spanned<Vec<toml::Spanned<RawEntry>>>|
     -> Result<Vec<Prob>, ProtocolError> {
        if spanned.get_ref().len() != ell + 1 {
            return Err(at(
                spanned.span().start,
                ProtocolError::Length {
                    table,
                    expected: ell + 1,
                    got: spanned.get_ref().len(),
                },
            ));
        }
        spanned
            .get_ref()
            .iter()
            .enumerate()
            .map(|(index, entry)| {
                let prob = match entry.get_ref() {
                    RawEntry::Int(i) => Prob::Exact(BigRational::from_integer(BigInt::from(*i))),
                    RawEntry::Float(v) => Prob::Float(*v),
                    RawEntry::Text(s) => Prob::parse(s).map_err(|message| {
                        let (line, column) = line_col(text, entry.span().start);
                        ProtocolError::Parse { line, column, message }
                    })?,
                };
                if !prob.in_unit_interval() {
                    return Err(at(
                        entry.span().start,
                        ProtocolError::Range {
                            table,
                            index,
                            value: prob.to_string(),
                        },
                    ));
                }
                Ok(prob)
            })
            .collect()
    };

    let g0 = convert("g0", &raw.g0)?;
    let g1 = convert("g1", &raw.g1)?;
    Protocol::new(raw.name.unwrap_or_else(|| "custom".to_string()), ell, g0, g1)
}
