//! Experiment specifications.
//!
//! ```toml
//! name = "minority-lower"
//! builtin = "minority"          # or: protocol = "path/to/protocol.toml"
//! ell = 3                       # or "ceil(sqrt(n*ln n))", "ceil(2*ln n)"
//! n = [256, 512, 1024]
//! z = 1                         # 0, 1 or "adversarial"
//! x0 = "adversarial"            # integer, fraction (0.75), "adversarial", or [0.1, 0.5, 0.9]
//! mode = "parallel"
//! trials = 200
//! seed = 42
//! max_rounds = "default"        # integer, "default", "c*n*log2n", "c*n", "c*ln2n"
//! statistic = "median"
//! censor_threshold = 0.1
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{fit::Statistic, HarnessError};
use crate::analyzer::{classify, suggested_x0};
use crate::dynamics::{default_max_rounds, Configuration, Mode};
use crate::protocol::{load_protocol, validate, Builtin, Opinion, Protocol};

pub const MAX_N: u64 = 1 << 24;
pub const MAX_ELL: usize = 1 << 16;
pub const MAX_TOTAL_TRIALS: u64 = 10_000_000;

/// Sample size as a function of `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EllRule {
    Const(usize),
    /// `ceil(c * sqrt(n ln n))`
    SqrtNLnN(f64),
    /// `ceil(c * ln n)`
    LnN(f64),
}

impl EllRule {
    pub fn eval(&self, n: u64) -> usize {
        let ln = (n as f64).ln();
        let v = match *self {
            EllRule::Const(k) => return k,
            EllRule::SqrtNLnN(c) => c * (n as f64 * ln).sqrt(),
            EllRule::LnN(c) => c * ln,
        };
        (v.ceil() as usize).max(1)
    }
}

fn split_coefficient(s: &str) -> Result<(f64, &str), String> {
    match s.split_once('*') {
        Some((c, rest)) if c.parse::<f64>().is_ok() => {
            let c: f64 = c.parse().unwrap();
            if c.is_finite() && c > 0.0 {
                Ok((c, rest))
            } else {
                Err(format!("coefficient must be positive, got `{c}`"))
            }
        }
        _ => Ok((1.0, s)),
    }
}

impl FromStr for EllRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let compact = compact.replace("ln(n)", "lnn");
        if let Ok(k) = compact.parse::<usize>() {
            return Ok(EllRule::Const(k));
        }
        let inner = compact
            .strip_prefix("ceil(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("unsupported ell label `{s}`"))?;
        let (c, body) = split_coefficient(inner)?;
        match body {
            "sqrt(n*lnn)" => Ok(EllRule::SqrtNLnN(c)),
            "lnn" => Ok(EllRule::LnN(c)),
            _ => Err(format!(
                "unsupported ell label `{s}`; use an integer, `ceil(c*sqrt(n*ln n))` or `ceil(c*ln n)`"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaxRoundsRule {
    /// `64 n ceil(log2 n)`
    Default,
    Fixed(u64),
    /// `ceil(c n ceil(log2 n))`
    NLog2N(f64),
    /// `ceil(c n)`
    N(f64),
    /// `ceil(c ln^2 n)`
    Ln2N(f64),
}

impl MaxRoundsRule {
    pub fn eval(&self, n: u64) -> u64 {
        let log2 = 64 - (n.max(2) - 1).leading_zeros() as u64;
        let v = match *self {
            MaxRoundsRule::Default => return default_max_rounds(n),
            MaxRoundsRule::Fixed(r) => return r,
            MaxRoundsRule::NLog2N(c) => c * n as f64 * log2 as f64,
            MaxRoundsRule::N(c) => c * n as f64,
            MaxRoundsRule::Ln2N(c) => c * (n as f64).ln().powi(2),
        };
        (v.ceil() as u64).max(1)
    }
}

impl FromStr for MaxRoundsRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "default" {
            return Ok(MaxRoundsRule::Default);
        }
        if let Ok(r) = compact.parse::<u64>() {
            return Ok(MaxRoundsRule::Fixed(r));
        }
        let (c, body) = split_coefficient(&compact)?;
        match body {
            "n*log2n" | "n*log2(n)" => Ok(MaxRoundsRule::NLog2N(c)),
            "n" => Ok(MaxRoundsRule::N(c)),
            "ln2n" | "ln(n)^2" | "lnn^2" => Ok(MaxRoundsRule::Ln2N(c)),
            _ => Err(format!(
                "unsupported max_rounds `{s}`; use an integer, `default`, `c*n*log2n`, `c*n` or `c*ln2n`"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum X0Rule {
    Explicit(u64),
    Fraction(f64),
    Adversarial,
    Grid(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZRule {
    Fixed(Opinion),
    Adversarial,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProtocolSource {
    Builtin(Builtin),
    File(PathBuf),
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub name: String,
    pub source: ProtocolSource,
    /// Loaded protocol when the source is a file.
    pub file_protocol: Option<Protocol>,
    pub ell: EllRule,
    pub n: Vec<u64>,
    pub z: ZRule,
    pub x0: X0Rule,
    pub mode: Mode,
    pub trials: u64,
    pub seed: u64,
    pub max_rounds: MaxRoundsRule,
    pub statistic: Statistic,
    pub censor_threshold: f64,
    /// Hex sha256 of the spec text.
    pub hash: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNumOrText {
    Int(u64),
    Float(f64),
    Text(String),
    Grid(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: Option<String>,
    builtin: Option<String>,
    protocol: Option<String>,
    ell: Option<RawNumOrText>,
    n: Vec<u64>,
    z: RawNumOrText,
    x0: RawNumOrText,
    mode: Option<String>,
    trials: u64,
    seed: u64,
    max_rounds: Option<RawNumOrText>,
    statistic: Option<String>,
    censor_threshold: Option<f64>,
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Spec(msg.into())
}

pub fn spec_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl ExperimentSpec {
    /// Parses a spec; relative protocol paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<ExperimentSpec, HarnessError> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let line = text[..s.start].matches('\n').count() + 1;
                    format!(" at line {line}")
                })
                .unwrap_or_default();
            invalid(format!("spec parse error{at}: {}", e.message()))
        })?;

        let (source, file_protocol) = match (raw.builtin, raw.protocol) {
            (Some(b), None) => (ProtocolSource::Builtin(b.parse().map_err(|e: crate::protocol::ProtocolError| invalid(e.to_string()))?), None),
            (None, Some(path)) => {
                let path = base.join(path);
                let body = std::fs::read_to_string(&path)
                    .map_err(|e| invalid(format!("cannot read protocol {}: {e}", path.display())))?;
                let p = load_protocol(&body).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                (ProtocolSource::File(path), Some(p))
            }
            _ => return Err(invalid("exactly one of `builtin` and `protocol` must be given")),
        };

        let ell = match (&raw.ell, &file_protocol) {
            (None, Some(p)) => EllRule::Const(p.ell()),
            (None, None) => return Err(invalid("`ell` is required with a builtin protocol")),
            (Some(RawNumOrText::Int(k)), _) => EllRule::Const(*k as usize),
            (Some(RawNumOrText::Text(s)), _) => s.parse().map_err(invalid)?,
            (Some(_), _) => return Err(invalid("`ell` must be an integer or a label")),
        };
        if let (Some(p), EllRule::Const(k)) = (&file_protocol, ell) {
            if k != p.ell() {
                return Err(invalid(format!("`ell = {k}` disagrees with the protocol file (ell = {})", p.ell())));
            }
        } else if file_protocol.is_some() {
            return Err(invalid("ell labels apply to builtin protocols only"));
        }

        if raw.n.is_empty() {
            return Err(invalid("`n` must list at least one population size"));
        }
        if let Some(&bad) = raw.n.iter().find(|&&n| n < 2) {
            return Err(invalid(format!("every n must be at least 2, got {bad}")));
        }
        if raw.trials == 0 {
            return Err(invalid("`trials` must be at least 1"));
        }

        let z = match raw.z {
            RawNumOrText::Int(b) => ZRule::Fixed(
                u8::try_from(b)
                    .ok()
                    .and_then(Opinion::from_bit)
                    .ok_or_else(|| invalid("`z` must be 0, 1 or \"adversarial\""))?,
            ),
            RawNumOrText::Text(s) if s == "adversarial" => ZRule::Adversarial,
            _ => return Err(invalid("`z` must be 0, 1 or \"adversarial\"")),
        };
        let fraction = |f: f64| {
            if f > 0.0 && f < 1.0 {
                Ok(f)
            } else {
                Err(invalid(format!("x0 fractions must lie in (0, 1), got {f}")))
            }
        };
        let x0 = match raw.x0 {
            RawNumOrText::Int(x) => X0Rule::Explicit(x),
            RawNumOrText::Float(f) => X0Rule::Fraction(fraction(f)?),
            RawNumOrText::Text(s) if s == "adversarial" => X0Rule::Adversarial,
            RawNumOrText::Grid(g) if !g.is_empty() => {
                X0Rule::Grid(g.into_iter().map(fraction).collect::<Result<_, _>>()?)
            }
            _ => return Err(invalid("`x0` must be an integer, a fraction, \"adversarial\" or a list of fractions")),
        };
        let mode = match raw.mode {
            Some(m) => m.parse().map_err(invalid)?,
            None => Mode::Parallel,
        };
        let max_rounds = match raw.max_rounds {
            None => MaxRoundsRule::Default,
            Some(RawNumOrText::Int(0)) => return Err(invalid("`max_rounds` must be positive")),
            Some(RawNumOrText::Int(r)) => MaxRoundsRule::Fixed(r),
            Some(RawNumOrText::Text(s)) => s.parse().map_err(invalid)?,
            Some(_) => return Err(invalid("`max_rounds` must be an integer or a rule")),
        };
        let statistic = match raw.statistic {
            Some(s) => s.parse().map_err(invalid)?,
            None => Statistic::Median,
        };
        let censor_threshold = raw.censor_threshold.unwrap_or(0.1);
        if !(0.0..=1.0).contains(&censor_threshold) {
            return Err(invalid("`censor_threshold` must lie in [0, 1]"));
        }

        let spec = ExperimentSpec {
            name: raw.name.unwrap_or_else(|| "sweep".into()),
            source,
            file_protocol,
            ell,
            n: raw.n,
            z,
            x0,
            mode,
            trials: raw.trials,
            seed: raw.seed,
            max_rounds,
            statistic,
            censor_threshold,
            hash: spec_hash(text),
        };
        spec.check_caps()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<ExperimentSpec, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read spec {}: {e}", path.display())))?;
        ExperimentSpec::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn check_caps(&self) -> Result<(), HarnessError> {
        if let Some(&n) = self.n.iter().find(|&&n| n > MAX_N) {
            return Err(HarnessError::Cap(format!("n = {n} exceeds the cap {MAX_N}")));
        }
        if let Some(n) = self.n.iter().find(|&&n| self.ell.eval(n) > MAX_ELL) {
            return Err(HarnessError::Cap(format!("ell({n}) exceeds the cap {MAX_ELL}")));
        }
        let x0s = match &self.x0 {
            X0Rule::Grid(g) => g.len() as u64,
            _ => 1,
        };
        let total = self.trials.saturating_mul(self.n.len() as u64).saturating_mul(x0s);
        if total > MAX_TOTAL_TRIALS {
            return Err(HarnessError::Cap(format!(
                "{total} trials exceed the cap {MAX_TOTAL_TRIALS}"
            )));
        }
        Ok(())
    }

    /// Concrete protocol at population size `n`.
    pub fn protocol_for(&self, n: u64) -> Result<Protocol, HarnessError> {
        let p = match (&self.source, &self.file_protocol) {
            (_, Some(p)) => p.clone(),
            (ProtocolSource::Builtin(b), None) => {
                Protocol::builtin(*b, self.ell.eval(n)).map_err(|e| invalid(e.to_string()))?
            }
            (ProtocolSource::File(path), None) => {
                return Err(invalid(format!("protocol {} was not loaded", path.display())))
            }
        };
        let wf = validate(&p);
        if !wf.is_well_formed() {
            let v: Vec<String> = wf.violations.iter().map(|v| v.to_string()).collect();
            return Err(invalid(format!(
                "protocol `{}` is not well formed ({}); convergence time is undefined",
                p.name(),
                v.join(", ")
            )));
        }
        Ok(p)
    }

    /// Every `(n, protocol, z, x0, max_rounds)` point, in canonical order.
    pub fn points(&self) -> Result<Vec<SweepPoint>, HarnessError> {
        let mut ns = self.n.clone();
        ns.sort_unstable();
        ns.dedup();
        let mut out = Vec::new();
        for n in ns {
            let protocol = self.protocol_for(n)?;
            let needs_class = self.z == ZRule::Adversarial || self.x0 == X0Rule::Adversarial;
            let class = if needs_class {
                Some(classify(&protocol).map_err(|e| invalid(format!("cannot classify `{}`: {e}", protocol.name())))?)
            } else {
                None
            };
            let z = match self.z {
                ZRule::Fixed(z) => z,
                ZRule::Adversarial => class.as_ref().unwrap().hard_opinion.pick(),
            };
            let mut x0s = match &self.x0 {
                X0Rule::Explicit(x) => vec![*x],
                X0Rule::Fraction(f) => vec![suggested_x0(*f, n)],
                X0Rule::Adversarial => vec![class.as_ref().unwrap().suggested_x0(n)],
                X0Rule::Grid(g) => g.iter().map(|&f| suggested_x0(f, n)).collect(),
            };
            x0s.sort_unstable();
            x0s.dedup();
            for x0 in x0s {
                Configuration::new(n, z, x0).map_err(|e| invalid(format!("n = {n}: {e}")))?;
                out.push(SweepPoint {
                    n,
                    protocol: protocol.clone(),
                    z,
                    x0,
                    max_rounds: self.max_rounds.eval(n),
                });
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub n: u64,
    pub protocol: Protocol,
    pub z: Opinion,
    pub x0: u64,
    pub max_rounds: u64,
}
