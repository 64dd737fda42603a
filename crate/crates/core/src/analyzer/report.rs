//! Serializable summary of an analysis, shared by the CLI and the demo.

use std::fmt::Write as _;

use serde::Serialize;

use super::{characteristic_poly, classify, isolate_roots, RootValue, DEFAULT_ROOT_TOL};
use crate::protocol::{validate, Protocol};

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RootReport {
    /// Exact value as `p/q`, or empty when only an interval is known.
    pub value: String,
    pub approx: f64,
    pub lo: f64,
    pub hi: f64,
    pub exact: bool,
    pub multiplicity: u32,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AnalysisReport {
    pub protocol: String,
    pub ell: usize,
    pub well_formed: bool,
    pub violations: Vec<String>,
    pub exact: bool,
    /// Monomial coefficients of F, constant term first.
    pub coefficients: Vec<String>,
    pub coefficients_f64: Vec<f64>,
    pub bernstein: Vec<f64>,
    pub polynomial: String,
    pub identically_zero: bool,
    pub roots: Vec<RootReport>,
    pub multiplicities: Vec<u32>,
    pub classification: Option<String>,
    pub hard_opinion: Option<String>,
    pub top_interval: Option<(f64, f64)>,
    pub suggested_x0_fraction: Option<f64>,
    pub witness: Option<(f64, f64)>,
    pub error: Option<String>,
}

fn show(v: f64) -> String {
    format!("{v}")
}

pub fn analysis_report(p: &Protocol) -> AnalysisReport {
    let f = characteristic_poly(p);
    let wf = validate(p);
    let (coefficients, polynomial) = match f.exact() {
        Some(e) => (e.coeffs().iter().map(|c| c.to_string()).collect(), e.to_string()),
        None => {
            let c: Vec<String> = f.monomial().iter().map(|&c| show(c)).collect();
            let terms: Vec<String> = f
                .monomial()
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(i, c)| match i {
                    0 => show(*c),
                    1 => format!("{c}*p"),
                    _ => format!("{c}*p^{i}"),
                })
                .collect();
            let poly = if terms.is_empty() { "0".into() } else { terms.join(" + ") };
            (c, poly)
        }
    };
    let mut report = AnalysisReport {
        protocol: p.name().to_string(),
        ell: p.ell(),
        well_formed: wf.is_well_formed(),
        violations: wf.violations.iter().map(|v| v.to_string()).collect(),
        exact: f.is_exact(),
        coefficients,
        coefficients_f64: f.monomial().to_vec(),
        bernstein: f.bernstein().to_vec(),
        polynomial,
        identically_zero: f.is_identically_zero(),
        roots: Vec::new(),
        multiplicities: Vec::new(),
        classification: None,
        hard_opinion: None,
        top_interval: None,
        suggested_x0_fraction: None,
        witness: None,
        error: None,
    };
    match isolate_roots(&f, DEFAULT_ROOT_TOL) {
        Ok(set) => {
            for r in &set.roots {
                let (value, lo, hi, exact) = match &r.value {
                    RootValue::Exact(v) => (v.to_string(), r.approx, r.approx, true),
                    RootValue::Isolated { lo, hi } => (
                        String::new(),
                        num_traits::ToPrimitive::to_f64(lo).unwrap_or(r.approx),
                        num_traits::ToPrimitive::to_f64(hi).unwrap_or(r.approx),
                        false,
                    ),
                    RootValue::Approx { lo, hi } => (String::new(), *lo, *hi, false),
                };
                report.roots.push(RootReport {
                    value,
                    approx: r.approx,
                    lo,
                    hi,
                    exact,
                    multiplicity: r.multiplicity,
                    low_confidence: r.low_confidence,
                });
                report.multiplicities.push(r.multiplicity);
            }
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    if report.well_formed && report.error.is_none() {
        match classify(p) {
            Ok(c) => {
                report.classification = Some(c.kind.to_string());
                report.hard_opinion = Some(c.hard_opinion.to_string());
                report.top_interval = Some(c.top_interval);
                report.suggested_x0_fraction = Some(c.suggested_fraction);
                report.witness = Some(c.witness);
            }
            Err(e) => report.error = Some(e.to_string()),
        }
    }
    report
}

impl AnalysisReport {
    pub fn human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "protocol: {} (ell = {})", self.protocol, self.ell);
        if self.well_formed {
            let _ = writeln!(s, "well-formed: yes");
        } else {
            let _ = writeln!(s, "well-formed: no, violates {}", self.violations.join(", "));
        }
        let _ = writeln!(s, "arithmetic: {}", if self.exact { "exact" } else { "float" });
        let _ = writeln!(s, "F(p) = {}", self.polynomial);
        if self.identically_zero {
            let _ = writeln!(s, "F is identically zero: no drift at any fraction");
        } else {
            let _ = writeln!(s, "roots in [0, 1]:");
            for r in &self.roots {
                let v = if r.exact {
                    r.value.clone()
                } else {
                    format!("in ({:.17}, {:.17})", r.lo, r.hi)
                };
                let flag = if r.low_confidence { " [low confidence]" } else { "" };
                let _ = writeln!(s, "  {v} ~ {:.12}  multiplicity {}{flag}", r.approx, r.multiplicity);
            }
        }
        if let Some(c) = &self.classification {
            let _ = writeln!(s, "classification: {c}");
            let (a, b) = self.top_interval.unwrap();
            let _ = writeln!(s, "slow source opinion: {}", self.hard_opinion.as_deref().unwrap_or("?"));
            let _ = writeln!(s, "sign-constant interval: ({a}, {b})");
            let (w, fw) = self.witness.unwrap();
            let _ = writeln!(s, "witness: F({w}) = {fw}");
            let _ = writeln!(s, "suggested x0 fraction: {}", self.suggested_x0_fraction.unwrap());
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error: {e}");
        }
        s
    }
}
