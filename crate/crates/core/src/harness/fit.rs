//! Power-law fits of convergence-time statistics against `n`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::sweep::ResultRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Statistic {
    #[default]
    Median,
    Mean,
    Q90,
}

impl FromStr for Statistic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "median" => Ok(Statistic::Median),
            "mean" => Ok(Statistic::Mean),
            "q90" => Ok(Statistic::Q90),
            other => Err(format!("statistic must be median, mean or q90, got `{other}`")),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Median => "median",
            Statistic::Mean => "mean",
            Statistic::Q90 => "q90",
        })
    }
}

/// Per-`n` summary entering the fit; with several starts per `n` the worst
/// (largest) statistic is kept.
#[derive(Clone, Debug, PartialEq)]
pub struct FitPoint {
    pub n: u64,
    pub x0: u64,
    pub value: f64,
    pub trials: usize,
    pub censored_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub statistic: Statistic,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<FitPoint>,
    /// `ln value - (intercept + slope ln n)` per point.
    pub residuals: Vec<f64>,
    pub warnings: Vec<String>,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.ln()).exp()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 3 distinct n, have {0}")]
    TooFewPoints(usize),
    #[error("censoring above {threshold}: {}", format_censored(.points))]
    OverCensored { threshold: f64, points: Vec<(u64, u64, f64)> },
    #[error("statistic is not positive at n = {n}, x0 = {x0}; cannot take logs")]
    NonPositive { n: u64, x0: u64 },
}

fn format_censored(points: &[(u64, u64, f64)]) -> String {
    points
        .iter()
        .map(|(n, x0, f)| format!("n={n} x0={x0} censored={:.1}%", 100.0 * f))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Nearest-rank quantile with censored values treated as `+inf`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let len = sorted.len();
    sorted[((q * len as f64).ceil() as usize).clamp(1, len) - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let len = sorted.len();
    if len % 2 == 1 {
        sorted[len / 2]
    } else {
        0.5 * (sorted[len / 2 - 1] + sorted[len / 2])
    }
}

/// Per-(n, x0) statistics. Censored rows count as `+inf`, so quantiles stay
/// honest lower bounds; a point whose statistic lands on a censored value,
/// or a mean over censored rows, is reported by `fit_scaling`.
pub fn point_statistics(rows: &[ResultRow], statistic: Statistic) -> Vec<FitPoint> {
    let mut groups: BTreeMap<(u64, u64), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.n, r.x0)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((n, x0), rs)| {
            let mut values: Vec<f64> = rs.iter().map(|r| r.tau.unwrap_or(f64::INFINITY)).collect();
            values.sort_by(f64::total_cmp);
            let censored = rs.iter().filter(|r| r.censored).count();
            let value = match statistic {
                Statistic::Median => median(&values),
                Statistic::Q90 => quantile(&values, 0.9),
                Statistic::Mean => {
                    let done: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
                    if done.is_empty() {
                        f64::INFINITY
                    } else {
                        done.iter().sum::<f64>() / done.len() as f64
                    }
                }
            };
            FitPoint {
                n,
                x0,
                value,
                trials: rs.len(),
                censored_fraction: censored as f64 / rs.len() as f64,
            }
        })
        .collect()
}

/// Ordinary least squares of `ln value` on `ln n`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

pub fn fit_scaling(rows: &[ResultRow], statistic: Statistic, censor_threshold: f64) -> Result<ScalingFit, FitError> {
    let per_point = point_statistics(rows, statistic);
    let over: Vec<(u64, u64, f64)> = per_point
        .iter()
        .filter(|p| p.censored_fraction > censor_threshold)
        .map(|p| (p.n, p.x0, p.censored_fraction))
        .collect();
    if !over.is_empty() {
        return Err(FitError::OverCensored {
            threshold: censor_threshold,
            points: over,
        });
    }
    let mut warnings = Vec::new();
    let mut worst: BTreeMap<u64, FitPoint> = BTreeMap::new();
    for p in per_point {
        if !p.value.is_finite() {
            warnings.push(format!(
                "n={} x0={}: {statistic} falls on censored trials; point excluded",
                p.n, p.x0
            ));
            continue;
        }
        if statistic == Statistic::Mean && p.censored_fraction > 0.0 {
            warnings.push(format!(
                "n={} x0={}: mean over uncensored trials only ({:.1}% censored)",
                p.n,
                p.x0,
                100.0 * p.censored_fraction
            ));
        }
        if p.value <= 0.0 {
            return Err(FitError::NonPositive { n: p.n, x0: p.x0 });
        }
        match worst.get(&p.n) {
            Some(w) if w.value >= p.value => {}
            _ => {
                worst.insert(p.n, p);
            }
        }
    }
    if worst.len() < 3 {
        return Err(FitError::TooFewPoints(worst.len()));
    }
    let points: Vec<FitPoint> = worst.into_values().collect();
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
    let (slope, intercept, r_squared) = ols(&xs, &ys);
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(ScalingFit {
        statistic,
        slope,
        intercept,
        r_squared,
        points,
        residuals,
        warnings,
    })
}
