//! Goodness-of-fit and interval helpers used by tests and the CLI.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of cells after pooling.
    pub cells: usize,
}

/// Pearson goodness-of-fit of `observed` counts against probabilities
/// `expected`. Adjacent cells are pooled left to right until each expected
/// count reaches `min_expected`; a short last cell merges into its neighbour.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], min_expected: f64) -> ChiSquare {
    assert_eq!(observed.len(), expected.len(), "observed and expected lengths differ");
    let total: u64 = observed.iter().sum();
    let t = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &pr) in observed.iter().zip(expected) {
        o += ob as f64;
        e += pr * t;
        if e >= min_expected {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else if !statistic.is_finite() {
        0.0
    } else {
        ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
    };
    ChiSquare {
        statistic,
        dof,
        p_value,
        cells: cells.len(),
    }
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn normal_quantile(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// `mean +- z * sd / sqrt(k)` with the sample standard deviation.
pub fn mean_ci(values: &[f64], level: f64) -> (f64, f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let half = normal_quantile(level) * (var / k).sqrt();
    (mean, mean - half, mean + half)
}

/// Standard deviation of a binomial proportion.
pub fn proportion_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_has_p_one() {
        let r = chi_square_gof(&[25, 25, 50], &[0.25, 0.25, 0.5], 5.0);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gross_misfit_rejects() {
        let r = chi_square_gof(&[100, 0], &[0.5, 0.5], 5.0);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn pools_small_cells() {
        let r = chi_square_gof(&[0, 1, 49, 50], &[0.001, 0.009, 0.49, 0.5], 5.0);
        assert_eq!(r.cells, 2);
    }

    #[test]
    fn quantiles() {
        assert!((normal_quantile(0.95) - 1.959964).abs() < 1e-5);
        assert!((normal_quantile(0.999) - 3.290527).abs() < 1e-5);
    }
}
