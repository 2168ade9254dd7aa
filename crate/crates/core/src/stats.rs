//! Two-sample and moment comparisons used to judge limit theorems.
//!
//! Every test returns a [`TestResult`] whose decision is a pure function of
//! the statistic and the threshold.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Width of the acceptance band, in standard errors.
pub const SE_BAND: f64 = 4.0;

/// Default Kolmogorov–Smirnov level.
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub pass: bool,
    pub sizes: Vec<usize>,
}

impl TestResult {
    /// Passes when `statistic ≤ threshold`.
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, sizes: Vec<usize>) -> Self {
        TestResult {
            name: name.into(),
            pass: statistic <= threshold,
            statistic,
            threshold,
            p_value: None,
            sizes,
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// `c(α) = sqrt(−ln(α/2) / 2)`; `c(0.01) ≈ 1.628`.
pub fn ks_critical_value(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Asymptotic Kolmogorov tail `P(K > λ) = 2 Σ (−1)^{j−1} exp(−2 j² λ²)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        // series converges too slowly here; the tail is 1 to double precision
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `sup_x |F_a(x) − F_b(x)|` for the empirical distribution functions.
/// Handles ties, so samples with atoms are fine.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i].total_cmp(&b[j]).is_le() {
            a[i]
        } else {
            b[j]
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic threshold
/// `c(α) sqrt((n_a + n_b) / (n_a n_b))`.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<TestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} not in (0, 1)"
        )));
    }
    let d = ks_statistic(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let scale = ((na + nb) / (na * nb)).sqrt();
    let mut result = TestResult::new(
        "ks",
        d,
        ks_critical_value(alpha) * scale,
        vec![a.len(), b.len()],
    );
    result.p_value = Some(kolmogorov_tail(d / scale));
    Ok(result)
}

/// Sample covariance together with plug-in standard errors of its entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    /// Unbiased sample covariance.
    pub matrix: DMatrix<f64>,
    /// Large-sample standard error of each entry,
    /// `sqrt((E[(x_i−μ_i)²(x_j−μ_j)²] − c_ij²) / n)`.
    pub standard_errors: DMatrix<f64>,
    pub n: usize,
}

/// Covariance of a list of equal-length vectors (`n ≥ 2`).
pub fn empirical_covariance(samples: &[Vec<f64>]) -> Result<CovarianceEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            actual: n,
        });
    }
    let dim = samples[0].len();
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }
    let nf = n as f64;
    let mean: Vec<f64> = (0..dim)
        .map(|i| samples.iter().map(|s| s[i]).sum::<f64>() / nf)
        .collect();
    let mut second = DMatrix::<f64>::zeros(dim, dim);
    let mut fourth = DMatrix::<f64>::zeros(dim, dim);
    for s in samples {
        for i in 0..dim {
            let ci = s[i] - mean[i];
            for j in i..dim {
                let p = ci * (s[j] - mean[j]);
                second[(i, j)] += p;
                fourth[(i, j)] += p * p;
            }
        }
    }
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut standard_errors = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let biased = second[(i, j)] / nf;
            let var = (fourth[(i, j)] / nf - biased * biased).max(0.0);
            let c = second[(i, j)] / (nf - 1.0);
            let se = (var / nf).sqrt();
            matrix[(i, j)] = c;
            matrix[(j, i)] = c;
            standard_errors[(i, j)] = se;
            standard_errors[(j, i)] = se;
        }
    }
    Ok(CovarianceEstimate {
        matrix,
        standard_errors,
        n,
    })
}

/// Entrywise comparison: passes when every entry is within
/// `4·SE + 1e-12·(1 + |c|)` of the analytic value. The statistic is the
/// largest ratio `|ĉ − c| / (4·SE + 1e-12·(1 + |c|))`, the threshold 1.
pub fn compare_covariance(
    estimate: &CovarianceEstimate,
    analytic: &DMatrix<f64>,
) -> Result<TestResult> {
    let dim = estimate.matrix.nrows();
    if analytic.nrows() != dim || analytic.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: analytic.nrows(),
        });
    }
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in i..dim {
            let c = analytic[(i, j)];
            let band = SE_BAND * estimate.standard_errors[(i, j)] + 1e-12 * (1.0 + c.abs());
            worst = worst.max((estimate.matrix[(i, j)] - c).abs() / band);
        }
    }
    Ok(TestResult::new("covariance", worst, 1.0, vec![estimate.n]))
}

/// Passes when `|hits/n − p0| ≤ 4 sqrt(p0 (1 − p0) / n)`. The statistic is
/// the observed fraction's distance from `p0`, the threshold the band.
pub fn binomial_fraction_test(hits: usize, n: usize, p0: f64) -> Result<TestResult> {
    if hits > n || n == 0 {
        return Err(Error::InvalidArgument(format!("{hits} hits out of {n}")));
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidArgument(format!(
            "p0 = {p0} not a probability"
        )));
    }
    let nf = n as f64;
    let band = SE_BAND * (p0 * (1.0 - p0) / nf).sqrt();
    Ok(TestResult::new(
        "fraction",
        (hits as f64 / nf - p0).abs(),
        band,
        vec![n],
    ))
}
