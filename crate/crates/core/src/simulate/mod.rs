//! Seeded sampling and the law-of-large-numbers and central-limit drivers.
//!
//! Every random quantity is drawn from a [`SeedStream`] substream keyed by
//! its replicate index. Replicates run on a rayon pool of the requested
//! size and are collected in index order, so reports do not depend on the
//! number of workers.

mod clt;
mod lln;
mod report;

pub use clt::{rescaled_mean, run_clt, CltConfig, CltReplicate, CltReport};
pub use lln::{run_lln, LlnConfig, LlnReplicate, LlnReport};
pub use report::{write_clt_csv, write_lln_csv, write_points_csv};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frechet::SampleSet;
use crate::gaussian::GaussianSampler;
use crate::geometry::{convex_project, unfold, BookPoint, FoldedVector};
use crate::measures::{BookMeasure, Verdict};
use crate::rng::SeedStream;

/// `n` independent draws from `measure`.
pub fn sample_measure(measure: &BookMeasure, stream: SeedStream, n: usize) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = stream.rng();
    let points = (0..n).map(|_| measure.draw(&mut rng)).collect();
    SampleSet::new(measure.shape(), points)
}

/// `n` draws from the centered Gaussian with covariance `cov`.
pub fn sample_gaussian(cov: &DMatrix<f64>, stream: SeedStream, n: usize) -> Result<Vec<Vec<f64>>> {
    let sampler = GaussianSampler::centered(cov)?;
    let mut rng = stream.rng();
    Ok((0..n).map(|_| sampler.sample(&mut rng)).collect())
}

/// Draws from the spinal limit measure `N(0, C_S)`.
pub fn sample_spinal_limit(
    measure: &BookMeasure,
    stream: SeedStream,
    n: usize,
) -> Result<Vec<Vec<f64>>> {
    sample_gaussian(&measure.spinal_covariance(), stream, n)
}

/// Draws from the costal limit measure `N(0, C_k)` on `R^{d+1}`.
pub fn sample_costal_limit(
    measure: &BookMeasure,
    k: usize,
    stream: SeedStream,
    n: usize,
) -> Result<Vec<FoldedVector>> {
    Ok(sample_gaussian(&measure.costal_covariance(k)?, stream, n)?
        .into_iter()
        .map(FoldedVector::new)
        .collect())
}

/// Draws from the spinocostal limit measure: costal draws pushed through
/// the convex projection and unfolded into leaf `k`.
pub fn sample_spinocostal_limit(
    measure: &BookMeasure,
    k: usize,
    stream: SeedStream,
    n: usize,
) -> Result<Vec<BookPoint>> {
    match measure.classify()?.verdict {
        Verdict::PartlySticky(j) if j == k => {}
        v => log::warn!("spinocostal limit on leaf {k} requested for a {v} measure"),
    }
    sample_costal_limit(measure, k, stream, n)?
        .iter()
        .map(|x| unfold(measure.shape(), k, &convex_project(x)))
        .collect()
}

/// An axis-aligned box of the spine (`lower ≤ y < upper`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpineBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SpineBox {
    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *l <= *v && *v < *u)
    }

    /// Ten slabs along the first spine coordinate, with edges at
    /// `σ · {−∞, −1.6, −1.2, …, 1.6, ∞}` where `σ² = C_S[0, 0]`; the other
    /// coordinates are unrestricted. For `d = 0` the single (whole) spine.
    pub fn default_grid(measure: &BookMeasure) -> Vec<SpineBox> {
        let d = measure.shape().dim();
        if d == 0 {
            return vec![SpineBox {
                lower: vec![],
                upper: vec![],
            }];
        }
        let sigma = measure.spinal_covariance()[(0, 0)].sqrt();
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend((-4..=4).map(|i| 0.4 * i as f64 * sigma));
        edges.push(f64::INFINITY);
        edges
            .windows(2)
            .map(|w| {
                let mut lower = vec![f64::NEG_INFINITY; d];
                let mut upper = vec![f64::INFINITY; d];
                lower[0] = w[0];
                upper[0] = w[1];
                SpineBox { lower, upper }
            })
            .collect()
    }
}

/// Two estimates of the semispinal mass `h_k⁰(B)` of one spine box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemispinalComparison {
    pub spine_box: SpineBox,
    /// Fraction of spinocostal draws on the spine inside the box.
    pub pushforward: f64,
    pub pushforward_se: f64,
    /// `ĝ_S(B) − ĝ_k((0, ∞) × B)` from independent spinal and costal draws.
    pub differencing: f64,
    pub differencing_se: f64,
    /// `|pushforward − differencing| ≤ 4 · combined SE`.
    pub pass: bool,
}

/// Compares the pushforward construction of the spinocostal measure's
/// spine part against the literal difference `g_S(B) − g_k((0, ∞) × B)`.
/// Each estimator uses `n` draws from its own substream of `stream`.
pub fn compare_semispinal(
    measure: &BookMeasure,
    k: usize,
    boxes: &[SpineBox],
    stream: SeedStream,
    n: usize,
) -> Result<Vec<SemispinalComparison>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let pushed = sample_spinocostal_limit(measure, k, stream.substream(0), n)?;
    let spinal = sample_spinal_limit(measure, stream.substream(1), n)?;
    let costal = sample_costal_limit(measure, k, stream.substream(2), n)?;
    let nf = n as f64;
    let binom_se = |p: f64| (p * (1.0 - p) / nf).sqrt();
    Ok(boxes
        .iter()
        .map(|b| {
            let push = pushed
                .iter()
                .filter(|p| p.is_on_spine() && b.contains(p.spine_coords()))
                .count() as f64
                / nf;
            let gs = spinal.iter().filter(|y| b.contains(y)).count() as f64 / nf;
            let gk = costal
                .iter()
                .filter(|x| x.height() > 0.0 && b.contains(x.spine()))
                .count() as f64
                / nf;
            let diff = gs - gk;
            let push_se = binom_se(push);
            let diff_se = (binom_se(gs).powi(2) + binom_se(gk).powi(2)).sqrt();
            let band = crate::stats::SE_BAND * (push_se * push_se + diff_se * diff_se).sqrt();
            SemispinalComparison {
                spine_box: b.clone(),
                pushforward: push,
                pushforward_se: push_se,
                differencing: diff,
                differencing_se: diff_se,
                pass: (push - diff).abs() <= band,
            }
        })
        .collect())
}

/// Runs `f(i)` for `i in 0..count` on a pool of `workers` threads and
/// returns the results in index order.
pub(crate) fn run_replicates<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| (0..count as u64).into_par_iter().map(&f).collect())
}
