//! Fréchet means of finite samples.
//!
//! The mean of `p_1..p_N` minimizes `Σ d(p, p_n)²`. Folding the sample
//! along leaf `k` and averaging gives the folded average
//! `η_k = (1/N) Σ fold(k, p_n)`. At most one `η_k` has a nonnegative height;
//! if one does, the mean is `unfold(k, η_k)`, and otherwise the mean is the
//! spine point at the average of the spine projections. No iteration is
//! involved.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    convex_project, distance, fold, project_spine, squared_norm, unfold, BookPoint, BookShape,
    FoldedVector,
};
use crate::measures::{BookMeasure, LeafFamily, SpineFamily};
use crate::rng::SeedStream;

/// Objective values within this of each other count as a tie in
/// [`barycenter_oracle`]; ties go to the spine.
pub const ORACLE_TIE_TOLERANCE: f64 = 1e-10;

/// A nonempty list of points on one book.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    shape: BookShape,
    points: Vec<BookPoint>,
}

impl SampleSet {
    pub fn new(shape: BookShape, points: Vec<BookPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(p) = points.iter().find(|p| p.shape() != shape) {
            return Err(Error::ShapeMismatch {
                left: shape.to_string(),
                right: p.shape().to_string(),
            });
        }
        Ok(SampleSet { shape, points })
    }

    pub fn shape(&self) -> BookShape {
        self.shape
    }

    pub fn points(&self) -> &[BookPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<BookPoint> {
        self.points
    }

    /// Applies `f` to every point.
    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&BookPoint) -> Result<BookPoint>,
    {
        let points = self.points.iter().map(f).collect::<Result<_>>()?;
        Self::new(self.shape, points)
    }
}

/// Running sums from which every folded average can be read off.
///
/// Keeps per-leaf sums of heights and the sum of spine coordinates, so a
/// point is absorbed in `O(d)` and the mean of the first `N` points costs
/// `O(K + d)`.
#[derive(Debug, Clone)]
pub struct FoldedSums {
    shape: BookShape,
    count: usize,
    heights: Vec<f64>,
    spine: Vec<f64>,
}

impl FoldedSums {
    pub fn new(shape: BookShape) -> Self {
        FoldedSums {
            shape,
            count: 0,
            heights: vec![0.0; shape.leaves()],
            spine: vec![0.0; shape.dim()],
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Adds a point given in raw form: `leaf` is 0 for the spine, `coords`
    /// is `(x0, y)`.
    pub fn push_raw(&mut self, leaf: usize, coords: &[f64]) {
        if leaf > 0 {
            self.heights[leaf - 1] += coords[0];
        }
        for (s, y) in self.spine.iter_mut().zip(&coords[1..]) {
            *s += y;
        }
        self.count += 1;
    }

    pub fn push(&mut self, p: &BookPoint) {
        if let Some(k) = p.leaf_index() {
            self.heights[k - 1] += p.height();
        }
        for (s, y) in self.spine.iter_mut().zip(p.spine_coords()) {
            *s += y;
        }
        self.count += 1;
    }

    /// Height of `η_k`.
    pub fn folded_height(&self, k: usize) -> f64 {
        let total: f64 = self.heights.iter().sum();
        let own = self.heights[k - 1];
        (own - (total - own)) / self.count as f64
    }

    pub fn spine_mean(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.spine.iter().map(|s| s / n).collect()
    }

    /// The Fréchet mean of the absorbed points.
    pub fn barycenter(&self) -> Result<BookPoint> {
        if self.count == 0 {
            return Err(Error::EmptySample);
        }
        let y = self.spine_mean();
        for k in 1..=self.shape.leaves() {
            let h = self.folded_height(k);
            if h > 0.0 {
                return BookPoint::leaf(self.shape, k, h, y);
            }
        }
        BookPoint::spine(self.shape, y)
    }
}

/// `η_k`, the mean of the sample folded along leaf `k`.
pub fn folded_average(sample: &SampleSet, k: usize) -> Result<FoldedVector> {
    sample.shape.check_leaf(k)?;
    let mut acc = vec![0.0; sample.shape.folded_dim()];
    for p in &sample.points {
        for (a, x) in acc.iter_mut().zip(fold(k, p)?.as_slice()) {
            *a += x;
        }
    }
    let n = sample.len() as f64;
    Ok(FoldedVector::new(acc.into_iter().map(|a| a / n).collect()))
}

/// `Σ_n d(p, p_n)²`.
pub fn frechet_objective(p: &BookPoint, sample: &SampleSet) -> Result<f64> {
    sample.points.iter().try_fold(0.0, |acc, q| {
        let d = distance(p, q)?;
        Ok(acc + d * d)
    })
}

/// The Fréchet mean, read off from the folded averages.
pub fn barycenter(sample: &SampleSet) -> Result<BookPoint> {
    let mut sums = FoldedSums::new(sample.shape);
    for p in &sample.points {
        sums.push(p);
    }
    sums.barycenter()
}

/// Mean of the spine projections.
pub fn projected_mean(sample: &SampleSet) -> Vec<f64> {
    let n = sample.len() as f64;
    let mut acc = vec![0.0; sample.shape.dim()];
    for p in &sample.points {
        for (a, y) in acc.iter_mut().zip(project_spine(p)) {
            *a += y;
        }
    }
    acc.into_iter().map(|a| a / n).collect()
}

/// Independent minimizer by candidate enumeration.
///
/// Candidates are the spine point at the projected mean and, for every
/// leaf, the convex projection of `η_k` unfolded into leaf `k`. For
/// `d ≤ 1` and small samples, a golden-section search along every leaf ray
/// above the projected mean adds further candidates. The candidate with
/// the least objective wins, spine candidates winning ties.
pub fn barycenter_oracle(sample: &SampleSet) -> Result<BookPoint> {
    let shape = sample.shape;
    let y = projected_mean(sample);
    let spine = BookPoint::spine(shape, y.clone())?;
    let mut best_value = frechet_objective(&spine, sample)?;
    let mut best = spine;

    let mut consider = |candidate: BookPoint| -> Result<()> {
        let value = frechet_objective(&candidate, sample)?;
        if value < best_value - ORACLE_TIE_TOLERANCE {
            best_value = value;
            best = candidate;
        }
        Ok(())
    };

    for k in 1..=shape.leaves() {
        let eta = convex_project(&folded_average(sample, k)?);
        consider(unfold(shape, k, &eta)?)?;
    }

    if shape.dim() <= 1 && sample.len() <= 64 {
        let reach = sample.points.iter().map(|p| p.height()).fold(0.0, f64::max);
        for k in 1..=shape.leaves() {
            let along = |t: f64| -> Result<f64> {
                frechet_objective(&BookPoint::leaf(shape, k, t, y.clone())?, sample)
            };
            let t = golden_section(along, 0.0, reach)?;
            consider(BookPoint::leaf(shape, k, t, y.clone())?)?;
        }
    }
    Ok(best)
}

/// Minimizer of a unimodal function on `[lo, hi]`.
fn golden_section<F>(f: F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + hi.abs()) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b)?;
        }
    }
    // the endpoint 0 (the spine) is never probed by the interior points
    let mid = 0.5 * (lo + hi);
    Ok(if f(0.0)? <= f(mid)? { 0.0 } else { mid })
}

/// Both sides of the identity `m_k = −∂Γ_k/∂x0 |_{x0=0}`, where
/// `Γ_k(x) = ½ ∫ |x − y|² dμ̃_k(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientCheck {
    /// `m_k` from the closed form.
    pub analytic: f64,
    /// Central difference `−(Γ_k(h e_0) − Γ_k(−h e_0)) / 2h`.
    pub finite_difference: f64,
    /// Monte Carlo standard error of `finite_difference`; zero when `Γ_k`
    /// was evaluated exactly over the atoms of an atomic measure.
    pub standard_error: f64,
}

impl GradientCheck {
    pub fn z_score(&self) -> f64 {
        let diff = (self.finite_difference - self.analytic).abs();
        if self.standard_error > 0.0 {
            diff / self.standard_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Estimates `−∂Γ_k/∂x0` at the origin by central differences with step
/// `h`. Atomic measures are integrated exactly over their atoms; other
/// measures use `samples` draws from `stream`, shared by both evaluations.
pub fn gamma_gradient_check(
    measure: &BookMeasure,
    k: usize,
    h: f64,
    samples: usize,
    stream: SeedStream,
) -> Result<GradientCheck> {
    let shape = measure.shape();
    shape.check_leaf(k)?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step h = {h} must be positive"
        )));
    }
    let analytic = measure.first_moment(k)?;
    let plus = FoldedVector::from_parts(h, &vec![0.0; shape.dim()]);
    let minus = FoldedVector::from_parts(-h, &vec![0.0; shape.dim()]);
    let half_sq = |x: &FoldedVector, y: &[f64]| {
        0.5 * squared_norm(
            &x.as_slice()
                .iter()
                .zip(y)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
    };

    if measure.is_atomic() {
        let mut gp = 0.0;
        let mut gm = 0.0;
        for (w, y) in folded_atoms(measure, k)? {
            gp += w * half_sq(&plus, &y);
            gm += w * half_sq(&minus, &y);
        }
        return Ok(GradientCheck {
            analytic,
            finite_difference: -(gp - gm) / (2.0 * h),
            standard_error: 0.0,
        });
    }

    if samples < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            actual: samples,
        });
    }
    let mut rng = stream.rng();
    let mut buf = vec![0.0; shape.folded_dim()];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let leaf = measure.draw_into(&mut rng, &mut buf);
        if leaf != 0 && leaf != k {
            buf[0] = -buf[0];
        }
        // per-draw contribution to the difference quotient
        let q = -(half_sq(&plus, &buf) - half_sq(&minus, &buf)) / (2.0 * h);
        sum += q;
        sum_sq += q * q;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(GradientCheck {
        analytic,
        finite_difference: mean,
        standard_error: (var / n).sqrt(),
    })
}

/// Weighted atoms of the leaf-`k` folded pushforward of an atomic measure.
fn folded_atoms(measure: &BookMeasure, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let shape = measure.shape();
    let mut out = Vec::new();
    if measure.spine_weight() > 0.0 {
        if let SpineFamily::PointMasses { atoms } = measure.spine_component().family() {
            for a in atoms {
                let p = BookPoint::spine(shape, a.x.clone())?;
                out.push((measure.spine_weight() * a.w, fold(k, &p)?.into_vec()));
            }
        }
    }
    for j in 1..=shape.leaves() {
        let w = measure.leaf_weight(j)?;
        if let LeafFamily::PointMasses { atoms } = measure.leaf_component(j)?.family() {
            for a in atoms {
                let p = BookPoint::leaf(shape, j, a.x[0], a.x[1..].to_vec())?;
                out.push((w * a.w, fold(k, &p)?.into_vec()));
            }
        }
    }
    Ok(out)
}

/// Uniform random probe point within `radius` of the origin in every
/// coordinate, on a uniformly chosen leaf or the spine.
pub fn random_probe<R: Rng + ?Sized>(shape: BookShape, radius: f64, rng: &mut R) -> BookPoint {
    let y: Vec<f64> = (0..shape.dim())
        .map(|_| rng.random_range(-radius..radius))
        .collect();
    let leaf = rng.random_range(0..=shape.leaves());
    if leaf == 0 {
        BookPoint::spine(shape, y).expect("dimension fixed by the shape")
    } else {
        BookPoint::leaf(shape, leaf, rng.random_range(0.0..radius), y)
            .expect("probe heights are nonnegative")
    }
}
