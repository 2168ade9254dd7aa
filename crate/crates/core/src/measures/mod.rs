//! Probability measures on the open book and their stickiness.
//!
//! A nondegenerate measure is a mixture `w0 μ0 + Σ_k w_k μ_k` of a spine
//! component and one component per open leaf, with every `w_k > 0`. In
//! folded coordinates the first moment along leaf `k` is
//!
//! ```text
//! m_k = w_k v_k − Σ_{j≠k} w_j v_j,    v_k = E_{μ_k}[x0] > 0,
//! ```
//!
//! and at most one `m_k` can be nonnegative. That index, if any, decides
//! where the Fréchet mean lives:
//!
//! * all `m_k < 0`: **sticky**, the mean is on the spine;
//! * `m_k = 0`: **partly sticky**, on the spine but on the edge of leaf `k`;
//! * `m_k > 0`: **nonsticky**, in the interior of leaf `k`.

mod components;

pub use components::{
    Atom, Component, LeafComponent, LeafFamily, Radial, SpineComponent, SpineFamily,
};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{unfold, BookPoint, BookShape, FoldedVector};

/// Tolerance on `Σ_k w_k = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Default relative tolerance for declaring `m_k = 0`, as a multiple of
/// `Σ_j w_j v_j`.
pub const DEFAULT_CLASSIFY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "verdict", content = "leaf", rename_all = "snake_case")]
pub enum Verdict {
    Sticky,
    PartlySticky(usize),
    Nonsticky(usize),
}

impl Verdict {
    /// The distinguished leaf, if any.
    pub fn leaf(&self) -> Option<usize> {
        match *self {
            Verdict::Sticky => None,
            Verdict::PartlySticky(k) | Verdict::Nonsticky(k) => Some(k),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Sticky => "sticky",
            Verdict::PartlySticky(_) => "partly_sticky",
            Verdict::Nonsticky(_) => "nonsticky",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sticky => write!(f, "sticky"),
            Verdict::PartlySticky(k) => write!(f, "partly sticky (leaf {k})"),
            Verdict::Nonsticky(k) => write!(f, "nonsticky (leaf {k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// `m_1..m_K`
    pub moments: Vec<f64>,
    /// `v_1..v_K`
    pub leaf_means: Vec<f64>,
    pub spine_weight: f64,
    /// `w_1..w_K`
    pub leaf_weights: Vec<f64>,
}

/// A nondegenerate mixture on an open book.
#[derive(Debug, Clone)]
pub struct BookMeasure {
    shape: BookShape,
    spine_weight: f64,
    spine: SpineComponent,
    leaf_weights: Vec<f64>,
    leaves: Vec<LeafComponent>,
}

impl BookMeasure {
    /// `leaves[k - 1]` is the `(w_k, μ_k)` pair for leaf `k`.
    pub fn new(
        shape: BookShape,
        spine_weight: f64,
        spine: SpineComponent,
        leaves: Vec<(f64, LeafComponent)>,
    ) -> Result<Self> {
        let d = shape.dim();
        if leaves.len() != shape.leaves() {
            return Err(Error::InvalidWeights(format!(
                "{} leaf components for {} leaves",
                leaves.len(),
                shape.leaves()
            )));
        }
        if !(0.0..1.0).contains(&spine_weight) {
            return Err(Error::InvalidWeights(format!(
                "spine weight {spine_weight} outside [0, 1)"
            )));
        }
        if spine.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: spine.dim(),
            });
        }
        let mut total = spine_weight;
        for (k, (w, c)) in leaves.iter().enumerate() {
            if !(*w > 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "leaf {} has weight {w}; degenerate leaves must be removed",
                    k + 1
                )));
            }
            if c.dim() != d + 1 {
                return Err(Error::DimensionMismatch {
                    expected: d + 1,
                    actual: c.dim(),
                });
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let (leaf_weights, leaves) = leaves.into_iter().unzip();
        Ok(BookMeasure {
            shape,
            spine_weight,
            spine,
            leaf_weights,
            leaves,
        })
    }

    pub fn shape(&self) -> BookShape {
        self.shape
    }

    pub fn spine_weight(&self) -> f64 {
        self.spine_weight
    }

    pub fn spine_component(&self) -> &SpineComponent {
        &self.spine
    }

    pub fn leaf_weight(&self, k: usize) -> Result<f64> {
        self.shape.check_leaf(k)?;
        Ok(self.leaf_weights[k - 1])
    }

    pub fn leaf_weights(&self) -> &[f64] {
        &self.leaf_weights
    }

    pub fn leaf_component(&self, k: usize) -> Result<&LeafComponent> {
        self.shape.check_leaf(k)?;
        Ok(&self.leaves[k - 1])
    }

    /// Whether every component is a finite set of atoms.
    pub fn is_atomic(&self) -> bool {
        (self.spine_weight == 0.0 || self.spine.is_atomic())
            && self.leaves.iter().all(LeafComponent::is_atomic)
    }

    /// `v_k`, the mean distance to the spine under the leaf-`k` component.
    pub fn leaf_mean_v(&self, k: usize) -> Result<f64> {
        Ok(self.leaf_component(k)?.mean_height())
    }

    /// `m_k = w_k v_k − Σ_{j≠k} w_j v_j`.
    pub fn first_moment(&self, k: usize) -> Result<f64> {
        self.shape.check_leaf(k)?;
        Ok(self.first_moments()[k - 1])
    }

    pub fn first_moments(&self) -> Vec<f64> {
        let wv: Vec<f64> = self
            .leaf_weights
            .iter()
            .zip(&self.leaves)
            .map(|(w, c)| w * c.mean_height())
            .collect();
        let total: f64 = wv.iter().sum();
        wv.iter().map(|x| x - (total - x)).collect()
    }

    /// `Σ_k w_k v_k`, the scale against which moments are compared.
    fn moment_scale(&self) -> f64 {
        self.leaf_weights
            .iter()
            .zip(&self.leaves)
            .map(|(w, c)| w * c.mean_height())
            .sum()
    }

    pub fn classify(&self) -> Result<Classification> {
        self.classify_with_tolerance(DEFAULT_CLASSIFY_TOLERANCE)
    }

    /// `|m_k| ≤ rel_tol · Σ_j w_j v_j` counts as `m_k = 0`.
    pub fn classify_with_tolerance(&self, rel_tol: f64) -> Result<Classification> {
        let moments = self.first_moments();
        let tol = rel_tol * self.moment_scale();
        let candidates: Vec<usize> = (0..moments.len()).filter(|&i| moments[i] >= -tol).collect();
        let verdict = match candidates.as_slice() {
            [] => Verdict::Sticky,
            [i] if moments[*i] > tol => Verdict::Nonsticky(i + 1),
            [i] => Verdict::PartlySticky(i + 1),
            _ => return Err(Error::TrichotomyViolated(moments)),
        };
        Ok(Classification {
            verdict,
            leaf_means: self.leaves.iter().map(LeafComponent::mean_height).collect(),
            moments,
            spine_weight: self.spine_weight,
            leaf_weights: self.leaf_weights.clone(),
        })
    }

    /// `∫ P_S p dμ(p)`, the mean of the spine projections.
    pub fn spine_mean(&self) -> Vec<f64> {
        let d = self.shape.dim();
        let mut m = self.spine.mean() * self.spine_weight;
        for (w, c) in self.leaf_weights.iter().zip(&self.leaves) {
            m += c.mean().rows(1, d) * *w;
        }
        m.iter().copied().collect()
    }

    /// Mean of the leaf-`k` folded pushforward, `(m_k, spine_mean)`.
    pub fn folded_mean(&self, k: usize) -> Result<FoldedVector> {
        let m = self.first_moment(k)?;
        Ok(FoldedVector::from_parts(m, &self.spine_mean()))
    }

    /// Uncentered second moment `∫ y yᵀ` of the spine projections. Equals
    /// the spinal covariance `C_S` once the measure is [centered](Self::center).
    pub fn spinal_covariance(&self) -> DMatrix<f64> {
        let d = self.shape.dim();
        let mut c = self.spine.second_moment() * self.spine_weight;
        for (w, comp) in self.leaf_weights.iter().zip(&self.leaves) {
            c += comp.second_moment().view((1, 1), (d, d)) * *w;
        }
        c
    }

    /// Uncentered second moment `∫ x xᵀ` of the leaf-`k` folded pushforward,
    /// the costal covariance `C_k` of a centered measure.
    pub fn costal_covariance(&self, k: usize) -> Result<DMatrix<f64>> {
        self.shape.check_leaf(k)?;
        let n = self.shape.folded_dim();
        let mut c = DMatrix::zeros(n, n);
        c.view_mut((1, 1), (n - 1, n - 1))
            .copy_from(&(self.spine.second_moment() * self.spine_weight));
        let reflect =
            DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| if i == 0 { -1.0 } else { 1.0 }));
        for (j, (w, comp)) in self.leaf_weights.iter().zip(&self.leaves).enumerate() {
            let s = comp.second_moment();
            if j + 1 == k {
                c += s * *w;
            } else {
                c += &reflect * s * &reflect * *w;
            }
        }
        Ok(c)
    }

    /// `C̃_k`, the covariance of the folded pushforward about its mean.
    /// Defined only for measures that are nonsticky on leaf `k`.
    pub fn nonsticky_covariance(&self, k: usize) -> Result<DMatrix<f64>> {
        let verdict = self.classify()?.verdict;
        if verdict != Verdict::Nonsticky(k) {
            return Err(Error::RegimeMismatch {
                expected: Verdict::Nonsticky(k).to_string(),
                actual: verdict.to_string(),
            });
        }
        let mean = DVector::from_column_slice(self.folded_mean(k)?.as_slice());
        Ok(self.costal_covariance(k)? - &mean * mean.transpose())
    }

    /// Population Fréchet mean: inside leaf `k` at the folded mean when
    /// nonsticky, otherwise the spine point at the mean of spine projections.
    pub fn population_mean(&self) -> Result<BookPoint> {
        match self.classify()?.verdict {
            Verdict::Nonsticky(k) => unfold(self.shape, k, &self.folded_mean(k)?),
            _ => BookPoint::spine(self.shape, self.spine_mean()),
        }
    }

    /// Translates every component along the spine by `z`.
    pub fn translated(&self, z: &[f64]) -> Result<Self> {
        self.shape.check_spine(z)?;
        Ok(BookMeasure {
            shape: self.shape,
            spine_weight: self.spine_weight,
            spine: self.spine.translated(z)?,
            leaf_weights: self.leaf_weights.clone(),
            leaves: self
                .leaves
                .iter()
                .map(|c| c.translated(z))
                .collect::<Result<_>>()?,
        })
    }

    /// Pushforward under dilation by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::NegativeScale(lambda));
        }
        Ok(BookMeasure {
            shape: self.shape,
            spine_weight: self.spine_weight,
            spine: self.spine.scaled(lambda)?,
            leaf_weights: self.leaf_weights.clone(),
            leaves: self
                .leaves
                .iter()
                .map(|c| c.scaled(lambda))
                .collect::<Result<_>>()?,
        })
    }

    /// Translate so that the population mean projects to the spine origin.
    pub fn center(&self) -> Result<Self> {
        let shift: Vec<f64> = self.spine_mean().iter().map(|v| -v).collect();
        if shift.iter().all(|v| *v == 0.0) {
            return Ok(self.clone());
        }
        self.translated(&shift)
    }

    /// Draws one point in raw form. Writes `(x0, y)` into `out` (length
    /// `d + 1`, with `x0 = 0` for spine draws) and returns the leaf index,
    /// or 0 for the spine.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> usize {
        let u: f64 = rng.random();
        let mut acc = self.spine_weight;
        if u < acc {
            out[0] = 0.0;
            self.spine.sample_into(rng, &mut out[1..]);
            return 0;
        }
        let last = self.leaves.len();
        for (j, (w, comp)) in self.leaf_weights.iter().zip(&self.leaves).enumerate() {
            acc += w;
            if u < acc || j + 1 == last {
                comp.sample_into(rng, out);
                return j + 1;
            }
        }
        unreachable!("the last leaf absorbs rounding")
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> BookPoint {
        let mut buf = vec![0.0; self.shape.folded_dim()];
        let leaf = self.draw_into(rng, &mut buf);
        let y = buf[1..].to_vec();
        if leaf == 0 {
            BookPoint::spine(self.shape, y).expect("dimension fixed by the shape")
        } else {
            BookPoint::leaf(self.shape, leaf, buf[0], y).expect("leaf draws are positive")
        }
    }
}
