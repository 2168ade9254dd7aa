//! The open book as a metric space.
//!
//! An open book `O(d, K)` is `K` closed half-spaces of dimension `d + 1`
//! (the *leaves*) glued along their common boundary hyperplane (the
//! *spine*). A point in the interior of leaf `k` is written
//! `(x0, y)` with `x0 > 0` its distance to the spine and `y ∈ R^d` the
//! foot of the perpendicular. Spine points carry no leaf tag, so two
//! points are equal exactly when their representations are equal.
//!
//! The folding map `fold(k, ·)` sends the book into `R^{d+1}`, keeping
//! leaf `k` in the upper half-space and reflecting every other leaf into
//! the lower one. Distances between a point of leaf `k` (or the spine)
//! and any other point are Euclidean distances after folding along `k`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Spine dimension and leaf count of an open book.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BookShape {
    dim: usize,
    leaves: usize,
}

impl BookShape {
    /// `dim` is the spine dimension `d` (0 gives the `K`-spider), `leaves`
    /// the number of leaves `K`, which must be at least 3.
    pub fn new(dim: usize, leaves: usize) -> Result<Self> {
        if leaves < 3 {
            return Err(Error::TooFewLeaves(leaves));
        }
        Ok(BookShape { dim, leaves })
    }

    /// The three-legged spider `d = 0, K = 3`.
    pub fn spider3() -> Self {
        BookShape { dim: 0, leaves: 3 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    /// Dimension of the folded space, `d + 1`.
    pub fn folded_dim(&self) -> usize {
        self.dim + 1
    }

    pub fn check_leaf(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.leaves {
            return Err(Error::LeafOutOfRange {
                index: k,
                leaves: self.leaves,
            });
        }
        Ok(())
    }

    pub(crate) fn check_spine(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: y.len(),
            });
        }
        Ok(())
    }

    fn check_same(&self, other: &BookShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                left: self.to_string(),
                right: other.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for BookShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O(d={}, K={})", self.dim, self.leaves)
    }
}

/// Where a point sits: on the spine, or in the open interior of a leaf.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "location", rename_all = "lowercase")]
pub enum Location {
    Spine { y: Vec<f64> },
    Leaf { leaf: usize, x0: f64, y: Vec<f64> },
}

/// A point of an open book in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BookPoint {
    #[serde(skip)]
    shape: BookShape,
    #[serde(flatten)]
    location: Location,
}

impl BookPoint {
    pub fn spine(shape: BookShape, y: Vec<f64>) -> Result<Self> {
        shape.check_spine(&y)?;
        Ok(BookPoint {
            shape,
            location: Location::Spine { y },
        })
    }

    /// The spine point with all coordinates zero.
    pub fn origin(shape: BookShape) -> Self {
        BookPoint {
            shape,
            location: Location::Spine {
                y: vec![0.0; shape.dim],
            },
        }
    }

    /// A point at distance `x0` from the spine in leaf `leaf` (1-based).
    /// `x0 = 0` yields the spine point `y`.
    pub fn leaf(shape: BookShape, leaf: usize, x0: f64, y: Vec<f64>) -> Result<Self> {
        shape.check_leaf(leaf)?;
        shape.check_spine(&y)?;
        if !(x0 >= 0.0) || !x0.is_finite() {
            return Err(Error::InvalidHeight(x0));
        }
        let location = if x0 == 0.0 {
            Location::Spine { y }
        } else {
            Location::Leaf { leaf, x0, y }
        };
        Ok(BookPoint { shape, location })
    }

    pub fn shape(&self) -> BookShape {
        self.shape
    }

    pub fn location(&self) -> &Location {
        &self.location
    }

    /// Leaf index, or `None` for spine points.
    pub fn leaf_index(&self) -> Option<usize> {
        match self.location {
            Location::Spine { .. } => None,
            Location::Leaf { leaf, .. } => Some(leaf),
        }
    }

    pub fn is_on_spine(&self) -> bool {
        matches!(self.location, Location::Spine { .. })
    }

    /// Distance to the spine; zero for spine points.
    pub fn height(&self) -> f64 {
        match self.location {
            Location::Spine { .. } => 0.0,
            Location::Leaf { x0, .. } => x0,
        }
    }

    pub fn spine_coords(&self) -> &[f64] {
        match &self.location {
            Location::Spine { y } | Location::Leaf { y, .. } => y,
        }
    }

    /// Whether `self` and `other` agree in canonical form up to `tol` in
    /// every coordinate. A spine point matches a leaf point whose height is
    /// at most `tol`.
    pub fn approx_eq(&self, other: &BookPoint, tol: f64) -> bool {
        if self.shape != other.shape {
            return false;
        }
        let spine_close = self
            .spine_coords()
            .iter()
            .zip(other.spine_coords())
            .all(|(a, b)| (a - b).abs() <= tol);
        let height_close = match (self.leaf_index(), other.leaf_index()) {
            (Some(a), Some(b)) if a == b => (self.height() - other.height()).abs() <= tol,
            (Some(_), Some(_)) => self.height() <= tol && other.height() <= tol,
            _ => (self.height() - other.height()).abs() <= tol,
        };
        spine_close && height_close
    }
}

impl fmt::Display for BookPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Location::Spine { y } => write!(f, "spine{y:?}"),
            Location::Leaf { leaf, x0, y } => write!(f, "leaf {leaf} (x0={x0}, y={y:?})"),
        }
    }
}

/// A vector of `R^{d+1}`: first coordinate is the signed distance to the
/// hyperplane `H`, the remaining `d` are spine coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FoldedVector(Vec<f64>);

impl FoldedVector {
    /// Panics on an empty vector: a folded vector always has the height
    /// coordinate.
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(
            !coords.is_empty(),
            "folded vectors have dimension d + 1 ≥ 1"
        );
        FoldedVector(coords)
    }

    pub fn from_parts(height: f64, spine: &[f64]) -> Self {
        let mut coords = Vec::with_capacity(spine.len() + 1);
        coords.push(height);
        coords.extend_from_slice(spine);
        FoldedVector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        FoldedVector(vec![0.0; dim])
    }

    pub fn height(&self) -> f64 {
        self.0[0]
    }

    pub fn spine(&self) -> &[f64] {
        &self.0[1..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn distance(&self, other: &FoldedVector) -> f64 {
        euclidean(&self.0, &other.0)
    }
}

impl From<FoldedVector> for Vec<f64> {
    fn from(v: FoldedVector) -> Self {
        v.0
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn squared_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Geodesic distance between two points of the same book.
pub fn distance(p: &BookPoint, q: &BookPoint) -> Result<f64> {
    p.shape.check_same(&q.shape)?;
    let dy2: f64 = p
        .spine_coords()
        .iter()
        .zip(q.spine_coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let dx = match (p.leaf_index(), q.leaf_index()) {
        (Some(a), Some(b)) if a != b => p.height() + q.height(),
        _ => p.height() - q.height(),
    };
    Ok((dx * dx + dy2).sqrt())
}

/// Reflection across the hyperplane `H`: negates the height coordinate.
pub fn reflect(x: &FoldedVector) -> FoldedVector {
    let mut out = x.clone();
    out.0[0] = -out.0[0];
    out
}

/// The folding map along leaf `k`.
pub fn fold(k: usize, p: &BookPoint) -> Result<FoldedVector> {
    p.shape.check_leaf(k)?;
    let height = match p.location {
        Location::Spine { .. } => 0.0,
        Location::Leaf { leaf, x0, .. } if leaf == k => x0,
        Location::Leaf { x0, .. } => -x0,
    };
    Ok(FoldedVector::from_parts(height, p.spine_coords()))
}

/// Inverse of [`fold`] on the closed upper half-space: places `x` in leaf
/// `k`, or on the spine when its height is zero.
pub fn unfold(shape: BookShape, k: usize, x: &FoldedVector) -> Result<BookPoint> {
    shape.check_leaf(k)?;
    if x.dim() != shape.folded_dim() {
        return Err(Error::DimensionMismatch {
            expected: shape.folded_dim(),
            actual: x.dim(),
        });
    }
    if x.height() < 0.0 {
        return Err(Error::NotInClosedHalfSpace(x.height()));
    }
    BookPoint::leaf(shape, k, x.height(), x.spine().to_vec())
}

/// Convex projection of `R^{d+1}` onto the closed upper half-space.
pub fn convex_project(x: &FoldedVector) -> FoldedVector {
    let mut out = x.clone();
    if out.0[0] < 0.0 {
        out.0[0] = 0.0;
    }
    out
}

/// Orthogonal projection onto the spine.
pub fn project_spine(p: &BookPoint) -> Vec<f64> {
    p.spine_coords().to_vec()
}

/// Action of the spine `R^d` by translation along the spine.
pub fn translate(z: &[f64], p: &BookPoint) -> Result<BookPoint> {
    p.shape.check_spine(z)?;
    let shift = |y: &[f64]| y.iter().zip(z).map(|(a, b)| a + b).collect::<Vec<_>>();
    let location = match &p.location {
        Location::Spine { y } => Location::Spine { y: shift(y) },
        Location::Leaf { leaf, x0, y } => Location::Leaf {
            leaf: *leaf,
            x0: *x0,
            y: shift(y),
        },
    };
    Ok(BookPoint {
        shape: p.shape,
        location,
    })
}

/// Dilation by `lambda ≥ 0` about the origin.
pub fn scale(lambda: f64, p: &BookPoint) -> Result<BookPoint> {
    if !(lambda >= 0.0) {
        return Err(Error::NegativeScale(lambda));
    }
    let y: Vec<f64> = p.spine_coords().iter().map(|v| lambda * v).collect();
    match p.location {
        Location::Spine { .. } => BookPoint::spine(p.shape, y),
        Location::Leaf { leaf, x0, .. } => BookPoint::leaf(p.shape, leaf, lambda * x0, y),
    }
}
