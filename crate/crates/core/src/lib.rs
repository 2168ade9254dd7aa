//! Open books, their Fréchet means, and the sticky limit theorems.
//!
//! An open book is `K ≥ 3` closed half-spaces glued along a common
//! hyperplane, the spine. It is the simplest space of nonpositive curvature
//! with a singularity, and Fréchet means on it can *stick* to the spine:
//! they stay there under small perturbations of the data.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: points, the metric, folding maps, projections;
//! * [`measures`]: mixture measures with closed-form moments and the
//!   sticky / partly sticky / nonsticky classification;
//! * [`frechet`]: exact Fréchet means of samples and an independent oracle;
//! * [`simulate`]: seeded sampling plus LLN and CLT experiment drivers;
//! * [`stats`]: Kolmogorov–Smirnov, covariance and fraction tests;
//! * [`io`]: JSON measure and experiment files, CSV point sets.
//!
//! ```
//! use openbook::frechet::{barycenter, SampleSet};
//! use openbook::geometry::{BookPoint, BookShape};
//!
//! let spider = BookShape::spider3();
//! let points = (1..=3)
//!     .map(|k| BookPoint::leaf(spider, k, 1.0, vec![]))
//!     .collect::<Result<Vec<_>, _>>()?;
//! let mean = barycenter(&SampleSet::new(spider, points)?)?;
//! assert!(mean.is_on_spine());
//! # Ok::<(), openbook::Error>(())
//! ```

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frechet;
pub mod gaussian;
pub mod geometry;
pub mod io;
pub mod measures;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};

// The guide's code listings are compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/open-book.md")]
    mod open_book {}
    #[doc = include_str!("../../../book/src/frechet-means.md")]
    mod frechet_means {}
    #[doc = include_str!("../../../book/src/stickiness.md")]
    mod stickiness {}
    #[doc = include_str!("../../../book/src/limit-theorems.md")]
    mod limit_theorems {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}
