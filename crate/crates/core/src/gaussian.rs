//! Mean-zero Gaussian draws from possibly singular covariance matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative asymmetry tolerated before a covariance is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Eigenvalues below this (relative to the largest) are clipped to zero.
pub const EIGENVALUE_CLIP: f64 = 1e-12;
/// Eigenvalues below `-INDEFINITE_TOLERANCE` (relative) are an error.
pub const INDEFINITE_TOLERANCE: f64 = 1e-9;

/// Returns `L` with `L Lᵀ = cov` (up to clipping), from the eigendecomposition
/// `cov = V Λ Vᵀ` as `L = V Λ^{1/2}`.
pub fn psd_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    if cov.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: cov.ncols(),
        });
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let scale = cov.amax().max(1.0);
    let asym = (cov - cov.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let top = eig.eigenvalues.max().max(0.0);
    let lowest = eig.eigenvalues.min();
    if lowest < -INDEFINITE_TOLERANCE * top.max(1.0) {
        return Err(Error::Indefinite(lowest));
    }
    let clip = EIGENVALUE_CLIP * top.max(1.0);
    let roots = eig
        .eigenvalues
        .map(|l| if l <= clip { 0.0 } else { l.sqrt() });
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

/// Draws `N(mean, L Lᵀ)` for a fixed factor `L`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(mean: Vec<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        if mean.len() != cov.nrows() {
            return Err(Error::DimensionMismatch {
                expected: cov.nrows(),
                actual: mean.len(),
            });
        }
        Ok(GaussianSampler {
            mean: DVector::from_vec(mean),
            factor: psd_factor(cov)?,
        })
    }

    pub fn centered(cov: &DMatrix<f64>) -> Result<Self> {
        Self::new(vec![0.0; cov.nrows()], cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Writes one draw into `out`, which must have length `dim()`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(out.len(), n);
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.mean[i];
            for (j, zj) in z.iter().enumerate() {
                acc += self.factor[(i, j)] * zj;
            }
            *o = acc;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn factor_reproduces_covariance() {
        let cov = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let l = psd_factor(&cov).unwrap();
        assert!((&l * l.transpose() - &cov).amax() < 1e-12);
    }

    #[test]
    fn rejects_bad_matrices() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(psd_factor(&asym), Err(Error::NotSymmetric(_))));
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(psd_factor(&indef), Err(Error::Indefinite(_))));
    }

    #[test]
    fn empty_and_zero_covariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let empty = GaussianSampler::centered(&DMatrix::zeros(0, 0)).unwrap();
        assert!(empty.sample(&mut rng).is_empty());
        let zero = GaussianSampler::centered(&DMatrix::zeros(3, 3)).unwrap();
        for _ in 0..10 {
            assert_eq!(zero.sample(&mut rng), vec![0.0; 3]);
        }
    }
}
