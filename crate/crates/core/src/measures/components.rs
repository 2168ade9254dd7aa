//! Mixture components with closed-form first and second moments.
//!
//! Leaf components live on the open upper half-space `(0, ∞) × R^d` of
//! folded coordinates; spine components live on `R^d`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianSampler;

const ATOM_WEIGHT_TOLERANCE: f64 = 1e-9;

/// One atom of a finite point-mass component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub w: f64,
    pub x: Vec<f64>,
}

impl Atom {
    pub fn new(w: f64, x: Vec<f64>) -> Self {
        Atom { w, x }
    }
}

/// Law of the distance to the spine in a product leaf component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Radial {
    /// `|N(0, sigma²)|`
    HalfNormal { sigma: f64 },
    /// Exponential with the given rate.
    Exponential { rate: f64 },
}

impl Radial {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Radial::HalfNormal { sigma } => sigma > 0.0 && sigma.is_finite(),
            Radial::Exponential { rate } => rate > 0.0 && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidComponent(format!("bad radial law {self:?}")))
        }
    }

    fn mean(&self) -> f64 {
        match *self {
            Radial::HalfNormal { sigma } => sigma * (2.0 / std::f64::consts::PI).sqrt(),
            Radial::Exponential { rate } => 1.0 / rate,
        }
    }

    fn second_moment(&self) -> f64 {
        match *self {
            Radial::HalfNormal { sigma } => sigma * sigma,
            Radial::Exponential { rate } => 2.0 / (rate * rate),
        }
    }

    fn scaled(&self, lambda: f64) -> Radial {
        match *self {
            Radial::HalfNormal { sigma } => Radial::HalfNormal {
                sigma: sigma * lambda,
            },
            Radial::Exponential { rate } => Radial::Exponential {
                rate: rate / lambda,
            },
        }
    }

    /// A strictly positive draw.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let r = match *self {
                Radial::HalfNormal { sigma } => {
                    let z: f64 = rng.sample(StandardNormal);
                    sigma * z.abs()
                }
                Radial::Exponential { rate } => Exp::new(rate)
                    .expect("rate validated at construction")
                    .sample(rng),
            };
            if r > 0.0 {
                return r;
            }
        }
    }
}

/// Parameters of a leaf component, as written in measure files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum LeafFamily {
    PointMasses {
        atoms: Vec<Atom>,
    },
    /// Independent radial part and Gaussian spine part.
    HalfNormalProduct {
        radial: Radial,
        #[serde(default)]
        spine_mean: Option<Vec<f64>>,
        #[serde(default)]
        spine_cov: Option<Vec<Vec<f64>>>,
    },
    /// Uniform on `[lower, upper]`; `lower[0]` must be positive.
    UniformBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

/// Parameters of the spine component, as written in measure files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum SpineFamily {
    PointMasses { atoms: Vec<Atom> },
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    UniformBox { lower: Vec<f64>, upper: Vec<f64> },
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidComponent(format!(
            "covariance must be {n}×{n}"
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn check_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: v.len(),
        });
    }
    Ok(())
}

fn normalize_atoms(atoms: &[Atom], dim: usize) -> Result<Vec<Atom>> {
    if atoms.is_empty() {
        return Err(Error::InvalidComponent("no atoms".into()));
    }
    let mut total = 0.0;
    for a in atoms {
        check_len(&a.x, dim)?;
        if !(a.w > 0.0) || a.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidComponent(format!("bad atom {a:?}")));
        }
        total += a.w;
    }
    if (total - 1.0).abs() > ATOM_WEIGHT_TOLERANCE {
        return Err(Error::InvalidWeights(format!(
            "atom weights sum to {total}, expected 1"
        )));
    }
    Ok(atoms
        .iter()
        .map(|a| Atom::new(a.w / total, a.x.clone()))
        .collect())
}

fn validate_box(lower: &[f64], upper: &[f64], dim: usize) -> Result<()> {
    check_len(lower, dim)?;
    check_len(upper, dim)?;
    if lower
        .iter()
        .zip(upper)
        .any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite())
    {
        return Err(Error::InvalidComponent(format!(
            "box bounds {lower:?} ≰ {upper:?}"
        )));
    }
    Ok(())
}

fn pick_atom<'a, R: Rng + ?Sized>(atoms: &'a [Atom], rng: &mut R) -> &'a Atom {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for a in atoms {
        acc += a.w;
        if u < acc {
            return a;
        }
    }
    atoms.last().expect("atoms are nonempty")
}

fn atoms_mean(atoms: &[Atom], dim: usize) -> DVector<f64> {
    atoms.iter().fold(DVector::zeros(dim), |acc, a| {
        acc + DVector::from_column_slice(&a.x) * a.w
    })
}

fn atoms_second_moment(atoms: &[Atom], dim: usize) -> DMatrix<f64> {
    atoms.iter().fold(DMatrix::zeros(dim, dim), |acc, a| {
        let x = DVector::from_column_slice(&a.x);
        acc + &x * x.transpose() * a.w
    })
}

fn box_mean(lower: &[f64], upper: &[f64]) -> DVector<f64> {
    DVector::from_iterator(
        lower.len(),
        lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)),
    )
}

fn box_second_moment(lower: &[f64], upper: &[f64]) -> DMatrix<f64> {
    let mean = box_mean(lower, upper);
    let mut m = &mean * mean.transpose();
    for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
        m[(i, i)] = (l * l + l * u + u * u) / 3.0;
    }
    m
}

fn box_sample<R: Rng + ?Sized>(lower: &[f64], upper: &[f64], rng: &mut R, out: &mut [f64]) {
    for ((o, l), u) in out.iter_mut().zip(lower).zip(upper) {
        let t: f64 = rng.random();
        *o = l + (u - l) * t;
    }
}

/// Shared interface of the two component kinds.
pub trait Component {
    /// Dimension of the space the component lives on.
    fn dim(&self) -> usize;
    fn mean(&self) -> DVector<f64>;
    /// Uncentered second moment `E[x xᵀ]`.
    fn second_moment(&self) -> DMatrix<f64>;
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]);
}

/// A validated leaf component on `(0, ∞) × R^d`.
#[derive(Debug, Clone)]
pub struct LeafComponent {
    family: LeafFamily,
    dim: usize,
    spine_gaussian: Option<GaussianSampler>,
}

impl LeafComponent {
    /// `spine_dim` is `d`; the component lives in `R^{d+1}`.
    pub fn new(family: LeafFamily, spine_dim: usize) -> Result<Self> {
        let dim = spine_dim + 1;
        let mut spine_gaussian = None;
        let family = match family {
            LeafFamily::PointMasses { atoms } => {
                let atoms = normalize_atoms(&atoms, dim)?;
                if atoms.iter().any(|a| !(a.x[0] > 0.0)) {
                    return Err(Error::InvalidComponent(
                        "leaf atoms need a positive distance to the spine".into(),
                    ));
                }
                LeafFamily::PointMasses { atoms }
            }
            LeafFamily::HalfNormalProduct {
                radial,
                spine_mean,
                spine_cov,
            } => {
                radial.validate()?;
                let mean = spine_mean.unwrap_or_else(|| vec![0.0; spine_dim]);
                check_len(&mean, spine_dim)?;
                let cov = match &spine_cov {
                    Some(rows) => matrix_from_rows(rows, spine_dim)?,
                    None => DMatrix::zeros(spine_dim, spine_dim),
                };
                spine_gaussian = Some(GaussianSampler::new(mean.clone(), &cov)?);
                LeafFamily::HalfNormalProduct {
                    radial,
                    spine_mean: Some(mean),
                    spine_cov: Some(matrix_to_rows(&cov)),
                }
            }
            LeafFamily::UniformBox { lower, upper } => {
                validate_box(&lower, &upper, dim)?;
                if !(lower[0] >= 0.0) {
                    return Err(Error::InvalidComponent(
                        "leaf box must lie in the closed half-space x0 ≥ 0".into(),
                    ));
                }
                LeafFamily::UniformBox { lower, upper }
            }
        };
        Ok(LeafComponent {
            family,
            dim,
            spine_gaussian,
        })
    }

    pub fn point_masses(atoms: Vec<Atom>, spine_dim: usize) -> Result<Self> {
        Self::new(LeafFamily::PointMasses { atoms }, spine_dim)
    }

    /// A single atom at folded coordinates `x`.
    pub fn atom(x: Vec<f64>) -> Result<Self> {
        let d = x.len().saturating_sub(1);
        Self::point_masses(vec![Atom::new(1.0, x)], d)
    }

    pub fn half_normal(sigma: f64, spine_mean: Vec<f64>, spine_cov: &DMatrix<f64>) -> Result<Self> {
        let d = spine_mean.len();
        Self::new(
            LeafFamily::HalfNormalProduct {
                radial: Radial::HalfNormal { sigma },
                spine_mean: Some(spine_mean),
                spine_cov: Some(matrix_to_rows(spine_cov)),
            },
            d,
        )
    }

    pub fn exponential(rate: f64, spine_mean: Vec<f64>, spine_cov: &DMatrix<f64>) -> Result<Self> {
        let d = spine_mean.len();
        Self::new(
            LeafFamily::HalfNormalProduct {
                radial: Radial::Exponential { rate },
                spine_mean: Some(spine_mean),
                spine_cov: Some(matrix_to_rows(spine_cov)),
            },
            d,
        )
    }

    pub fn uniform_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = lower.len().saturating_sub(1);
        Self::new(LeafFamily::UniformBox { lower, upper }, d)
    }

    pub fn family(&self) -> &LeafFamily {
        &self.family
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.family, LeafFamily::PointMasses { .. })
    }

    /// Mean distance to the spine, `v = E[x0] > 0`.
    pub fn mean_height(&self) -> f64 {
        match &self.family {
            LeafFamily::PointMasses { atoms } => atoms.iter().map(|a| a.w * a.x[0]).sum(),
            LeafFamily::HalfNormalProduct { radial, .. } => radial.mean(),
            LeafFamily::UniformBox { lower, upper } => 0.5 * (lower[0] + upper[0]),
        }
    }

    pub(crate) fn translated(&self, z: &[f64]) -> Result<Self> {
        let shift = |v: &[f64], offset: usize| -> Vec<f64> {
            v.iter()
                .enumerate()
                .map(|(i, x)| if i >= offset { x + z[i - offset] } else { *x })
                .collect()
        };
        let family = match &self.family {
            LeafFamily::PointMasses { atoms } => LeafFamily::PointMasses {
                atoms: atoms
                    .iter()
                    .map(|a| Atom::new(a.w, shift(&a.x, 1)))
                    .collect(),
            },
            LeafFamily::HalfNormalProduct {
                radial,
                spine_mean,
                spine_cov,
            } => LeafFamily::HalfNormalProduct {
                radial: radial.clone(),
                spine_mean: spine_mean.as_ref().map(|m| shift(m, 0)),
                spine_cov: spine_cov.clone(),
            },
            LeafFamily::UniformBox { lower, upper } => LeafFamily::UniformBox {
                lower: shift(lower, 1),
                upper: shift(upper, 1),
            },
        };
        Self::new(family, self.dim - 1)
    }

    pub(crate) fn scaled(&self, lambda: f64) -> Result<Self> {
        let mul = |v: &[f64]| v.iter().map(|x| x * lambda).collect::<Vec<_>>();
        let family = match &self.family {
            LeafFamily::PointMasses { atoms } => LeafFamily::PointMasses {
                atoms: atoms.iter().map(|a| Atom::new(a.w, mul(&a.x))).collect(),
            },
            LeafFamily::HalfNormalProduct {
                radial,
                spine_mean,
                spine_cov,
            } => LeafFamily::HalfNormalProduct {
                radial: radial.scaled(lambda),
                spine_mean: spine_mean.as_deref().map(mul),
                spine_cov: spine_cov.as_ref().map(|rows| {
                    rows.iter()
                        .map(|r| r.iter().map(|c| c * lambda * lambda).collect())
                        .collect()
                }),
            },
            LeafFamily::UniformBox { lower, upper } => LeafFamily::UniformBox {
                lower: mul(lower),
                upper: mul(upper),
            },
        };
        Self::new(family, self.dim - 1)
    }
}

impl Component for LeafComponent {
    fn dim(&self) -> usize {
        self.dim
    }

    fn mean(&self) -> DVector<f64> {
        match &self.family {
            LeafFamily::PointMasses { atoms } => atoms_mean(atoms, self.dim),
            LeafFamily::HalfNormalProduct {
                radial, spine_mean, ..
            } => {
                let mut m = DVector::zeros(self.dim);
                m[0] = radial.mean();
                for (i, v) in spine_mean.iter().flatten().enumerate() {
                    m[i + 1] = *v;
                }
                m
            }
            LeafFamily::UniformBox { lower, upper } => box_mean(lower, upper),
        }
    }

    fn second_moment(&self) -> DMatrix<f64> {
        match &self.family {
            LeafFamily::PointMasses { atoms } => atoms_second_moment(atoms, self.dim),
            LeafFamily::HalfNormalProduct {
                radial,
                spine_mean,
                spine_cov,
            } => {
                let d = self.dim - 1;
                let mean = DVector::from_column_slice(spine_mean.as_deref().unwrap_or(&[]));
                let cov = matrix_from_rows(spine_cov.as_deref().unwrap_or(&[]), d)
                    .expect("validated at construction");
                let mut m = DMatrix::zeros(self.dim, self.dim);
                m[(0, 0)] = radial.second_moment();
                let r = radial.mean();
                for i in 0..d {
                    m[(0, i + 1)] = r * mean[i];
                    m[(i + 1, 0)] = r * mean[i];
                }
                let spine = cov + &mean * mean.transpose();
                m.view_mut((1, 1), (d, d)).copy_from(&spine);
                m
            }
            LeafFamily::UniformBox { lower, upper } => box_second_moment(lower, upper),
        }
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.family {
            LeafFamily::PointMasses { atoms } => out.copy_from_slice(&pick_atom(atoms, rng).x),
            LeafFamily::HalfNormalProduct { radial, .. } => {
                out[0] = radial.sample(rng);
                self.spine_gaussian
                    .as_ref()
                    .expect("built at construction")
                    .sample_into(rng, &mut out[1..]);
            }
            LeafFamily::UniformBox { lower, upper } => loop {
                // a box touching the spine can return x0 = 0, which is not a leaf point
                box_sample(lower, upper, rng, out);
                if out[0] > 0.0 {
                    break;
                }
            },
        }
    }
}

/// A validated spine component on `R^d`.
#[derive(Debug, Clone)]
pub struct SpineComponent {
    family: SpineFamily,
    dim: usize,
    gaussian: Option<GaussianSampler>,
}

impl SpineComponent {
    pub fn new(family: SpineFamily, dim: usize) -> Result<Self> {
        let mut gaussian = None;
        let family = match family {
            SpineFamily::PointMasses { atoms } => SpineFamily::PointMasses {
                atoms: normalize_atoms(&atoms, dim)?,
            },
            SpineFamily::Gaussian { mean, cov } => {
                check_len(&mean, dim)?;
                let c = matrix_from_rows(&cov, dim)?;
                gaussian = Some(GaussianSampler::new(mean.clone(), &c)?);
                SpineFamily::Gaussian { mean, cov }
            }
            SpineFamily::UniformBox { lower, upper } => {
                validate_box(&lower, &upper, dim)?;
                SpineFamily::UniformBox { lower, upper }
            }
        };
        Ok(SpineComponent {
            family,
            dim,
            gaussian,
        })
    }

    /// Point mass at the origin of the spine; for `d = 0` the only spine
    /// measure there is.
    pub fn origin(dim: usize) -> Self {
        Self::new(
            SpineFamily::PointMasses {
                atoms: vec![Atom::new(1.0, vec![0.0; dim])],
            },
            dim,
        )
        .expect("unit atom is valid")
    }

    pub fn gaussian(mean: Vec<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        Self::new(
            SpineFamily::Gaussian {
                mean,
                cov: matrix_to_rows(cov),
            },
            d,
        )
    }

    pub fn family(&self) -> &SpineFamily {
        &self.family
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.family, SpineFamily::PointMasses { .. })
    }

    pub(crate) fn translated(&self, z: &[f64]) -> Result<Self> {
        let shift = |v: &[f64]| v.iter().zip(z).map(|(a, b)| a + b).collect::<Vec<_>>();
        let family = match &self.family {
            SpineFamily::PointMasses { atoms } => SpineFamily::PointMasses {
                atoms: atoms.iter().map(|a| Atom::new(a.w, shift(&a.x))).collect(),
            },
            SpineFamily::Gaussian { mean, cov } => SpineFamily::Gaussian {
                mean: shift(mean),
                cov: cov.clone(),
            },
            SpineFamily::UniformBox { lower, upper } => SpineFamily::UniformBox {
                lower: shift(lower),
                upper: shift(upper),
            },
        };
        Self::new(family, self.dim)
    }

    pub(crate) fn scaled(&self, lambda: f64) -> Result<Self> {
        let mul = |v: &[f64]| v.iter().map(|x| x * lambda).collect::<Vec<_>>();
        let family = match &self.family {
            SpineFamily::PointMasses { atoms } => SpineFamily::PointMasses {
                atoms: atoms.iter().map(|a| Atom::new(a.w, mul(&a.x))).collect(),
            },
            SpineFamily::Gaussian { mean, cov } => SpineFamily::Gaussian {
                mean: mul(mean),
                cov: cov
                    .iter()
                    .map(|r| r.iter().map(|c| c * lambda * lambda).collect())
                    .collect(),
            },
            SpineFamily::UniformBox { lower, upper } => SpineFamily::UniformBox {
                lower: mul(lower),
                upper: mul(upper),
            },
        };
        Self::new(family, self.dim)
    }
}

impl Component for SpineComponent {
    fn dim(&self) -> usize {
        self.dim
    }

    fn mean(&self) -> DVector<f64> {
        match &self.family {
            SpineFamily::PointMasses { atoms } => atoms_mean(atoms, self.dim),
            SpineFamily::Gaussian { mean, .. } => DVector::from_column_slice(mean),
            SpineFamily::UniformBox { lower, upper } => box_mean(lower, upper),
        }
    }

    fn second_moment(&self) -> DMatrix<f64> {
        match &self.family {
            SpineFamily::PointMasses { atoms } => atoms_second_moment(atoms, self.dim),
            SpineFamily::Gaussian { mean, cov } => {
                let m = DVector::from_column_slice(mean);
                matrix_from_rows(cov, self.dim).expect("validated at construction")
                    + &m * m.transpose()
            }
            SpineFamily::UniformBox { lower, upper } => box_second_moment(lower, upper),
        }
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.family {
            SpineFamily::PointMasses { atoms } => out.copy_from_slice(&pick_atom(atoms, rng).x),
            SpineFamily::Gaussian { .. } => self
                .gaussian
                .as_ref()
                .expect("built at construction")
                .sample_into(rng, out),
            SpineFamily::UniformBox { lower, upper } => box_sample(lower, upper, rng, out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Empirical mean and second moment against the closed forms, within
    /// 4 standard errors per entry.
    fn check_moments<C: Component>(c: &C, n: usize, seed: u64) {
        let dim = c.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut buf = vec![0.0; dim];
        let mut s1 = vec![0.0; dim];
        let mut s2 = vec![0.0; dim * dim];
        let mut s4 = vec![0.0; dim * dim];
        let mut sq = vec![0.0; dim];
        for _ in 0..n {
            c.sample_into(&mut rng, &mut buf);
            for i in 0..dim {
                s1[i] += buf[i];
                sq[i] += buf[i] * buf[i];
                for j in 0..dim {
                    let p = buf[i] * buf[j];
                    s2[i * dim + j] += p;
                    s4[i * dim + j] += p * p;
                }
            }
        }
        let nf = n as f64;
        let mean = c.mean();
        let second = c.second_moment();
        for i in 0..dim {
            let m = s1[i] / nf;
            let se = ((sq[i] / nf - m * m) / nf).sqrt();
            assert!(
                (m - mean[i]).abs() <= 4.0 * se + 1e-12,
                "mean[{i}]: {m} vs {}",
                mean[i]
            );
            for j in 0..dim {
                let e = s2[i * dim + j] / nf;
                let se = ((s4[i * dim + j] / nf - e * e) / nf).sqrt();
                assert!(
                    (e - second[(i, j)]).abs() <= 4.0 * se + 1e-12,
                    "second[{i},{j}]: {e} vs {}",
                    second[(i, j)]
                );
            }
        }
        assert!((&second - second.transpose()).amax() < 1e-12);
    }

    #[test]
    fn single_atom_height() {
        let c = LeafComponent::atom(vec![2.5, 1.0]).unwrap();
        assert_eq!(c.mean_height(), 2.5);
        let m = c.second_moment();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[6.25, 2.5, 2.5, 1.0]));
    }

    #[test]
    fn exponential_height_is_reciprocal_rate() {
        let c = LeafComponent::exponential(1.0, vec![], &DMatrix::zeros(0, 0)).unwrap();
        assert_eq!(c.mean_height(), 1.0);
    }

    #[test]
    fn rejects_atoms_on_spine_and_bad_boxes() {
        assert!(LeafComponent::atom(vec![0.0, 1.0]).is_err());
        assert!(LeafComponent::uniform_box(vec![-0.1, 0.0], vec![1.0, 1.0]).is_err());
        assert!(LeafComponent::uniform_box(vec![2.0], vec![1.0]).is_err());
        assert!(LeafComponent::point_masses(
            vec![Atom::new(0.5, vec![1.0]), Atom::new(0.4, vec![2.0])],
            0
        )
        .is_err());
    }

    #[test]
    fn leaf_moments_match_sampling() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]);
        check_moments(
            &LeafComponent::half_normal(1.3, vec![0.5, -1.0], &cov).unwrap(),
            200_000,
            1,
        );
        check_moments(
            &LeafComponent::exponential(2.0, vec![1.0], &DMatrix::from_element(1, 1, 0.25))
                .unwrap(),
            200_000,
            2,
        );
        check_moments(
            &LeafComponent::uniform_box(vec![0.5, -1.0], vec![2.0, 3.0]).unwrap(),
            200_000,
            3,
        );
        check_moments(
            &LeafComponent::point_masses(
                vec![
                    Atom::new(0.25, vec![1.0, 2.0]),
                    Atom::new(0.75, vec![3.0, -1.0]),
                ],
                1,
            )
            .unwrap(),
            200_000,
            4,
        );
    }

    #[test]
    fn spine_moments_match_sampling() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, -0.5, -0.5, 1.0]);
        check_moments(
            &SpineComponent::gaussian(vec![1.0, 2.0], &cov).unwrap(),
            200_000,
            5,
        );
        check_moments(
            &SpineComponent::new(
                SpineFamily::UniformBox {
                    lower: vec![-1.0],
                    upper: vec![4.0],
                },
                1,
            )
            .unwrap(),
            200_000,
            6,
        );
    }

    #[test]
    fn leaf_samples_stay_off_the_spine() {
        let c = LeafComponent::half_normal(1e-3, vec![], &DMatrix::zeros(0, 0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut buf = [0.0];
        for _ in 0..100_000 {
            c.sample_into(&mut rng, &mut buf);
            assert!(buf[0] > 0.0);
        }
    }

    #[test]
    fn family_json_shape() {
        let json = r#"{"family":"half_normal_product","params":{"radial":{"law":"exponential","rate":2.0}}}"#;
        let fam: LeafFamily = serde_json::from_str(json).unwrap();
        let c = LeafComponent::new(fam, 0).unwrap();
        assert_eq!(c.mean_height(), 0.5);
    }
}
