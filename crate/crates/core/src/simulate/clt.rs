use nalgebra::DMatrix;
use serde::Serialize;

use super::{compare_semispinal, run_replicates, sample_gaussian, sample_spinocostal_limit};
use super::{SemispinalComparison, SpineBox};
use crate::error::{Error, Result};
use crate::frechet::FoldedSums;
use crate::geometry::{fold, scale, BookPoint};
use crate::measures::{BookMeasure, Verdict};
use crate::rng::{SeedStream, DOMAIN_AUXILIARY, DOMAIN_REFERENCE, DOMAIN_SAMPLES};
use crate::stats::{
    binomial_fraction_test, compare_covariance, empirical_covariance, ks_two_sample, TestResult,
    DEFAULT_ALPHA,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltConfig {
    /// Sample size per replicate.
    pub sample_size: usize,
    pub replicates: usize,
    pub workers: usize,
    pub alpha: f64,
    /// If set, the measure must classify this way.
    pub expect: Option<Verdict>,
    /// Draws per estimator in the semispinal comparison (partly sticky
    /// measures only); zero skips it.
    pub semispinal_draws: usize,
}

impl CltConfig {
    pub fn new(sample_size: usize, replicates: usize) -> Self {
        CltConfig {
            sample_size,
            replicates,
            workers: 1,
            alpha: DEFAULT_ALPHA,
            expect: None,
            semispinal_draws: replicates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReplicate {
    pub index: u64,
    /// Leaf of `b_N`, 0 for the spine.
    pub location: usize,
    /// Mode-dependent rescaled statistic; see [`CltReport::columns`].
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub verdict: Verdict,
    pub sample_size: usize,
    /// Names of the entries of [`CltReplicate::coords`].
    pub columns: Vec<String>,
    /// Fraction of replicates whose `b_N` lies on the spine.
    pub spine_fraction: f64,
    /// Covariance of the limit law the statistic is compared against.
    pub limit_covariance: Vec<Vec<f64>>,
    pub tests: Vec<TestResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub semispinal: Vec<SemispinalComparison>,
    #[serde(skip)]
    pub replicates: Vec<CltReplicate>,
    /// Draws from the limit law matching `coords`.
    #[serde(skip)]
    pub reference: Vec<Vec<f64>>,
}

impl CltReport {
    pub fn pass(&self) -> bool {
        self.tests.iter().all(|t| t.pass) && self.semispinal.iter().all(|s| s.pass)
    }

    pub fn statistics(&self) -> Vec<Vec<f64>> {
        self.replicates.iter().map(|r| r.coords.clone()).collect()
    }

    pub fn test(&self, name: &str) -> Option<&TestResult> {
        self.tests.iter().find(|t| t.name == name)
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn column(samples: &[Vec<f64>], j: usize) -> Vec<f64> {
    samples.iter().map(|s| s[j]).collect()
}

/// Rescaled empirical means of `replicates` independent samples of size
/// `N`, compared with draws from the limit law predicted by the measure's
/// stickiness. The measure is centered first.
///
/// The per-replicate statistic is
/// * sticky: `√N · P_S b_N`, compared with `N(0, C_S)`;
/// * partly sticky on leaf `k`: `fold(k, √N · b_N)`, compared with the
///   spinocostal limit folded along `k`;
/// * nonsticky on leaf `k`: `√N (fold(k, b_N) − fold(k, b̄))`, compared with
///   `N(0, C̃_k)`.
pub fn run_clt(measure: &BookMeasure, stream: SeedStream, config: &CltConfig) -> Result<CltReport> {
    if config.sample_size == 0 || config.replicates < 2 {
        return Err(Error::InvalidArgument(
            "need N ≥ 1 and at least two replicates".into(),
        ));
    }
    let measure = measure.center()?;
    let verdict = measure.classify()?.verdict;
    if let Some(expected) = config.expect {
        if expected != verdict {
            return Err(Error::RegimeMismatch {
                expected: expected.to_string(),
                actual: verdict.to_string(),
            });
        }
    }
    let shape = measure.shape();
    let d = shape.dim();
    let n = config.sample_size;
    let root_n = (n as f64).sqrt();
    let population = match verdict {
        Verdict::Nonsticky(k) => Some(fold(k, &measure.population_mean()?)?),
        _ => None,
    };

    let base = stream.domain(DOMAIN_SAMPLES);
    let replicates = run_replicates(config.workers, config.replicates, |index| {
        let mut rng = base.substream(index).rng();
        let mut sums = FoldedSums::new(shape);
        let mut buf = vec![0.0; shape.folded_dim()];
        for _ in 0..n {
            let leaf = measure.draw_into(&mut rng, &mut buf);
            sums.push_raw(leaf, &buf);
        }
        let mean = sums.barycenter()?;
        let location = mean.leaf_index().unwrap_or(0);
        let coords = match verdict {
            Verdict::Sticky => mean.spine_coords().iter().map(|y| root_n * y).collect(),
            Verdict::PartlySticky(k) => fold(k, &scale(root_n, &mean)?)?.into_vec(),
            Verdict::Nonsticky(k) => {
                let centre = population.as_ref().expect("set for nonsticky measures");
                fold(k, &mean)?
                    .as_slice()
                    .iter()
                    .zip(centre.as_slice())
                    .map(|(x, c)| root_n * (x - c))
                    .collect()
            }
        };
        Ok(CltReplicate {
            index,
            location,
            coords,
        })
    })?;

    let m = replicates.len();
    let reference_stream = stream.domain(DOMAIN_REFERENCE);
    let spine_names: Vec<String> = (1..=d).map(|i| format!("y{i}")).collect();
    let (columns, limit_cov, reference) = match verdict {
        Verdict::Sticky => {
            let cov = measure.spinal_covariance();
            let draws = sample_gaussian(&cov, reference_stream, m)?;
            (spine_names, cov, draws)
        }
        Verdict::PartlySticky(k) => {
            let cov = measure.costal_covariance(k)?;
            let draws = sample_spinocostal_limit(&measure, k, reference_stream, m)?
                .iter()
                .map(|p| fold(k, p).map(|x| x.into_vec()))
                .collect::<Result<_>>()?;
            let mut names = vec!["x0".to_string()];
            names.extend(spine_names);
            (names, cov, draws)
        }
        Verdict::Nonsticky(k) => {
            let cov = measure.nonsticky_covariance(k)?;
            let draws = sample_gaussian(&cov, reference_stream, m)?;
            let mut names = vec!["x0".to_string()];
            names.extend(spine_names);
            (names, cov, draws)
        }
    };

    let stats: Vec<Vec<f64>> = replicates.iter().map(|r| r.coords.clone()).collect();
    let mut tests = Vec::new();
    for (j, name) in columns.iter().enumerate() {
        let t = ks_two_sample(&column(&stats, j), &column(&reference, j), config.alpha)?;
        tests.push(t.renamed(format!("ks_{name}")));
    }

    // The spine part of b_N is the plain mean of spine projections in
    // every regime, so its rescaled covariance tends to C_S.
    let offset = columns.len() - d;
    if d > 0 {
        let spine_stats: Vec<Vec<f64>> = stats.iter().map(|s| s[offset..].to_vec()).collect();
        let est = empirical_covariance(&spine_stats)?;
        tests.push(
            compare_covariance(&est, &measure.spinal_covariance())?.renamed("spine_covariance"),
        );
    }
    let mut semispinal = Vec::new();
    match verdict {
        Verdict::Nonsticky(_) => {
            let est = empirical_covariance(&stats)?;
            tests.push(compare_covariance(&est, &limit_cov)?.renamed("covariance"));
        }
        Verdict::PartlySticky(k) => {
            let inside = replicates.iter().filter(|r| r.location == k).count();
            tests.push(binomial_fraction_test(inside, m, 0.5)?.renamed("leaf_fraction"));
            if config.semispinal_draws > 0 {
                semispinal = compare_semispinal(
                    &measure,
                    k,
                    &SpineBox::default_grid(&measure),
                    stream.domain(DOMAIN_AUXILIARY),
                    config.semispinal_draws,
                )?;
            }
        }
        Verdict::Sticky => {}
    }

    let spine_fraction = replicates.iter().filter(|r| r.location == 0).count() as f64 / m as f64;
    Ok(CltReport {
        verdict,
        sample_size: n,
        columns,
        spine_fraction,
        limit_covariance: rows(&limit_cov),
        tests,
        semispinal,
        replicates,
        reference,
    })
}

/// `√N · b_N` for a given empirical mean; exposed for callers that want the
/// rescaled mean as a book point rather than mode-specific coordinates.
pub fn rescaled_mean(mean: &BookPoint, sample_size: usize) -> Result<BookPoint> {
    scale((sample_size as f64).sqrt(), mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BookShape;
    use crate::measures::{LeafComponent, SpineComponent};

    fn spider() -> BookMeasure {
        let shape = BookShape::spider3();
        BookMeasure::new(
            shape,
            0.0,
            SpineComponent::origin(0),
            (0..3)
                .map(|_| {
                    (
                        1.0 / 3.0,
                        LeafComponent::half_normal(1.0, vec![], &DMatrix::zeros(0, 0)).unwrap(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn sticky_spider_rescaled_means_sit_at_the_spine() {
        let cfg = CltConfig::new(2000, 50);
        let report = run_clt(&spider(), SeedStream::new(2), &cfg).unwrap();
        assert_eq!(report.verdict, Verdict::Sticky);
        assert!(report.columns.is_empty());
        assert_eq!(report.spine_fraction, 1.0);
        assert!(report.pass());
        let point = rescaled_mean(&BookPoint::origin(BookShape::spider3()), 2000).unwrap();
        assert!(point.is_on_spine());
    }

    #[test]
    fn regime_mismatch_is_an_error() {
        let mut cfg = CltConfig::new(10, 5);
        cfg.expect = Some(Verdict::Nonsticky(1));
        assert!(matches!(
            run_clt(&spider(), SeedStream::new(0), &cfg),
            Err(Error::RegimeMismatch { .. })
        ));
        assert!(run_clt(&spider(), SeedStream::new(0), &CltConfig::new(0, 5)).is_err());
    }
}
