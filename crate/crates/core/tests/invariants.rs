use nalgebra::DMatrix;

use openbook::geometry::BookShape;
use openbook::measures::{Atom, BookMeasure, LeafComponent, SpineComponent, Verdict};
use openbook::rng::SeedStream;
use openbook::simulate::{compare_semispinal, run_clt, CltConfig, SpineBox};
use openbook::stats::{empirical_covariance, SE_BAND};

fn gaussian_leaf(sigma: f64, mean: Vec<f64>, cov: &DMatrix<f64>) -> LeafComponent {
    LeafComponent::half_normal(sigma, mean, cov).unwrap()
}

/// Three leaves over a 2-dimensional spine, with leaf weights chosen to land
/// in each regime.
fn measure(weights: [f64; 3]) -> BookMeasure {
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]);
    let w0 = 1.0 - weights.iter().sum::<f64>();
    BookMeasure::new(
        BookShape::new(2, 3).unwrap(),
        w0,
        SpineComponent::gaussian(vec![0.2, -0.1], &DMatrix::identity(2, 2)).unwrap(),
        vec![
            (weights[0], gaussian_leaf(1.0, vec![0.0, 1.0], &cov)),
            (weights[1], gaussian_leaf(1.0, vec![-1.0, 0.0], &cov)),
            (weights[2], gaussian_leaf(1.0, vec![0.5, 0.5], &cov)),
        ],
    )
    .unwrap()
}

/// The spine part of the rescaled mean is a classical rescaled Euclidean
/// mean in every regime, so its covariance matches `C_S` within 5% per entry
/// plus four standard errors.
#[test]
fn spine_part_of_rescaled_mean_has_spinal_covariance() {
    let cases = [
        ([0.3, 0.3, 0.3], Verdict::Sticky),
        ([0.45, 0.225, 0.225], Verdict::PartlySticky(1)),
        ([0.6, 0.15, 0.15], Verdict::Nonsticky(1)),
    ];
    for (i, (weights, verdict)) in cases.into_iter().enumerate() {
        let m = measure(weights);
        let mut cfg = CltConfig::new(10_000, 2000);
        cfg.expect = Some(verdict);
        cfg.semispinal_draws = 0;
        let r = run_clt(&m, SeedStream::new(100 + i as u64), &cfg).unwrap();
        let offset = r.columns.len() - 2;
        let spine: Vec<Vec<f64>> = r
            .statistics()
            .iter()
            .map(|s| s[offset..].to_vec())
            .collect();
        let est = empirical_covariance(&spine).unwrap();
        let cs = m.center().unwrap().spinal_covariance();
        for a in 0..2 {
            for b in 0..2 {
                let gap = (est.matrix[(a, b)] - cs[(a, b)]).abs();
                let band = 0.05 * cs[(a, b)].abs() + SE_BAND * est.standard_errors[(a, b)];
                assert!(
                    gap <= band,
                    "{verdict}: entry ({a},{b}) off by {gap}, band {band}"
                );
            }
        }
    }
}

/// Pushforward and differencing estimates of the spine part of the
/// spinocostal limit agree box by box. Leaf 1 carries `0.4 · 2`, balancing
/// `0.2 · 1 + 0.2 · 3` from the atomic leaves.
#[test]
fn semispinal_estimators_agree() {
    let shape = BookShape::new(1, 3).unwrap();
    let cov = DMatrix::from_element(1, 1, 2.0);
    let m = BookMeasure::new(
        shape,
        0.2,
        SpineComponent::gaussian(vec![1.0], &cov).unwrap(),
        vec![
            (
                0.4,
                LeafComponent::exponential(0.5, vec![-1.0], &cov).unwrap(),
            ),
            (
                0.2,
                LeafComponent::point_masses(
                    vec![
                        Atom::new(0.5, vec![0.5, 2.0]),
                        Atom::new(0.5, vec![1.5, -1.0]),
                    ],
                    1,
                )
                .unwrap(),
            ),
            (0.2, LeafComponent::atom(vec![3.0, 0.0]).unwrap()),
        ],
    )
    .unwrap()
    .center()
    .unwrap();
    assert_eq!(m.classify().unwrap().verdict, Verdict::PartlySticky(1));
    let boxes = SpineBox::default_grid(&m);
    assert_eq!(boxes.len(), 10);
    let rows = compare_semispinal(&m, 1, &boxes, SeedStream::new(31), 200_000).unwrap();
    let total: f64 = rows.iter().map(|r| r.pushforward).sum();
    // the semispinal part carries half the mass
    assert!((total - 0.5).abs() < 4.0 * (0.25 / 200_000f64).sqrt());
    for r in &rows {
        assert!(r.pass, "{r:?}");
    }
}
