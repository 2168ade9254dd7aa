use serde::Serialize;

use super::run_replicates;
use crate::error::{Error, Result};
use crate::frechet::FoldedSums;
use crate::geometry::BookPoint;
use crate::measures::{BookMeasure, Verdict};
use crate::rng::{SeedStream, DOMAIN_SAMPLES};
use crate::stats::TestResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnConfig {
    /// Strictly increasing sample sizes at which `b_N` is recorded.
    pub checkpoints: Vec<usize>,
    pub replicates: usize,
    pub workers: usize,
    /// Required fraction of replicates in the predicted event at the last
    /// checkpoint.
    pub min_final_fraction: f64,
    /// Slack, in binomial standard errors, allowed for a decrease of the
    /// event fraction between consecutive checkpoints.
    pub monotone_slack_se: f64,
}

impl LlnConfig {
    pub fn new(checkpoints: Vec<usize>, replicates: usize) -> Self {
        LlnConfig {
            checkpoints,
            replicates,
            workers: 1,
            min_final_fraction: 0.99,
            monotone_slack_se: 2.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.checkpoints.is_empty() || self.checkpoints[0] == 0 {
            return Err(Error::InvalidArgument(
                "checkpoints must be nonempty and positive".into(),
            ));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "checkpoints must be strictly increasing".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("need at least one replicate".into()));
        }
        Ok(())
    }
}

/// One growing sample path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnReplicate {
    pub index: u64,
    /// `b_N` at each checkpoint.
    pub means: Vec<BookPoint>,
    /// Whether the predicted event holds at each checkpoint.
    pub in_event: Vec<bool>,
    /// First checkpoint from which the event held through the last one;
    /// `None` if it fails at the last checkpoint.
    pub first_entry: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnReport {
    pub verdict: Verdict,
    /// Human-readable description of the predicted absorbing event.
    pub event: String,
    pub checkpoints: Vec<usize>,
    /// Fraction of replicates in the predicted event per checkpoint.
    pub event_fractions: Vec<f64>,
    /// Fraction of replicates with `b_N` on the spine per checkpoint.
    pub spine_fractions: Vec<f64>,
    pub tests: Vec<TestResult>,
    #[serde(skip)]
    pub replicates: Vec<LlnReplicate>,
}

impl LlnReport {
    pub fn pass(&self) -> bool {
        self.tests.iter().all(|t| t.pass)
    }
}

fn in_event(verdict: Verdict, p: &BookPoint) -> bool {
    match verdict {
        Verdict::Sticky => p.is_on_spine(),
        Verdict::Nonsticky(k) => p.leaf_index() == Some(k),
        Verdict::PartlySticky(k) => p.leaf_index().is_none_or(|j| j == k),
    }
}

/// Follows `replicates` independent sample paths of `measure` and records
/// where the empirical mean sits at each checkpoint. Replicate `i` draws
/// from substream `i` of the sample domain, so the sample at one
/// checkpoint is a prefix of the sample at the next.
pub fn run_lln(measure: &BookMeasure, stream: SeedStream, config: &LlnConfig) -> Result<LlnReport> {
    config.validate()?;
    let verdict = measure.classify()?.verdict;
    let shape = measure.shape();
    let base = stream.domain(DOMAIN_SAMPLES);
    let replicates = run_replicates(config.workers, config.replicates, |index| {
        let mut rng = base.substream(index).rng();
        let mut sums = FoldedSums::new(shape);
        let mut buf = vec![0.0; shape.folded_dim()];
        let mut means = Vec::with_capacity(config.checkpoints.len());
        for &target in &config.checkpoints {
            while sums.count() < target {
                let leaf = measure.draw_into(&mut rng, &mut buf);
                sums.push_raw(leaf, &buf);
            }
            means.push(sums.barycenter()?);
        }
        let flags: Vec<bool> = means.iter().map(|p| in_event(verdict, p)).collect();
        let first_entry = match flags.iter().rposition(|f| !f) {
            None => Some(config.checkpoints[0]),
            Some(i) if i + 1 < flags.len() => Some(config.checkpoints[i + 1]),
            Some(_) => None,
        };
        Ok(LlnReplicate {
            index,
            means,
            in_event: flags,
            first_entry,
        })
    })?;

    let m = replicates.len() as f64;
    let fraction = |f: &dyn Fn(&LlnReplicate, usize) -> bool, i: usize| {
        replicates.iter().filter(|r| f(r, i)).count() as f64 / m
    };
    let points = config.checkpoints.len();
    let event_fractions: Vec<f64> = (0..points)
        .map(|i| fraction(&|r, i| r.in_event[i], i))
        .collect();
    let spine_fractions: Vec<f64> = (0..points)
        .map(|i| fraction(&|r, i| r.means[i].is_on_spine(), i))
        .collect();

    // largest drop between consecutive checkpoints, in combined binomial SE
    let se = |p: f64| (p * (1.0 - p) / m).sqrt();
    let worst_drop = event_fractions
        .windows(2)
        .map(|w| {
            let drop = w[0] - w[1];
            let s = (se(w[0]).powi(2) + se(w[1]).powi(2)).sqrt();
            if drop <= 0.0 {
                0.0
            } else if s == 0.0 {
                f64::INFINITY
            } else {
                drop / s
            }
        })
        .fold(0.0, f64::max);
    let last = *event_fractions.last().expect("checkpoints are nonempty");
    let tests = vec![
        TestResult::new(
            "event_fraction_monotone",
            worst_drop,
            config.monotone_slack_se,
            vec![config.replicates],
        ),
        // statistic is the shortfall below the required final fraction
        TestResult::new(
            "final_event_fraction",
            config.min_final_fraction - last,
            0.0,
            vec![config.replicates],
        ),
    ];

    let event = match verdict {
        Verdict::Sticky => "b_N on the spine".to_string(),
        Verdict::Nonsticky(k) => format!("b_N in the open leaf {k}"),
        Verdict::PartlySticky(k) => format!("b_N in the closed leaf {k}"),
    };
    Ok(LlnReport {
        verdict,
        event,
        checkpoints: config.checkpoints.clone(),
        event_fractions,
        spine_fractions,
        tests,
        replicates,
    })
}
