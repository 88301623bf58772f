//! Random-removal simulation: remove n publications per review, re-derive
//! the found studies, re-pool every outcome and aggregate the aspects.

use std::collections::HashSet;

use super::rng::SplitMix64;
use super::Corpus;
use crate::aspects::{aggregate, AggregateTable, AspectReport};
use crate::evidence::{studies_found, StudyPublicationMap};
use crate::meta::{pool_outcome, ToleranceConfig};

pub const DEFAULT_REMOVAL_COUNTS: [usize; 11] = [1, 2, 3, 4, 5, 10, 15, 20, 30, 50, 100];
pub const DEFAULT_N_SEEDS: usize = 20;
pub const DEFAULT_BASE_SEED: u64 = 42;

#[derive(Debug, Clone)]
pub struct SimulationSpec {
    /// Strictly increasing positive removal counts.
    pub removal_counts: Vec<usize>,
    pub n_seeds: usize,
    pub base_seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            removal_counts: DEFAULT_REMOVAL_COUNTS.to_vec(),
            n_seeds: DEFAULT_N_SEEDS,
            base_seed: DEFAULT_BASE_SEED,
        }
    }
}

impl SimulationSpec {
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.n_seeds == 0 {
            return Err(crate::error::Error::Config("n_seeds must be >= 1".into()));
        }
        if self.removal_counts.is_empty() {
            return Err(crate::error::Error::Config(
                "removal_counts must be non-empty".into(),
            ));
        }
        let increasing = self
            .removal_counts
            .windows(2)
            .all(|w| w[0] < w[1]);
        if !increasing {
            return Err(crate::error::Error::Config(
                "removal_counts must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// One (seed, removal count) cell aggregated over all reviews.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationCell {
    pub aggregate: AggregateTable,
    /// Mean over reviews of the fraction of publications retained.
    pub publication_recall: f64,
    /// Mean over reviews of the fraction of studies still found.
    pub study_recall: f64,
}

/// Seed-mean row for one removal count.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimulationMeans {
    pub removal_count: usize,
    pub mean_mod: f64,
    pub mean_delta_ci: f64,
    pub mean_equal: f64,
    pub mean_over: f64,
    pub mean_under: f64,
    pub mean_same_sign: f64,
    pub mean_diff_sign: f64,
    pub mean_reported: f64,
    pub mean_missing: f64,
    pub n_total: usize,
    pub publication_recall: f64,
    pub study_recall: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationTable {
    pub removal_counts: Vec<usize>,
    pub n_seeds: usize,
    pub base_seed: u64,
    /// Indexed [seed][removal count].
    pub per_seed: Vec<Vec<SimulationCell>>,
    pub seed_means: Vec<SimulationMeans>,
    /// Reviews skipped because they have no mapped publications.
    pub skipped_reviews: Vec<String>,
}

/// Runs the simulation deterministically. For a fixed (base_seed, review,
/// seed index) the removal sets are nested: the set removed at count n is
/// a prefix of the set removed at any larger count.
pub fn simulate_removals(
    corpus: &Corpus,
    map: &StudyPublicationMap,
    spec: &SimulationSpec,
) -> crate::error::Result<SimulationTable> {
    spec.validate()?;
    let tol = ToleranceConfig::default();

    struct ReviewCtx<'a> {
        review_id: &'a str,
        publications: Vec<&'a str>,
        n_studies: usize,
    }
    let mut contexts: Vec<ReviewCtx> = Vec::new();
    let mut skipped = Vec::new();
    for review in corpus.reviews() {
        let mut publications: Vec<&str> = map
            .publications_for_review(&review.review_id)
            .into_iter()
            .collect();
        publications.sort_unstable();
        if publications.is_empty() {
            skipped.push(review.review_id.clone());
            continue;
        }
        contexts.push(ReviewCtx {
            review_id: &review.review_id,
            n_studies: review.study_ids().len().max(1),
            publications,
        });
    }

    let mut per_seed: Vec<Vec<SimulationCell>> = Vec::with_capacity(spec.n_seeds);
    for seed_index in 0..spec.n_seeds {
        let mut row: Vec<SimulationCell> = Vec::with_capacity(spec.removal_counts.len());
        for &count in &spec.removal_counts {
            let mut reports: Vec<AspectReport> = Vec::new();
            let mut pub_recall_sum = 0.0;
            let mut study_recall_sum = 0.0;
            for ctx in &contexts {
                let mut pubs = ctx.publications.clone();
                let n_remove = count.min(pubs.len());
                let mut stream =
                    SplitMix64::for_stream(spec.base_seed, ctx.review_id, seed_index as u64);
                stream.select(&mut pubs, n_remove);
                let retained: HashSet<&str> = pubs[n_remove..].iter().copied().collect();
                pub_recall_sum += retained.len() as f64 / ctx.publications.len() as f64;
                let found = studies_found(ctx.review_id, &retained, map);
                study_recall_sum += found.len() as f64 / ctx.n_studies as f64;
                for gold in corpus.golds_for_review(ctx.review_id) {
                    let outcome = corpus.outcome(gold);
                    let predicted = pool_outcome(outcome, &found);
                    reports.push(crate::aspects::aspect_report(
                        &gold.original,
                        &predicted,
                        outcome.effect_measure,
                        &tol,
                    ));
                }
            }
            let n_reviews = contexts.len().max(1) as f64;
            row.push(SimulationCell {
                aggregate: aggregate(&reports),
                publication_recall: pub_recall_sum / n_reviews,
                study_recall: study_recall_sum / n_reviews,
            });
        }
        per_seed.push(row);
    }

    let seed_means = spec
        .removal_counts
        .iter()
        .enumerate()
        .map(|(ci, &count)| {
            let cells: Vec<&SimulationCell> = per_seed.iter().map(|row| &row[ci]).collect();
            let k = cells.len() as f64;
            let mean = |f: &dyn Fn(&SimulationCell) -> f64| -> f64 {
                cells.iter().map(|c| f(c)).sum::<f64>() / k
            };
            SimulationMeans {
                removal_count: count,
                mean_mod: mean(&|c| c.aggregate.mean_mod),
                mean_delta_ci: mean(&|c| c.aggregate.mean_delta_ci),
                mean_equal: mean(&|c| c.aggregate.n_equal as f64),
                mean_over: mean(&|c| c.aggregate.n_over as f64),
                mean_under: mean(&|c| c.aggregate.n_under as f64),
                mean_same_sign: mean(&|c| c.aggregate.n_same_sign as f64),
                mean_diff_sign: mean(&|c| c.aggregate.n_diff_sign as f64),
                mean_reported: mean(&|c| c.aggregate.n_reported as f64),
                mean_missing: mean(&|c| c.aggregate.n_missing as f64),
                n_total: cells.first().map_or(0, |c| c.aggregate.n_total),
                publication_recall: mean(&|c| c.publication_recall),
                study_recall: mean(&|c| c.study_recall),
            }
        })
        .collect();

    Ok(SimulationTable {
        removal_counts: spec.removal_counts.clone(),
        n_seeds: spec.n_seeds,
        base_seed: spec.base_seed,
        per_seed,
        seed_means,
        skipped_reviews: skipped,
    })
}
