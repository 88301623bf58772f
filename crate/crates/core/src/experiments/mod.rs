//! Experimental procedures: random-removal simulation, run evaluation at
//! ranking cutoffs with oracle baselines, and Pareto-frontier analysis.

mod correlation;
mod pareto;
pub mod rng;
mod runeval;
pub mod simulate;

pub use correlation::{pearson, spearman, CorrelationReport, MeasureColumn};
pub use pareto::{pareto_frontier, ParetoPoint};
pub use runeval::{
    evaluate_run, gold_baseline, max_with_qrels_baseline, pareto_points, CutoffEvaluation,
    OutcomeAspectRow, RunEvaluation, DEFAULT_CUTOFFS,
};
pub use simulate::{simulate_removals, SimulationCell, SimulationMeans, SimulationSpec, SimulationTable};

use std::collections::HashSet;

use crate::aspects::{aspect_report, AspectReport};
use crate::evidence::{studies_found, Review, StudyPublicationMap};
use crate::meta::{pool_outcome, PooledOutcome, ToleranceConfig};

/// Identifies one outcome within a corpus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OutcomeKey {
    pub review_id: String,
    pub comparison_id: String,
    pub outcome_id: String,
}

/// One outcome of the evaluation universe with its gold (full-data) pool.
#[derive(Debug, Clone)]
pub struct GoldOutcome {
    pub key: OutcomeKey,
    pub original: PooledOutcome,
    review_idx: usize,
    comparison_idx: usize,
    outcome_idx: usize,
}

/// A set of reviews with their outcomes pre-pooled from full data.
///
/// Outcomes whose original pool is not estimable are excluded from the
/// evaluation universe and listed in `excluded_outcomes`.
#[derive(Debug, Clone)]
pub struct Corpus {
    reviews: Vec<Review>,
    golds: Vec<GoldOutcome>,
    pub excluded_outcomes: Vec<OutcomeKey>,
}

impl Corpus {
    pub fn new(reviews: Vec<Review>) -> Self {
        let mut golds = Vec::new();
        let mut excluded = Vec::new();
        for (review_idx, review) in reviews.iter().enumerate() {
            for (comparison_idx, comparison) in review.comparisons.iter().enumerate() {
                for (outcome_idx, outcome) in comparison.outcomes.iter().enumerate() {
                    let all_studies = outcome.study_ids();
                    let original = pool_outcome(outcome, &all_studies);
                    let key = OutcomeKey {
                        review_id: review.review_id.clone(),
                        comparison_id: comparison.comparison_id.clone(),
                        outcome_id: outcome.outcome_id.clone(),
                    };
                    if original.estimable {
                        golds.push(GoldOutcome {
                            key,
                            original,
                            review_idx,
                            comparison_idx,
                            outcome_idx,
                        });
                    } else {
                        excluded.push(key);
                    }
                }
            }
        }
        Corpus {
            reviews,
            golds,
            excluded_outcomes: excluded,
        }
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn review(&self, review_id: &str) -> Option<&Review> {
        self.reviews.iter().find(|r| r.review_id == review_id)
    }

    /// Evaluation-universe outcomes, in review/comparison/outcome order.
    pub fn golds(&self) -> &[GoldOutcome] {
        &self.golds
    }

    pub fn golds_for_review<'a>(
        &'a self,
        review_id: &'a str,
    ) -> impl Iterator<Item = &'a GoldOutcome> + 'a {
        self.golds
            .iter()
            .filter(move |g| g.key.review_id == review_id)
    }

    pub fn outcome(&self, gold: &GoldOutcome) -> &crate::evidence::Outcome {
        &self.reviews[gold.review_idx].comparisons[gold.comparison_idx].outcomes
            [gold.outcome_idx]
    }

    pub fn n_outcomes(&self) -> usize {
        self.golds.len()
    }
}

/// Re-pools every evaluation-universe outcome of one review from the
/// retrieved publications and reports the five aspects per outcome.
pub fn evaluate_review_retrieval(
    corpus: &Corpus,
    review_id: &str,
    retrieved_publications: &HashSet<&str>,
    map: &StudyPublicationMap,
    tol: &ToleranceConfig,
) -> Vec<(OutcomeKey, AspectReport)> {
    let found = studies_found(review_id, retrieved_publications, map);
    corpus
        .golds_for_review(review_id)
        .map(|gold| {
            let outcome = corpus.outcome(gold);
            let predicted = pool_outcome(outcome, &found);
            let report = aspect_report(&gold.original, &predicted, outcome.effect_measure, tol);
            (gold.key.clone(), report)
        })
        .collect()
}
