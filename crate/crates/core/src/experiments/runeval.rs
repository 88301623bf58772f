//! Run evaluation at ranking cutoffs, plus the gold and max-with-qrels
//! oracle baselines.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{evaluate_review_retrieval, Corpus, OutcomeKey};
use crate::aspects::{aggregate, AggregateTable, AspectReport};
use crate::evidence::{Qrels, RunRanking, StudyPublicationMap};
use crate::ir::{cutoff_at_percent, evaluate_topic, map_over_topics, TopicEvaluation};
use crate::meta::ToleranceConfig;

pub const DEFAULT_CUTOFFS: [u32; 5] = [5, 10, 20, 30, 50];
const RECALL_CUTOFFS: [u32; 5] = [5, 10, 20, 30, 50];
const NDCG_CUTOFFS: [u32; 1] = [20];

#[derive(Debug, Clone)]
pub struct OutcomeAspectRow {
    pub key: OutcomeKey,
    pub report: AspectReport,
}

#[derive(Debug, Clone)]
pub struct CutoffEvaluation {
    pub cutoff: u32,
    pub rows: Vec<OutcomeAspectRow>,
    pub aggregate: AggregateTable,
}

#[derive(Debug, Clone)]
pub struct RunEvaluation {
    pub run_tag: String,
    pub cutoffs: Vec<u32>,
    pub per_cutoff: Vec<CutoffEvaluation>,
    pub topics: Vec<TopicEvaluation>,
    /// Mean AP over topics with at least one relevant document.
    pub map_score: f64,
    pub warnings: Vec<String>,
}

impl RunEvaluation {
    pub fn cutoff(&self, cutoff: u32) -> Option<&CutoffEvaluation> {
        self.per_cutoff.iter().find(|c| c.cutoff == cutoff)
    }
}

/// Evaluates a ranked run against the corpus: per cutoff k the retrieved
/// set is the top ceil(k·N/100) publications of each topic; IR measures
/// are computed once per topic over the full ranking.
pub fn evaluate_run(
    run: &RunRanking,
    corpus: &Corpus,
    qrels: &Qrels,
    map: &StudyPublicationMap,
    cutoffs: &[u32],
) -> RunEvaluation {
    let tol = ToleranceConfig::default();
    let mut warnings = Vec::new();

    let mut evaluated_reviews: Vec<&str> = Vec::new();
    for topic in run.topics() {
        if corpus.review(topic).is_some() {
            evaluated_reviews.push(topic);
        } else {
            warnings.push(format!("run topic {topic} absent from corpus, skipped"));
        }
    }
    for review in corpus.reviews() {
        if run.topic(&review.review_id).is_none() {
            warnings.push(format!(
                "corpus review {} absent from run, outcomes skipped",
                review.review_id
            ));
        }
    }

    let per_cutoff = cutoffs
        .iter()
        .map(|&cutoff| {
            let mut rows: Vec<OutcomeAspectRow> = Vec::new();
            for &topic in &evaluated_reviews {
                let ranking = run.topic(topic).expect("topic checked above");
                let retrieved: HashSet<&str> = if ranking.is_empty() {
                    HashSet::new()
                } else {
                    let n = cutoff_at_percent(ranking.len(), cutoff);
                    ranking[..n]
                        .iter()
                        .map(|d| d.publication_id.as_str())
                        .collect()
                };
                for (key, report) in
                    evaluate_review_retrieval(corpus, topic, &retrieved, map, &tol)
                {
                    rows.push(OutcomeAspectRow { key, report });
                }
            }
            let reports: Vec<AspectReport> = rows.iter().map(|r| r.report).collect();
            CutoffEvaluation {
                cutoff,
                aggregate: aggregate(&reports),
                rows,
            }
        })
        .collect();

    let mut topics = Vec::new();
    for &topic in &evaluated_reviews {
        let ranking = run.topic(topic).expect("topic checked above");
        match evaluate_topic(topic, ranking, qrels, &RECALL_CUTOFFS, &NDCG_CUTOFFS) {
            Some(eval) => topics.push(eval),
            None => warnings.push(format!(
                "topic {topic} has no relevant documents in qrels, IR measures skipped"
            )),
        }
    }
    let aps: Vec<f64> = topics.iter().map(|t| t.ap).collect();

    RunEvaluation {
        run_tag: run.tag.clone(),
        cutoffs: cutoffs.to_vec(),
        per_cutoff,
        map_score: map_over_topics(&aps),
        topics,
        warnings,
    }
}

/// The best possible run: every publication of the review's studies first
/// (ascending publication id), then the rest of the topic collection.
pub fn gold_baseline(
    corpus: &Corpus,
    map: &StudyPublicationMap,
    collections: &BTreeMap<String, BTreeSet<String>>,
) -> RunRanking {
    let mut run = RunRanking::new("gold");
    for review in corpus.reviews() {
        let topic = &review.review_id;
        let relevant: BTreeSet<String> = map
            .publications_for_review(topic)
            .into_iter()
            .map(str::to_owned)
            .collect();
        let collection = collections.get(topic).cloned().unwrap_or_default();
        run.set_topic(topic, ranked_block(&relevant, &collection));
    }
    run
}

/// The qrels-limited oracle: all qrels-relevant publications first.
pub fn max_with_qrels_baseline(
    qrels: &Qrels,
    corpus: &Corpus,
    collections: &BTreeMap<String, BTreeSet<String>>,
) -> RunRanking {
    let mut run = RunRanking::new("max-with-qrels");
    for review in corpus.reviews() {
        let topic = &review.review_id;
        let relevant: BTreeSet<String> = qrels
            .relevant_docs(topic)
            .into_iter()
            .map(str::to_owned)
            .collect();
        let collection = collections.get(topic).cloned().unwrap_or_default();
        run.set_topic(topic, ranked_block(&relevant, &collection));
    }
    run
}

/// Relevant block first (ascending id), remaining collection after.
fn ranked_block(relevant: &BTreeSet<String>, collection: &BTreeSet<String>) -> Vec<(String, f64)> {
    let all: BTreeSet<&String> = relevant.iter().chain(collection.iter()).collect();
    let n = all.len() as f64;
    let mut docs = Vec::with_capacity(all.len());
    let mut score = n;
    for doc in relevant {
        docs.push((doc.clone(), score));
        score -= 1.0;
    }
    for doc in collection {
        if !relevant.contains(doc) {
            docs.push((doc.clone(), score));
            score -= 1.0;
        }
    }
    docs
}

/// Pareto inputs at one cutoff: non-estimable count and summed MoD over
/// estimable outcomes.
pub fn pareto_points(evaluations: &[RunEvaluation], cutoff: u32) -> Vec<(String, usize, f64)> {
    evaluations
        .iter()
        .filter_map(|eval| {
            let ce = eval.cutoff(cutoff)?;
            let y_raw: f64 = ce
                .rows
                .iter()
                .filter(|r| r.report.estimable)
                .map(|r| r.report.mod_value)
                .sum::<f64>()
                + 0.0; // empty sums are -0.0; keep the sign positive
            Some((eval.run_tag.clone(), ce.aggregate.n_missing, y_raw))
        })
        .collect()
}
