//! Traditional screening-evaluation measures: AP/MAP, Recall@k%, nDCG@k%,
//! WSS@r, last relevant rank and the area under the recall curve.
//!
//! Unjudged documents count as non-relevant. Topics with zero relevant
//! documents are excluded per measure by the caller.

use std::collections::BTreeMap;

use crate::evidence::{Qrels, RankedDoc};

/// Per-topic evaluation summary.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TopicEvaluation {
    pub topic_id: String,
    pub n_docs: usize,
    pub n_relevant: usize,
    /// Relevant (per qrels) documents missing from the ranking.
    pub n_unranked_relevant: usize,
    /// Retrieved documents absent from the qrels.
    pub n_unjudged: usize,
    pub ap: f64,
    pub recall_at: BTreeMap<u32, f64>,
    pub ndcg_at: BTreeMap<u32, f64>,
    /// Keyed by recall target in percent (95, 100).
    pub wss: BTreeMap<u32, f64>,
    pub last_rel_rank: Option<usize>,
    pub aurc: f64,
}

/// ceil(k·N/100), at least 1.
pub fn cutoff_at_percent(n_docs: usize, k_percent: u32) -> usize {
    assert!(k_percent > 0 && k_percent <= 100, "k must be in (0,100]");
    assert!(n_docs >= 1);
    ((n_docs * k_percent as usize).div_ceil(100)).max(1)
}

fn relevance_flags(ranking: &[RankedDoc], qrels: &Qrels, topic_id: &str) -> Vec<bool> {
    ranking
        .iter()
        .map(|d| qrels.is_relevant(topic_id, &d.publication_id))
        .collect()
}

/// AP = (1/R)·Σ_{relevant d} P@rank(d), with R the number of relevant
/// documents in the qrels for the topic.
pub fn average_precision(ranking: &[RankedDoc], qrels: &Qrels, topic_id: &str) -> f64 {
    let total_relevant = qrels.relevant_docs(topic_id).len();
    assert!(total_relevant >= 1, "AP undefined with zero relevant docs");
    let flags = relevance_flags(ranking, qrels, topic_id);
    let mut found = 0usize;
    let mut sum = 0.0;
    for (i, &rel) in flags.iter().enumerate() {
        if rel {
            found += 1;
            sum += found as f64 / (i + 1) as f64;
        }
    }
    sum / total_relevant as f64
}

/// Unweighted mean over topics.
pub fn map_over_topics(aps: &[f64]) -> f64 {
    if aps.is_empty() {
        return 0.0;
    }
    aps.iter().sum::<f64>() / aps.len() as f64
}

pub fn recall_at_percent(ranking: &[RankedDoc], qrels: &Qrels, topic_id: &str, k: u32) -> f64 {
    let total_relevant = qrels.relevant_docs(topic_id).len();
    assert!(total_relevant >= 1);
    let cutoff = cutoff_at_percent(ranking.len(), k);
    let found = relevance_flags(ranking, qrels, topic_id)
        .iter()
        .take(cutoff)
        .filter(|&&r| r)
        .count();
    found as f64 / total_relevant as f64
}

/// nDCG with binary gains and 1/log₂(rank+1) discount; the ideal ranking
/// places all relevant documents first.
pub fn ndcg_at_percent(ranking: &[RankedDoc], qrels: &Qrels, topic_id: &str, k: u32) -> f64 {
    let total_relevant = qrels.relevant_docs(topic_id).len();
    assert!(total_relevant >= 1);
    let cutoff = cutoff_at_percent(ranking.len(), k);
    let flags = relevance_flags(ranking, qrels, topic_id);
    let discount = |rank: usize| 1.0 / ((rank + 1) as f64).log2();
    let retrieved_relevant = flags.iter().take(cutoff).filter(|&&rel| rel).count();
    let dcg: f64 = flags
        .iter()
        .take(cutoff)
        .enumerate()
        .filter(|(_, &rel)| rel)
        .map(|(i, _)| discount(i + 1))
        .sum();
    // ideal places the relevant documents found in the slice at the top
    let idcg: f64 = (1..=retrieved_relevant).map(discount).sum();
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

/// WSS@r = (N − rank*)/N − (1 − r), where rank* is the first rank at which
/// recall reaches r. Clamped to N when the ranking never reaches r.
pub fn wss_at_recall(ranking: &[RankedDoc], qrels: &Qrels, topic_id: &str, r: f64) -> f64 {
    let total_relevant = qrels.relevant_docs(topic_id).len();
    assert!(total_relevant >= 1);
    let n = ranking.len();
    let flags = relevance_flags(ranking, qrels, topic_id);
    let mut found = 0usize;
    let mut rank_star = n;
    for (i, &rel) in flags.iter().enumerate() {
        if rel {
            found += 1;
            if found as f64 / total_relevant as f64 >= r {
                rank_star = i + 1;
                break;
            }
        }
    }
    (n - rank_star) as f64 / n as f64 - (1.0 - r)
}

pub fn last_relevant_rank(ranking: &[RankedDoc], qrels: &Qrels, topic_id: &str) -> Option<usize> {
    relevance_flags(ranking, qrels, topic_id)
        .iter()
        .rposition(|&r| r)
        .map(|i| i + 1)
}

/// Mean of the recall step-curve over all rank positions.
pub fn aurc(ranking: &[RankedDoc], qrels: &Qrels, topic_id: &str) -> f64 {
    let total_relevant = qrels.relevant_docs(topic_id).len();
    assert!(total_relevant >= 1);
    let n = ranking.len();
    let flags = relevance_flags(ranking, qrels, topic_id);
    let mut found = 0usize;
    let mut sum = 0.0;
    for &rel in &flags {
        if rel {
            found += 1;
        }
        sum += found as f64 / total_relevant as f64;
    }
    sum / n as f64
}

/// Evaluates one topic with the standard cutoff lists. Returns None when
/// the topic has no relevant documents (measures are undefined at R = 0).
pub fn evaluate_topic(
    topic_id: &str,
    ranking: &[RankedDoc],
    qrels: &Qrels,
    recall_cutoffs: &[u32],
    ndcg_cutoffs: &[u32],
) -> Option<TopicEvaluation> {
    let relevant = qrels.relevant_docs(topic_id);
    if relevant.is_empty() || ranking.is_empty() {
        return None;
    }
    let ranked_ids: std::collections::BTreeSet<&str> = ranking
        .iter()
        .map(|d| d.publication_id.as_str())
        .collect();
    let n_unranked_relevant = relevant.iter().filter(|d| !ranked_ids.contains(*d)).count();
    let judged = qrels.judged_docs(topic_id);
    let n_unjudged = ranking
        .iter()
        .filter(|d| !judged.contains(d.publication_id.as_str()))
        .count();
    Some(TopicEvaluation {
        topic_id: topic_id.to_owned(),
        n_docs: ranking.len(),
        n_relevant: relevant.len(),
        n_unranked_relevant,
        n_unjudged,
        ap: average_precision(ranking, qrels, topic_id),
        recall_at: recall_cutoffs
            .iter()
            .map(|&k| (k, recall_at_percent(ranking, qrels, topic_id, k)))
            .collect(),
        ndcg_at: ndcg_cutoffs
            .iter()
            .map(|&k| (k, ndcg_at_percent(ranking, qrels, topic_id, k)))
            .collect(),
        wss: [(95u32, 0.95), (100u32, 1.0)]
            .iter()
            .map(|&(pct, r)| (pct, wss_at_recall(ranking, qrels, topic_id, r)))
            .collect(),
        last_rel_rank: last_relevant_rank(ranking, qrels, topic_id),
        aurc: aurc(ranking, qrels, topic_id),
    })
}
