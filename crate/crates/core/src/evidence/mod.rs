//! Domain model and ingestion for review statistical data, study/publication
//! mappings, qrels and run files.
//!
//! A *study* may be reported by several *publications*; a study counts as
//! found when at least one publication reporting it was retrieved.

mod json;
mod mapping;
mod revman_xml;
mod trec;

pub use json::{emit_review_json, parse_review_json};
pub use mapping::parse_mapping;
pub use revman_xml::parse_review_xml;
pub use trec::{parse_qrels, parse_run};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Kind of statistical data an outcome carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Dichotomous,
    Continuous,
}

/// Effect measure declared by the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EffectMeasure {
    #[serde(rename = "RR")]
    RiskRatio,
    #[serde(rename = "OR")]
    OddsRatio,
    #[serde(rename = "RD")]
    RiskDifference,
    #[serde(rename = "MD")]
    MeanDifference,
    #[serde(rename = "SMD")]
    StdMeanDifference,
}

impl EffectMeasure {
    /// Ratio measures live on the log scale for pooling and CIs.
    pub fn log_scale(self) -> bool {
        matches!(self, EffectMeasure::RiskRatio | EffectMeasure::OddsRatio)
    }

    /// The no-effect point: 1 for ratio measures, 0 for difference measures.
    pub fn null_value(self) -> f64 {
        if self.log_scale() {
            1.0
        } else {
            0.0
        }
    }

    pub fn is_dichotomous(self) -> bool {
        matches!(
            self,
            EffectMeasure::RiskRatio | EffectMeasure::OddsRatio | EffectMeasure::RiskDifference
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            EffectMeasure::RiskRatio => "RR",
            EffectMeasure::OddsRatio => "OR",
            EffectMeasure::RiskDifference => "RD",
            EffectMeasure::MeanDifference => "MD",
            EffectMeasure::StdMeanDifference => "SMD",
        }
    }
}

/// Pooling estimator declared by the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Pooling {
    #[serde(rename = "MH")]
    MantelHaenszel,
    #[serde(rename = "IV")]
    InverseVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Fixed,
    Random,
}

/// Per-arm counts for a dichotomous study row.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DichotomousArms {
    pub events_exp: u64,
    pub total_exp: u64,
    pub events_ctrl: u64,
    pub total_ctrl: u64,
}

/// Per-arm summary statistics for a continuous study row.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ContinuousArms {
    pub n_exp: u64,
    pub mean_exp: f64,
    pub sd_exp: f64,
    pub n_ctrl: u64,
    pub mean_ctrl: f64,
    pub sd_ctrl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmData {
    Dichotomous(DichotomousArms),
    Continuous(ContinuousArms),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub study_id: String,
    pub data: ArmData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subgroup {
    pub subgroup_id: String,
    pub name: String,
    pub rows: Vec<StudyRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub outcome_id: String,
    pub name: String,
    pub data_kind: DataKind,
    pub effect_measure: EffectMeasure,
    pub pooling: Pooling,
    pub model: Model,
    pub ci_level: f64,
    pub subgroups: Vec<Subgroup>,
    /// Published total as declared in the file, if any.
    pub original_estimate: Option<f64>,
    pub original_ci: Option<(f64, f64)>,
}

impl Outcome {
    /// All study rows across subgroups, in file order.
    pub fn rows(&self) -> impl Iterator<Item = &StudyRow> {
        self.subgroups.iter().flat_map(|s| s.rows.iter())
    }

    /// Distinct study ids appearing in this outcome.
    pub fn study_ids(&self) -> BTreeSet<&str> {
        self.rows().map(|r| r.study_id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub comparison_id: String,
    pub name: String,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Review {
    pub review_id: String,
    pub comparisons: Vec<Comparison>,
    /// Ids of outcomes dropped because their type is unsupported
    /// (ordinal, count, time-to-event, generic inverse-variance).
    pub skipped_outcomes: Vec<String>,
}

impl Review {
    /// All distinct study ids referenced anywhere in the review.
    pub fn study_ids(&self) -> BTreeSet<&str> {
        self.comparisons
            .iter()
            .flat_map(|c| c.outcomes.iter())
            .flat_map(|o| o.rows())
            .map(|r| r.study_id.as_str())
            .collect()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (&Comparison, &Outcome)> {
        self.comparisons
            .iter()
            .flat_map(|c| c.outcomes.iter().map(move |o| (c, o)))
    }

    /// Structural invariants shared by every ingestion path.
    pub fn validate(&self) -> Result<()> {
        if self.review_id.is_empty() {
            return Err(Error::Validation("empty review_id".into()));
        }
        let mut comparison_ids = BTreeSet::new();
        for comparison in &self.comparisons {
            if !comparison_ids.insert(&comparison.comparison_id) {
                return Err(Error::Validation(format!(
                    "duplicate comparison id {:?} in review {}",
                    comparison.comparison_id, self.review_id
                )));
            }
            let mut outcome_ids = BTreeSet::new();
            for outcome in &comparison.outcomes {
                if !outcome_ids.insert(&outcome.outcome_id) {
                    return Err(Error::Validation(format!(
                        "duplicate outcome id {:?} in comparison {}",
                        outcome.outcome_id, comparison.comparison_id
                    )));
                }
                validate_outcome(outcome)?;
            }
        }
        Ok(())
    }
}

fn validate_outcome(outcome: &Outcome) -> Result<()> {
    let id = &outcome.outcome_id;
    match outcome.data_kind {
        DataKind::Dichotomous => {
            if !outcome.effect_measure.is_dichotomous() {
                return Err(Error::Validation(format!(
                    "outcome {id}: dichotomous outcomes require RR, OR or RD, got {}",
                    outcome.effect_measure.label()
                )));
            }
        }
        DataKind::Continuous => {
            if outcome.effect_measure.is_dichotomous() {
                return Err(Error::Validation(format!(
                    "outcome {id}: continuous outcomes require MD or SMD, got {}",
                    outcome.effect_measure.label()
                )));
            }
            if outcome.pooling == Pooling::MantelHaenszel {
                return Err(Error::Validation(format!(
                    "outcome {id}: Mantel-Haenszel pooling is only valid for dichotomous data"
                )));
            }
        }
    }
    if !(outcome.ci_level > 0.0 && outcome.ci_level < 1.0) {
        return Err(Error::Validation(format!(
            "outcome {id}: ci_level {} outside (0,1)",
            outcome.ci_level
        )));
    }
    if let (Some(est), Some((low, high))) = (outcome.original_estimate, outcome.original_ci) {
        if !(low <= est && est <= high) {
            return Err(Error::Validation(format!(
                "outcome {id}: published estimate {est} outside its CI [{low}, {high}]"
            )));
        }
    }
    for subgroup in &outcome.subgroups {
        for row in &subgroup.rows {
            if row.study_id.is_empty() {
                return Err(Error::Validation(format!(
                    "outcome {id}, subgroup {}: row with empty study_id",
                    subgroup.subgroup_id
                )));
            }
            match (&row.data, outcome.data_kind) {
                (ArmData::Dichotomous(arms), DataKind::Dichotomous) => {
                    validate_dichotomous(arms, &row.study_id)?
                }
                (ArmData::Continuous(arms), DataKind::Continuous) => {
                    validate_continuous(arms, &row.study_id)?
                }
                _ => {
                    return Err(Error::Validation(format!(
                        "outcome {id}: row for study {} has data of the wrong kind",
                        row.study_id
                    )))
                }
            }
        }
    }
    Ok(())
}

pub(crate) fn validate_dichotomous(arms: &DichotomousArms, study_id: &str) -> Result<()> {
    if arms.events_exp > arms.total_exp || arms.events_ctrl > arms.total_ctrl {
        return Err(Error::Validation(format!(
            "study {study_id}: events exceed arm total ({}/{} vs {}/{})",
            arms.events_exp, arms.total_exp, arms.events_ctrl, arms.total_ctrl
        )));
    }
    Ok(())
}

pub(crate) fn validate_continuous(arms: &ContinuousArms, study_id: &str) -> Result<()> {
    if arms.sd_exp < 0.0 || arms.sd_ctrl < 0.0 {
        return Err(Error::Validation(format!(
            "study {study_id}: negative standard deviation"
        )));
    }
    if !arms.mean_exp.is_finite()
        || !arms.mean_ctrl.is_finite()
        || !arms.sd_exp.is_finite()
        || !arms.sd_ctrl.is_finite()
    {
        return Err(Error::Validation(format!(
            "study {study_id}: non-finite arm statistics"
        )));
    }
    Ok(())
}

/// Many-to-many link between study identifiers and publication identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StudyPublicationMap {
    entries: BTreeSet<(String, String, String)>,
    /// (review_id, study_id) -> publications
    by_study: BTreeMap<(String, String), BTreeSet<String>>,
    /// (review_id, publication_id) -> studies
    by_publication: BTreeMap<(String, String), BTreeSet<String>>,
}

impl StudyPublicationMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a triple; returns false if it was already present.
    pub fn insert(&mut self, review_id: &str, study_id: &str, publication_id: &str) -> bool {
        let fresh = self.entries.insert((
            review_id.to_owned(),
            study_id.to_owned(),
            publication_id.to_owned(),
        ));
        if fresh {
            self.by_study
                .entry((review_id.to_owned(), study_id.to_owned()))
                .or_default()
                .insert(publication_id.to_owned());
            self.by_publication
                .entry((review_id.to_owned(), publication_id.to_owned()))
                .or_default()
                .insert(study_id.to_owned());
        }
        fresh
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.entries
            .iter()
            .map(|(r, s, p)| (r.as_str(), s.as_str(), p.as_str()))
    }

    pub fn publications_of(&self, review_id: &str, study_id: &str) -> BTreeSet<&str> {
        self.by_study
            .get(&(review_id.to_owned(), study_id.to_owned()))
            .map(|set| set.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// All publications linked to any study of the review.
    pub fn publications_for_review(&self, review_id: &str) -> BTreeSet<&str> {
        self.entries
            .iter()
            .filter(|(r, _, _)| r == review_id)
            .map(|(_, _, p)| p.as_str())
            .collect()
    }

    /// Distinct studies of the review present in the mapping.
    pub fn studies_for_review(&self, review_id: &str) -> BTreeSet<&str> {
        self.entries
            .iter()
            .filter(|(r, _, _)| r == review_id)
            .map(|(_, s, _)| s.as_str())
            .collect()
    }
}

/// A study is found when at least one publication reporting it was retrieved.
/// Publications unknown to the mapping are ignored.
pub fn studies_found<'a, S: std::hash::BuildHasher>(
    review_id: &str,
    retrieved_publications: &std::collections::HashSet<&str, S>,
    map: &'a StudyPublicationMap,
) -> BTreeSet<&'a str> {
    map.by_publication
        .iter()
        .filter(|((r, p), _)| r == review_id && retrieved_publications.contains(p.as_str()))
        .flat_map(|(_, studies)| studies.iter().map(String::as_str))
        .collect()
}

/// Binary relevance judgments keyed by (topic, publication).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the previous grade when the pair was already judged.
    pub fn insert(&mut self, topic_id: &str, publication_id: &str, grade: u32) -> Option<u32> {
        self.judgments
            .entry(topic_id.to_owned())
            .or_default()
            .insert(publication_id.to_owned(), grade)
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn grade(&self, topic_id: &str, publication_id: &str) -> Option<u32> {
        self.judgments.get(topic_id)?.get(publication_id).copied()
    }

    pub fn is_relevant(&self, topic_id: &str, publication_id: &str) -> bool {
        self.grade(topic_id, publication_id).is_some_and(|g| g > 0)
    }

    pub fn relevant_docs(&self, topic_id: &str) -> BTreeSet<&str> {
        self.judgments
            .get(topic_id)
            .map(|docs| {
                docs.iter()
                    .filter(|(_, &g)| g > 0)
                    .map(|(d, _)| d.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Every judged publication for the topic, relevant or not.
    pub fn judged_docs(&self, topic_id: &str) -> BTreeSet<&str> {
        self.judgments
            .get(topic_id)
            .map(|docs| docs.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn n_judged(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }
}

/// One entry of a ranked list after normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDoc {
    pub publication_id: String,
    pub rank: u32,
    pub score: f64,
}

/// A ranked run: per-topic document lists with ranks normalized to 1..n
/// by descending score, ties broken by ascending publication id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRanking {
    pub tag: String,
    topics: BTreeMap<String, Vec<RankedDoc>>,
}

impl RunRanking {
    pub fn new(tag: impl Into<String>) -> Self {
        RunRanking {
            tag: tag.into(),
            topics: BTreeMap::new(),
        }
    }

    /// Builds a topic ranking from (publication, score) pairs, normalizing
    /// ranks deterministically.
    pub fn set_topic(&mut self, topic_id: &str, mut docs: Vec<(String, f64)>) {
        docs.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        let ranked = docs
            .into_iter()
            .enumerate()
            .map(|(i, (publication_id, score))| RankedDoc {
                publication_id,
                rank: (i + 1) as u32,
                score,
            })
            .collect();
        self.topics.insert(topic_id.to_owned(), ranked);
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn topic(&self, topic_id: &str) -> Option<&[RankedDoc]> {
        self.topics.get(topic_id).map(Vec::as_slice)
    }

    pub fn n_topics(&self) -> usize {
        self.topics.len()
    }
}
