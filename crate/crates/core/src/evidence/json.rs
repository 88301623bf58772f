//! Canonical JSON schema for review data; round-trips with the XML model.

use serde::{Deserialize, Serialize};

use super::{
    ArmData, Comparison, ContinuousArms, DataKind, DichotomousArms, EffectMeasure, Model, Outcome,
    Pooling, Review, StudyRow, Subgroup,
};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReviewDto {
    review_id: String,
    comparisons: Vec<ComparisonDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    skipped_outcomes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComparisonDto {
    id: String,
    #[serde(default)]
    name: String,
    outcomes: Vec<OutcomeDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeDto {
    id: String,
    #[serde(default)]
    name: String,
    data_kind: DataKind,
    effect_measure: EffectMeasure,
    pooling: Pooling,
    model: Model,
    #[serde(default = "default_ci_level")]
    ci_level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    original: Option<OriginalDto>,
    subgroups: Vec<SubgroupDto>,
}

fn default_ci_level() -> f64 {
    0.95
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OriginalDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ci_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ci_high: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubgroupDto {
    id: String,
    #[serde(default)]
    name: String,
    rows: Vec<RowDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum RowDto {
    Dichotomous {
        study_id: String,
        events_exp: u64,
        total_exp: u64,
        events_ctrl: u64,
        total_ctrl: u64,
    },
    Continuous {
        study_id: String,
        n_exp: u64,
        mean_exp: f64,
        sd_exp: f64,
        n_ctrl: u64,
        mean_ctrl: f64,
        sd_ctrl: f64,
    },
}

pub fn parse_review_json(bytes: &[u8]) -> Result<Review> {
    let mut deserializer = serde_json::Deserializer::from_slice(bytes);
    let dto: ReviewDto =
        serde_path_to_error::deserialize(&mut deserializer).map_err(|e| Error::Json {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    let review = Review {
        review_id: dto.review_id,
        comparisons: dto.comparisons.into_iter().map(comparison_from).collect(),
        skipped_outcomes: dto.skipped_outcomes,
    };
    review.validate()?;
    Ok(review)
}

pub fn emit_review_json(review: &Review) -> Vec<u8> {
    let dto = ReviewDto {
        review_id: review.review_id.clone(),
        comparisons: review.comparisons.iter().map(comparison_to).collect(),
        skipped_outcomes: review.skipped_outcomes.clone(),
    };
    let mut out = serde_json::to_vec_pretty(&dto).expect("review serialization cannot fail");
    out.push(b'\n');
    out
}

fn comparison_from(dto: ComparisonDto) -> Comparison {
    Comparison {
        comparison_id: dto.id,
        name: dto.name,
        outcomes: dto
            .outcomes
            .into_iter()
            .map(|o| {
                let original = o.original.as_ref();
                Outcome {
                    outcome_id: o.id,
                    name: o.name,
                    data_kind: o.data_kind,
                    effect_measure: o.effect_measure,
                    pooling: o.pooling,
                    model: o.model,
                    ci_level: o.ci_level,
                    original_estimate: original.and_then(|orig| orig.estimate),
                    original_ci: original.and_then(|orig| Some((orig.ci_low?, orig.ci_high?))),
                    subgroups: o
                        .subgroups
                        .into_iter()
                        .map(|s| Subgroup {
                            subgroup_id: s.id,
                            name: s.name,
                            rows: s.rows.into_iter().map(row_from).collect(),
                        })
                        .collect(),
                }
            })
            .collect(),
    }
}

fn row_from(dto: RowDto) -> StudyRow {
    match dto {
        RowDto::Dichotomous {
            study_id,
            events_exp,
            total_exp,
            events_ctrl,
            total_ctrl,
        } => StudyRow {
            study_id,
            data: ArmData::Dichotomous(DichotomousArms {
                events_exp,
                total_exp,
                events_ctrl,
                total_ctrl,
            }),
        },
        RowDto::Continuous {
            study_id,
            n_exp,
            mean_exp,
            sd_exp,
            n_ctrl,
            mean_ctrl,
            sd_ctrl,
        } => StudyRow {
            study_id,
            data: ArmData::Continuous(ContinuousArms {
                n_exp,
                mean_exp,
                sd_exp,
                n_ctrl,
                mean_ctrl,
                sd_ctrl,
            }),
        },
    }
}

fn comparison_to(c: &Comparison) -> ComparisonDto {
    ComparisonDto {
        id: c.comparison_id.clone(),
        name: c.name.clone(),
        outcomes: c
            .outcomes
            .iter()
            .map(|o| OutcomeDto {
                id: o.outcome_id.clone(),
                name: o.name.clone(),
                data_kind: o.data_kind,
                effect_measure: o.effect_measure,
                pooling: o.pooling,
                model: o.model,
                ci_level: o.ci_level,
                original: match (o.original_estimate, o.original_ci) {
                    (None, None) => None,
                    (estimate, ci) => Some(OriginalDto {
                        estimate,
                        ci_low: ci.map(|c| c.0),
                        ci_high: ci.map(|c| c.1),
                    }),
                },
                subgroups: o
                    .subgroups
                    .iter()
                    .map(|s| SubgroupDto {
                        id: s.subgroup_id.clone(),
                        name: s.name.clone(),
                        rows: s.rows.iter().map(row_to).collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn row_to(row: &StudyRow) -> RowDto {
    match row.data {
        ArmData::Dichotomous(a) => RowDto::Dichotomous {
            study_id: row.study_id.clone(),
            events_exp: a.events_exp,
            total_exp: a.total_exp,
            events_ctrl: a.events_ctrl,
            total_ctrl: a.total_ctrl,
        },
        ArmData::Continuous(a) => RowDto::Continuous {
            study_id: row.study_id.clone(),
            n_exp: a.n_exp,
            mean_exp: a.mean_exp,
            sd_exp: a.sd_exp,
            n_ctrl: a.n_ctrl,
            mean_ctrl: a.mean_ctrl,
            sd_ctrl: a.sd_ctrl,
        },
    }
}
