//! Parser for the supported RevMan-5 XML subset.
//!
//! Recognized elements: a root carrying the review ID, `COMPARISON`,
//! `DICH_OUTCOME`/`DICH_SUBGROUP`/`DICH_DATA` and the `CONT_` counterparts.
//! Any other `*_OUTCOME` element (ordinal, count, time-to-event, generic IV)
//! is recorded as skipped and its subtree ignored. Data rows may sit directly
//! under an outcome or inside subgroups.

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{
    ArmData, Comparison, ContinuousArms, DataKind, DichotomousArms, EffectMeasure, Model, Outcome,
    Pooling, Review, StudyRow, Subgroup,
};
use crate::error::{Error, Result};

pub fn parse_review_xml(bytes: &[u8]) -> Result<Review> {
    let mut reader = Reader::from_reader(bytes);
    reader.trim_text(true);

    let mut review_id = String::new();
    let mut seen_root = false;
    let mut comparisons: Vec<Comparison> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();

    let mut comparison: Option<Comparison> = None;
    let mut outcome: Option<Outcome> = None;
    let mut subgroup: Option<Subgroup> = None;
    let mut in_name = false;

    let mut buf = Vec::new();
    loop {
        let offset = reader.buffer_position() as u64;
        let event = reader.read_event_into(&mut buf).map_err(|e| Error::Xml {
            offset: reader.buffer_position() as u64,
            message: e.to_string(),
        })?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                let tag = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                if !seen_root {
                    seen_root = true;
                    review_id = attr(e, "ID", offset)?.unwrap_or_default();
                    continue;
                }
                match tag.as_str() {
                    "COMPARISON" => {
                        let c = Comparison {
                            comparison_id: require_attr(e, "ID", offset)?,
                            name: attr(e, "NAME", offset)?.unwrap_or_default(),
                            outcomes: Vec::new(),
                        };
                        if empty {
                            comparisons.push(c);
                        } else {
                            comparison = Some(c);
                        }
                    }
                    "DICH_OUTCOME" | "CONT_OUTCOME" => {
                        let kind = if tag.starts_with("DICH") {
                            DataKind::Dichotomous
                        } else {
                            DataKind::Continuous
                        };
                        let o = parse_outcome_start(e, kind, offset)?;
                        if empty {
                            push_outcome(&mut comparison, o, offset)?;
                        } else {
                            outcome = Some(o);
                        }
                    }
                    "DICH_SUBGROUP" | "CONT_SUBGROUP" => {
                        let s = Subgroup {
                            subgroup_id: require_attr(e, "ID", offset)?,
                            name: attr(e, "NAME", offset)?.unwrap_or_default(),
                            rows: Vec::new(),
                        };
                        if empty {
                            push_subgroup(&mut outcome, s, offset)?;
                        } else {
                            subgroup = Some(s);
                        }
                    }
                    "DICH_DATA" => {
                        let row = parse_dich_row(e, offset)?;
                        push_row(&mut outcome, &mut subgroup, row, offset)?;
                        if !empty {
                            skip_subtree(&mut reader, e)?;
                        }
                    }
                    "CONT_DATA" => {
                        let row = parse_cont_row(e, offset)?;
                        push_row(&mut outcome, &mut subgroup, row, offset)?;
                        if !empty {
                            skip_subtree(&mut reader, e)?;
                        }
                    }
                    "NAME" => {
                        in_name = !empty;
                    }
                    other if other.ends_with("_OUTCOME") => {
                        skipped.push(attr(e, "ID", offset)?.unwrap_or_else(|| other.to_owned()));
                        if !empty {
                            skip_subtree(&mut reader, e)?;
                        }
                    }
                    // unknown wrappers are transparent
                    _ => {}
                }
            }
            Event::Text(ref t) if in_name => {
                let text = t.unescape().map_err(|e| Error::Xml {
                    offset,
                    message: e.to_string(),
                })?;
                let text = text.trim().to_owned();
                if let Some(s) = subgroup.as_mut() {
                    if s.name.is_empty() {
                        s.name = text;
                    }
                } else if let Some(o) = outcome.as_mut() {
                    if o.name.is_empty() {
                        o.name = text;
                    }
                } else if let Some(c) = comparison.as_mut() {
                    if c.name.is_empty() {
                        c.name = text;
                    }
                }
            }
            Event::End(ref e) => {
                match e.name().as_ref() {
                    b"NAME" => in_name = false,
                    b"COMPARISON" => {
                        if let Some(c) = comparison.take() {
                            comparisons.push(c);
                        }
                    }
                    b"DICH_OUTCOME" | b"CONT_OUTCOME" => {
                        if let Some(o) = outcome.take() {
                            push_outcome(&mut comparison, o, offset)?;
                        }
                    }
                    b"DICH_SUBGROUP" | b"CONT_SUBGROUP" => {
                        if let Some(s) = subgroup.take() {
                            push_subgroup(&mut outcome, s, offset)?;
                        }
                    }
                    _ => {}
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if !seen_root {
        return Err(Error::Xml {
            offset: 0,
            message: "no root element".into(),
        });
    }
    let review = Review {
        review_id,
        comparisons,
        skipped_outcomes: skipped,
    };
    review.validate()?;
    Ok(review)
}

fn parse_outcome_start(e: &BytesStart, kind: DataKind, offset: u64) -> Result<Outcome> {
    let id = require_attr(e, "ID", offset)?;
    let measure = match attr(e, "EFFECT_MEASURE", offset)?.as_deref() {
        Some("RR") => EffectMeasure::RiskRatio,
        Some("OR") => EffectMeasure::OddsRatio,
        Some("RD") => EffectMeasure::RiskDifference,
        Some("MD") => EffectMeasure::MeanDifference,
        Some("SMD") => EffectMeasure::StdMeanDifference,
        None => match kind {
            DataKind::Dichotomous => EffectMeasure::RiskRatio,
            DataKind::Continuous => EffectMeasure::MeanDifference,
        },
        Some(other) => {
            return Err(Error::Xml {
                offset,
                message: format!("outcome {id}: unknown EFFECT_MEASURE {other:?}"),
            })
        }
    };
    let pooling = match attr(e, "METHOD", offset)?.as_deref() {
        Some("MH") => Pooling::MantelHaenszel,
        Some("IV") => Pooling::InverseVariance,
        None => match kind {
            DataKind::Dichotomous => Pooling::MantelHaenszel,
            DataKind::Continuous => Pooling::InverseVariance,
        },
        Some(other) => {
            return Err(Error::Xml {
                offset,
                message: format!("outcome {id}: unknown METHOD {other:?}"),
            })
        }
    };
    let model = match attr(e, "RANDOM", offset)?.as_deref() {
        Some("YES") => Model::Random,
        Some("NO") | None => Model::Fixed,
        Some(other) => {
            return Err(Error::Xml {
                offset,
                message: format!("outcome {id}: unknown RANDOM {other:?}"),
            })
        }
    };
    let original_estimate = float_attr(e, "EFFECT_SIZE", offset)?;
    let ci_start = float_attr(e, "CI_START", offset)?;
    let ci_end = float_attr(e, "CI_END", offset)?;
    let original_ci = match (ci_start, ci_end) {
        (Some(low), Some(high)) => Some((low, high)),
        (None, None) => None,
        _ => {
            return Err(Error::Xml {
                offset,
                message: format!("outcome {id}: CI_START and CI_END must appear together"),
            })
        }
    };
    Ok(Outcome {
        outcome_id: id,
        name: attr(e, "NAME", offset)?.unwrap_or_default(),
        data_kind: kind,
        effect_measure: measure,
        pooling,
        model,
        ci_level: 0.95,
        subgroups: Vec::new(),
        original_estimate,
        original_ci,
    })
}

fn parse_dich_row(e: &BytesStart, offset: u64) -> Result<StudyRow> {
    Ok(StudyRow {
        study_id: require_attr(e, "STUDY_ID", offset)?,
        data: ArmData::Dichotomous(DichotomousArms {
            events_exp: int_attr(e, "EVENTS_1", offset)?,
            total_exp: int_attr(e, "TOTAL_1", offset)?,
            events_ctrl: int_attr(e, "EVENTS_2", offset)?,
            total_ctrl: int_attr(e, "TOTAL_2", offset)?,
        }),
    })
}

fn parse_cont_row(e: &BytesStart, offset: u64) -> Result<StudyRow> {
    Ok(StudyRow {
        study_id: require_attr(e, "STUDY_ID", offset)?,
        data: ArmData::Continuous(ContinuousArms {
            n_exp: int_attr(e, "TOTAL_1", offset)?,
            mean_exp: req_float_attr(e, "MEAN_1", offset)?,
            sd_exp: req_float_attr(e, "SD_1", offset)?,
            n_ctrl: int_attr(e, "TOTAL_2", offset)?,
            mean_ctrl: req_float_attr(e, "MEAN_2", offset)?,
            sd_ctrl: req_float_attr(e, "SD_2", offset)?,
        }),
    })
}

fn push_outcome(comparison: &mut Option<Comparison>, o: Outcome, offset: u64) -> Result<()> {
    comparison
        .as_mut()
        .ok_or_else(|| Error::Xml {
            offset,
            message: format!("outcome {} outside a COMPARISON", o.outcome_id),
        })?
        .outcomes
        .push(o);
    Ok(())
}

fn push_subgroup(outcome: &mut Option<Outcome>, s: Subgroup, offset: u64) -> Result<()> {
    outcome
        .as_mut()
        .ok_or_else(|| Error::Xml {
            offset,
            message: format!("subgroup {} outside an outcome", s.subgroup_id),
        })?
        .subgroups
        .push(s);
    Ok(())
}

/// Rows directly under an outcome collect into one implicit subgroup.
fn push_row(
    outcome: &mut Option<Outcome>,
    subgroup: &mut Option<Subgroup>,
    row: StudyRow,
    offset: u64,
) -> Result<()> {
    if let Some(s) = subgroup.as_mut() {
        s.rows.push(row);
        return Ok(());
    }
    let o = outcome.as_mut().ok_or_else(|| Error::Xml {
        offset,
        message: format!("data row for study {} outside an outcome", row.study_id),
    })?;
    match o.subgroups.last_mut() {
        Some(s) if s.subgroup_id == IMPLICIT_SUBGROUP => s.rows.push(row),
        _ => o.subgroups.push(Subgroup {
            subgroup_id: IMPLICIT_SUBGROUP.to_owned(),
            name: String::new(),
            rows: vec![row],
        }),
    }
    Ok(())
}

const IMPLICIT_SUBGROUP: &str = "_total";

fn skip_subtree(reader: &mut Reader<&[u8]>, start: &BytesStart) -> Result<()> {
    let mut skip = Vec::new();
    reader
        .read_to_end_into(start.to_end().name(), &mut skip)
        .map_err(|e| Error::Xml {
            offset: reader.buffer_position() as u64,
            message: e.to_string(),
        })?;
    Ok(())
}

fn attr(e: &BytesStart, name: &str, offset: u64) -> Result<Option<String>> {
    for a in e.attributes() {
        let a = a.map_err(|err| Error::Xml {
            offset,
            message: err.to_string(),
        })?;
        if a.key.as_ref() == name.as_bytes() {
            let value = a.unescape_value().map_err(|err| Error::Xml {
                offset,
                message: err.to_string(),
            })?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn require_attr(e: &BytesStart, name: &str, offset: u64) -> Result<String> {
    attr(e, name, offset)?.ok_or_else(|| Error::Xml {
        offset,
        message: format!(
            "missing attribute {name} on <{}>",
            String::from_utf8_lossy(e.name().as_ref())
        ),
    })
}

fn int_attr(e: &BytesStart, name: &str, offset: u64) -> Result<u64> {
    let raw = require_attr(e, name, offset)?;
    raw.parse().map_err(|_| Error::Xml {
        offset,
        message: format!("attribute {name}={raw:?} is not a non-negative integer"),
    })
}

fn req_float_attr(e: &BytesStart, name: &str, offset: u64) -> Result<f64> {
    float_attr(e, name, offset)?.ok_or_else(|| Error::Xml {
        offset,
        message: format!("missing attribute {name}"),
    })
}

fn float_attr(e: &BytesStart, name: &str, offset: u64) -> Result<Option<f64>> {
    match attr(e, name, offset)? {
        None => Ok(None),
        Some(raw) => raw.parse().map(Some).map_err(|_| Error::Xml {
            offset,
            message: format!("attribute {name}={raw:?} is not a number"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIMPLE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<COCHRANE_REVIEW ID="CD000001">
  <COMPARISON ID="CMP-01">
    <NAME>Drug vs placebo</NAME>
    <DICH_OUTCOME ID="OUT-01.01" EFFECT_MEASURE="RR" METHOD="MH" RANDOM="NO">
      <NAME>Mortality</NAME>
      <DICH_DATA STUDY_ID="STD-A" EVENTS_1="10" TOTAL_1="20" EVENTS_2="5" TOTAL_2="20"/>
      <DICH_DATA STUDY_ID="STD-B" EVENTS_1="4" TOTAL_1="30" EVENTS_2="6" TOTAL_2="30"/>
    </DICH_OUTCOME>
  </COMPARISON>
</COCHRANE_REVIEW>"#;

    #[test]
    fn parses_simple_review() {
        let review = parse_review_xml(SIMPLE.as_bytes()).unwrap();
        assert_eq!(review.review_id, "CD000001");
        assert_eq!(review.comparisons.len(), 1);
        let comparison = &review.comparisons[0];
        assert_eq!(comparison.name, "Drug vs placebo");
        assert_eq!(comparison.outcomes.len(), 1);
        let outcome = &comparison.outcomes[0];
        assert_eq!(outcome.effect_measure, EffectMeasure::RiskRatio);
        assert_eq!(outcome.pooling, Pooling::MantelHaenszel);
        assert_eq!(outcome.model, Model::Fixed);
        assert_eq!(outcome.subgroups.len(), 1);
        assert_eq!(outcome.subgroups[0].rows.len(), 2);
        assert!(review.skipped_outcomes.is_empty());
        match outcome.subgroups[0].rows[0].data {
            ArmData::Dichotomous(arms) => assert_eq!(arms.events_exp, 10),
            _ => panic!("expected dichotomous row"),
        }
    }

    #[test]
    fn zero_comparisons_is_empty_review() {
        let xml = r#"<COCHRANE_REVIEW ID="CD000002"></COCHRANE_REVIEW>"#;
        let review = parse_review_xml(xml.as_bytes()).unwrap();
        assert!(review.comparisons.is_empty());
    }

    #[test]
    fn unsupported_outcome_recorded_as_skipped() {
        let xml = r#"<COCHRANE_REVIEW ID="CD000003">
  <COMPARISON ID="CMP-01">
    <ORDINAL_OUTCOME ID="OUT-01.01">
      <ORDINAL_DATA STUDY_ID="STD-A"/>
    </ORDINAL_OUTCOME>
    <DICH_OUTCOME ID="OUT-01.02" EFFECT_MEASURE="RR">
      <DICH_DATA STUDY_ID="STD-A" EVENTS_1="1" TOTAL_1="10" EVENTS_2="2" TOTAL_2="10"/>
    </DICH_OUTCOME>
  </COMPARISON>
</COCHRANE_REVIEW>"#;
        let review = parse_review_xml(xml.as_bytes()).unwrap();
        assert_eq!(review.comparisons[0].outcomes.len(), 1);
        assert_eq!(review.skipped_outcomes, vec!["OUT-01.01".to_owned()]);
    }

    #[test]
    fn malformed_xml_reports_offset() {
        let xml = r#"<COCHRANE_REVIEW ID="x"><COMPARISON ID="c1"></COCHRANE_REVIEW>"#;
        match parse_review_xml(xml.as_bytes()) {
            Err(Error::Xml { offset, .. }) => assert!(offset > 0),
            other => panic!("expected xml error, got {other:?}"),
        }
    }

    #[test]
    fn events_above_total_rejected() {
        let xml = r#"<COCHRANE_REVIEW ID="CD000004">
  <COMPARISON ID="CMP-01">
    <DICH_OUTCOME ID="O1" EFFECT_MEASURE="RR">
      <DICH_DATA STUDY_ID="STD-BAD" EVENTS_1="30" TOTAL_1="20" EVENTS_2="5" TOTAL_2="20"/>
    </DICH_OUTCOME>
  </COMPARISON>
</COCHRANE_REVIEW>"#;
        match parse_review_xml(xml.as_bytes()) {
            Err(Error::Validation(msg)) => assert!(msg.contains("STD-BAD")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }
}
