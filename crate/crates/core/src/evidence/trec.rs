//! TREC-style qrels and run file ingestion.
//!
//! Qrels lines: `topic 0 publication_id grade`.
//! Run lines: `topic Q0 publication_id rank score tag`.
//! Fields are whitespace-separated; ranks are re-normalized to 1..n by
//! descending score with ties broken by ascending publication id.

use std::collections::BTreeMap;

use super::{Qrels, RunRanking};
use crate::error::{Error, Result};

pub fn parse_qrels(bytes: &[u8]) -> Result<Qrels> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Format(format!("qrels file is not UTF-8: {e}")))?;
    let mut qrels = Qrels::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Line {
                line: i + 1,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let grade: u32 = fields[3].parse().map_err(|_| Error::Line {
            line: i + 1,
            message: format!("relevance grade {:?} is not a non-negative integer", fields[3]),
        })?;
        qrels.insert(fields[0], fields[2], grade);
    }
    Ok(qrels)
}

pub fn parse_run(bytes: &[u8]) -> Result<RunRanking> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Format(format!("run file is not UTF-8: {e}")))?;
    let mut tag = String::new();
    let mut per_topic: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::Line {
                line: i + 1,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let _rank: u64 = fields[3].parse().map_err(|_| Error::Line {
            line: i + 1,
            message: format!("rank {:?} is not an integer", fields[3]),
        })?;
        let score: f64 = fields[4].parse().map_err(|_| Error::Line {
            line: i + 1,
            message: format!("score {:?} is not a number", fields[4]),
        })?;
        if !score.is_finite() {
            return Err(Error::Line {
                line: i + 1,
                message: format!("score {score} is not finite"),
            });
        }
        if tag.is_empty() {
            tag = fields[5].to_owned();
        }
        per_topic
            .entry(fields[0].to_owned())
            .or_default()
            .push((fields[2].to_owned(), score));
    }
    let mut run = RunRanking::new(tag);
    for (topic, docs) in per_topic {
        run.set_topic(&topic, docs);
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qrels_relevant_and_nonrelevant() {
        let qrels = parse_qrels(b"t1 0 d1 1\nt1 0 d2 0\n").unwrap();
        assert!(qrels.is_relevant("t1", "d1"));
        assert!(!qrels.is_relevant("t1", "d2"));
        assert_eq!(qrels.judged_docs("t1").len(), 2);
    }

    #[test]
    fn run_ranks_by_descending_score() {
        let run = parse_run(b"t1 Q0 d1 1 0.9 sys\nt1 Q0 d2 2 0.7 sys\n").unwrap();
        let docs = run.topic("t1").unwrap();
        assert_eq!(docs[0].publication_id, "d1");
        assert_eq!(docs[0].rank, 1);
        assert_eq!(docs[1].rank, 2);
        assert_eq!(run.tag, "sys");
    }

    #[test]
    fn tied_scores_break_by_publication_id() {
        let run = parse_run(b"t1 Q0 d2 1 0.5 sys\nt1 Q0 d1 2 0.5 sys\n").unwrap();
        let docs = run.topic("t1").unwrap();
        assert_eq!(docs[0].publication_id, "d1");
        assert_eq!(docs[1].publication_id, "d2");
    }

    #[test]
    fn bad_score_names_line() {
        match parse_run(b"t1 Q0 d1 1 0.9 sys\nt1 Q0 d2 2 abc sys\n") {
            Err(Error::Line { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected line error, got {other:?}"),
        }
    }

    #[test]
    fn bad_grade_names_line() {
        match parse_qrels(b"t1 0 d1 x\n") {
            Err(Error::Line { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected line error, got {other:?}"),
        }
    }
}
