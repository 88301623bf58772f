//! Ingestion of the study/publication mapping CSV.

use super::StudyPublicationMap;
use crate::error::{Error, Result};

/// Outcome of a mapping parse: the deduplicated map plus bookkeeping.
#[derive(Debug)]
pub struct MappingParse {
    pub map: StudyPublicationMap,
    pub rows_read: usize,
    /// One warning per duplicate triple encountered.
    pub warnings: Vec<String>,
}

/// Parses CSV with header `review_id,study_id,publication_id`.
/// Duplicate triples are kept once and reported as warnings.
pub fn parse_mapping(bytes: &[u8]) -> Result<MappingParse> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("mapping csv: {e}")))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("mapping csv: missing column {name:?}")))
    };
    let review_col = col("review_id")?;
    let study_col = col("study_id")?;
    let publication_col = col("publication_id")?;

    let mut map = StudyPublicationMap::new();
    let mut rows_read = 0;
    let mut warnings = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format(format!("mapping csv row {}: {e}", i + 2)))?;
        let field = |idx: usize| -> Result<&str> {
            record
                .get(idx)
                .ok_or_else(|| Error::Format(format!("mapping csv row {}: too few fields", i + 2)))
        };
        let (review, study, publication) =
            (field(review_col)?, field(study_col)?, field(publication_col)?);
        if review.is_empty() || study.is_empty() || publication.is_empty() {
            return Err(Error::Format(format!(
                "mapping csv row {}: empty identifier",
                i + 2
            )));
        }
        rows_read += 1;
        if !map.insert(review, study, publication) {
            warnings.push(format!(
                "duplicate mapping row ({review}, {study}, {publication})"
            ));
        }
    }
    Ok(MappingParse {
        map,
        rows_read,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_distinct_rows() {
        let csv = "review_id,study_id,publication_id\nr1,s1,p1\nr1,s2,p2\nr2,s1,p3\n";
        let parsed = parse_mapping(csv.as_bytes()).unwrap();
        assert_eq!(parsed.map.len(), 3);
        assert_eq!(parsed.rows_read, 3);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn study_with_two_publications_keeps_both() {
        let csv = "review_id,study_id,publication_id\nr1,s1,p1\nr1,s1,p2\n";
        let parsed = parse_mapping(csv.as_bytes()).unwrap();
        assert_eq!(parsed.map.publications_of("r1", "s1").len(), 2);
    }

    #[test]
    fn duplicate_rows_deduplicated_with_warning() {
        let csv = "review_id,study_id,publication_id\nr1,s1,p1\nr1,s1,p1\n";
        let parsed = parse_mapping(csv.as_bytes()).unwrap();
        assert_eq!(parsed.map.len(), 1);
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn missing_column_is_format_error() {
        let csv = "review_id,study_id\nr1,s1\n";
        match parse_mapping(csv.as_bytes()) {
            Err(Error::Format(msg)) => assert!(msg.contains("publication_id")),
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
