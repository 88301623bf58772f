//! Parses a RevMan XML review and prints its structure, then round-trips
//! it through the canonical JSON form.

use std::fs;
use std::path::Path;

use outcome_eval::evidence::{emit_review_json, parse_review_json, parse_review_xml};

fn main() -> outcome_eval::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus/CD100101.xml");
    let bytes = fs::read(&path).expect("fixture exists");
    let review = parse_review_xml(&bytes)?;

    println!("review {}", review.review_id);
    for comparison in &review.comparisons {
        println!("  comparison {} ({})", comparison.comparison_id, comparison.name);
        for outcome in &comparison.outcomes {
            println!(
                "    outcome {} [{}] {} studies, declared estimate {:?}",
                outcome.outcome_id,
                outcome.effect_measure.label(),
                outcome.study_ids().len(),
                outcome.original_estimate,
            );
        }
    }
    if !review.skipped_outcomes.is_empty() {
        println!("  skipped (unsupported type): {:?}", review.skipped_outcomes);
    }

    let json = emit_review_json(&review);
    let back = parse_review_json(&json)?;
    assert_eq!(back.review_id, review.review_id);
    println!("JSON round-trip ok ({} bytes)", json.len());
    Ok(())
}
