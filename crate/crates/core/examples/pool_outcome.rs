//! Pools one outcome from full data, then from a reduced study set, and
//! shows how the estimate and CI move.

use std::fs;
use std::path::Path;

use outcome_eval::evidence::parse_review_xml;
use outcome_eval::meta::pool_outcome;

fn main() -> outcome_eval::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus/CD100101.xml");
    let review = parse_review_xml(&fs::read(&path).expect("fixture exists"))?;
    let outcome = &review.comparisons[0].outcomes[0];

    let all = outcome.study_ids();
    let full = pool_outcome(outcome, &all);
    println!(
        "{} [{}]: {:.4} ({:.4}, {:.4}) from {} studies",
        outcome.outcome_id,
        outcome.effect_measure.label(),
        full.estimate,
        full.ci_low,
        full.ci_high,
        full.n_studies
    );
    for (study, weight) in &full.weights {
        println!("  {study}: weight {:.1}%", 100.0 * weight);
    }

    // drop the heaviest study and re-pool
    let heaviest = full
        .weights
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("weights are finite"))
        .map(|(s, _)| s.clone())
        .expect("at least one study");
    let mut reduced = all.clone();
    reduced.remove(heaviest.as_str());
    let partial = pool_outcome(outcome, &reduced);
    println!(
        "without {heaviest}: {:.4} ({:.4}, {:.4})",
        partial.estimate, partial.ci_low, partial.ci_high
    );
    Ok(())
}
