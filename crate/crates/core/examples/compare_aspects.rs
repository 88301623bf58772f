//! Compares original vs recomputed outcomes for a partial retrieval and
//! prints the five aspects per outcome plus the aggregate table.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use outcome_eval::aspects::aggregate;
use outcome_eval::evidence::{parse_mapping, parse_review_xml};
use outcome_eval::experiments::{evaluate_review_retrieval, Corpus};
use outcome_eval::meta::ToleranceConfig;

fn main() -> outcome_eval::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let review =
        parse_review_xml(&fs::read(fixtures.join("corpus/CD100102.xml")).expect("fixture"))?;
    let review_id = review.review_id.clone();
    let corpus = Corpus::new(vec![review]);
    let map = parse_mapping(&fs::read(fixtures.join("mapping.csv")).expect("fixture"))?.map;

    // retrieve the first 60% of publications; later studies lose all of theirs
    let all: Vec<&str> = map.publications_for_review(&review_id).into_iter().collect();
    let retrieved: HashSet<&str> = all.iter().take(all.len() * 3 / 5).copied().collect();
    println!(
        "retrieved {} of {} publications of {review_id}",
        retrieved.len(),
        all.len()
    );

    let tol = ToleranceConfig::default();
    let rows = evaluate_review_retrieval(&corpus, &review_id, &retrieved, &map, &tol);
    for (key, report) in &rows {
        println!(
            "{}: MoD {:.4}, dCI {}, {} / {}",
            key.outcome_id,
            report.mod_value,
            report
                .delta_ci
                .map(|d| format!("{d:.4}"))
                .unwrap_or_else(|| "NA".into()),
            report.estimate_class.label(),
            report.sign_match.label(),
        );
    }

    let reports: Vec<_> = rows.iter().map(|(_, r)| *r).collect();
    let table = aggregate(&reports);
    println!(
        "aggregate: mean MoD {:.4}, equal {}, over {}, under {}, missing {} of {}",
        table.mean_mod, table.n_equal, table.n_over, table.n_under, table.n_missing, table.n_total
    );
    Ok(())
}
