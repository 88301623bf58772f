//! Evaluates a submitted run against the gold and max-with-qrels
//! baselines: aspect aggregates per cutoff plus MAP.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use outcome_eval::evidence::{parse_mapping, parse_qrels, parse_review_xml, parse_run};
use outcome_eval::experiments::{
    evaluate_run, gold_baseline, max_with_qrels_baseline, Corpus,
};

fn main() -> outcome_eval::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut paths: Vec<_> = fs::read_dir(fixtures.join("corpus"))
        .expect("fixture dir")
        .map(|e| e.expect("dir entry").path())
        .collect();
    paths.sort();
    let mut reviews = Vec::new();
    for path in paths {
        reviews.push(parse_review_xml(&fs::read(&path).expect("fixture"))?);
    }
    let corpus = Corpus::new(reviews);
    let map = parse_mapping(&fs::read(fixtures.join("mapping.csv")).expect("fixture"))?.map;
    let qrels = parse_qrels(&fs::read(fixtures.join("qrels/fulltext.qrels")).expect("fixture"))?;
    let run = parse_run(&fs::read(fixtures.join("runs/run-gamma.txt")).expect("fixture"))?;

    // baseline rankings need the per-topic document collections
    let collections: BTreeMap<String, BTreeSet<String>> = corpus
        .reviews()
        .iter()
        .map(|review| {
            let topic = review.review_id.clone();
            let mut docs: BTreeSet<String> = qrels
                .judged_docs(&topic)
                .into_iter()
                .map(str::to_owned)
                .collect();
            docs.extend(
                map.publications_for_review(&topic)
                    .into_iter()
                    .map(str::to_owned),
            );
            (topic, docs)
        })
        .collect();

    let cutoffs = [10, 30];
    for candidate in [
        run,
        gold_baseline(&corpus, &map, &collections),
        max_with_qrels_baseline(&qrels, &corpus, &collections),
    ] {
        let eval = evaluate_run(&candidate, &corpus, &qrels, &map, &cutoffs);
        print!("{:<16} MAP {:.4}", eval.run_tag, eval.map_score);
        for &cutoff in &cutoffs {
            let agg = &eval.cutoff(cutoff).expect("cutoff evaluated").aggregate;
            print!(
                "  @{cutoff}%: MoD {:.4} equal {} missing {}",
                agg.mean_mod, agg.n_equal, agg.n_missing
            );
        }
        println!();
    }
    Ok(())
}
