//! Random-removal simulation over the bundled corpus: removes n
//! publications per review under 20 seeds and tracks how the recomputed
//! outcomes drift away from the originals.

use std::fs;
use std::path::Path;

use outcome_eval::evidence::{parse_mapping, parse_review_xml};
use outcome_eval::experiments::{simulate_removals, Corpus, SimulationSpec};

fn main() -> outcome_eval::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut reviews = Vec::new();
    let mut paths: Vec<_> = fs::read_dir(fixtures.join("corpus"))
        .expect("fixture dir")
        .map(|e| e.expect("dir entry").path())
        .collect();
    paths.sort();
    for path in paths {
        reviews.push(parse_review_xml(&fs::read(&path).expect("fixture"))?);
    }
    let corpus = Corpus::new(reviews);
    let map = parse_mapping(&fs::read(fixtures.join("mapping.csv")).expect("fixture"))?.map;

    let spec = SimulationSpec {
        removal_counts: vec![1, 2, 5, 10, 100],
        n_seeds: 20,
        base_seed: 42,
    };
    let table = simulate_removals(&corpus, &map, &spec)?;

    println!("removed  mean_MoD  equal  reported  pub_recall");
    for (i, &count) in table.removal_counts.iter().enumerate() {
        let means = &table.seed_means[i];
        println!(
            "{count:>7}  {:>8.4}  {:>5.1}  {:>8.1}  {:>10.4}",
            means.mean_mod, means.mean_equal, means.mean_reported, means.publication_recall,
        );
    }
    Ok(())
}
