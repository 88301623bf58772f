//! Rank-based measures for one topic of a TREC-style run.

use std::fs;
use std::path::Path;

use outcome_eval::evidence::{parse_qrels, parse_run};
use outcome_eval::ir::evaluate_topic;

fn main() -> outcome_eval::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let qrels = parse_qrels(&fs::read(fixtures.join("qrels/fulltext.qrels")).expect("fixture"))?;
    let run = parse_run(&fs::read(fixtures.join("runs/run-beta.txt")).expect("fixture"))?;

    for topic in run.topics() {
        let ranking = run.topic(topic).expect("topic exists");
        let Some(eval) = evaluate_topic(topic, ranking, &qrels, &[5, 10, 20, 30, 50], &[20])
        else {
            println!("{topic}: no relevant documents, skipped");
            continue;
        };
        println!(
            "{topic}: N={} R={} AP={:.4} R@10%={:.4} nDCG@20%={:.4} WSS@95={:.4} last={} AURC={:.4}",
            eval.n_docs,
            eval.n_relevant,
            eval.ap,
            eval.recall_at[&10],
            eval.ndcg_at[&20],
            eval.wss[&95],
            eval.last_rel_rank.map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
            eval.aurc,
        );
    }
    Ok(())
}
