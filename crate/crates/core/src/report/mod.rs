//! Report serialization: CSV and JSON writers for run evaluations,
//! simulation tables and Pareto points, plus static SVG emitters.

mod svg;

pub use svg::{render_box_svg, render_forest_svg, render_pareto_svg, BoxPlotSeries, ForestRow};

use std::fs;
use std::path::Path;

use crate::aspects::AggregateTable;
use crate::error::{Error, Result};
use crate::experiments::{
    CorrelationReport, ParetoPoint, RunEvaluation, SimulationTable,
};

/// Writes bytes atomically: write to a sibling temp file, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn fmt(value: f64) -> String {
    if value.is_nan() {
        "NA".to_owned()
    } else {
        format!("{value:.6}")
    }
}

/// Per-outcome rows for one run: one row per (outcome, cutoff).
pub fn outcome_rows_csv(eval: &RunEvaluation) -> Vec<u8> {
    let mut out = String::from(
        "run_tag,review_id,comparison_id,outcome_id,cutoff,mod,delta_ci,estimate_class,sign_match,estimable\n",
    );
    for ce in &eval.per_cutoff {
        for row in &ce.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                eval.run_tag,
                row.key.review_id,
                row.key.comparison_id,
                row.key.outcome_id,
                ce.cutoff,
                fmt(row.report.mod_value),
                row.report.delta_ci.map(fmt).unwrap_or_else(|| "NA".into()),
                row.report.estimate_class.label(),
                row.report.sign_match.label(),
                row.report.estimable,
            ));
        }
    }
    out.into_bytes()
}

fn aggregate_fields(table: &AggregateTable) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        fmt(table.mean_mod),
        fmt(table.mean_delta_ci),
        table.n_equal,
        table.n_over,
        table.n_under,
        table.n_same_sign,
        table.n_diff_sign,
        table.n_reported,
        table.n_missing,
        table.n_total,
    )
}

const AGGREGATE_HEADER: &str =
    "mean_mod,mean_delta_ci,n_equal,n_over,n_under,n_same_sign,n_diff_sign,n_reported,n_missing,n_total";

pub fn aggregates_csv(eval: &RunEvaluation) -> Vec<u8> {
    let mut out = format!("run_tag,cutoff,{AGGREGATE_HEADER}\n");
    for ce in &eval.per_cutoff {
        out.push_str(&format!(
            "{},{},{}\n",
            eval.run_tag,
            ce.cutoff,
            aggregate_fields(&ce.aggregate)
        ));
    }
    out.into_bytes()
}

pub fn topics_csv(eval: &RunEvaluation) -> Vec<u8> {
    let mut out = String::from(
        "run_tag,topic_id,n_docs,n_relevant,n_unjudged,ap,recall_5,recall_10,recall_20,recall_30,recall_50,ndcg_20,wss_95,wss_100,last_rel_rank,aurc\n",
    );
    for t in &eval.topics {
        let recall = |k: u32| t.recall_at.get(&k).copied().map(fmt).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            eval.run_tag,
            t.topic_id,
            t.n_docs,
            t.n_relevant,
            t.n_unjudged,
            fmt(t.ap),
            recall(5),
            recall(10),
            recall(20),
            recall(30),
            recall(50),
            t.ndcg_at.get(&20).copied().map(fmt).unwrap_or_default(),
            t.wss.get(&95).copied().map(fmt).unwrap_or_default(),
            t.wss.get(&100).copied().map(fmt).unwrap_or_default(),
            t.last_rel_rank.map(|r| r.to_string()).unwrap_or_default(),
            fmt(t.aurc),
        ));
    }
    out.into_bytes()
}

/// Cross-run comparison: sorted by MAP (descending) with mean MoD at the
/// reference cutoff as tiebreak; both orderings are exposed as rank
/// columns so re-ranking between the two can be read off directly.
pub fn comparison_csv(evals: &[RunEvaluation], reference_cutoff: u32) -> Vec<u8> {
    let mean_mod = |eval: &RunEvaluation| -> f64 {
        eval.cutoff(reference_cutoff)
            .map(|c| c.aggregate.mean_mod)
            .unwrap_or(f64::NAN)
    };
    let mut order: Vec<usize> = (0..evals.len()).collect();
    order.sort_by(|&a, &b| {
        evals[b]
            .map_score
            .partial_cmp(&evals[a].map_score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                mean_mod(&evals[a])
                    .partial_cmp(&mean_mod(&evals[b]))
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            .then_with(|| evals[a].run_tag.cmp(&evals[b].run_tag))
    });
    let mut mod_order = order.clone();
    mod_order.sort_by(|&a, &b| {
        mean_mod(&evals[a])
            .partial_cmp(&mean_mod(&evals[b]))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| evals[a].run_tag.cmp(&evals[b].run_tag))
    });
    let rank_by_mod = |idx: usize| mod_order.iter().position(|&i| i == idx).unwrap() + 1;

    let mut out = format!(
        "run_tag,map,mean_mod_at_{reference_cutoff},rank_by_map,rank_by_mod,n_missing_at_{reference_cutoff}\n"
    );
    for (pos, &idx) in order.iter().enumerate() {
        let eval = &evals[idx];
        let missing = eval
            .cutoff(reference_cutoff)
            .map(|c| c.aggregate.n_missing)
            .unwrap_or(0);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            eval.run_tag,
            fmt(eval.map_score),
            fmt(mean_mod(eval)),
            pos + 1,
            rank_by_mod(idx),
            missing,
        ));
    }
    out.into_bytes()
}

/// Table-2-shaped matrix: aspect rows by removal-count columns.
pub fn simulation_matrix_csv(table: &SimulationTable) -> Vec<u8> {
    let mut out = String::from("aspect");
    for count in &table.removal_counts {
        out.push_str(&format!(",removed_{count}"));
    }
    out.push('\n');
    type MeansColumn<'a> = (&'a str, &'a dyn Fn(&crate::experiments::SimulationMeans) -> String);
    let rows: [MeansColumn; 12] = [
        ("mean_relative_difference", &|m| fmt(m.mean_mod)),
        ("mean_distance_from_ci", &|m| fmt(m.mean_delta_ci)),
        ("equal_outcome", &|m| fmt(m.mean_equal)),
        ("overestimated_outcome", &|m| fmt(m.mean_over)),
        ("underestimated_outcome", &|m| fmt(m.mean_under)),
        ("have_same_sign", &|m| fmt(m.mean_same_sign)),
        ("have_different_sign", &|m| fmt(m.mean_diff_sign)),
        ("reported_outcomes", &|m| fmt(m.mean_reported)),
        ("missing_outcomes", &|m| fmt(m.mean_missing)),
        ("total_outcomes", &|m| m.n_total.to_string()),
        ("publication_recall", &|m| fmt(m.publication_recall)),
        ("study_recall", &|m| fmt(m.study_recall)),
    ];
    for (name, getter) in rows {
        out.push_str(name);
        for means in &table.seed_means {
            out.push(',');
            out.push_str(&getter(means));
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Exact per-seed tables, long form.
pub fn simulation_seeds_csv(table: &SimulationTable) -> Vec<u8> {
    let mut out = format!("seed,removal_count,{AGGREGATE_HEADER},publication_recall,study_recall\n");
    for (seed, row) in table.per_seed.iter().enumerate() {
        for (cell, count) in row.iter().zip(&table.removal_counts) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                seed,
                count,
                aggregate_fields(&cell.aggregate),
                fmt(cell.publication_recall),
                fmt(cell.study_recall),
            ));
        }
    }
    out.into_bytes()
}

pub fn pareto_csv(points: &[ParetoPoint]) -> Vec<u8> {
    let mut out = String::from("run_tag,n_non_estimable,sum_mod_raw,sum_mod_normalized,dominated\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.run_tag,
            p.x,
            fmt(p.y_raw),
            fmt(p.y),
            p.dominated
        ));
    }
    out.into_bytes()
}

pub fn correlations_csv(report: &CorrelationReport) -> Vec<u8> {
    let mut out = String::from("measure,run_tag,measure_value,mod_value,pearson,spearman,slope,intercept\n");
    for col in &report.columns {
        for ((tag, x), y) in col
            .run_tags
            .iter()
            .zip(&col.measure_values)
            .zip(&col.mod_values)
        {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                col.measure,
                tag,
                fmt(*x),
                fmt(*y),
                fmt(col.pearson),
                fmt(col.spearman),
                fmt(col.slope),
                fmt(col.intercept),
            ));
        }
    }
    out.into_bytes()
}

/// Whole-evaluation JSON document.
pub fn run_evaluation_json(eval: &RunEvaluation) -> Vec<u8> {
    #[derive(serde::Serialize)]
    struct RowJson<'a> {
        review_id: &'a str,
        comparison_id: &'a str,
        outcome_id: &'a str,
        #[serde(rename = "mod")]
        mod_value: f64,
        delta_ci: Option<f64>,
        estimate_class: &'a str,
        sign_match: &'a str,
        estimable: bool,
    }
    #[derive(serde::Serialize)]
    struct CutoffJson<'a> {
        cutoff: u32,
        aggregate: &'a AggregateTable,
        outcomes: Vec<RowJson<'a>>,
    }
    #[derive(serde::Serialize)]
    struct EvalJson<'a> {
        run_tag: &'a str,
        map: f64,
        cutoffs: Vec<CutoffJson<'a>>,
        topics: &'a [crate::ir::TopicEvaluation],
        warnings: &'a [String],
    }
    let doc = EvalJson {
        run_tag: &eval.run_tag,
        map: eval.map_score,
        cutoffs: eval
            .per_cutoff
            .iter()
            .map(|ce| CutoffJson {
                cutoff: ce.cutoff,
                aggregate: &ce.aggregate,
                outcomes: ce
                    .rows
                    .iter()
                    .map(|r| RowJson {
                        review_id: &r.key.review_id,
                        comparison_id: &r.key.comparison_id,
                        outcome_id: &r.key.outcome_id,
                        mod_value: r.report.mod_value,
                        delta_ci: r.report.delta_ci,
                        estimate_class: r.report.estimate_class.label(),
                        sign_match: r.report.sign_match.label(),
                        estimable: r.report.estimable,
                    })
                    .collect(),
            })
            .collect(),
        topics: &eval.topics,
        warnings: &eval.warnings,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("evaluation serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

pub fn simulation_json(table: &SimulationTable) -> Vec<u8> {
    #[derive(serde::Serialize)]
    struct CellJson<'a> {
        aggregate: &'a AggregateTable,
        publication_recall: f64,
        study_recall: f64,
    }
    #[derive(serde::Serialize)]
    struct TableJson<'a> {
        removal_counts: &'a [usize],
        n_seeds: usize,
        base_seed: u64,
        seed_means: &'a [crate::experiments::SimulationMeans],
        per_seed: Vec<Vec<CellJson<'a>>>,
        skipped_reviews: &'a [String],
    }
    let doc = TableJson {
        removal_counts: &table.removal_counts,
        n_seeds: table.n_seeds,
        base_seed: table.base_seed,
        seed_means: &table.seed_means,
        per_seed: table
            .per_seed
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| CellJson {
                        aggregate: &c.aggregate,
                        publication_recall: c.publication_recall,
                        study_recall: c.study_recall,
                    })
                    .collect()
            })
            .collect(),
        skipped_reviews: &table.skipped_reviews,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("simulation serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

pub fn pareto_json(points: &[ParetoPoint]) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(points).expect("pareto serialization cannot fail");
    bytes.push(b'\n');
    bytes
}
