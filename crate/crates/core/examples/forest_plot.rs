//! Renders a forest plot SVG for one pooled outcome.

use std::fs;
use std::path::Path;

use outcome_eval::evidence::{parse_review_xml, ArmData};
use outcome_eval::meta::{
    confidence_interval, pool_outcome, study_effect_continuous, study_effect_dichotomous,
};
use outcome_eval::report::{render_forest_svg, ForestRow};

fn main() -> outcome_eval::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus/CD100103.xml");
    let review = parse_review_xml(&fs::read(&path).expect("fixture exists"))?;
    let outcome = &review.comparisons[0].outcomes[0];
    let pooled = pool_outcome(outcome, &outcome.study_ids());

    let rows: Vec<ForestRow> = outcome
        .rows()
        .map(|row| {
            let effect = match &row.data {
                ArmData::Dichotomous(arms) => {
                    study_effect_dichotomous(&row.study_id, arms, outcome.effect_measure)
                }
                ArmData::Continuous(arms) => {
                    study_effect_continuous(&row.study_id, arms, outcome.effect_measure)
                }
            };
            let (ci_low, ci_high) = if effect.estimable {
                confidence_interval(
                    effect.transformed_point,
                    effect.se,
                    outcome.ci_level,
                    effect.log_scale,
                )
            } else {
                (f64::NAN, f64::NAN)
            };
            ForestRow {
                study_id: row.study_id.clone(),
                point: effect.point,
                ci_low,
                ci_high,
                weight: pooled.weights.get(&row.study_id).copied(),
                estimable: effect.estimable,
            }
        })
        .collect();

    let title = format!(
        "{} {} ({})",
        review.review_id,
        outcome.outcome_id,
        outcome.effect_measure.label()
    );
    let svg = render_forest_svg(&title, &rows, &pooled);
    let out = std::env::temp_dir().join("forest-example.svg");
    fs::write(&out, svg).expect("temp dir is writable");
    println!(
        "pooled {:.4} ({:.4}, {:.4}); plot written to {}",
        pooled.estimate,
        pooled.ci_low,
        pooled.ci_high,
        out.display()
    );
    Ok(())
}
