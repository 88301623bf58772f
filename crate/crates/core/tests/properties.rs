//! Property suites for the library invariants.

mod common;

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;

use outcome_eval::aspects::{
    aggregate, aspect_report, classify_estimate, distance_from_ci, magnitude_of_difference,
    sign_agreement, EstimateClass,
};
use outcome_eval::evidence::{
    emit_review_json, parse_review_json, parse_run, studies_found, ArmData, Comparison,
    ContinuousArms, DataKind, DichotomousArms, EffectMeasure, Model, Outcome, Pooling, Review,
    StudyPublicationMap, StudyRow, Subgroup,
};
use outcome_eval::experiments::rng::SplitMix64;
use outcome_eval::experiments::pareto_frontier;
use outcome_eval::ir::{
    average_precision, cutoff_at_percent, last_relevant_rank, ndcg_at_percent, recall_at_percent,
    wss_at_recall,
};
use outcome_eval::meta::{
    pool_inverse_variance, pool_mantel_haenszel, pool_outcome, study_effect_dichotomous,
    ToleranceConfig, Z_95,
};

// ---------------------------------------------------------------- helpers --

fn arms_strategy() -> impl Strategy<Value = DichotomousArms> {
    (1u64..60, 1u64..60).prop_flat_map(|(n1, n2)| {
        (0..=n1, 0..=n2).prop_map(move |(a, c)| DichotomousArms {
            events_exp: a,
            total_exp: n1,
            events_ctrl: c,
            total_ctrl: n2,
        })
    })
}

fn rows_strategy(max: usize) -> impl Strategy<Value = Vec<(String, DichotomousArms)>> {
    prop::collection::vec(arms_strategy(), 1..=max).prop_map(|arms| {
        arms.into_iter()
            .enumerate()
            .map(|(i, a)| (format!("S{i:02}"), a))
            .collect()
    })
}

fn measure_strategy() -> impl Strategy<Value = EffectMeasure> {
    prop::sample::select(vec![
        EffectMeasure::RiskRatio,
        EffectMeasure::OddsRatio,
        EffectMeasure::RiskDifference,
    ])
}

fn dich_outcome(rows: Vec<(String, DichotomousArms)>, measure: EffectMeasure) -> Outcome {
    Outcome {
        outcome_id: "O1".into(),
        name: "outcome".into(),
        data_kind: DataKind::Dichotomous,
        effect_measure: measure,
        pooling: Pooling::MantelHaenszel,
        model: Model::Fixed,
        ci_level: 0.95,
        subgroups: vec![Subgroup {
            subgroup_id: "_total".into(),
            name: String::new(),
            rows: rows
                .into_iter()
                .map(|(study_id, arms)| StudyRow {
                    study_id,
                    data: ArmData::Dichotomous(arms),
                })
                .collect(),
        }],
        original_estimate: None,
        original_ci: None,
    }
}

// --------------------------------------------------------------- evidence --

proptest! {
    #[test]
    fn studies_found_is_monotone(extra in prop::collection::vec(0usize..12, 0..8)) {
        let mut map = StudyPublicationMap::new();
        for i in 0..12 {
            map.insert("r", &format!("S{i}"), &format!("p{i}"));
            map.insert("r", &format!("S{i}"), &format!("q{i}"));
        }
        let small: HashSet<&str> = ["p0", "p3", "q7"].into_iter().collect();
        let names: Vec<String> = extra.iter().map(|i| format!("p{i}")).collect();
        let mut big = small.clone();
        big.extend(names.iter().map(String::as_str));
        let found_small = studies_found("r", &small, &map);
        let found_big = studies_found("r", &big, &map);
        prop_assert!(found_small.is_subset(&found_big));
    }

    #[test]
    fn json_round_trip_is_identity(rows in rows_strategy(5), measure in measure_strategy()) {
        let review = Review {
            review_id: "CD1".into(),
            comparisons: vec![Comparison {
                comparison_id: "C1".into(),
                name: "c".into(),
                outcomes: vec![dich_outcome(rows, measure)],
            }],
            skipped_outcomes: vec![],
        };
        let json = emit_review_json(&review);
        let back = parse_review_json(&json).expect("round-trip parses");
        prop_assert_eq!(&back, &review);
    }

    #[test]
    fn run_ranks_are_a_permutation(scores in prop::collection::vec(0u32..5, 1..30)) {
        let mut text = String::new();
        for (i, s) in scores.iter().enumerate() {
            text.push_str(&format!("t1 Q0 d{i} {} {s} tag\n", i + 1));
        }
        let run = parse_run(text.as_bytes()).expect("valid run");
        let docs = run.topic("t1").expect("topic parsed");
        let ranks: Vec<u32> = docs.iter().map(|d| d.rank).collect();
        prop_assert_eq!(ranks, (1..=scores.len() as u32).collect::<Vec<_>>());
        // descending score, publication id breaking ties
        for pair in docs.windows(2) {
            prop_assert!(pair[0].score > pair[1].score
                || (pair[0].score == pair[1].score
                    && pair[0].publication_id < pair[1].publication_id));
        }
    }
}

// ------------------------------------------------------------------- meta --

proptest! {
    #[test]
    fn pooled_weights_sum_to_one(rows in rows_strategy(6), measure in measure_strategy()) {
        let pooled = pool_mantel_haenszel(&rows, measure, 0.95);
        if pooled.estimable {
            let sum: f64 = pooled.weights.values().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9, "weights sum {sum}");
        }
    }

    #[test]
    fn iv_fixed_is_convex_and_more_precise(rows in rows_strategy(6)) {
        let effects: Vec<_> = rows
            .iter()
            .map(|(s, a)| study_effect_dichotomous(s, a, EffectMeasure::OddsRatio))
            .filter(|e| e.estimable && e.se > 0.0)
            .collect();
        prop_assume!(!effects.is_empty());
        let pooled = pool_inverse_variance(&effects, Model::Fixed, 0.95);
        prop_assert!(pooled.estimable);
        let points: Vec<f64> = effects.iter().map(|e| e.transformed_point).collect();
        let lo = points.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = points.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let t = pooled.estimate.ln();
        prop_assert!(t >= lo - 1e-12 && t <= hi + 1e-12, "{t} outside [{lo},{hi}]");
        let pooled_se = (pooled.ci_high.ln() - pooled.ci_low.ln()) / (2.0 * Z_95);
        let min_se = effects.iter().map(|e| e.se).fold(f64::INFINITY, f64::min);
        prop_assert!(pooled_se <= min_se + 1e-12);
    }

    #[test]
    fn mh_pool_is_within_stratum_ratio_range(rows in rows_strategy(6)) {
        let pooled = pool_mantel_haenszel(&rows, EffectMeasure::RiskRatio, 0.95);
        prop_assume!(pooled.estimable);
        // mediant property over the per-stratum corrected ratios
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (s, arms) in &rows {
            if arms.events_exp == 0 && arms.events_ctrl == 0 {
                continue;
            }
            let e = study_effect_dichotomous(s, arms, EffectMeasure::RiskRatio);
            if e.estimable {
                lo = lo.min(e.point);
                hi = hi.max(e.point);
            }
        }
        prop_assert!(pooled.estimate >= lo - 1e-9 && pooled.estimate <= hi + 1e-9);
    }

    #[test]
    fn swapping_arms_inverts_ratio_measures(rows in rows_strategy(6)) {
        let swapped: Vec<(String, DichotomousArms)> = rows
            .iter()
            .map(|(s, a)| {
                (s.clone(), DichotomousArms {
                    events_exp: a.events_ctrl,
                    total_exp: a.total_ctrl,
                    events_ctrl: a.events_exp,
                    total_ctrl: a.total_exp,
                })
            })
            .collect();
        for measure in [EffectMeasure::RiskRatio, EffectMeasure::OddsRatio] {
            let fwd = pool_mantel_haenszel(&rows, measure, 0.95);
            let rev = pool_mantel_haenszel(&swapped, measure, 0.95);
            prop_assert_eq!(fwd.estimable, rev.estimable);
            if fwd.estimable {
                common::assert_rel_close(rev.estimate, 1.0 / fwd.estimate, 1e-12, "inverted");
            }
        }
    }

    #[test]
    fn swapping_arms_negates_mean_difference(
        n1 in 2u64..50, n2 in 2u64..50,
        m1 in -20.0f64..20.0, m2 in -20.0f64..20.0,
        s1 in 0.5f64..9.0, s2 in 0.5f64..9.0,
    ) {
        let arms = ContinuousArms { n_exp: n1, mean_exp: m1, sd_exp: s1,
                                    n_ctrl: n2, mean_ctrl: m2, sd_ctrl: s2 };
        let swapped = ContinuousArms { n_exp: n2, mean_exp: m2, sd_exp: s2,
                                       n_ctrl: n1, mean_ctrl: m1, sd_ctrl: s1 };
        let fwd = outcome_eval::meta::study_effect_continuous("S", &arms, EffectMeasure::MeanDifference);
        let rev = outcome_eval::meta::study_effect_continuous("S", &swapped, EffectMeasure::MeanDifference);
        prop_assert_eq!(rev.point, -fwd.point);
    }

    #[test]
    fn removal_changes_weights_not_study_effects(rows in rows_strategy(6)) {
        prop_assume!(rows.len() >= 2);
        let before: Vec<_> = rows
            .iter()
            .map(|(s, a)| study_effect_dichotomous(s, a, EffectMeasure::OddsRatio))
            .collect();
        let reduced = &rows[..rows.len() - 1];
        let after: Vec<_> = reduced
            .iter()
            .map(|(s, a)| study_effect_dichotomous(s, a, EffectMeasure::OddsRatio))
            .collect();
        // bit-identical per-study effects regardless of the pooled subset
        // (bitwise float comparison so NaN effects of double-zero studies match)
        for (b, a) in before.iter().zip(&after) {
            prop_assert_eq!(&b.study_id, &a.study_id);
            prop_assert_eq!(b.log_scale, a.log_scale);
            prop_assert_eq!(b.estimable, a.estimable);
            prop_assert_eq!(b.point.to_bits(), a.point.to_bits());
            prop_assert_eq!(b.transformed_point.to_bits(), a.transformed_point.to_bits());
            prop_assert_eq!(b.se.to_bits(), a.se.to_bits());
        }
    }

    #[test]
    fn pooling_is_deterministic(rows in rows_strategy(6), measure in measure_strategy()) {
        let outcome = dich_outcome(rows, measure);
        let ids = outcome.study_ids();
        let one = pool_outcome(&outcome, &ids);
        let two = pool_outcome(&outcome, &ids);
        prop_assert!(one == two || (!one.estimable && !two.estimable));
    }

    #[test]
    fn random_model_with_one_study_equals_fixed(arms in arms_strategy()) {
        let effects = vec![study_effect_dichotomous("S", &arms, EffectMeasure::OddsRatio)];
        prop_assume!(effects[0].estimable);
        let fixed = pool_inverse_variance(&effects, Model::Fixed, 0.95);
        let random = pool_inverse_variance(&effects, Model::Random, 0.95);
        prop_assert_eq!(random.tau2, 0.0);
        prop_assert_eq!(fixed.estimate, random.estimate);
        prop_assert_eq!(fixed.ci_low, random.ci_low);
    }
}

// ---------------------------------------------------------------- aspects --

proptest! {
    #[test]
    fn mod_is_nonnegative_and_scale_invariant(
        orig in -50.0f64..50.0, pred in -50.0f64..50.0, lambda in 0.001f64..1000.0,
    ) {
        prop_assume!(orig != 0.0);
        let m = magnitude_of_difference(orig, Some(pred));
        prop_assert!(m >= 0.0);
        prop_assert_eq!(magnitude_of_difference(orig, Some(orig)), 0.0);
        let scaled = magnitude_of_difference(orig * lambda, Some(pred * lambda));
        prop_assert!((m - scaled).abs() < 1e-9 * (1.0 + m));
    }

    #[test]
    fn delta_ci_zero_iff_inside_and_lipschitz(
        lo in -10.0f64..10.0, width in 0.0f64..10.0,
        x in -30.0f64..30.0, y in -30.0f64..30.0,
    ) {
        let hi = lo + width;
        let dx = distance_from_ci(x, lo, hi);
        prop_assert_eq!(dx == 0.0, x >= lo && x <= hi);
        let dy = distance_from_ci(y, lo, hi);
        prop_assert!((dx - dy).abs() <= (x - y).abs() + 1e-12);
    }

    #[test]
    fn classification_is_antisymmetric(a in -40.0f64..40.0, b in -40.0f64..40.0) {
        let tol = ToleranceConfig::default();
        let ab = classify_estimate(a, b, &tol);
        let ba = classify_estimate(b, a, &tol);
        match ab {
            EstimateClass::Equal => prop_assert_eq!(ba, EstimateClass::Equal),
            EstimateClass::Overestimated => prop_assert_eq!(ba, EstimateClass::Underestimated),
            EstimateClass::Underestimated => prop_assert_eq!(ba, EstimateClass::Overestimated),
            EstimateClass::NotEstimable => prop_assert!(false, "estimable inputs"),
        }
    }

    #[test]
    fn sign_agreement_is_symmetric(
        a in -5.0f64..5.0, b in -5.0f64..5.0,
        ratio_scale in prop::bool::ANY,
    ) {
        let measure = if ratio_scale { EffectMeasure::RiskRatio } else { EffectMeasure::MeanDifference };
        prop_assert_eq!(sign_agreement(a, b, measure), sign_agreement(b, a, measure));
    }

    #[test]
    fn aggregate_counts_are_consistent(rows in rows_strategy(6), drop in 0usize..6) {
        let outcome = dich_outcome(rows, EffectMeasure::OddsRatio);
        let all = outcome.study_ids();
        let original = pool_outcome(&outcome, &all);
        prop_assume!(original.estimable);
        let kept: BTreeSet<&str> = all.iter().skip(drop).copied().collect();
        let predicted = pool_outcome(&outcome, &kept);
        let tol = ToleranceConfig::default();
        let report = aspect_report(&original, &predicted, outcome.effect_measure, &tol);
        let table = aggregate(std::slice::from_ref(&report));
        prop_assert_eq!(table.n_total, 1);
        prop_assert_eq!(table.n_equal + table.n_over + table.n_under + table.n_missing, 1);
        prop_assert_eq!(table.n_reported + table.n_missing, table.n_total);
        prop_assert!(table.mean_mod >= 0.0);
    }
}

// --------------------------------------------------------------------- ir --

use outcome_eval::evidence::{Qrels, RunRanking};

fn ranking_of(docs: &[String]) -> Vec<outcome_eval::evidence::RankedDoc> {
    let mut run = RunRanking::new("t");
    let scored: Vec<(String, f64)> = docs
        .iter()
        .enumerate()
        .map(|(i, d)| (d.clone(), 1000.0 - i as f64))
        .collect();
    run.set_topic("t1", scored);
    run.topic("t1").expect("topic set").to_vec()
}

proptest! {
    #[test]
    fn recall_is_monotone_in_k_and_metrics_in_range(
        n in 1usize..60, rel in prop::collection::vec(prop::bool::ANY, 1..60),
    ) {
        let n = n.min(rel.len());
        let docs: Vec<String> = (0..n).map(|i| format!("d{i:03}")).collect();
        let ranking = ranking_of(&docs);
        let mut qrels = Qrels::new();
        let mut any = false;
        for (i, d) in docs.iter().enumerate() {
            let grade = if rel[i] { any = true; 1 } else { 0 };
            qrels.insert("t1", d, grade);
        }
        prop_assume!(any);
        let mut prev = 0.0;
        for k in [5u32, 10, 20, 30, 50, 100] {
            let r = recall_at_percent(&ranking, &qrels, "t1", k);
            prop_assert!(r >= prev - 1e-12, "recall must not drop with k");
            prop_assert!((0.0..=1.0).contains(&r));
            prev = r;
        }
        let ap = average_precision(&ranking, &qrels, "t1");
        prop_assert!((0.0..=1.0).contains(&ap));
        let ndcg = ndcg_at_percent(&ranking, &qrels, "t1", 20);
        prop_assert!((0.0..=1.0).contains(&ndcg));
        for r_target in [0.95, 1.0] {
            let wss = wss_at_recall(&ranking, &qrels, "t1", r_target);
            prop_assert!(wss > -(1.0 - r_target) - 1e-12 && wss <= r_target + 1e-12);
        }
    }

    #[test]
    fn gold_ordering_is_perfect(n_rel in 1usize..20, n_irr in 0usize..30) {
        let mut docs: Vec<String> = (0..n_rel).map(|i| format!("r{i:03}")).collect();
        docs.extend((0..n_irr).map(|i| format!("x{i:03}")));
        let ranking = ranking_of(&docs);
        let mut qrels = Qrels::new();
        for i in 0..n_rel {
            qrels.insert("t1", &format!("r{i:03}"), 1);
        }
        prop_assert_eq!(average_precision(&ranking, &qrels, "t1"), 1.0);
        prop_assert!((ndcg_at_percent(&ranking, &qrels, "t1", 100) - 1.0).abs() < 1e-12);
        let n = (n_rel + n_irr) as f64;
        let wss = wss_at_recall(&ranking, &qrels, "t1", 1.0);
        prop_assert!((wss - (n - n_rel as f64) / n).abs() < 1e-12);
    }

    #[test]
    fn shuffling_tail_nonrelevant_changes_nothing(
        n_rel in 1usize..10, n_irr in 2usize..20, seed in 0u64..1000,
    ) {
        let rel: Vec<String> = (0..n_rel).map(|i| format!("r{i:03}")).collect();
        let irr: Vec<String> = (0..n_irr).map(|i| format!("x{i:03}")).collect();
        let mut docs = rel.clone();
        docs.extend(irr.iter().cloned());
        let mut qrels = Qrels::new();
        for d in &rel {
            qrels.insert("t1", d, 1);
        }
        // permute only the non-relevant tail below the last relevant
        let mut shuffled_tail = irr.clone();
        let mut rng = SplitMix64::new(seed);
        for i in (1..shuffled_tail.len()).rev() {
            shuffled_tail.swap(i, rng.next_index(i + 1));
        }
        let mut docs2 = rel.clone();
        docs2.extend(shuffled_tail);
        let a = ranking_of(&docs);
        let b = ranking_of(&docs2);
        prop_assert_eq!(last_relevant_rank(&a, &qrels, "t1"), last_relevant_rank(&b, &qrels, "t1"));
        for k in [5u32, 30, 100] {
            if cutoff_at_percent(docs.len(), k) >= n_rel {
                prop_assert_eq!(
                    recall_at_percent(&a, &qrels, "t1", k),
                    recall_at_percent(&b, &qrels, "t1", k)
                );
            }
        }
        for r in [0.95, 1.0] {
            prop_assert_eq!(wss_at_recall(&a, &qrels, "t1", r), wss_at_recall(&b, &qrels, "t1", r));
        }
    }
}

// ------------------------------------------------------------ experiments --

proptest! {
    #[test]
    fn frontier_matches_brute_force(
        points in prop::collection::vec((0usize..20, 0.0f64..10.0), 1..60),
    ) {
        let named: Vec<(String, usize, f64)> = points
            .iter()
            .enumerate()
            .map(|(i, (x, y))| (format!("p{i}"), *x, *y))
            .collect();
        let flagged = pareto_frontier(&named);
        prop_assert_eq!(flagged.len(), named.len());
        for p in &flagged {
            let dominated_bf = named.iter().any(|(_, x, y)| {
                *x <= p.x && *y <= p.y_raw && (*x < p.x || *y < p.y_raw)
            });
            prop_assert_eq!(p.dominated, dominated_bf, "{}", p.run_tag);
        }
    }

    #[test]
    fn selection_prefixes_are_nested(seed in 0u64..500, n in 2usize..40) {
        let take_small = n / 3;
        let take_big = (2 * n) / 3;
        let mut items_a: Vec<usize> = (0..n).collect();
        let mut rng_a = SplitMix64::for_stream(42, "CD1", seed);
        let small = rng_a.select(&mut items_a, take_small).to_vec();
        let mut items_b: Vec<usize> = (0..n).collect();
        let mut rng_b = SplitMix64::for_stream(42, "CD1", seed);
        let big = rng_b.select(&mut items_b, take_big).to_vec();
        prop_assert_eq!(&big[..take_small], &small[..]);
    }
}

#[test]
fn gold_run_at_full_cutoff_matches_gold_column() {
    use outcome_eval::experiments::{evaluate_run, gold_baseline};
    use std::collections::BTreeMap;

    let corpus = common::load_fixture_corpus();
    let map = common::load_fixture_mapping();
    let qrels = common::load_fixture_qrels();
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
    let gold = gold_baseline(&corpus, &map, &collections);
    let eval = evaluate_run(&gold, &corpus, &qrels, &map, &[100]);
    let agg = &eval.cutoff(100).expect("cutoff present").aggregate;
    assert_eq!(agg.n_missing, 0);
    assert_eq!(agg.n_equal, agg.n_total);
    assert_eq!(agg.mean_mod, 0.0);
}
