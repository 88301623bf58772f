//! Cross-checks the pooling estimators against independently coded
//! brute-force oracles on randomized small instances.

mod common;

use std::time::Instant;

use common::{assert_rel_close, mh_oracle, Lcg};
use outcome_eval::evidence::{ContinuousArms, DichotomousArms, EffectMeasure, Model};
use outcome_eval::meta::{
    pool_inverse_variance, pool_mantel_haenszel, study_effect_continuous,
    study_effect_dichotomous, Z_95,
};

fn random_arms(rng: &mut Lcg) -> DichotomousArms {
    let n1 = rng.below(49) + 2;
    let n2 = rng.below(49) + 2;
    // bias towards boundary cells so the correction path is exercised
    let a = if rng.below(5) == 0 { 0 } else { rng.below(n1 + 1) };
    let c = if rng.below(5) == 0 { n2 } else { rng.below(n2 + 1) };
    DichotomousArms {
        events_exp: a,
        total_exp: n1,
        events_ctrl: c,
        total_ctrl: n2,
    }
}

#[test]
fn mh_pooling_matches_exact_rational_oracle() {
    let start = Instant::now();
    let mut rng = Lcg(0x00C0FFEE);
    let measures = [
        EffectMeasure::RiskRatio,
        EffectMeasure::OddsRatio,
        EffectMeasure::RiskDifference,
    ];
    let mut checked = 0;
    for trial in 0..150 {
        let measure = measures[(trial % 3) as usize];
        let k = (rng.below(6) + 1) as usize;
        let rows: Vec<(String, DichotomousArms)> = (0..k)
            .map(|i| (format!("S{i}"), random_arms(&mut rng)))
            .collect();
        let pooled = pool_mantel_haenszel(&rows, measure, 0.95);
        match mh_oracle(&rows, measure) {
            None => assert!(!pooled.estimable, "trial {trial}: oracle says not estimable"),
            Some((estimate, weights)) => {
                assert!(pooled.estimable, "trial {trial}: oracle says estimable");
                assert_rel_close(pooled.estimate, estimate, 1e-10, "MH estimate");
                for (study, w) in weights {
                    let got = pooled.weights.get(&study).copied().unwrap_or(f64::NAN);
                    assert_rel_close(got, w, 1e-10, "MH weight");
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 100, "only {checked} estimable instances");
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

/// Naive one-pass inverse-variance implementation, written from the
/// textbook formulas without sharing code with the library.
fn iv_oracle(effects: &[(f64, f64)], random: bool) -> (f64, f64, f64) {
    let k = effects.len();
    let mut tau2 = 0.0;
    if random && k > 1 {
        let w: Vec<f64> = effects.iter().map(|(_, se)| se.powi(-2)).collect();
        let sw: f64 = w.iter().sum();
        let mean = effects.iter().zip(&w).map(|((t, _), wi)| t * wi).sum::<f64>() / sw;
        let q: f64 = effects
            .iter()
            .zip(&w)
            .map(|((t, _), wi)| wi * (t - mean) * (t - mean))
            .sum();
        let c = sw - w.iter().map(|wi| wi * wi).sum::<f64>() / sw;
        if c > 0.0 {
            tau2 = ((q - (k as f64 - 1.0)) / c).max(0.0);
        }
    }
    let w: Vec<f64> = effects.iter().map(|(_, se)| 1.0 / (se * se + tau2)).collect();
    let sw: f64 = w.iter().sum();
    let pooled = effects.iter().zip(&w).map(|((t, _), wi)| t * wi).sum::<f64>() / sw;
    let se = sw.sqrt().recip();
    (pooled, pooled - Z_95 * se, pooled + Z_95 * se)
}

#[test]
fn iv_pooling_matches_naive_oracle() {
    let start = Instant::now();
    let mut rng = Lcg(0xBADC0DE);
    let mut checked = 0;
    for trial in 0..200 {
        let k = (rng.below(6) + 1) as usize;
        let random = trial % 2 == 0;
        let continuous = trial % 4 < 2;
        let effects: Vec<_> = (0..k)
            .map(|i| {
                if continuous {
                    let arms = ContinuousArms {
                        n_exp: rng.below(40) + 5,
                        mean_exp: rng.f64() * 40.0,
                        sd_exp: rng.f64() * 8.0 + 0.5,
                        n_ctrl: rng.below(40) + 5,
                        mean_ctrl: rng.f64() * 40.0,
                        sd_ctrl: rng.f64() * 8.0 + 0.5,
                    };
                    let measure = if trial % 8 < 4 {
                        EffectMeasure::MeanDifference
                    } else {
                        EffectMeasure::StdMeanDifference
                    };
                    study_effect_continuous(&format!("S{i}"), &arms, measure)
                } else {
                    study_effect_dichotomous(
                        &format!("S{i}"),
                        &random_arms(&mut rng),
                        EffectMeasure::OddsRatio,
                    )
                }
            })
            .collect();
        let pooled = pool_inverse_variance(
            &effects,
            if random { Model::Random } else { Model::Fixed },
            0.95,
        );
        let usable: Vec<(f64, f64)> = effects
            .iter()
            .filter(|e| e.estimable)
            .map(|e| (e.transformed_point, e.se))
            .collect();
        if usable.is_empty() {
            assert!(!pooled.estimable);
            continue;
        }
        let (want, want_lo, want_hi) = iv_oracle(&usable, random);
        let log_scale = !continuous;
        let (got, got_lo, got_hi) = if log_scale {
            (pooled.estimate.ln(), pooled.ci_low.ln(), pooled.ci_high.ln())
        } else {
            (pooled.estimate, pooled.ci_low, pooled.ci_high)
        };
        assert_rel_close(got, want, 1e-10, "IV estimate");
        assert_rel_close(got_lo, want_lo, 1e-10, "IV ci_low");
        assert_rel_close(got_hi, want_hi, 1e-10, "IV ci_high");
        checked += 1;
    }
    assert!(checked >= 100, "only {checked} estimable instances");
    assert!(start.elapsed().as_secs_f64() < 5.0);
}
