//! Per-study effect sizes and pooled outcome estimates.
//!
//! Dichotomous outcomes support RR, OR and RD with Mantel-Haenszel or
//! inverse-variance pooling; continuous outcomes support MD and SMD
//! (Hedges' g) with inverse-variance pooling. Random-effects models use
//! the DerSimonian-Laird between-study variance.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::evidence::{
    ArmData, ContinuousArms, DichotomousArms, EffectMeasure, Model, Outcome, Pooling,
};

/// Pinned z multiplier for the default 95% level.
pub const Z_95: f64 = 1.959964;

/// Tolerances for the equal/over/under classification.
#[derive(Debug, Clone, Copy)]
pub struct ToleranceConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rel_tol: 1e-5,
            abs_tol: 1e-6,
        }
    }
}

/// One study's effect size on its pooling scale.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyEffect {
    pub study_id: String,
    /// Natural-scale point estimate.
    pub point: f64,
    /// True for ratio measures pooled on the log scale.
    pub log_scale: bool,
    /// ln(point) when log_scale, otherwise point.
    pub transformed_point: f64,
    /// Standard error of the transformed point.
    pub se: f64,
    pub estimable: bool,
}

impl StudyEffect {
    fn not_estimable(study_id: &str, log_scale: bool) -> Self {
        StudyEffect {
            study_id: study_id.to_owned(),
            point: f64::NAN,
            log_scale,
            transformed_point: f64::NAN,
            se: f64::NAN,
            estimable: false,
        }
    }
}

/// A pooled outcome estimate with its CI, weights and heterogeneity stats.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledOutcome {
    /// Natural-scale pooled estimate.
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Fraction of total weight per contributing study; sums to 1.
    pub weights: BTreeMap<String, f64>,
    /// Number of distinct contributing studies.
    pub n_studies: usize,
    pub estimable: bool,
    /// Cochran's Q.
    pub q: f64,
    /// DerSimonian-Laird between-study variance (0 under fixed effect).
    pub tau2: f64,
    /// Higgins' I², in [0, 1].
    pub i2: f64,
}

impl PooledOutcome {
    pub fn not_estimable() -> Self {
        PooledOutcome {
            estimate: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            weights: BTreeMap::new(),
            n_studies: 0,
            estimable: false,
            q: 0.0,
            tau2: 0.0,
            i2: 0.0,
        }
    }
}

/// z multiplier for a two-sided interval at the given level.
/// The default 95% level uses the pinned constant.
pub fn z_for_level(ci_level: f64) -> f64 {
    if (ci_level - 0.95).abs() < 1e-12 {
        Z_95
    } else {
        normal_quantile(1.0 - (1.0 - ci_level) / 2.0)
    }
}

/// Inverse standard normal CDF (Acklam's rational approximation).
fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Corrected cell counts for a dichotomous row: 0.5 added to all four cells
/// when any single cell is zero (ratio measures only).
fn corrected_cells(arms: &DichotomousArms) -> (f64, f64, f64, f64) {
    let a = arms.events_exp as f64;
    let b = (arms.total_exp - arms.events_exp) as f64;
    let c = arms.events_ctrl as f64;
    let d = (arms.total_ctrl - arms.events_ctrl) as f64;
    if a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0 {
        (a + 0.5, b + 0.5, c + 0.5, d + 0.5)
    } else {
        (a, b, c, d)
    }
}

fn double_zero(arms: &DichotomousArms) -> bool {
    arms.events_exp == 0 && arms.events_ctrl == 0
}

pub fn study_effect_dichotomous(
    study_id: &str,
    arms: &DichotomousArms,
    measure: EffectMeasure,
) -> StudyEffect {
    let log_scale = measure.log_scale();
    if arms.total_exp == 0 || arms.total_ctrl == 0 {
        return StudyEffect::not_estimable(study_id, log_scale);
    }
    match measure {
        EffectMeasure::RiskRatio | EffectMeasure::OddsRatio => {
            if double_zero(arms) {
                return StudyEffect::not_estimable(study_id, log_scale);
            }
            let (a, b, c, d) = corrected_cells(arms);
            let (n1, n2) = (a + b, c + d);
            let (point, var) = if measure == EffectMeasure::RiskRatio {
                (
                    (a / n1) / (c / n2),
                    1.0 / a - 1.0 / n1 + 1.0 / c - 1.0 / n2,
                )
            } else {
                ((a * d) / (b * c), 1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d)
            };
            StudyEffect {
                study_id: study_id.to_owned(),
                point,
                log_scale: true,
                transformed_point: point.ln(),
                se: var.sqrt(),
                estimable: true,
            }
        }
        EffectMeasure::RiskDifference => {
            let a = arms.events_exp as f64;
            let b = (arms.total_exp - arms.events_exp) as f64;
            let c = arms.events_ctrl as f64;
            let d = (arms.total_ctrl - arms.events_ctrl) as f64;
            let n1 = arms.total_exp as f64;
            let n2 = arms.total_ctrl as f64;
            let point = a / n1 - c / n2;
            let var = a * b / n1.powi(3) + c * d / n2.powi(3);
            StudyEffect {
                study_id: study_id.to_owned(),
                point,
                log_scale: false,
                transformed_point: point,
                se: var.sqrt(),
                estimable: true,
            }
        }
        _ => StudyEffect::not_estimable(study_id, log_scale),
    }
}

pub fn study_effect_continuous(
    study_id: &str,
    arms: &ContinuousArms,
    measure: EffectMeasure,
) -> StudyEffect {
    if arms.n_exp == 0 || arms.n_ctrl == 0 {
        return StudyEffect::not_estimable(study_id, false);
    }
    let n1 = arms.n_exp as f64;
    let n2 = arms.n_ctrl as f64;
    let md = arms.mean_exp - arms.mean_ctrl;
    match measure {
        EffectMeasure::MeanDifference => {
            let se = (arms.sd_exp.powi(2) / n1 + arms.sd_ctrl.powi(2) / n2).sqrt();
            StudyEffect {
                study_id: study_id.to_owned(),
                point: md,
                log_scale: false,
                transformed_point: md,
                se,
                estimable: true,
            }
        }
        EffectMeasure::StdMeanDifference => {
            let n = n1 + n2;
            if n < 3.0 {
                return StudyEffect::not_estimable(study_id, false);
            }
            let pooled_sd = (((n1 - 1.0) * arms.sd_exp.powi(2)
                + (n2 - 1.0) * arms.sd_ctrl.powi(2))
                / (n - 2.0))
                .sqrt();
            if pooled_sd == 0.0 {
                if md != 0.0 {
                    return StudyEffect::not_estimable(study_id, false);
                }
                // zero difference with zero spread: g = 0 by continuity
                let se = (n / (n1 * n2)).sqrt();
                return StudyEffect {
                    study_id: study_id.to_owned(),
                    point: 0.0,
                    log_scale: false,
                    transformed_point: 0.0,
                    se,
                    estimable: true,
                };
            }
            let g = md / pooled_sd * (1.0 - 3.0 / (4.0 * n - 9.0));
            let se = (n / (n1 * n2) + g * g / (2.0 * (n - 3.94))).sqrt();
            StudyEffect {
                study_id: study_id.to_owned(),
                point: g,
                log_scale: false,
                transformed_point: g,
                se,
                estimable: true,
            }
        }
        _ => StudyEffect::not_estimable(study_id, false),
    }
}

/// Two-sided CI on the natural scale: point ± z·se on the transformed
/// scale, back-transformed by exp() when log_scale.
pub fn confidence_interval(
    transformed_point: f64,
    se: f64,
    ci_level: f64,
    log_scale: bool,
) -> (f64, f64) {
    let z = z_for_level(ci_level);
    let (low, high) = (transformed_point - z * se, transformed_point + z * se);
    if log_scale {
        (low.exp(), high.exp())
    } else {
        (low, high)
    }
}

/// Mantel-Haenszel fixed-effect pooling for dichotomous rows.
///
/// CI via the Greenland-Robins variance for RR/OR and the weighted
/// variance for RD. Heterogeneity (Q, I²) is computed with
/// inverse-variance study weights against the MH estimate.
pub fn pool_mantel_haenszel(
    rows: &[(String, DichotomousArms)],
    measure: EffectMeasure,
    ci_level: f64,
) -> PooledOutcome {
    assert!(measure.is_dichotomous(), "MH pooling needs RR, OR or RD");
    let usable: Vec<&(String, DichotomousArms)> = rows
        .iter()
        .filter(|(_, arms)| arms.total_exp > 0 && arms.total_ctrl > 0)
        .filter(|(_, arms)| !(measure.log_scale() && double_zero(arms)))
        .collect();
    if usable.is_empty() {
        return PooledOutcome::not_estimable();
    }

    let mut num = 0.0;
    let mut den = 0.0;
    let mut raw_weights: Vec<f64> = Vec::with_capacity(usable.len());
    // Greenland-Robins accumulators
    let (mut sum_p, mut sum_r, mut sum_s) = (0.0, 0.0, 0.0);
    let (mut sum_pr, mut sum_ps_qr, mut sum_qs) = (0.0, 0.0, 0.0);
    let mut sum_w2v = 0.0;

    for (_, arms) in &usable {
        match measure {
            EffectMeasure::RiskRatio => {
                let (a, b, c, d) = corrected_cells(arms);
                let (n1, n2) = (a + b, c + d);
                let big_n = n1 + n2;
                num += a * n2 / big_n;
                den += c * n1 / big_n;
                raw_weights.push(c * n1 / big_n);
                sum_p += (n1 * n2 * (a + c) - a * c * big_n) / (big_n * big_n);
                sum_r += a * n2 / big_n;
                sum_s += c * n1 / big_n;
            }
            EffectMeasure::OddsRatio => {
                let (a, b, c, d) = corrected_cells(arms);
                let big_n = a + b + c + d;
                let r = a * d / big_n;
                let s = b * c / big_n;
                let p = (a + d) / big_n;
                let q = (b + c) / big_n;
                num += r;
                den += s;
                raw_weights.push(s);
                sum_r += r;
                sum_s += s;
                sum_pr += p * r;
                sum_ps_qr += p * s + q * r;
                sum_qs += q * s;
            }
            EffectMeasure::RiskDifference => {
                let a = arms.events_exp as f64;
                let c = arms.events_ctrl as f64;
                let n1 = arms.total_exp as f64;
                let n2 = arms.total_ctrl as f64;
                let b = n1 - a;
                let d = n2 - c;
                let big_n = n1 + n2;
                let w = n1 * n2 / big_n;
                let rd = a / n1 - c / n2;
                num += w * rd;
                den += w;
                raw_weights.push(w);
                let v = a * b / n1.powi(3) + c * d / n2.powi(3);
                sum_w2v += w * w * v;
            }
            _ => unreachable!(),
        }
    }

    if den == 0.0 || (measure.log_scale() && num <= 0.0) {
        return PooledOutcome::not_estimable();
    }
    let estimate = num / den;
    let log_scale = measure.log_scale();
    let transformed = if log_scale { estimate.ln() } else { estimate };
    let var = match measure {
        EffectMeasure::RiskRatio => sum_p / (sum_r * sum_s),
        EffectMeasure::OddsRatio => {
            sum_pr / (2.0 * sum_r * sum_r)
                + sum_ps_qr / (2.0 * sum_r * sum_s)
                + sum_qs / (2.0 * sum_s * sum_s)
        }
        EffectMeasure::RiskDifference => sum_w2v / (den * den),
        _ => unreachable!(),
    };
    let se = var.max(0.0).sqrt();
    let (ci_low, ci_high) = confidence_interval(transformed, se, ci_level, log_scale);

    let weight_total: f64 = raw_weights.iter().sum();
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    for ((study_id, _), w) in usable.iter().zip(&raw_weights) {
        *weights.entry(study_id.clone()).or_insert(0.0) += w / weight_total;
    }

    // heterogeneity against the MH estimate, IV study weights
    let effects: Vec<StudyEffect> = usable
        .iter()
        .map(|(id, arms)| study_effect_dichotomous(id, arms, measure))
        .filter(|e| e.estimable && e.se > 0.0)
        .collect();
    let q: f64 = effects
        .iter()
        .map(|e| (e.transformed_point - transformed).powi(2) / (e.se * e.se))
        .sum();
    let df = effects.len().saturating_sub(1) as f64;
    let i2 = if q > 0.0 && effects.len() > 1 {
        ((q - df) / q).max(0.0)
    } else {
        0.0
    };

    let n_studies = usable
        .iter()
        .map(|(id, _)| id.as_str())
        .collect::<BTreeSet<_>>()
        .len();
    PooledOutcome {
        estimate,
        ci_low,
        ci_high,
        weights,
        n_studies,
        estimable: true,
        q,
        tau2: 0.0,
        i2,
    }
}

/// Inverse-variance pooling; DerSimonian-Laird τ² under the random model.
pub fn pool_inverse_variance(
    effects: &[StudyEffect],
    model: Model,
    ci_level: f64,
) -> PooledOutcome {
    let usable: Vec<&StudyEffect> = effects.iter().filter(|e| e.estimable).collect();
    if usable.is_empty() {
        return PooledOutcome::not_estimable();
    }
    let log_scale = usable[0].log_scale;

    // degenerate zero-SE effects carry infinite weight
    let zero_se: Vec<&&StudyEffect> = usable.iter().filter(|e| e.se == 0.0).collect();
    if !zero_se.is_empty() {
        let transformed =
            zero_se.iter().map(|e| e.transformed_point).sum::<f64>() / zero_se.len() as f64;
        let estimate = if log_scale { transformed.exp() } else { transformed };
        let share = 1.0 / zero_se.len() as f64;
        let mut weights = BTreeMap::new();
        for e in &zero_se {
            *weights.entry(e.study_id.clone()).or_insert(0.0) += share;
        }
        let n_studies = zero_se
            .iter()
            .map(|e| e.study_id.as_str())
            .collect::<BTreeSet<_>>()
            .len();
        return PooledOutcome {
            estimate,
            ci_low: estimate,
            ci_high: estimate,
            weights,
            n_studies,
            estimable: true,
            q: 0.0,
            tau2: 0.0,
            i2: 0.0,
        };
    }

    let k = usable.len() as f64;
    let fixed_w: Vec<f64> = usable.iter().map(|e| 1.0 / (e.se * e.se)).collect();
    let sum_w: f64 = fixed_w.iter().sum();
    let fixed_pooled = usable
        .iter()
        .zip(&fixed_w)
        .map(|(e, w)| w * e.transformed_point)
        .sum::<f64>()
        / sum_w;
    // Q is identically zero for a single study; skip the float residue
    let q: f64 = if usable.len() > 1 {
        usable
            .iter()
            .zip(&fixed_w)
            .map(|(e, w)| w * (e.transformed_point - fixed_pooled).powi(2))
            .sum()
    } else {
        0.0
    };
    let df = k - 1.0;
    let i2 = if q > 0.0 && k > 1.0 {
        ((q - df) / q).max(0.0)
    } else {
        0.0
    };

    let (tau2, weights_vec): (f64, Vec<f64>) = match model {
        Model::Fixed => (0.0, fixed_w.clone()),
        Model::Random => {
            let sum_w2: f64 = fixed_w.iter().map(|w| w * w).sum();
            let denom = sum_w - sum_w2 / sum_w;
            let tau2 = if k > 1.0 && denom > 0.0 {
                ((q - df) / denom).max(0.0)
            } else {
                0.0
            };
            let w_star = usable.iter().map(|e| 1.0 / (e.se * e.se + tau2)).collect();
            (tau2, w_star)
        }
    };

    let total_w: f64 = weights_vec.iter().sum();
    let pooled = usable
        .iter()
        .zip(&weights_vec)
        .map(|(e, w)| w * e.transformed_point)
        .sum::<f64>()
        / total_w;
    let se = (1.0 / total_w).sqrt();
    let estimate = if log_scale { pooled.exp() } else { pooled };
    let (ci_low, ci_high) = confidence_interval(pooled, se, ci_level, log_scale);

    let mut weights = BTreeMap::new();
    for (e, w) in usable.iter().zip(&weights_vec) {
        *weights.entry(e.study_id.clone()).or_insert(0.0) += w / total_w;
    }
    let n_studies = usable
        .iter()
        .map(|e| e.study_id.as_str())
        .collect::<BTreeSet<_>>()
        .len();
    PooledOutcome {
        estimate,
        ci_low,
        ci_high,
        weights,
        n_studies,
        estimable: true,
        q,
        tau2,
        i2,
    }
}

/// Pools an outcome over the given study set.
///
/// Rows of studies outside the set are dropped; all subgroups merge into
/// one analysis. MH is used for fixed-effect dichotomous outcomes that
/// declare it; a random-effects declaration falls back to DerSimonian-Laird
/// over the study effects, as RevMan does.
pub fn pool_outcome(outcome: &Outcome, included_studies: &BTreeSet<&str>) -> PooledOutcome {
    let rows: Vec<_> = outcome
        .rows()
        .filter(|r| included_studies.contains(r.study_id.as_str()))
        .collect();
    if rows.is_empty() {
        return PooledOutcome::not_estimable();
    }
    let measure = outcome.effect_measure;
    let use_mh = outcome.pooling == Pooling::MantelHaenszel && outcome.model == Model::Fixed;
    if use_mh {
        let dich: Vec<(String, DichotomousArms)> = rows
            .iter()
            .filter_map(|r| match r.data {
                ArmData::Dichotomous(arms) => Some((r.study_id.clone(), arms)),
                ArmData::Continuous(_) => None,
            })
            .collect();
        return pool_mantel_haenszel(&dich, measure, outcome.ci_level);
    }
    let effects: Vec<StudyEffect> = rows
        .iter()
        .map(|r| match &r.data {
            ArmData::Dichotomous(arms) => study_effect_dichotomous(&r.study_id, arms, measure),
            ArmData::Continuous(arms) => study_effect_continuous(&r.study_id, arms, measure),
        })
        .collect();
    pool_inverse_variance(&effects, outcome.model, outcome.ci_level)
}
