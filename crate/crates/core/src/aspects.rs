//! The five analysis aspects comparing a predicted pooled outcome against
//! the original, plus outcome-level aggregation.

use crate::evidence::EffectMeasure;
use crate::meta::{PooledOutcome, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateClass {
    Equal,
    Overestimated,
    Underestimated,
    NotEstimable,
}

impl EstimateClass {
    pub fn label(self) -> &'static str {
        match self {
            EstimateClass::Equal => "equal",
            EstimateClass::Overestimated => "overestimated",
            EstimateClass::Underestimated => "underestimated",
            EstimateClass::NotEstimable => "not_estimable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMatch {
    Same,
    Different,
    NotEstimable,
}

impl SignMatch {
    pub fn label(self) -> &'static str {
        match self {
            SignMatch::Same => "same",
            SignMatch::Different => "different",
            SignMatch::NotEstimable => "not_estimable",
        }
    }
}

/// The five aspects for one (original, predicted) outcome pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectReport {
    /// Relative magnitude of difference; 1.0 when the prediction is not
    /// estimable.
    pub mod_value: f64,
    /// Distance from the original CI; None when not estimable.
    pub delta_ci: Option<f64>,
    pub estimate_class: EstimateClass,
    pub sign_match: SignMatch,
    pub estimable: bool,
}

/// MoD = |O_o − O_p| / |O_o|, with the zero conventions: 0/0 pairs score 0,
/// a zero original with nonzero prediction scores 1.
pub fn magnitude_of_difference(original: f64, predicted: Option<f64>) -> f64 {
    let Some(predicted) = predicted else {
        return 1.0;
    };
    if original == 0.0 {
        if predicted == 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        (original - predicted).abs() / original.abs()
    }
}

/// Distance from the predicted point to the nearest CI bound, 0 inside.
pub fn distance_from_ci(predicted: f64, ci_low: f64, ci_high: f64) -> f64 {
    debug_assert!(ci_low <= ci_high);
    if predicted < ci_low {
        ci_low - predicted
    } else if predicted > ci_high {
        predicted - ci_high
    } else {
        0.0
    }
}

/// Equal within max(rel_tol·|O_o|, abs_tol), otherwise over/under.
pub fn classify_estimate(original: f64, predicted: f64, tol: &ToleranceConfig) -> EstimateClass {
    let threshold = (tol.rel_tol * original.abs()).max(tol.abs_tol);
    let diff = predicted - original;
    if diff.abs() <= threshold {
        EstimateClass::Equal
    } else if diff > 0.0 {
        EstimateClass::Overestimated
    } else {
        EstimateClass::Underestimated
    }
}

/// Sign agreement relative to the measure's null value. A value exactly at
/// the null matches either side.
pub fn sign_agreement(original: f64, predicted: f64, measure: EffectMeasure) -> SignMatch {
    let null = measure.null_value();
    let sign = |x: f64| -> i8 {
        if x > null {
            1
        } else if x < null {
            -1
        } else {
            0
        }
    };
    let (a, b) = (sign(original), sign(predicted));
    if a == 0 || b == 0 || a == b {
        SignMatch::Same
    } else {
        SignMatch::Different
    }
}

/// Assembles all five aspects for one outcome pair. The original must be
/// estimable; non-estimable originals are excluded upstream.
pub fn aspect_report(
    original: &PooledOutcome,
    predicted: &PooledOutcome,
    measure: EffectMeasure,
    tol: &ToleranceConfig,
) -> AspectReport {
    assert!(original.estimable, "original outcome must be estimable");
    if !predicted.estimable {
        return AspectReport {
            mod_value: 1.0,
            delta_ci: None,
            estimate_class: EstimateClass::NotEstimable,
            sign_match: SignMatch::NotEstimable,
            estimable: false,
        };
    }
    AspectReport {
        mod_value: magnitude_of_difference(original.estimate, Some(predicted.estimate)),
        delta_ci: Some(distance_from_ci(
            predicted.estimate,
            original.ci_low,
            original.ci_high,
        )),
        estimate_class: classify_estimate(original.estimate, predicted.estimate, tol),
        sign_match: sign_agreement(original.estimate, predicted.estimate, measure),
        estimable: true,
    }
}

/// Outcome-level aggregation of aspect reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct AggregateTable {
    /// Mean MoD over all reports; non-estimable predictions contribute 1.0.
    pub mean_mod: f64,
    /// Mean Δ_CI over estimable reports only.
    pub mean_delta_ci: f64,
    pub n_equal: usize,
    pub n_over: usize,
    pub n_under: usize,
    pub n_same_sign: usize,
    pub n_diff_sign: usize,
    /// Estimable (reported) outcomes.
    pub n_reported: usize,
    /// Non-estimable outcomes.
    pub n_missing: usize,
    pub n_total: usize,
}

pub fn aggregate(reports: &[AspectReport]) -> AggregateTable {
    let mut table = AggregateTable {
        n_total: reports.len(),
        ..AggregateTable::default()
    };
    let mut mod_sum = 0.0;
    let mut delta_sum = 0.0;
    for report in reports {
        mod_sum += report.mod_value;
        if report.estimable {
            table.n_reported += 1;
            delta_sum += report.delta_ci.unwrap_or(0.0);
        } else {
            table.n_missing += 1;
        }
        match report.estimate_class {
            EstimateClass::Equal => table.n_equal += 1,
            EstimateClass::Overestimated => table.n_over += 1,
            EstimateClass::Underestimated => table.n_under += 1,
            EstimateClass::NotEstimable => {}
        }
        match report.sign_match {
            SignMatch::Same => table.n_same_sign += 1,
            SignMatch::Different => table.n_diff_sign += 1,
            SignMatch::NotEstimable => {}
        }
    }
    if table.n_total > 0 {
        table.mean_mod = mod_sum / table.n_total as f64;
    }
    if table.n_reported > 0 {
        table.mean_delta_ci = delta_sum / table.n_reported as f64;
    }
    table
}
