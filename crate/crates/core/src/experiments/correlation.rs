//! Paired-measure correlation columns for external plotting, with Pearson
//! and Spearman coefficients per measure pair.

/// One (measure value, mean MoD) column pair across runs.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MeasureColumn {
    pub measure: String,
    pub run_tags: Vec<String>,
    pub measure_values: Vec<f64>,
    pub mod_values: Vec<f64>,
    pub pearson: f64,
    pub spearman: f64,
    /// Least-squares fit of mod on the measure.
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CorrelationReport {
    /// MoD cutoff the correlations are taken against, in percent.
    pub cutoff: u32,
    pub columns: Vec<MeasureColumn>,
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return f64::NAN;
    }
    cov / (vx.sqrt() * vy.sqrt())
}

/// Spearman rank correlation; ties receive average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&average_ranks(xs), &average_ranks(ys))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Least-squares (slope, intercept) of y on x.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if vx == 0.0 {
        return (0.0, my);
    }
    let slope = cov / vx;
    (slope, my - slope * mx)
}

impl MeasureColumn {
    pub fn new(
        measure: impl Into<String>,
        run_tags: Vec<String>,
        measure_values: Vec<f64>,
        mod_values: Vec<f64>,
    ) -> Self {
        let (slope, intercept) = least_squares(&measure_values, &mod_values);
        MeasureColumn {
            measure: measure.into(),
            pearson: pearson(&measure_values, &mod_values),
            spearman: spearman(&measure_values, &mod_values),
            slope,
            intercept,
            run_tags,
            measure_values,
            mod_values,
        }
    }
}
