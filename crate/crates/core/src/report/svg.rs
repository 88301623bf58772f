//! Deterministic SVG emitters: forest plots per outcome, MoD box plots per
//! run, and the Pareto scatter. Text output only, byte-stable for fixed
//! input.

use crate::experiments::ParetoPoint;
use crate::meta::PooledOutcome;

/// One study line of a forest plot.
#[derive(Debug, Clone)]
pub struct ForestRow {
    pub study_id: String,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Weight fraction, if the study contributes to the pool.
    pub weight: Option<f64>,
    pub estimable: bool,
}

const WIDTH: f64 = 760.0;
const PLOT_X0: f64 = 260.0;
const PLOT_X1: f64 = 560.0;
const ROW_H: f64 = 24.0;

fn f(v: f64) -> String {
    format!("{v:.2}")
}

/// Forest plot: one row per study with point marker and CI whiskers, a
/// weight and effect column, and a diamond for the pooled total. A
/// non-estimable pool renders a "Not estimable" total line.
pub fn render_forest_svg(title: &str, rows: &[ForestRow], pooled: &PooledOutcome) -> Vec<u8> {
    let height = 70.0 + (rows.len() as f64 + 2.0) * ROW_H;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{}\" font-family=\"monospace\" font-size=\"12\">\n",
        f(height)
    ));
    svg.push_str(&format!(
        "<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>\n",
        escape(title)
    ));
    svg.push_str("<text x=\"580\" y=\"44\">Weight</text>\n<text x=\"650\" y=\"44\">Effect [CI]</text>\n");

    // plot range over finite values, padded
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut consider = |v: f64| {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    };
    for r in rows.iter().filter(|r| r.estimable) {
        consider(r.ci_low);
        consider(r.ci_high);
    }
    if pooled.estimable {
        consider(pooled.ci_low);
        consider(pooled.ci_high);
    }
    if !lo.is_finite() || lo == hi {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = (hi - lo) * 0.05;
    let (lo, hi) = (lo - pad, hi + pad);
    let x_of = |v: f64| PLOT_X0 + (v - lo) / (hi - lo) * (PLOT_X1 - PLOT_X0);

    let mut y = 60.0;
    for r in rows {
        let mid = y + ROW_H / 2.0;
        svg.push_str(&format!(
            "<text x=\"10\" y=\"{}\">{}</text>\n",
            f(mid + 4.0),
            escape(&r.study_id)
        ));
        if r.estimable {
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
                f(x_of(r.ci_low)),
                f(mid),
                f(x_of(r.ci_high)),
                f(mid)
            ));
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"7\" height=\"7\" fill=\"black\"/>\n",
                f(x_of(r.point) - 3.5),
                f(mid - 3.5)
            ));
            svg.push_str(&format!(
                "<text x=\"580\" y=\"{}\">{}</text>\n",
                f(mid + 4.0),
                r.weight
                    .map(|w| format!("{:.1}%", w * 100.0))
                    .unwrap_or_else(|| "-".into())
            ));
            svg.push_str(&format!(
                "<text x=\"650\" y=\"{}\">{:.2} [{:.2}, {:.2}]</text>\n",
                f(mid + 4.0),
                r.point,
                r.ci_low,
                r.ci_high
            ));
        } else {
            svg.push_str(&format!(
                "<text x=\"580\" y=\"{}\">Not estimable</text>\n",
                f(mid + 4.0)
            ));
        }
        y += ROW_H;
    }

    let mid = y + ROW_H / 2.0;
    svg.push_str(&format!(
        "<text x=\"10\" y=\"{}\" font-weight=\"bold\">Total</text>\n",
        f(mid + 4.0)
    ));
    if pooled.estimable {
        let (cx, lx, rx) = (
            x_of(pooled.estimate),
            x_of(pooled.ci_low),
            x_of(pooled.ci_high),
        );
        svg.push_str(&format!(
            "<polygon points=\"{},{} {},{} {},{} {},{}\" fill=\"black\"/>\n",
            f(lx),
            f(mid),
            f(cx),
            f(mid - 6.0),
            f(rx),
            f(mid),
            f(cx),
            f(mid + 6.0)
        ));
        svg.push_str(&format!(
            "<text x=\"650\" y=\"{}\" font-weight=\"bold\">{:.2} [{:.2}, {:.2}]</text>\n",
            f(mid + 4.0),
            pooled.estimate,
            pooled.ci_low,
            pooled.ci_high
        ));
    } else {
        svg.push_str(&format!(
            "<text x=\"580\" y=\"{}\" font-weight=\"bold\">Not estimable</text>\n",
            f(mid + 4.0)
        ));
    }
    svg.push_str("</svg>\n");
    svg.into_bytes()
}

/// One run's MoD distribution for the box plot.
#[derive(Debug, Clone)]
pub struct BoxPlotSeries {
    pub run_tag: String,
    pub values: Vec<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let idx = pos.floor() as usize;
    let frac = pos - idx as f64;
    if idx + 1 < sorted.len() {
        sorted[idx] * (1.0 - frac) + sorted[idx + 1] * frac
    } else {
        sorted[idx]
    }
}

/// Horizontal box plots of MoD per run, one row per run, with the mean
/// marked as a circle. An optional axis clamp caps the x range.
pub fn render_box_svg(title: &str, series: &[BoxPlotSeries], axis_clamp: Option<f64>) -> Vec<u8> {
    let height = 70.0 + series.len() as f64 * ROW_H;
    let max_value = series
        .iter()
        .flat_map(|s| s.values.iter())
        .fold(0.0f64, |m, &v| m.max(v));
    let hi = axis_clamp.unwrap_or(max_value).max(1e-9);
    let x_of = |v: f64| PLOT_X0 + (v.min(hi) / hi) * (PLOT_X1 - PLOT_X0);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{}\" font-family=\"monospace\" font-size=\"12\">\n",
        f(height)
    ));
    svg.push_str(&format!(
        "<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>\n",
        escape(title)
    ));
    let mut y = 40.0;
    for s in series {
        let mid = y + ROW_H / 2.0;
        let mut sorted = s.values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let (q1, q2, q3) = (
            quantile(&sorted, 0.25),
            quantile(&sorted, 0.5),
            quantile(&sorted, 0.75),
        );
        let lo_whisker = sorted.first().copied().unwrap_or(f64::NAN);
        let hi_whisker = sorted.last().copied().unwrap_or(f64::NAN);
        let mean = sorted.iter().sum::<f64>() / sorted.len().max(1) as f64;
        svg.push_str(&format!(
            "<text x=\"10\" y=\"{}\">{}</text>\n",
            f(mid + 4.0),
            escape(&s.run_tag)
        ));
        if !sorted.is_empty() {
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
                f(x_of(lo_whisker)),
                f(mid),
                f(x_of(hi_whisker)),
                f(mid)
            ));
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"12\" fill=\"white\" stroke=\"black\"/>\n",
                f(x_of(q1)),
                f(mid - 6.0),
                f((x_of(q3) - x_of(q1)).max(0.5))
            ));
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
                f(x_of(q2)),
                f(mid - 6.0),
                f(x_of(q2)),
                f(mid + 6.0)
            ));
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"orange\"/>\n",
                f(x_of(mean)),
                f(mid)
            ));
        }
        y += ROW_H;
    }
    svg.push_str("</svg>\n");
    svg.into_bytes()
}

/// Scatter of Pareto points; frontier (non-dominated) points are filled,
/// dominated points hollow.
pub fn render_pareto_svg(points: &[ParetoPoint]) -> Vec<u8> {
    let x_max = points.iter().map(|p| p.x).max().unwrap_or(1).max(1) as f64;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"420\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str("<text x=\"10\" y=\"20\" font-size=\"14\">Pareto frontier: non-estimable outcomes vs summed relative difference</text>\n");
    let (x0, x1, y0, y1) = (80.0, 700.0, 360.0, 50.0);
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    svg.push_str("<text x=\"300\" y=\"400\">non-estimable outcomes</text>\n<text x=\"14\" y=\"40\">sum MoD (normalized)</text>\n");
    for p in points {
        let px = x0 + p.x as f64 / x_max * (x1 - x0);
        let py = y0 - p.y.clamp(0.0, 1.0) * (y0 - y1);
        let fill = if p.dominated { "white" } else { "steelblue" };
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{}\" stroke=\"black\"/>\n",
            f(px),
            f(py),
            fill
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            f(px + 8.0),
            f(py + 4.0),
            escape(&p.run_tag)
        ));
    }
    svg.push_str("</svg>\n");
    svg.into_bytes()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta::PooledOutcome;
    use std::collections::BTreeMap;

    fn rows(n: usize) -> Vec<ForestRow> {
        (0..n)
            .map(|i| ForestRow {
                study_id: format!("S{i}"),
                point: 1.0 + i as f64 * 0.1,
                ci_low: 0.8,
                ci_high: 2.0,
                weight: Some(1.0 / n as f64),
                estimable: true,
            })
            .collect()
    }

    fn pooled() -> PooledOutcome {
        PooledOutcome {
            estimate: 1.2,
            ci_low: 0.9,
            ci_high: 1.6,
            weights: BTreeMap::new(),
            n_studies: 5,
            estimable: true,
            q: 0.0,
            tau2: 0.0,
            i2: 0.0,
        }
    }

    #[test]
    fn forest_has_one_row_per_study_plus_total() {
        let svg = String::from_utf8(render_forest_svg("t", &rows(5), &pooled())).unwrap();
        assert_eq!(svg.matches("<rect").count(), 5);
        assert!(svg.contains("Total"));
    }

    #[test]
    fn empty_pool_says_not_estimable() {
        let svg =
            String::from_utf8(render_forest_svg("t", &[], &PooledOutcome::not_estimable()))
                .unwrap();
        assert!(svg.contains("Not estimable"));
    }

    #[test]
    fn forest_output_is_deterministic() {
        let a = render_forest_svg("t", &rows(3), &pooled());
        let b = render_forest_svg("t", &rows(3), &pooled());
        assert_eq!(a, b);
    }

    #[test]
    fn pareto_marks_dominated_hollow() {
        let points = vec![
            ParetoPoint {
                run_tag: "A".into(),
                x: 1,
                y_raw: 1.0,
                y: 0.0,
                dominated: false,
            },
            ParetoPoint {
                run_tag: "B".into(),
                x: 2,
                y_raw: 2.0,
                y: 1.0,
                dominated: true,
            },
        ];
        let svg = String::from_utf8(render_pareto_svg(&points)).unwrap();
        assert!(svg.contains("fill=\"white\""));
        assert!(svg.contains("fill=\"steelblue\""));
    }
}
