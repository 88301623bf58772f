//! Pareto frontier over (non-estimable count, summed relative difference).

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ParetoPoint {
    pub run_tag: String,
    /// Count of non-estimable outcomes.
    pub x: usize,
    /// Raw summed MoD over estimable outcomes.
    pub y_raw: f64,
    /// Min-max normalized y over the evaluated set (gold included by the
    /// caller); 0 when all raw values coincide.
    pub y: f64,
    pub dominated: bool,
}

/// Flags dominated points and normalizes y. A point is dominated iff some
/// other point is no worse on both axes and strictly better on one; exact
/// duplicates do not dominate each other. Output is sorted by (x, y, tag).
pub fn pareto_frontier(points: &[(String, usize, f64)]) -> Vec<ParetoPoint> {
    if points.is_empty() {
        return Vec::new();
    }
    let y_min = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let y_max = points.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    let span = y_max - y_min;
    let normalize = |y_raw: f64| if span == 0.0 { 0.0 } else { (y_raw - y_min) / span };

    let mut out: Vec<ParetoPoint> = points
        .iter()
        .map(|(tag, x, y_raw)| {
            let dominated = points.iter().any(|(_, ox, oy_raw)| {
                ox <= x && *oy_raw <= *y_raw && (*ox < *x || *oy_raw < *y_raw)
            });
            ParetoPoint {
                run_tag: tag.clone(),
                x: *x,
                y_raw: *y_raw,
                y: normalize(*y_raw),
                dominated,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.x.cmp(&b.x)
            .then(a.y.partial_cmp(&b.y).unwrap_or(std::cmp::Ordering::Equal))
            .then_with(|| a.run_tag.cmp(&b.run_tag))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(points: &[ParetoPoint], dominated: bool) -> Vec<&str> {
        points
            .iter()
            .filter(|p| p.dominated == dominated)
            .map(|p| p.run_tag.as_str())
            .collect()
    }

    #[test]
    fn frontier_basic() {
        let points = vec![
            ("A".to_owned(), 1usize, 1.0),
            ("B".to_owned(), 2, 2.0),
            ("C".to_owned(), 0, 3.0),
        ];
        let out = pareto_frontier(&points);
        assert_eq!(tags(&out, false), vec!["C", "A"]);
        assert_eq!(tags(&out, true), vec!["B"]);
    }

    #[test]
    fn single_point_is_frontier() {
        let out = pareto_frontier(&[("A".to_owned(), 3, 5.0)]);
        assert!(!out[0].dominated);
        assert_eq!(out[0].y, 0.0);
    }

    #[test]
    fn duplicates_do_not_dominate_each_other() {
        let points = vec![("A".to_owned(), 1usize, 1.0), ("B".to_owned(), 1, 1.0)];
        let out = pareto_frontier(&points);
        assert!(out.iter().all(|p| !p.dominated));
    }

    #[test]
    fn normalization_is_min_max() {
        let points = vec![
            ("gold".to_owned(), 0usize, 0.0),
            ("mid".to_owned(), 1, 5.0),
            ("bad".to_owned(), 2, 10.0),
        ];
        let out = pareto_frontier(&points);
        let by_tag = |t: &str| out.iter().find(|p| p.run_tag == t).unwrap();
        assert_eq!(by_tag("gold").y, 0.0);
        assert_eq!(by_tag("mid").y, 0.5);
        assert_eq!(by_tag("bad").y, 1.0);
    }

    #[test]
    fn empty_input_empty_output() {
        assert!(pareto_frontier(&[]).is_empty());
    }
}
