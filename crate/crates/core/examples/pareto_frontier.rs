//! Pareto frontier over (non-estimable outcomes, summed relative
//! difference), with the gold reference at (0, 0).

use outcome_eval::experiments::pareto_frontier;
use outcome_eval::report::render_pareto_svg;

fn main() {
    let points = vec![
        ("gold".to_owned(), 0, 0.0),
        ("run-a".to_owned(), 1, 4.2),
        ("run-b".to_owned(), 2, 2.1),
        ("run-c".to_owned(), 2, 6.0),
        ("run-d".to_owned(), 5, 1.9),
        ("run-e".to_owned(), 9, 0.4),
    ];
    let flagged = pareto_frontier(&points);
    for p in &flagged {
        println!(
            "{:<6} x={} y_raw={:.2} y={:.3} {}",
            p.run_tag,
            p.x,
            p.y_raw,
            p.y,
            if p.dominated { "dominated" } else { "frontier" }
        );
    }

    let svg = render_pareto_svg(&flagged);
    let out = std::env::temp_dir().join("pareto-example.svg");
    std::fs::write(&out, svg).expect("temp dir is writable");
    println!("scatter written to {}", out.display());
}
