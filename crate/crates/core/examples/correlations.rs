//! Correlation coefficients between distortion level and score, including
//! the undefined cases the evaluator reports instead of guessing.
//!
//! ```text
//! cargo run --release --example correlations
//! ```

use biqa::metrics::{kendall, pearson, spearman, SeriesPair};

fn show(name: &str, levels: &[f64], scores: &[f64]) {
    let pair = SeriesPair::new(levels.to_vec(), scores.to_vec()).expect("equal lengths");
    let fmt = |r: Result<f64, biqa::metrics::Undefined>| match r {
        Ok(v) => format!("{v:+.4}"),
        Err(e) => e.to_string(),
    };
    println!("{name}");
    println!("  pearson  {}", fmt(pearson(&pair)));
    println!("  kendall  {}", fmt(kendall(&pair)));
    println!("  spearman {}", fmt(spearman(&pair)));
}

fn main() {
    let levels = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
    show("monotone, convex scores", &levels, &[0.10, 0.11, 0.13, 0.17, 0.25, 0.41]);
    show("one swapped pair", &levels, &[0.10, 0.13, 0.11, 0.17, 0.25, 0.41]);
    show("decreasing scores", &levels, &[0.13, 0.13, 0.12, 0.12, 0.11, 0.10]);
    show("constant scores", &levels, &[0.2; 6]);
}
