//! Weighted multi-criteria scoring, ranking, and the arithmetic audit.
//!
//! Two bundled matrices: a baseline instance with one metric per objective
//! (both weighting conventions coincide there) and the recorded session's
//! matrix, whose model-reported totals drift from the exact arithmetic; the
//! audit surfaces the drift instead of hiding it.
//!
//! Run with: `cargo run --example score_report`

use std::path::Path;

use synthpart::extract::read_matrix_file;
use synthpart::mcda::{Convention, ScoreReport};

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/matrices");

    let baseline = read_matrix_file(&data.join("baseline_matrix.json")).unwrap();
    let report = ScoreReport::compute(&baseline, Convention::Replicate, 0.05).unwrap();
    println!("=== Baseline instance (replicate convention) ===");
    print!("{}", report.render_table(&baseline));

    let session = read_matrix_file(&data.join("session_matrix.json")).unwrap();
    for convention in [Convention::Replicate, Convention::Split] {
        let report = ScoreReport::compute(&session, convention, 0.05).unwrap();
        println!("\n=== Recorded session ({convention:?} convention, audit tolerance 0.05) ===");
        print!("{}", report.render_table(&session));
    }

    // a tighter tolerance flags every reported total
    let strict = ScoreReport::compute(&session, Convention::Split, 0.01).unwrap();
    let flagged = strict
        .audit
        .iter()
        .filter(|entry| entry.consistent == Some(false))
        .count();
    println!(
        "\nAt tolerance 0.01, {flagged}/3 reported totals are inconsistent with both conventions."
    );
    println!(
        "The induced ranking still agrees with the recorded recommendation: {:?}",
        strict.ranking
    );
}
