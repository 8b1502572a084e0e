//! Replay the bundled Montreal planning session from its cassette.
//!
//! The cassette stores every prompt/response exchange of one full workflow
//! run. Replaying is offline, deterministic, and fast; the pipeline re-parses
//! the recorded prose through the lenient extractor.
//!
//! Run with: `cargo run --example replay_session`

use std::path::Path;

use synthpart::backend::ReplayBackend;
use synthpart::pipeline::{Pipeline, PipelineSettings};
use synthpart::prompt::ScenarioParams;

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let backend = ReplayBackend::from_path(&data.join("montreal_cassette.json"))
        .expect("bundled cassette loads");

    // the recorded session used the plain prompts, without the fenced-JSON
    // output contract
    let settings = PipelineSettings {
        structured_output: false,
        ..PipelineSettings::default()
    };

    let pipeline = Pipeline::new(&backend).with_settings(settings);
    let record = pipeline.run_full_scenario(&ScenarioParams::default(), 0);
    assert!(!record.dropped, "replay should never drop");

    println!("=== Synthetic team ===");
    for avatar in &record.avatars {
        println!("  {:<40} {}", avatar.raw_role, avatar.name);
    }

    let outcome = record.outcome.as_ref().unwrap();
    println!("\n=== Issues ===");
    for issue in &outcome.issues {
        println!("  - {issue}");
    }
    println!("\n=== Objectives and decision weights ===");
    for objective in &outcome.objectives {
        println!("  {:<40} {:.2}", objective.name, objective.weight);
    }
    println!(
        "\n=== Alternatives (plan totals vs budget {}) ===",
        record.params.budget_m_cad
    );
    for alternative in &outcome.alternatives {
        println!(
            "  {:<45} {:>6.1} M CAD over {} phases",
            alternative.name,
            alternative.plan_total(),
            alternative.plan.len()
        );
    }

    let matrix = record.evaluation.as_ref().unwrap();
    println!(
        "\n=== Evaluation: {} alternatives x {} metrics ===",
        matrix.alternatives.len(),
        matrix.metrics.len()
    );
    println!(
        "model-reported totals: {:?}",
        matrix.reported_totals.iter().flatten().collect::<Vec<_>>()
    );
    println!(
        "recommended: {}",
        matrix.recommendation.as_deref().unwrap_or("(none)")
    );
}
