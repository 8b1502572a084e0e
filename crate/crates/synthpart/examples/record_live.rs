//! Run one live scenario against a chat-completions provider, recording every
//! exchange into a cassette for later offline replay.
//!
//! Needs `SYNTHPART_BASE_URL` (e.g. `https://api.example.com/v1`) and
//! `SYNTHPART_API_KEY` in the environment; prints a skip notice otherwise.
//! Optionally `SYNTHPART_MODEL` overrides the default model id.
//!
//! Run with: `cargo run --example record_live`

use synthpart::backend::{HttpBackend, RecordingBackend};
use synthpart::pipeline::{Pipeline, PipelineSettings};
use synthpart::prompt::ScenarioParams;

fn main() {
    let Ok(base_url) = std::env::var("SYNTHPART_BASE_URL") else {
        println!("SYNTHPART_BASE_URL not set; skipping the live run.");
        println!("Set SYNTHPART_BASE_URL and SYNTHPART_API_KEY to record a session.");
        return;
    };

    let cassette = std::env::temp_dir().join("synthpart_live_cassette.json");
    let _ = std::fs::remove_file(&cassette);
    let backend = RecordingBackend::new(HttpBackend::new(&base_url), &cassette);

    let mut settings = PipelineSettings::default();
    if let Ok(model) = std::env::var("SYNTHPART_MODEL") {
        settings.model_id = model;
    }
    // one courtesy retry on refusal; live models occasionally ask for
    // clarification instead of generating
    settings.retry.max_retries = 1;

    let params = ScenarioParams {
        team_size: 4,
        ..ScenarioParams::default()
    };
    let pipeline = Pipeline::new(&backend).with_settings(settings);
    let record = pipeline.run_full_scenario(&params, 0);

    println!("run {} dropped={}", record.run_id, record.dropped);
    for diagnostic in &record.diagnostics {
        println!(
            "  [{:?}] {}: {}",
            diagnostic.severity, diagnostic.stage, diagnostic.message
        );
    }
    if let Some(outcome) = &record.outcome {
        println!(
            "extracted {} issues, {} objectives, {} metrics, {} alternatives",
            outcome.issues.len(),
            outcome.objectives.len(),
            outcome.metrics.len(),
            outcome.alternatives.len()
        );
    }
    println!("cassette written to {}", cassette.display());
    println!(
        "replay it with: synthpart replay --cassette {} --out run.json",
        cassette.display()
    );
}
