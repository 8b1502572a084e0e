//! Monte Carlo batch with the deterministic mock backend, then aggregation.
//!
//! Runs 150 seeded simulations in parallel, writes one record per run plus a
//! manifest, and folds the batch into presence fractions, per-category weight
//! statistics (with 2-sigma error bars), and radar rows for one
//! representative run.
//!
//! Run with: `cargo run --release --example batch_experiment`

use synthpart::backend::MockBackend;
use synthpart::experiments::{self, RadarValues, Taxonomies};
use synthpart::pipeline::PipelineSettings;
use synthpart::prompt::{ScenarioParams, TemplateSet};

fn main() {
    let out = std::env::temp_dir().join("synthpart_batch_example");
    let _ = std::fs::remove_dir_all(&out);

    let backend = MockBackend::standard();
    let params = ScenarioParams::default();
    let seeds: Vec<i64> = (0..150).collect();

    let started = std::time::Instant::now();
    let manifest = experiments::run_batch(
        &backend,
        &PipelineSettings::default(),
        &TemplateSet::default(),
        &params,
        &seeds,
        8,
        &out,
        true,
    )
    .unwrap();
    println!(
        "{}: {} runs in {:.2?} -> {}",
        manifest.scenario_label,
        manifest.runs.len(),
        started.elapsed(),
        out.display()
    );

    let (_, records) = experiments::load_batch(&out).unwrap();
    let taxonomies = Taxonomies::default();
    let summary = experiments::summarize(&records, &manifest.scenario_label, &taxonomies).unwrap();

    println!("\n=== Stakeholder profile presence (fraction of runs) ===");
    for row in &summary.profile_presence {
        println!("  {:<42} {:.3}", row.category, row.fraction);
    }

    println!("\n=== Objective category weights (mean +/- 2 sigma) ===");
    for stat in &summary.weight_stats {
        println!(
            "  {:<14} {:.3} +/- {:.3}  (n={})",
            stat.category,
            stat.mean,
            stat.errbar_2sigma(),
            stat.n
        );
    }

    println!("\n=== Alternative families generated ===");
    for row in &summary.alternative_counts {
        println!("  {:<32} {}", row.category, row.count);
    }

    let representative = records.iter().find(|r| !r.dropped).unwrap();
    let radar = experiments::radar_export(
        representative.evaluation.as_ref().unwrap(),
        RadarValues::Raw,
    )
    .unwrap();
    println!(
        "\nRadar rows from {}: {} (axis, alternative, value) triples",
        representative.run_id,
        radar.len()
    );
}
