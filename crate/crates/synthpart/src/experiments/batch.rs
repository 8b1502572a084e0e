//! Batch execution of pipeline runs with bounded parallelism.
//!
//! A batch writes one `run-<id>.json` per seed plus an `index.json` manifest.
//! Per-run failures become dropped records; the batch itself never aborts.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::backend::Backend;
use crate::pipeline::{Pipeline, PipelineSettings, RunRecord};
use crate::prompt::{ScenarioParams, TemplateSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub run_id: String,
    pub seed: i64,
    pub dropped: bool,
    pub file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchManifest {
    pub scenario_label: String,
    pub params: ScenarioParams,
    pub runs: Vec<ManifestEntry>,
}

impl BatchManifest {
    pub fn load(dir: &Path) -> Result<BatchManifest, ExperimentError> {
        let path = dir.join("index.json");
        if !path.exists() {
            return Err(ExperimentError::MissingManifest(dir.display().to_string()));
        }
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Run the pipeline once per seed, fanning out across up to `parallelism`
/// threads, and return the records in seed order.
pub fn run_records(
    backend: &dyn Backend,
    settings: &PipelineSettings,
    templates: &TemplateSet,
    params: &ScenarioParams,
    seeds: &[i64],
    parallelism: usize,
) -> Vec<RunRecord> {
    let parallelism = parallelism.max(1).min(seeds.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; seeds.len()]);

    std::thread::scope(|scope| {
        for _ in 0..parallelism {
            scope.spawn(|| {
                let pipeline = Pipeline::new(backend)
                    .with_settings(settings.clone())
                    .with_templates(templates.clone());
                loop {
                    let index = next.fetch_add(1, Ordering::SeqCst);
                    if index >= seeds.len() {
                        break;
                    }
                    let record = pipeline.run_full_scenario(params, seeds[index]);
                    results.lock().expect("batch results")[index] = Some(record);
                }
            });
        }
    });

    results
        .into_inner()
        .expect("batch results")
        .into_iter()
        .map(|r| r.expect("every seed produced a record"))
        .collect()
}

/// Run a batch and persist it: `run-<id>.json` files plus `index.json`.
#[allow(clippy::too_many_arguments)]
pub fn run_batch(
    backend: &dyn Backend,
    settings: &PipelineSettings,
    templates: &TemplateSet,
    params: &ScenarioParams,
    seeds: &[i64],
    parallelism: usize,
    out_dir: &Path,
    force: bool,
) -> Result<BatchManifest, ExperimentError> {
    let index_path = out_dir.join("index.json");
    if index_path.exists() && !force {
        return Err(ExperimentError::WouldOverwrite(
            out_dir.display().to_string(),
        ));
    }
    std::fs::create_dir_all(out_dir)?;
    let records = run_records(backend, settings, templates, params, seeds, parallelism);
    let mut entries = Vec::with_capacity(records.len());
    for record in &records {
        let file = format!("{}.json", record.run_id);
        std::fs::write(out_dir.join(&file), record.to_json_string())?;
        entries.push(ManifestEntry {
            run_id: record.run_id.clone(),
            seed: record.seed,
            dropped: record.dropped,
            file,
        });
    }
    let manifest = BatchManifest {
        scenario_label: params.label(),
        params: *params,
        runs: entries,
    };
    let mut body = serde_json::to_string_pretty(&manifest)?;
    body.push('\n');
    std::fs::write(index_path, body)?;
    Ok(manifest)
}

/// Load every record listed in a batch directory's manifest, in seed order.
pub fn load_batch(dir: &Path) -> Result<(BatchManifest, Vec<RunRecord>), ExperimentError> {
    let manifest = BatchManifest::load(dir)?;
    let mut records = Vec::with_capacity(manifest.runs.len());
    for entry in &manifest.runs {
        let raw = std::fs::read_to_string(dir.join(&entry.file))?;
        records.push(serde_json::from_str(&raw)?);
    }
    Ok((manifest, records))
}
