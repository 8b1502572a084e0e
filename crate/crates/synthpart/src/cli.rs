//! Command implementations behind the thin binary.
//!
//! Every command returns a process exit code: 0 for success, 1 for
//! usage/config/IO errors, 2 for a run that completed but was dropped.
//! Identical inputs with a mock or replay backend produce byte-identical
//! output files.

use std::path::{Path, PathBuf};

use crate::calibration::{
    search_parameters, CalibrationDataset, CalibrationOptions, CandidateSet, Strategy,
};
use crate::config::Config;
use crate::experiments::{
    self, run_batch, sensitivity, Classification, FeatureFn, ParamName, RadarValues,
    SensitivityOptions,
};
use crate::extract::read_matrix_file;
use crate::mcda::{Convention, ScoreReport, DEFAULT_AUDIT_TOLERANCE};
use crate::pipeline::Pipeline;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DROPPED: i32 = 2;

fn fail(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    EXIT_ERROR
}

fn load_config(path: Option<&Path>) -> Result<Config, String> {
    match path {
        Some(path) => Config::load(path).map_err(|e| e.to_string()),
        None => Ok(Config::default()),
    }
}

/// `run`: execute one full scenario and write the run record.
pub fn cmd_run(config_path: Option<&Path>, seed: i64, out: &Path) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    run_with_config(&config, seed, out)
}

/// `replay`: `run` with the backend forced to replay from a cassette.
pub fn cmd_replay(config_path: Option<&Path>, cassette: &Path, seed: i64, out: &Path) -> i32 {
    let mut config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    config.backend.kind = crate::config::BackendKind::Replay;
    config.backend.cassette_path = Some(cassette.to_path_buf());
    run_with_config(&config, seed, out)
}

fn run_with_config(config: &Config, seed: i64, out: &Path) -> i32 {
    let backend = match config.build_backend() {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let templates = match config.templates() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let pipeline = Pipeline::new(backend.as_ref())
        .with_settings(config.pipeline_settings())
        .with_templates(templates);
    let record = pipeline.run_full_scenario(&config.scenario, seed);
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = std::fs::create_dir_all(parent) {
                return fail(e);
            }
        }
    }
    if let Err(e) = std::fs::write(out, record.to_json_string()) {
        return fail(e);
    }
    println!(
        "{} seed={} dropped={} diagnostics={}",
        record.run_id,
        record.seed,
        record.dropped,
        record.diagnostics.len()
    );
    if record.dropped {
        EXIT_DROPPED
    } else {
        EXIT_OK
    }
}

/// `batch`: N runs with seeds seed_base..seed_base+N-1 into a directory.
pub fn cmd_batch(
    config_path: Option<&Path>,
    runs: usize,
    seed_base: i64,
    parallel: usize,
    out_dir: &Path,
    force: bool,
) -> i32 {
    if runs < 1 || parallel < 1 {
        return fail("--runs and --parallel must be at least 1");
    }
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let backend = match config.build_backend() {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let templates = match config.templates() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let seeds: Vec<i64> = (0..runs as i64).map(|i| seed_base + i).collect();
    match run_batch(
        backend.as_ref(),
        &config.pipeline_settings(),
        &templates,
        &config.scenario,
        &seeds,
        parallel,
        out_dir,
        force,
    ) {
        Ok(manifest) => {
            let dropped = manifest.runs.iter().filter(|r| r.dropped).count();
            println!(
                "{}: {} runs ({} dropped) -> {}",
                manifest.scenario_label,
                manifest.runs.len(),
                dropped,
                out_dir.display()
            );
            EXIT_OK
        }
        Err(e) => fail(e),
    }
}

/// `analyze`: aggregate a batch directory into summary.json, presence.csv,
/// weights.csv and radar.csv.
#[allow(clippy::too_many_arguments)]
pub fn cmd_analyze(
    in_dir: &Path,
    out_dir: &Path,
    config_path: Option<&Path>,
    radar_run: Option<&str>,
    radar_values: RadarValues,
    llm_classify: bool,
) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let taxonomies = match config.taxonomies() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let (manifest, records) = match experiments::load_batch(in_dir) {
        Ok(pair) => pair,
        Err(e) => return fail(e),
    };
    // classification is deterministic keyword matching unless the
    // backend-driven mode is explicitly requested
    let backend = if llm_classify {
        match config.build_backend() {
            Ok(b) => Some(b),
            Err(e) => return fail(e),
        }
    } else {
        None
    };
    let classification = match &backend {
        Some(backend) => Classification::Llm {
            backend: backend.as_ref(),
            model_id: &config.backend.model_id,
        },
        None => Classification::Keyword,
    };
    let summary = match experiments::summarize_with(
        &records,
        &manifest.scenario_label,
        &taxonomies,
        classification,
    ) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };

    // representative run for the radar: explicit flag or first non-dropped,
    // never an average of runs
    let representative = match radar_run {
        Some(id) => records.iter().find(|r| r.run_id == id),
        None => records.iter().find(|r| !r.dropped),
    };
    let Some(representative) = representative else {
        return fail("no non-dropped run available for the radar export");
    };
    let Some(matrix) = representative.evaluation.as_ref() else {
        return fail(format!("run {} has no evaluation", representative.run_id));
    };
    let radar = match experiments::radar_export(matrix, radar_values) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };

    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(e);
    }
    let result = experiments::summary::write_summary_json(&summary, &out_dir.join("summary.json"))
        .and_then(|_| {
            experiments::summary::write_presence_csv(
                &summary.profile_presence,
                &out_dir.join("presence.csv"),
            )
        })
        .and_then(|_| {
            experiments::summary::write_weights_csv(
                &summary.weight_stats,
                &out_dir.join("weights.csv"),
            )
        })
        .and_then(|_| experiments::summary::write_radar_csv(&radar, &out_dir.join("radar.csv")));
    match result {
        Ok(()) => {
            println!(
                "{}: {} runs analyzed (radar from {}) -> {}",
                summary.scenario_label,
                summary.runs,
                representative.run_id,
                out_dir.display()
            );
            EXIT_OK
        }
        Err(e) => fail(e),
    }
}

/// `score`: weighted totals, ranking and audit for a standalone matrix file.
pub fn cmd_score(
    matrix_path: &Path,
    convention: Convention,
    tolerance: Option<f64>,
    out: Option<&Path>,
) -> i32 {
    let matrix = match read_matrix_file(matrix_path) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let tolerance = tolerance.unwrap_or(DEFAULT_AUDIT_TOLERANCE);
    let report = match ScoreReport::compute(&matrix, convention, tolerance) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    print!("{}", report.render_table(&matrix));
    if let Some(out) = out {
        let mut body = match serde_json::to_string_pretty(&report) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        body.push('\n');
        if let Err(e) = std::fs::write(out, body) {
            return fail(e);
        }
    }
    EXIT_OK
}

/// `sensitivity`: finite-difference estimate for one parameter and feature.
#[allow(clippy::too_many_arguments)]
pub fn cmd_sensitivity(
    config_path: Option<&Path>,
    parameter: &str,
    step: f64,
    replicates: usize,
    feature: &str,
    seed_base: i64,
    parallel: usize,
    out: &Path,
) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let backend = match config.build_backend() {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let templates = match config.templates() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let taxonomies = match config.taxonomies() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let parameter = match ParamName::parse(parameter) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let feature = match FeatureFn::parse(feature) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let options = SensitivityOptions {
        replicates,
        seed_base,
        parallelism: parallel.max(1),
    };
    let estimate = match sensitivity(
        backend.as_ref(),
        &config.pipeline_settings(),
        &templates,
        &config.scenario,
        parameter,
        step,
        &feature,
        &taxonomies,
        &options,
    ) {
        Ok(e) => e,
        Err(e) => return fail(e),
    };
    let mut body = match serde_json::to_string_pretty(&estimate) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    body.push('\n');
    if let Err(e) = std::fs::write(out, &body) {
        return fail(e);
    }
    println!(
        "{} wrt {} (step {}): delta {} ci [{}, {}]",
        estimate.feature,
        estimate.parameter,
        estimate.step,
        estimate.delta_estimate,
        estimate.ci_low,
        estimate.ci_high
    );
    EXIT_OK
}

/// `calibrate`: search candidate profiles against a recorded dataset.
pub fn cmd_calibrate(
    config_path: Option<&Path>,
    dataset_path: &Path,
    candidates_path: &Path,
    strategy: &str,
    samples: usize,
    out: Option<&Path>,
) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let backend = match config.build_backend() {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let dataset = match CalibrationDataset::load(dataset_path) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let candidates = match CandidateSet::load(candidates_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let strategy = match Strategy::parse(strategy) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let options = CalibrationOptions {
        model_id: config.backend.model_id.clone(),
        temperature: config.backend.temperature,
        samples: samples.max(1),
        ..CalibrationOptions::default()
    };
    let outcome =
        match search_parameters(&dataset, &candidates, backend.as_ref(), strategy, &options) {
            Ok(o) => o,
            Err(e) => return fail(e),
        };
    let mut body = match serde_json::to_string_pretty(&outcome) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    body.push('\n');
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                return fail(e);
            }
        }
        None => print!("{body}"),
    }
    println!(
        "best_index={} train_loss={} validate_loss={}",
        outcome.best_index, outcome.train_loss, outcome.validate_loss
    );
    EXIT_OK
}

/// Default output path helper shared by the binary.
pub fn default_out(kind: &str) -> PathBuf {
    PathBuf::from(format!("{kind}.json"))
}
