//! Batch aggregation: presence fractions, weight statistics, alternative
//! counts, and radar-chart data rows.
//!
//! All outputs are ordered (categories in taxonomy order, runs in seed order)
//! so repeated aggregation of the same directory is bit-identical.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::taxonomy::{Classification, Taxonomies, Taxonomy};
use super::ExperimentError;
use crate::extract::Objective;
use crate::mcda::EvaluationMatrix;
use crate::pipeline::RunRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryFraction {
    pub category: String,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightStat {
    pub category: String,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator); 0 when n < 2.
    pub std: f64,
    pub n: usize,
    /// True when only one sample contributed, so std is not meaningful.
    pub single_sample: bool,
}

impl WeightStat {
    pub fn errbar_2sigma(&self) -> f64 {
        2.0 * self.std
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub category: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub scenario_label: String,
    pub runs: usize,
    pub dropped: usize,
    pub profile_presence: Vec<CategoryFraction>,
    pub weight_stats: Vec<WeightStat>,
    pub alternative_counts: Vec<CategoryCount>,
}

/// Non-dropped runs in canonical (seed) order, so aggregation is invariant
/// under input reordering down to the float round-off of each fold.
fn kept(records: &[RunRecord]) -> Vec<&RunRecord> {
    let mut kept: Vec<&RunRecord> = records.iter().filter(|r| !r.dropped).collect();
    kept.sort_by_key(|r| (r.seed, r.run_id.clone()));
    kept
}

fn avatar_text(avatar: &crate::extract::StakeholderAvatar) -> String {
    format!("{} {}", avatar.raw_role, avatar.profile)
}

fn objective_text(objective: &Objective, record: &RunRecord) -> String {
    let metric_names: Vec<&str> = record
        .outcome
        .as_ref()
        .map(|o| {
            o.metrics
                .iter()
                .filter(|m| m.objective_id == objective.id)
                .map(|m| m.name.as_str())
                .collect()
        })
        .unwrap_or_default();
    format!("{} {}", objective.name, metric_names.join(", "))
}

/// A run's total decision weight in one objective category (0 when absent).
pub fn category_weight(
    record: &RunRecord,
    taxonomy: &Taxonomy,
    category: &str,
    classification: Classification<'_>,
) -> f64 {
    let Some(outcome) = record.outcome.as_ref() else {
        return 0.0;
    };
    outcome
        .objectives
        .iter()
        .filter(|o| classification.label(taxonomy, &objective_text(o, record)) == category)
        .map(|o| o.weight)
        .sum()
}

/// Fraction of non-dropped runs in which each stakeholder category appears at
/// least once.
pub fn profile_presence(
    records: &[RunRecord],
    taxonomy: &Taxonomy,
    classification: Classification<'_>,
) -> Result<Vec<CategoryFraction>, ExperimentError> {
    let kept = kept(records);
    if kept.is_empty() {
        return Err(ExperimentError::EmptyBatch);
    }
    let labels = taxonomy.labels_with_uncategorized();
    let mut hits: BTreeMap<String, usize> = BTreeMap::new();
    for record in &kept {
        let mut seen: Vec<String> = Vec::new();
        for avatar in &record.avatars {
            let label = classification.label(taxonomy, &avatar_text(avatar));
            if !seen.contains(&label) {
                seen.push(label);
            }
        }
        for label in seen {
            *hits.entry(label).or_insert(0) += 1;
        }
    }
    Ok(labels
        .iter()
        .map(|label| CategoryFraction {
            category: label.clone(),
            fraction: hits.get(label.as_str()).copied().unwrap_or(0) as f64 / kept.len() as f64,
        })
        .collect())
}

/// Per-objective-category mean and sample standard deviation of run weights.
pub fn weight_stats(
    records: &[RunRecord],
    taxonomy: &Taxonomy,
    classification: Classification<'_>,
) -> Result<Vec<WeightStat>, ExperimentError> {
    let kept = kept(records);
    if kept.is_empty() {
        return Err(ExperimentError::EmptyBatch);
    }
    let n = kept.len();
    Ok(taxonomy
        .labels_with_uncategorized()
        .into_iter()
        .map(|category| {
            let values: Vec<f64> = kept
                .iter()
                .map(|r| category_weight(r, taxonomy, &category, classification))
                .collect();
            let mean = values.iter().sum::<f64>() / n as f64;
            let std = if n < 2 {
                0.0
            } else {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
                    .sqrt()
            };
            WeightStat {
                category,
                mean,
                std,
                n,
                single_sample: n == 1,
            }
        })
        .collect())
}

/// How many generated alternatives fall in each alternative category.
pub fn alternative_counts(
    records: &[RunRecord],
    taxonomy: &Taxonomy,
    classification: Classification<'_>,
) -> Result<Vec<CategoryCount>, ExperimentError> {
    let kept = kept(records);
    if kept.is_empty() {
        return Err(ExperimentError::EmptyBatch);
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for record in &kept {
        if let Some(outcome) = record.outcome.as_ref() {
            for alternative in &outcome.alternatives {
                let text = format!("{} {}", alternative.name, alternative.description);
                *counts.entry(classification.label(taxonomy, &text)).or_insert(0) += 1;
            }
        }
    }
    Ok(taxonomy
        .labels_with_uncategorized()
        .into_iter()
        .map(|category| CategoryCount {
            count: counts.get(category.as_str()).copied().unwrap_or(0),
            category,
        })
        .collect())
}

/// Aggregate a batch with the deterministic keyword classifier.
pub fn summarize(
    records: &[RunRecord],
    scenario_label: &str,
    taxonomies: &Taxonomies,
) -> Result<BatchSummary, ExperimentError> {
    summarize_with(records, scenario_label, taxonomies, Classification::Keyword)
}

/// Aggregate a batch under an explicit classification mode.
pub fn summarize_with(
    records: &[RunRecord],
    scenario_label: &str,
    taxonomies: &Taxonomies,
    classification: Classification<'_>,
) -> Result<BatchSummary, ExperimentError> {
    Ok(BatchSummary {
        scenario_label: scenario_label.to_string(),
        runs: records.len(),
        dropped: records.iter().filter(|r| r.dropped).count(),
        profile_presence: profile_presence(records, &taxonomies.stakeholder, classification)?,
        weight_stats: weight_stats(records, &taxonomies.objective, classification)?,
        alternative_counts: alternative_counts(records, &taxonomies.alternative, classification)?,
    })
}

// ---------------------------------------------------------------------------
// Radar export
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadarValues {
    /// Sum of the objective's metric scores.
    Raw,
    /// The objective's weighted contribution to the split-convention total.
    Weighted,
}

impl std::str::FromStr for RadarValues {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(RadarValues::Raw),
            "weighted" => Ok(RadarValues::Weighted),
            other => Err(format!("unknown radar values '{other}' (raw|weighted)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarRow {
    pub axis: String,
    pub alternative: String,
    pub value: f64,
}

/// One row per (objective axis, alternative). Values come from a single
/// representative run's matrix; batches are never silently averaged.
pub fn radar_export(
    matrix: &EvaluationMatrix,
    values: RadarValues,
) -> Result<Vec<RadarRow>, ExperimentError> {
    matrix.validate()?;
    let mut rows = Vec::new();
    for objective in &matrix.objective_weights {
        let metric_indices: Vec<usize> = matrix
            .metrics
            .iter()
            .enumerate()
            .filter(|(_, m)| m.objective_id == objective.objective_id)
            .map(|(i, _)| i)
            .collect();
        for (alt_index, alternative) in matrix.alternatives.iter().enumerate() {
            let raw: f64 = metric_indices
                .iter()
                .map(|&i| matrix.scores[alt_index][i])
                .sum();
            let value = match values {
                RadarValues::Raw => raw,
                RadarValues::Weighted => {
                    objective.weight * raw / metric_indices.len().max(1) as f64
                }
            };
            rows.push(RadarRow {
                axis: objective.name.clone(),
                alternative: alternative.name.clone(),
                value,
            });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// File emission
// ---------------------------------------------------------------------------

pub fn write_summary_json(summary: &BatchSummary, path: &Path) -> Result<(), ExperimentError> {
    let mut body = serde_json::to_string_pretty(summary)?;
    body.push('\n');
    std::fs::write(path, body)?;
    Ok(())
}

pub fn write_presence_csv(rows: &[CategoryFraction], path: &Path) -> Result<(), ExperimentError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["category", "fraction"])?;
    for row in rows {
        writer.write_record([row.category.as_str(), &row.fraction.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_weights_csv(rows: &[WeightStat], path: &Path) -> Result<(), ExperimentError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["category", "mean", "std", "n", "errbar2sigma"])?;
    for row in rows {
        writer.write_record([
            row.category.as_str(),
            &row.mean.to_string(),
            &row.std.to_string(),
            &row.n.to_string(),
            &row.errbar_2sigma().to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_radar_csv(rows: &[RadarRow], path: &Path) -> Result<(), ExperimentError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["axis", "alternative", "value"])?;
    for row in rows {
        writer.write_record([
            row.axis.as_str(),
            row.alternative.as_str(),
            &row.value.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Parse a radar CSV back into rows (the round-trip check for exports).
pub fn read_radar_csv(path: &Path) -> Result<Vec<RadarRow>, ExperimentError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for result in reader.deserialize::<RadarRow>() {
        rows.push(result?);
    }
    Ok(rows)
}
