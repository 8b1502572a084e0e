//! Weighted multi-criteria scoring, ranking, and arithmetic auditing.
//!
//! Scores are aggregated as `v_i = sum_k g[i][k] * w_k`. Two conventions map
//! per-objective decision weights onto per-metric weights: `replicate` applies
//! the objective's weight to each of its metrics, `split` divides it evenly
//! among them. When every objective owns exactly one metric the conventions
//! coincide. The audit recomputes totals under both conventions and compares
//! them against totals reported by the language model, which routinely drift
//! from the exact arithmetic.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum McdaError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("metric {metric_id} references unknown objective {objective_id}")]
    UnknownObjective {
        metric_id: String,
        objective_id: String,
    },
    #[error("score {value} for ({alternative_id}, {metric_id}) outside [0, 10]")]
    ScoreOutOfRange {
        alternative_id: String,
        metric_id: String,
        value: f64,
    },
    #[error("audit requires reported totals")]
    MissingReportedTotals,
    #[error("matrix has no scores")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Replicate,
    Split,
}

impl std::str::FromStr for Convention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "replicate" => Ok(Convention::Replicate),
            "split" => Ok(Convention::Split),
            other => Err(format!("unknown convention '{other}' (replicate|split)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeRef {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRef {
    pub id: String,
    pub name: String,
    pub objective_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeight {
    pub objective_id: String,
    pub name: String,
    pub weight: f64,
}

/// Alternatives x metrics score matrix plus per-objective decision weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationMatrix {
    pub alternatives: Vec<AlternativeRef>,
    pub metrics: Vec<MetricRef>,
    pub objective_weights: Vec<ObjectiveWeight>,
    /// Row-major: `scores[alt][metric]`.
    pub scores: Vec<Vec<f64>>,
    pub reported_totals: Vec<Option<f64>>,
    /// Alternative id recommended by the model, when one was stated.
    pub recommendation: Option<String>,
}

impl EvaluationMatrix {
    /// Structural validation: consistent dimensions, resolvable objective
    /// references, scores within [0, 10]. The weight sum is validated at
    /// extraction time, not here, so callers may scale weights freely.
    pub fn validate(&self) -> Result<(), McdaError> {
        if self.alternatives.is_empty() || self.metrics.is_empty() {
            return Err(McdaError::Empty);
        }
        if self.scores.len() != self.alternatives.len() {
            return Err(McdaError::DimensionMismatch(format!(
                "{} score rows for {} alternatives",
                self.scores.len(),
                self.alternatives.len()
            )));
        }
        if self.reported_totals.len() != self.alternatives.len() {
            return Err(McdaError::DimensionMismatch(format!(
                "{} reported totals for {} alternatives",
                self.reported_totals.len(),
                self.alternatives.len()
            )));
        }
        for (row, alt) in self.scores.iter().zip(&self.alternatives) {
            if row.len() != self.metrics.len() {
                return Err(McdaError::DimensionMismatch(format!(
                    "row {} has {} cells for {} metrics",
                    alt.id,
                    row.len(),
                    self.metrics.len()
                )));
            }
            for (value, metric) in row.iter().zip(&self.metrics) {
                if !(0.0..=10.0).contains(value) || !value.is_finite() {
                    return Err(McdaError::ScoreOutOfRange {
                        alternative_id: alt.id.clone(),
                        metric_id: metric.id.clone(),
                        value: *value,
                    });
                }
            }
        }
        let weight_ids: HashMap<&str, f64> = self
            .objective_weights
            .iter()
            .map(|w| (w.objective_id.as_str(), w.weight))
            .collect();
        for metric in &self.metrics {
            if !weight_ids.contains_key(metric.objective_id.as_str()) {
                return Err(McdaError::UnknownObjective {
                    metric_id: metric.id.clone(),
                    objective_id: metric.objective_id.clone(),
                });
            }
        }
        Ok(())
    }

    /// Per-metric weights under the given convention.
    pub fn metric_weights(&self, convention: Convention) -> Result<Vec<f64>, McdaError> {
        let weight_of: HashMap<&str, f64> = self
            .objective_weights
            .iter()
            .map(|w| (w.objective_id.as_str(), w.weight))
            .collect();
        let mut metrics_per_objective: HashMap<&str, usize> = HashMap::new();
        for metric in &self.metrics {
            *metrics_per_objective
                .entry(metric.objective_id.as_str())
                .or_insert(0) += 1;
        }
        self.metrics
            .iter()
            .map(|metric| {
                let weight = weight_of.get(metric.objective_id.as_str()).ok_or_else(|| {
                    McdaError::UnknownObjective {
                        metric_id: metric.id.clone(),
                        objective_id: metric.objective_id.clone(),
                    }
                })?;
                Ok(match convention {
                    Convention::Replicate => *weight,
                    Convention::Split => {
                        *weight / metrics_per_objective[metric.objective_id.as_str()] as f64
                    }
                })
            })
            .collect()
    }
}

/// Weighted totals v_i under one convention.
pub fn weighted_scores(
    matrix: &EvaluationMatrix,
    convention: Convention,
) -> Result<Vec<f64>, McdaError> {
    if matrix.scores.len() != matrix.alternatives.len()
        || matrix
            .scores
            .iter()
            .any(|r| r.len() != matrix.metrics.len())
    {
        return Err(McdaError::DimensionMismatch(
            "score matrix does not match declared alternatives/metrics".into(),
        ));
    }
    let weights = matrix.metric_weights(convention)?;
    Ok(matrix
        .scores
        .iter()
        .map(|row| row.iter().zip(&weights).map(|(g, w)| g * w).sum())
        .collect())
}

/// Unweighted row sums.
pub fn raw_totals(matrix: &EvaluationMatrix) -> Vec<f64> {
    matrix.scores.iter().map(|row| row.iter().sum()).collect()
}

/// Alternative ids in strictly descending total order; ties broken by id
/// ascending so output is reproducible.
pub fn rank(totals: &[f64], alternatives: &[AlternativeRef]) -> Vec<String> {
    let mut order: Vec<usize> = (0..alternatives.len()).collect();
    order.sort_by(|&a, &b| {
        totals[b]
            .partial_cmp(&totals[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| alternatives[a].id.cmp(&alternatives[b].id))
    });
    order
        .into_iter()
        .map(|i| alternatives[i].id.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub alternative_id: String,
    pub reported: Option<f64>,
    pub recomputed_replicate: f64,
    pub recomputed_split: f64,
    /// True when the reported total is within tolerance of at least one
    /// recomputed convention; absent when nothing was reported.
    pub consistent: Option<bool>,
}

/// Compare reported totals against both recomputations. Auditing never fails;
/// it reports.
pub fn audit(matrix: &EvaluationMatrix, tolerance: f64) -> Result<Vec<AuditEntry>, McdaError> {
    let replicate = weighted_scores(matrix, Convention::Replicate)?;
    let split = weighted_scores(matrix, Convention::Split)?;
    Ok(matrix
        .alternatives
        .iter()
        .enumerate()
        .map(|(i, alt)| {
            let reported = matrix.reported_totals.get(i).copied().flatten();
            let consistent = reported.map(|r| {
                (r - replicate[i]).abs() <= tolerance || (r - split[i]).abs() <= tolerance
            });
            AuditEntry {
                alternative_id: alt.id.clone(),
                reported,
                recomputed_replicate: replicate[i],
                recomputed_split: split[i],
                consistent,
            }
        })
        .collect())
}

pub const DEFAULT_AUDIT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub convention: Convention,
    pub totals: Vec<f64>,
    pub raw_totals: Vec<f64>,
    pub ranking: Vec<String>,
    pub audit: Vec<AuditEntry>,
}

impl ScoreReport {
    pub fn compute(
        matrix: &EvaluationMatrix,
        convention: Convention,
        audit_tolerance: f64,
    ) -> Result<ScoreReport, McdaError> {
        matrix.validate()?;
        let totals = weighted_scores(matrix, convention)?;
        Ok(ScoreReport {
            convention,
            raw_totals: raw_totals(matrix),
            ranking: rank(&totals, &matrix.alternatives),
            audit: audit(matrix, audit_tolerance)?,
            totals,
        })
    }

    /// Plain-text table rendering.
    pub fn render_table(&self, matrix: &EvaluationMatrix) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<38} {:>10} {:>8} {:>10} {:>12}",
            "alternative", "weighted", "raw", "reported", "consistent"
        );
        for (i, alt) in matrix.alternatives.iter().enumerate() {
            let entry = &self.audit[i];
            let _ = writeln!(
                out,
                "{:<38} {:>10.4} {:>8.1} {:>10} {:>12}",
                alt.name,
                self.totals[i],
                self.raw_totals[i],
                entry
                    .reported
                    .map(|r| format!("{r}"))
                    .unwrap_or_else(|| "-".into()),
                entry
                    .consistent
                    .map(|c| if c { "yes" } else { "NO" })
                    .unwrap_or("-"),
            );
        }
        let _ = writeln!(out, "ranking: {}", self.ranking.join(" > "));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// One metric per objective, the shape of the baseline published instance.
    pub(crate) fn baseline_matrix() -> EvaluationMatrix {
        let names = [
            "Traffic Flow Improvement",
            "Environmental Footprint Minimization",
            "Equity Enhancement",
            "Infrastructure Integration",
            "Technological Innovation Fostering",
        ];
        let weights = [0.15, 0.15, 0.10, 0.30, 0.30];
        let objective_weights = names
            .iter()
            .zip(weights)
            .map(|(n, w)| ObjectiveWeight {
                objective_id: crate::extract::slug(n),
                name: n.to_string(),
                weight: w,
            })
            .collect::<Vec<_>>();
        let metrics = names
            .iter()
            .map(|n| MetricRef {
                id: crate::extract::slug(n),
                name: n.to_string(),
                objective_id: crate::extract::slug(n),
            })
            .collect();
        EvaluationMatrix {
            alternatives: vec![
                AlternativeRef {
                    id: "eco".into(),
                    name: "Eco".into(),
                },
                AlternativeRef {
                    id: "equi".into(),
                    name: "Equi".into(),
                },
                AlternativeRef {
                    id: "techno".into(),
                    name: "Techno".into(),
                },
            ],
            metrics,
            objective_weights,
            scores: vec![
                vec![7.0, 8.0, 7.0, 9.0, 7.0],
                vec![5.0, 6.0, 9.0, 5.0, 5.0],
                vec![9.0, 7.0, 4.0, 8.0, 8.0],
            ],
            reported_totals: vec![None, None, None],
            recommendation: None,
        }
    }

    #[test]
    fn baseline_weighted_totals() {
        let matrix = baseline_matrix();
        let totals = weighted_scores(&matrix, Convention::Replicate).unwrap();
        assert_relative_eq!(totals[0], 7.75, epsilon = 1e-9);
        assert_relative_eq!(totals[1], 5.55, epsilon = 1e-9);
        assert_relative_eq!(totals[2], 7.60, epsilon = 1e-9);
        // one metric per objective: conventions coincide
        let split = weighted_scores(&matrix, Convention::Split).unwrap();
        for (a, b) in totals.iter().zip(&split) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn baseline_raw_totals() {
        let matrix = baseline_matrix();
        assert_eq!(raw_totals(&matrix), vec![38.0, 30.0, 36.0]);
    }

    #[test]
    fn zero_matrix_raw_totals() {
        let mut matrix = baseline_matrix();
        matrix.scores = vec![vec![0.0; 5]; 3];
        assert_eq!(raw_totals(&matrix), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn baseline_ranking() {
        let matrix = baseline_matrix();
        let totals = weighted_scores(&matrix, Convention::Replicate).unwrap();
        assert_eq!(
            rank(&totals, &matrix.alternatives),
            ["eco", "techno", "equi"]
        );
    }

    #[test]
    fn equal_totals_rank_by_id() {
        let matrix = baseline_matrix();
        let totals = vec![1.0, 1.0, 1.0];
        assert_eq!(
            rank(&totals, &matrix.alternatives),
            ["eco", "equi", "techno"]
        );
    }

    #[test]
    fn one_hot_weights_select_first_objective_score() {
        let mut matrix = baseline_matrix();
        for (i, w) in matrix.objective_weights.iter_mut().enumerate() {
            w.weight = if i == 0 { 1.0 } else { 0.0 };
        }
        let totals = weighted_scores(&matrix, Convention::Replicate).unwrap();
        assert_eq!(totals, vec![7.0, 5.0, 9.0]);
    }

    #[test]
    fn audit_consistent_when_reported_matches_split() {
        let mut matrix = baseline_matrix();
        let split = weighted_scores(&matrix, Convention::Split).unwrap();
        matrix.reported_totals = split.iter().map(|v| Some(*v)).collect();
        let entries = audit(&matrix, DEFAULT_AUDIT_TOLERANCE).unwrap();
        assert!(entries.iter().all(|e| e.consistent == Some(true)));
    }

    #[test]
    fn score_out_of_range_detected() {
        let mut matrix = baseline_matrix();
        matrix.scores[0][0] = 11.0;
        assert!(matches!(
            matrix.validate(),
            Err(McdaError::ScoreOutOfRange { .. })
        ));
    }

    #[test]
    fn orphan_objective_reference_detected() {
        let mut matrix = baseline_matrix();
        matrix.metrics[0].objective_id = "missing".into();
        assert!(matches!(
            matrix.validate(),
            Err(McdaError::UnknownObjective { .. })
        ));
    }
}
