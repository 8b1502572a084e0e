//! Converts model reply text into validated domain objects.
//!
//! Every parser first looks for a fenced ```json block conforming to the step
//! schema (strict path). When no valid block is present it falls back to
//! markdown heuristics (lenient path), which handle the prose replies the
//! original prompts elicit.

mod lenient;
pub mod schema;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mcda::{AlternativeRef, EvaluationMatrix, MetricRef, ObjectiveWeight};

pub const DEFAULT_WEIGHT_TOLERANCE: f64 = 0.02;
/// Planning horizon common to all implementation plans.
pub const HORIZON_START: i32 = 2024;
pub const HORIZON_END: i32 = 2044;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("found {found} records, expected {expected}")]
    CountMismatch { found: usize, expected: usize },
    #[error("no parsable {step} content: {detail}")]
    NoParsableContent { step: &'static str, detail: String },
    #[error("metric {metric} references unknown objective {objective_id}")]
    OrphanMetric {
        metric: String,
        objective_id: String,
    },
    #[error("objective {objective} has no metrics")]
    ObjectiveWithoutMetrics { objective: String },
    #[error("weights sum to {sum}, outside tolerance around 1.0")]
    WeightSumViolation { sum: f64 },
    #[error("negative weight {value}")]
    NegativeWeight { value: f64 },
    #[error("found {found} alternatives, expected {expected}")]
    AlternativeCountMismatch { found: usize, expected: usize },
    #[error("duplicate alternative name {name}")]
    DuplicateAlternativeName { name: String },
    #[error("budget {budget} exceeded: {}", render_violations(.violations))]
    BudgetViolation {
        budget: f64,
        violations: Vec<(String, f64)>,
    },
    #[error("invalid plan for {alternative}: {detail}")]
    InvalidPlan { alternative: String, detail: String },
    #[error("missing score for ({alternative}, {metric})")]
    MissingScore { alternative: String, metric: String },
    #[error("score {score} for ({alternative}, {metric}) outside [0, 10]")]
    ScoreRangeViolation {
        alternative: String,
        metric: String,
        score: f64,
    },
    #[error("score references unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: String },
}

fn render_violations(violations: &[(String, f64)]) -> String {
    violations
        .iter()
        .map(|(id, total)| format!("{id} totals {total}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Lowercase id derived from a display name: alphanumerics kept, runs of
/// anything else collapsed to single hyphens.
pub fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_hyphen = false;
    for c in name.chars() {
        if c.is_alphanumeric() {
            if pending_hyphen && !out.is_empty() {
                out.push('-');
            }
            pending_hyphen = false;
            out.extend(c.to_lowercase());
        } else {
            pending_hyphen = true;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StakeholderAvatar {
    pub name: String,
    pub raw_role: String,
    /// Taxonomy label assigned during analysis; parsing leaves it empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub profile: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Soft,
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningConstraint {
    pub kind: ConstraintKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub id: String,
    pub name: String,
    pub weight: f64,
    pub metric_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMetric {
    pub id: String,
    pub name: String,
    pub objective_id: String,
    pub scale_min: u8,
    pub scale_max: u8,
}

impl PerformanceMetric {
    pub fn new(id: String, name: String, objective_id: String) -> Self {
        PerformanceMetric {
            id,
            name,
            objective_id,
            scale_min: 0,
            scale_max: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanPhase {
    pub start_year: i32,
    pub end_year: i32,
    pub cost_m_cad: f64,
    pub activities: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignAlternative {
    pub id: String,
    pub name: String,
    pub description: String,
    pub specifications: Vec<String>,
    pub plan: Vec<PlanPhase>,
}

impl DesignAlternative {
    pub fn plan_total(&self) -> f64 {
        self.plan.iter().map(|p| p.cost_m_cad).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelphiOutcome {
    pub issues: Vec<String>,
    pub constraints: Vec<PlanningConstraint>,
    pub objectives: Vec<Objective>,
    pub metrics: Vec<PerformanceMetric>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningOutcome {
    pub issues: Vec<String>,
    pub constraints: Vec<PlanningConstraint>,
    pub objectives: Vec<Objective>,
    pub metrics: Vec<PerformanceMetric>,
    pub alternatives: Vec<DesignAlternative>,
}

/// Knobs shared by the parsers. Defaults match the base workflow.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub weight_tolerance: f64,
    /// When set, plans must have exactly five phases covering the horizon;
    /// otherwise deviations are reported as diagnostics only.
    pub strict_phases: bool,
    pub expected_alternatives: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            weight_tolerance: DEFAULT_WEIGHT_TOLERANCE,
            strict_phases: false,
            expected_alternatives: 3,
        }
    }
}

/// The first fenced ```json block in a reply, if any.
pub fn fenced_json_block(reply: &str) -> Option<&str> {
    let start = reply.find("```json")?;
    let body = &reply[start + "```json".len()..];
    let end = body.find("```")?;
    Some(body[..end].trim())
}

fn strict_payload<T: serde::de::DeserializeOwned>(reply: &str) -> Option<T> {
    let block = fenced_json_block(reply)?;
    serde_json::from_str(block).ok()
}

/// True when the reply carries a fenced JSON block that parses as JSON.
pub fn has_valid_fence(reply: &str) -> bool {
    fenced_json_block(reply)
        .map(|b| serde_json::from_str::<serde_json::Value>(b).is_ok())
        .unwrap_or(false)
}

// ---------------------------------------------------------------------------
// Avatars
// ---------------------------------------------------------------------------

pub fn parse_avatars(reply: &str, expected: usize) -> Result<Vec<StakeholderAvatar>, ExtractError> {
    let avatars = parse_avatars_any_count(reply)?;
    if avatars.len() != expected {
        return Err(ExtractError::CountMismatch {
            found: avatars.len(),
            expected,
        });
    }
    Ok(avatars)
}

/// Parse without enforcing a count; used by the refusal classifier, which
/// needs "how many records does this reply contain" rather than a hard gate.
pub fn parse_avatars_any_count(reply: &str) -> Result<Vec<StakeholderAvatar>, ExtractError> {
    if let Some(doc) = strict_payload::<schema::AvatarsV1>(reply) {
        return doc.into_avatars();
    }
    lenient::avatars(reply)
}

// ---------------------------------------------------------------------------
// Delphi outcome
// ---------------------------------------------------------------------------

pub fn parse_delphi(reply: &str, options: &ExtractOptions) -> Result<DelphiOutcome, ExtractError> {
    let mut outcome = if let Some(doc) = strict_payload::<schema::DelphiV1>(reply) {
        doc.into_outcome()?
    } else {
        lenient::delphi(reply)?
    };
    validate_delphi(&outcome)?;
    let weights: Vec<f64> = outcome.objectives.iter().map(|o| o.weight).collect();
    let normalized = validate_weights(&weights, options.weight_tolerance)?;
    for (objective, weight) in outcome.objectives.iter_mut().zip(normalized) {
        objective.weight = weight;
    }
    Ok(outcome)
}

fn validate_delphi(outcome: &DelphiOutcome) -> Result<(), ExtractError> {
    for objective in &outcome.objectives {
        if objective.metric_ids.is_empty() {
            return Err(ExtractError::ObjectiveWithoutMetrics {
                objective: objective.name.clone(),
            });
        }
    }
    let objective_ids: Vec<&str> = outcome.objectives.iter().map(|o| o.id.as_str()).collect();
    for metric in &outcome.metrics {
        if !objective_ids.contains(&metric.objective_id.as_str()) {
            return Err(ExtractError::OrphanMetric {
                metric: metric.name.clone(),
                objective_id: metric.objective_id.clone(),
            });
        }
    }
    Ok(())
}

/// Check that non-negative weights sum to 1.0 within `tolerance` and return
/// them renormalized so the sum is exact. Already-normalized input (sum within
/// 1e-12 of one) is returned unchanged, which makes validation idempotent.
pub fn validate_weights(weights: &[f64], tolerance: f64) -> Result<Vec<f64>, ExtractError> {
    if let Some(w) = weights.iter().find(|w| **w < 0.0) {
        return Err(ExtractError::NegativeWeight { value: *w });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() <= 1e-12 {
        return Ok(weights.to_vec());
    }
    if (sum - 1.0).abs() > tolerance {
        return Err(ExtractError::WeightSumViolation { sum });
    }
    Ok(weights.iter().map(|w| w / sum).collect())
}

// ---------------------------------------------------------------------------
// Alternatives
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedAlternatives {
    pub alternatives: Vec<DesignAlternative>,
    pub diagnostics: Vec<String>,
}

pub fn parse_alternatives(
    reply: &str,
    budget: f64,
    options: &ExtractOptions,
) -> Result<ParsedAlternatives, ExtractError> {
    let alternatives = if let Some(doc) = strict_payload::<schema::AlternativesV1>(reply) {
        doc.into_alternatives()
    } else {
        lenient::alternatives(reply)?
    };
    validate_alternatives(alternatives, budget, options)
}

fn validate_alternatives(
    alternatives: Vec<DesignAlternative>,
    budget: f64,
    options: &ExtractOptions,
) -> Result<ParsedAlternatives, ExtractError> {
    if alternatives.len() != options.expected_alternatives {
        return Err(ExtractError::AlternativeCountMismatch {
            found: alternatives.len(),
            expected: options.expected_alternatives,
        });
    }
    let mut diagnostics = Vec::new();
    let mut seen = Vec::new();
    for alt in &alternatives {
        let lower = alt.name.to_lowercase();
        if seen.contains(&lower) {
            return Err(ExtractError::DuplicateAlternativeName {
                name: alt.name.clone(),
            });
        }
        seen.push(lower);
        validate_plan(alt, options, &mut diagnostics)?;
    }
    // "mutually exclusive" is operationalized as distinct names plus
    // non-identical specification sets; overlap is a diagnostic, not an error.
    for (i, a) in alternatives.iter().enumerate() {
        for b in alternatives.iter().skip(i + 1) {
            if !a.specifications.is_empty() && a.specifications == b.specifications {
                diagnostics.push(format!(
                    "alternatives {} and {} share an identical specification set",
                    a.id, b.id
                ));
            }
        }
    }
    let violations: Vec<(String, f64)> = alternatives
        .iter()
        .filter(|a| a.plan_total() > budget + 1e-9)
        .map(|a| (a.id.clone(), a.plan_total()))
        .collect();
    if !violations.is_empty() {
        return Err(ExtractError::BudgetViolation { budget, violations });
    }
    Ok(ParsedAlternatives {
        alternatives,
        diagnostics,
    })
}

fn validate_plan(
    alt: &DesignAlternative,
    options: &ExtractOptions,
    diagnostics: &mut Vec<String>,
) -> Result<(), ExtractError> {
    if alt.plan.is_empty() {
        return Err(ExtractError::InvalidPlan {
            alternative: alt.id.clone(),
            detail: "no phases".into(),
        });
    }
    for phase in &alt.plan {
        if phase.end_year <= phase.start_year {
            return Err(ExtractError::InvalidPlan {
                alternative: alt.id.clone(),
                detail: format!(
                    "phase {}-{} is not forward",
                    phase.start_year, phase.end_year
                ),
            });
        }
        if phase.cost_m_cad <= 0.0 {
            return Err(ExtractError::InvalidPlan {
                alternative: alt.id.clone(),
                detail: format!("phase {} has non-positive cost", phase.start_year),
            });
        }
        if phase.start_year < HORIZON_START || phase.end_year > HORIZON_END {
            return Err(ExtractError::InvalidPlan {
                alternative: alt.id.clone(),
                detail: format!(
                    "phase {}-{} outside horizon {HORIZON_START}-{HORIZON_END}",
                    phase.start_year, phase.end_year
                ),
            });
        }
    }
    for pair in alt.plan.windows(2) {
        if pair[1].start_year != pair[0].end_year {
            return Err(ExtractError::InvalidPlan {
                alternative: alt.id.clone(),
                detail: format!(
                    "gap between phase ending {} and phase starting {}",
                    pair[0].end_year, pair[1].start_year
                ),
            });
        }
    }
    let covers =
        alt.plan[0].start_year == HORIZON_START && alt.plan.last().unwrap().end_year == HORIZON_END;
    let phases = alt.plan.len();
    if options.strict_phases {
        if phases != 5 || !covers {
            return Err(ExtractError::InvalidPlan {
                alternative: alt.id.clone(),
                detail: format!(
                    "strict mode requires exactly 5 phases covering {HORIZON_START}-{HORIZON_END}, got {phases}"
                ),
            });
        }
    } else if !(4..=5).contains(&phases) || !covers {
        diagnostics.push(format!(
            "alternative {} has {} phases spanning {}-{}",
            alt.id,
            phases,
            alt.plan[0].start_year,
            alt.plan.last().unwrap().end_year
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Evaluation matrix
// ---------------------------------------------------------------------------

pub fn parse_evaluation(
    reply: &str,
    objectives: &[Objective],
    metrics: &[PerformanceMetric],
    alternatives: &[DesignAlternative],
) -> Result<EvaluationMatrix, ExtractError> {
    let doc = if let Some(doc) = strict_payload::<schema::EvaluationV1>(reply) {
        doc
    } else {
        lenient::evaluation(reply, metrics, alternatives)?
    };
    build_matrix(doc, objectives, metrics, alternatives)
}

fn build_matrix(
    doc: schema::EvaluationV1,
    objectives: &[Objective],
    metrics: &[PerformanceMetric],
    alternatives: &[DesignAlternative],
) -> Result<EvaluationMatrix, ExtractError> {
    let metric_refs: Vec<MetricRef> = metrics
        .iter()
        .map(|m| MetricRef {
            id: m.id.clone(),
            name: m.name.clone(),
            objective_id: m.objective_id.clone(),
        })
        .collect();
    let alternative_refs: Vec<AlternativeRef> = alternatives
        .iter()
        .map(|a| AlternativeRef {
            id: a.id.clone(),
            name: a.name.clone(),
        })
        .collect();

    // range violations are reported ahead of identifier problems
    for row in &doc.scores {
        for cell in &row.cells {
            if !(0.0..=10.0).contains(&cell.score) {
                return Err(ExtractError::ScoreRangeViolation {
                    alternative: row.alternative_id.clone(),
                    metric: cell.metric_id.clone(),
                    score: cell.score,
                });
            }
        }
    }

    let mut scores = vec![vec![None::<f64>; metrics.len()]; alternatives.len()];
    let mut reported = vec![None::<f64>; alternatives.len()];
    for row in &doc.scores {
        let alt_index = alternative_refs
            .iter()
            .position(|a| a.id == row.alternative_id)
            .ok_or_else(|| ExtractError::UnknownId {
                kind: "alternative",
                id: row.alternative_id.clone(),
            })?;
        reported[alt_index] = row.reported_total;
        for cell in &row.cells {
            let metric_index = metric_refs
                .iter()
                .position(|m| m.id == cell.metric_id)
                .ok_or_else(|| ExtractError::UnknownId {
                    kind: "metric",
                    id: cell.metric_id.clone(),
                })?;
            scores[alt_index][metric_index] = Some(cell.score);
        }
    }
    let mut dense = Vec::with_capacity(alternatives.len());
    for (alt_index, row) in scores.into_iter().enumerate() {
        let mut dense_row = Vec::with_capacity(metrics.len());
        for (metric_index, value) in row.into_iter().enumerate() {
            match value {
                Some(v) => dense_row.push(v),
                None => {
                    return Err(ExtractError::MissingScore {
                        alternative: alternative_refs[alt_index].id.clone(),
                        metric: metric_refs[metric_index].id.clone(),
                    })
                }
            }
        }
        dense.push(dense_row);
    }

    let recommendation = doc.recommendation.and_then(|r| {
        alternative_refs
            .iter()
            .find(|a| {
                a.id == r
                    || r.to_lowercase().contains(&a.name.to_lowercase())
                    || a.name.to_lowercase().contains(&r.to_lowercase())
            })
            .map(|a| a.id.clone())
    });

    Ok(EvaluationMatrix {
        alternatives: alternative_refs,
        metrics: metric_refs,
        objective_weights: objectives
            .iter()
            .map(|o| ObjectiveWeight {
                objective_id: o.id.clone(),
                name: o.name.clone(),
                weight: o.weight,
            })
            .collect(),
        scores: dense,
        reported_totals: reported,
        recommendation,
    })
}

// ---------------------------------------------------------------------------
// Standalone matrix files
// ---------------------------------------------------------------------------

/// Read an evaluation matrix from a standalone JSON file combining the
/// delphi-style objective block with the evaluation-style score block.
pub fn read_matrix_file(path: &std::path::Path) -> Result<EvaluationMatrix, String> {
    let raw = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_matrix_json(&raw)
}

pub fn parse_matrix_json(raw: &str) -> Result<EvaluationMatrix, String> {
    let doc: schema::MatrixFile = serde_json::from_str(raw).map_err(|e| e.to_string())?;
    let (objectives, metrics) = doc.objective_parts().map_err(|e| e.to_string())?;
    let alternatives: Vec<DesignAlternative> = doc
        .alternatives
        .iter()
        .map(|a| DesignAlternative {
            id: a.id.clone().unwrap_or_else(|| slug(&a.name)),
            name: a.name.clone(),
            description: String::new(),
            specifications: vec![],
            plan: vec![],
        })
        .collect();
    if doc.scores.is_empty() {
        return Err("matrix file has no scores".into());
    }
    let evaluation = schema::EvaluationV1 {
        scores: doc.scores,
        recommendation: doc.recommendation,
    };
    let matrix = build_matrix(evaluation, &objectives, &metrics, &alternatives)
        .map_err(|e| e.to_string())?;
    matrix.validate().map_err(|e| e.to_string())?;
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slug_collapses_punctuation() {
        assert_eq!(slug("Coverage Ratio (0-10)"), "coverage-ratio-0-10");
        assert_eq!(slug("ROI from SAEMS"), "roi-from-saems");
        assert_eq!(slug("  Eco  "), "eco");
    }

    #[test]
    fn weights_unchanged_when_exact() {
        let weights = [0.20, 0.25, 0.20, 0.15, 0.20];
        let out = validate_weights(&weights, DEFAULT_WEIGHT_TOLERANCE).unwrap();
        assert_eq!(out, weights);
        let uniform = [0.25, 0.25, 0.25, 0.25];
        assert_eq!(
            validate_weights(&uniform, DEFAULT_WEIGHT_TOLERANCE).unwrap(),
            uniform
        );
    }

    #[test]
    fn weight_sum_violation_reports_sum() {
        let err = validate_weights(&[0.3, 0.3, 0.3], 0.02).unwrap_err();
        match err {
            ExtractError::WeightSumViolation { sum } => {
                assert!((sum - 0.9).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(matches!(
            validate_weights(&[-0.1, 1.1], 0.02),
            Err(ExtractError::NegativeWeight { .. })
        ));
    }

    #[test]
    fn near_sum_renormalized_exactly() {
        let out = validate_weights(&[0.5, 0.51], 0.02).unwrap();
        let sum: f64 = out.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        // idempotent within 1e-12
        let again = validate_weights(&out, 0.02).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn degenerate_but_valid_weights_accepted() {
        let out = validate_weights(&[0.5, 0.5, 0.0, 0.0, 0.0], 0.02).unwrap();
        assert_eq!(out.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn strict_single_avatar() {
        let reply = r#"Here you go.
```json
{"stakeholders": [{"name": "Ada", "role": "Planner", "profile": "A planner."}]}
```"#;
        let avatars = parse_avatars(reply, 1).unwrap();
        assert_eq!(avatars[0].name, "Ada");
        assert_eq!(avatars[0].raw_role, "Planner");
    }

    #[test]
    fn strict_orphan_metric_detected() {
        let reply = r#"```json
{"issues": ["a", "b", "c", "d", "e"],
 "constraints": [],
 "objectives": [{"id": "o1", "name": "One", "weight": 1.0, "metrics": [{"id": "m1", "name": "M1"}]}],
 "metrics": [{"id": "mx", "name": "MX", "objective_id": "nope"}]}
```"#;
        let err = parse_delphi(reply, &ExtractOptions::default()).unwrap_err();
        assert!(matches!(err, ExtractError::OrphanMetric { .. }), "{err:?}");
    }

    #[test]
    fn absent_cell_is_missing_score() {
        let objectives = vec![Objective {
            id: "o".into(),
            name: "O".into(),
            weight: 1.0,
            metric_ids: vec!["m1".into(), "m2".into()],
        }];
        let metrics = vec![
            PerformanceMetric::new("m1".into(), "M1".into(), "o".into()),
            PerformanceMetric::new("m2".into(), "M2".into(), "o".into()),
        ];
        let alternatives = vec![DesignAlternative {
            id: "a".into(),
            name: "A".into(),
            description: String::new(),
            specifications: vec![],
            plan: vec![],
        }];
        let reply = r#"```json
{"scores": [{"alternative_id": "a", "cells": [{"metric_id": "m1", "score": 5}]}]}
```"#;
        let err = parse_evaluation(reply, &objectives, &metrics, &alternatives).unwrap_err();
        assert_eq!(
            err,
            ExtractError::MissingScore {
                alternative: "a".into(),
                metric: "m2".into()
            }
        );
    }

    #[test]
    fn budget_boundary_accepted_and_overage_named() {
        let phase = |start: i32, end: i32, cost: f64| PlanPhase {
            start_year: start,
            end_year: end,
            cost_m_cad: cost,
            activities: "work".into(),
        };
        let alt = |id: &str, costs: [f64; 4]| DesignAlternative {
            id: id.into(),
            name: id.to_uppercase(),
            description: String::new(),
            specifications: vec![format!("spec {id}")],
            plan: vec![
                phase(2024, 2028, costs[0]),
                phase(2028, 2032, costs[1]),
                phase(2032, 2036, costs[2]),
                phase(2036, 2044, costs[3]),
            ],
        };
        let alternatives = vec![
            alt("a", [20.0, 25.0, 30.0, 25.0]),
            alt("b", [15.0, 20.0, 30.0, 35.0]),
            alt("c", [25.0, 30.0, 25.0, 20.0]),
        ];
        let options = ExtractOptions::default();
        // boundary: totals equal the budget exactly
        let parsed = validate_alternatives(alternatives.clone(), 100.0, &options).unwrap();
        assert_eq!(parsed.alternatives.len(), 3);
        // one over by 1.0
        let mut over = alternatives.clone();
        over[0].plan[0].cost_m_cad = 21.0;
        let err = validate_alternatives(over, 100.0, &options).unwrap_err();
        match err {
            ExtractError::BudgetViolation { violations, budget } => {
                assert_eq!(budget, 100.0);
                assert_eq!(violations, vec![("a".to_string(), 101.0)]);
                assert!((violations[0].1 - budget - 1.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
        // tighter budget: all three violate
        let err = validate_alternatives(alternatives, 90.0, &options).unwrap_err();
        match err {
            ExtractError::BudgetViolation { violations, .. } => assert_eq!(violations.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_full_budget_phase_accepted_with_diagnostic() {
        let alt = DesignAlternative {
            id: "solo".into(),
            name: "Solo".into(),
            description: String::new(),
            specifications: vec![],
            plan: vec![PlanPhase {
                start_year: 2024,
                end_year: 2044,
                cost_m_cad: 100.0,
                activities: "everything".into(),
            }],
        };
        let options = ExtractOptions {
            expected_alternatives: 1,
            ..ExtractOptions::default()
        };
        let parsed = validate_alternatives(vec![alt.clone()], 100.0, &options).unwrap();
        assert_eq!(parsed.alternatives.len(), 1);
        assert!(!parsed.diagnostics.is_empty());
        // strict mode rejects the same plan
        let strict = ExtractOptions {
            strict_phases: true,
            expected_alternatives: 1,
            ..ExtractOptions::default()
        };
        assert!(matches!(
            validate_alternatives(vec![alt], 100.0, &strict),
            Err(ExtractError::InvalidPlan { .. })
        ));
    }

    #[test]
    fn duplicate_names_rejected() {
        let alt = DesignAlternative {
            id: "a".into(),
            name: "Same".into(),
            description: String::new(),
            specifications: vec![],
            plan: vec![PlanPhase {
                start_year: 2024,
                end_year: 2044,
                cost_m_cad: 1.0,
                activities: "x".into(),
            }],
        };
        let mut b = alt.clone();
        b.id = "b".into();
        let mut c = alt.clone();
        c.id = "c".into();
        c.name = "Other".into();
        let options = ExtractOptions::default();
        assert!(matches!(
            validate_alternatives(vec![alt, b, c], 100.0, &options),
            Err(ExtractError::DuplicateAlternativeName { .. })
        ));
    }
}
