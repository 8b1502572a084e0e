//! Fenced-block JSON schemas, one per workflow step.
//!
//! `avatars.v1`, `delphi.v1`, `alternatives.v1` and `evaluation.v1` are the
//! structured-output contracts appended to prompts when structured mode is on.
//! `MatrixFile` is the standalone scorer input combining the objective block
//! with the score block.

use serde::{Deserialize, Serialize};

use super::{
    slug, ConstraintKind, DelphiOutcome, DesignAlternative, ExtractError, Objective,
    PerformanceMetric, PlanPhase, PlanningConstraint, StakeholderAvatar,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AvatarsV1 {
    pub stakeholders: Vec<AvatarEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AvatarEntry {
    pub name: String,
    pub role: String,
    pub profile: String,
}

impl AvatarsV1 {
    pub fn into_avatars(self) -> Result<Vec<StakeholderAvatar>, ExtractError> {
        if self.stakeholders.is_empty() {
            return Err(ExtractError::NoParsableContent {
                step: "avatars",
                detail: "stakeholders array is empty".into(),
            });
        }
        self.stakeholders
            .into_iter()
            .map(|e| {
                if e.name.trim().is_empty() || e.profile.trim().is_empty() {
                    return Err(ExtractError::NoParsableContent {
                        step: "avatars",
                        detail: "stakeholder with empty name or profile".into(),
                    });
                }
                Ok(StakeholderAvatar {
                    name: e.name,
                    raw_role: e.role,
                    category: None,
                    profile: e.profile,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DelphiV1 {
    pub issues: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<ConstraintEntry>,
    pub objectives: Vec<ObjectiveEntry>,
    /// Flat metric list some models emit instead of (or alongside) nesting;
    /// entries must reference a declared objective.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<FlatMetricEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintEntry {
    pub kind: ConstraintKind,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveEntry {
    #[serde(default)]
    pub id: Option<String>,
    pub name: String,
    pub weight: f64,
    #[serde(default)]
    pub metrics: Vec<MetricEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricEntry {
    #[serde(default)]
    pub id: Option<String>,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatMetricEntry {
    #[serde(default)]
    pub id: Option<String>,
    pub name: String,
    pub objective_id: String,
}

impl DelphiV1 {
    pub fn into_outcome(self) -> Result<DelphiOutcome, ExtractError> {
        let mut objectives = Vec::new();
        let mut metrics = Vec::new();
        for entry in self.objectives {
            let objective_id = entry.id.unwrap_or_else(|| slug(&entry.name));
            let mut metric_ids = Vec::new();
            for metric in entry.metrics {
                let metric_id = metric.id.unwrap_or_else(|| slug(&metric.name));
                metric_ids.push(metric_id.clone());
                metrics.push(PerformanceMetric::new(
                    metric_id,
                    metric.name,
                    objective_id.clone(),
                ));
            }
            objectives.push(Objective {
                id: objective_id,
                name: entry.name,
                weight: entry.weight,
                metric_ids,
            });
        }
        for flat in self.metrics {
            let metric_id = flat.id.unwrap_or_else(|| slug(&flat.name));
            if metrics.iter().any(|m| m.id == metric_id) {
                continue;
            }
            match objectives.iter_mut().find(|o| o.id == flat.objective_id) {
                Some(objective) => {
                    objective.metric_ids.push(metric_id.clone());
                    metrics.push(PerformanceMetric::new(
                        metric_id,
                        flat.name,
                        flat.objective_id,
                    ));
                }
                None => {
                    return Err(ExtractError::OrphanMetric {
                        metric: flat.name,
                        objective_id: flat.objective_id,
                    })
                }
            }
        }
        if objectives.is_empty() {
            return Err(ExtractError::NoParsableContent {
                step: "delphi",
                detail: "no objectives".into(),
            });
        }
        Ok(DelphiOutcome {
            issues: self.issues,
            constraints: self
                .constraints
                .into_iter()
                .map(|c| PlanningConstraint {
                    kind: c.kind,
                    text: c.text,
                })
                .collect(),
            objectives,
            metrics,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlternativesV1 {
    pub alternatives: Vec<AlternativeEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlternativeEntry {
    #[serde(default)]
    pub id: Option<String>,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub specifications: Vec<String>,
    pub plan: Vec<PlanEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEntry {
    pub start_year: i32,
    pub end_year: i32,
    pub cost_m_cad: f64,
    #[serde(default)]
    pub activities: String,
}

impl AlternativesV1 {
    pub fn into_alternatives(self) -> Vec<DesignAlternative> {
        self.alternatives
            .into_iter()
            .map(|entry| DesignAlternative {
                id: entry.id.unwrap_or_else(|| slug(&entry.name)),
                name: entry.name,
                description: entry.description,
                specifications: entry.specifications,
                plan: entry
                    .plan
                    .into_iter()
                    .map(|p| PlanPhase {
                        start_year: p.start_year,
                        end_year: p.end_year,
                        cost_m_cad: p.cost_m_cad,
                        activities: p.activities,
                    })
                    .collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationV1 {
    pub scores: Vec<ScoreRow>,
    #[serde(default)]
    pub recommendation: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreRow {
    pub alternative_id: String,
    pub cells: Vec<ScoreCell>,
    #[serde(default)]
    pub reported_total: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreCell {
    pub metric_id: String,
    pub score: f64,
}

/// Standalone scorer input combining objectives (with weights and metrics)
/// and a score block; alternatives are declared explicitly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub objectives: Vec<ObjectiveEntry>,
    pub alternatives: Vec<MatrixAlternative>,
    pub scores: Vec<ScoreRow>,
    #[serde(default)]
    pub recommendation: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixAlternative {
    #[serde(default)]
    pub id: Option<String>,
    pub name: String,
}

impl MatrixFile {
    pub fn objective_parts(
        &self,
    ) -> Result<(Vec<Objective>, Vec<PerformanceMetric>), ExtractError> {
        let doc = DelphiV1 {
            issues: vec![],
            constraints: vec![],
            objectives: self.objectives.clone(),
            metrics: vec![],
        };
        let outcome = doc.into_outcome()?;
        Ok((outcome.objectives, outcome.metrics))
    }
}
