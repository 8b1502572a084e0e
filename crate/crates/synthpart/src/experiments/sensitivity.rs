//! Finite-difference parameter sensitivity over Monte Carlo replicates.
//!
//! The estimate is (mean feature at theta+step - mean feature at theta) / step
//! with `replicates` independent runs per arm and a normal approximation for
//! the confidence interval of the difference of means. Directions that violate
//! a parameter's positivity (or integrality) are rejected, not differentiated.

use serde::{Deserialize, Serialize};

use super::summary::category_weight;
use super::taxonomy::Taxonomies;
use super::ExperimentError;
use crate::backend::Backend;
use crate::experiments::batch::run_records;
use crate::mcda::{weighted_scores, Convention};
use crate::pipeline::{PipelineSettings, RunRecord};
use crate::prompt::{ScenarioParams, TemplateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    TeamSize,
    DelphiRounds,
    BrainstormMinutes,
    BudgetMCad,
}

impl ParamName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParamName::TeamSize => "team_size",
            ParamName::DelphiRounds => "delphi_rounds",
            ParamName::BrainstormMinutes => "brainstorm_minutes",
            ParamName::BudgetMCad => "budget_m_cad",
        }
    }

    pub fn parse(s: &str) -> Result<ParamName, ExperimentError> {
        match s {
            "team_size" => Ok(ParamName::TeamSize),
            "delphi_rounds" => Ok(ParamName::DelphiRounds),
            "brainstorm_minutes" => Ok(ParamName::BrainstormMinutes),
            "budget_m_cad" | "budget" => Ok(ParamName::BudgetMCad),
            other => Err(ExperimentError::UnknownParameter(other.into())),
        }
    }

    fn is_integer(&self) -> bool {
        !matches!(self, ParamName::BudgetMCad)
    }

    /// Apply `step` to the parameter, enforcing positivity and integrality.
    pub fn perturb(
        &self,
        params: &ScenarioParams,
        step: f64,
    ) -> Result<ScenarioParams, ExperimentError> {
        if step == 0.0 {
            return Err(ExperimentError::ZeroStep);
        }
        if self.is_integer() && step.fract() != 0.0 {
            return Err(ExperimentError::InfeasibleDirection(format!(
                "{} takes integer steps, got {step}",
                self.as_str()
            )));
        }
        let mut out = *params;
        let bump_u32 = |current: u32| -> Result<u32, ExperimentError> {
            let next = current as i64 + step as i64;
            if next < 1 {
                return Err(ExperimentError::InfeasibleDirection(format!(
                    "{} would become {next}, violating positivity",
                    self.as_str()
                )));
            }
            Ok(next as u32)
        };
        match self {
            ParamName::TeamSize => out.team_size = bump_u32(params.team_size)?,
            ParamName::DelphiRounds => out.delphi_rounds = bump_u32(params.delphi_rounds)?,
            ParamName::BrainstormMinutes => {
                out.brainstorm_minutes = bump_u32(params.brainstorm_minutes)?
            }
            ParamName::BudgetMCad => {
                let next = params.budget_m_cad + step;
                if next <= 0.0 {
                    return Err(ExperimentError::InfeasibleDirection(format!(
                        "budget_m_cad would become {next}, violating positivity"
                    )));
                }
                out.budget_m_cad = next;
            }
        }
        Ok(out)
    }
}

/// The named feature menu exposed to the estimator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureFn {
    /// Total decision weight in one objective category.
    MeanObjectiveWeight { category: String },
    /// 1 when the stakeholder category appears in the run's team, else 0.
    Presence { category: String },
    /// The winning alternative's split-convention weighted total.
    WinningTotal,
}

impl FeatureFn {
    pub fn parse(s: &str) -> Result<FeatureFn, ExperimentError> {
        if let Some(category) = s.strip_prefix("mean_weight:") {
            return Ok(FeatureFn::MeanObjectiveWeight {
                category: category.to_string(),
            });
        }
        if let Some(category) = s.strip_prefix("presence:") {
            return Ok(FeatureFn::Presence {
                category: category.to_string(),
            });
        }
        if s == "winning_total" {
            return Ok(FeatureFn::WinningTotal);
        }
        Err(ExperimentError::UnknownFeature(s.into()))
    }

    pub fn describe(&self) -> String {
        match self {
            FeatureFn::MeanObjectiveWeight { category } => format!("mean_weight:{category}"),
            FeatureFn::Presence { category } => format!("presence:{category}"),
            FeatureFn::WinningTotal => "winning_total".into(),
        }
    }

    /// Evaluate the feature on one non-dropped run.
    pub fn eval(&self, record: &RunRecord, taxonomies: &Taxonomies) -> Option<f64> {
        if record.dropped {
            return None;
        }
        match self {
            FeatureFn::MeanObjectiveWeight { category } => Some(category_weight(
                record,
                &taxonomies.objective,
                category,
                crate::experiments::taxonomy::Classification::Keyword,
            )),
            FeatureFn::Presence { category } => {
                let present = record.avatars.iter().any(|a| {
                    taxonomies
                        .stakeholder
                        .classify(&format!("{} {}", a.raw_role, a.profile))
                        == category.as_str()
                });
                Some(if present { 1.0 } else { 0.0 })
            }
            FeatureFn::WinningTotal => {
                let matrix = record.evaluation.as_ref()?;
                let totals = weighted_scores(matrix, Convention::Split).ok()?;
                totals.into_iter().fold(None, |best: Option<f64>, v| {
                    Some(best.map_or(v, |b| if v > b { v } else { b }))
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEstimate {
    pub parameter: String,
    pub step: f64,
    pub feature: String,
    pub delta_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone)]
pub struct SensitivityOptions {
    pub replicates: usize,
    pub seed_base: i64,
    pub parallelism: usize,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        SensitivityOptions {
            replicates: 10,
            seed_base: 0,
            parallelism: 4,
        }
    }
}

fn mean_and_var(values: &[f64]) -> (f64, f64) {
    // the mean of identical values is that value; the naive sum would leave
    // round-off that surfaces as spurious variance
    if values.windows(2).all(|w| w[0] == w[1]) {
        return (values[0], 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() < 2 {
        0.0
    } else {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    };
    (mean, var)
}

#[allow(clippy::too_many_arguments)]
pub fn sensitivity(
    backend: &dyn Backend,
    settings: &PipelineSettings,
    templates: &TemplateSet,
    params: &ScenarioParams,
    parameter: ParamName,
    step: f64,
    feature: &FeatureFn,
    taxonomies: &Taxonomies,
    options: &SensitivityOptions,
) -> Result<SensitivityEstimate, ExperimentError> {
    if options.replicates < 2 {
        return Err(ExperimentError::InsufficientReplicates(options.replicates));
    }
    let perturbed = parameter.perturb(params, step)?;

    let n = options.replicates as i64;
    let base_seeds: Vec<i64> = (0..n).map(|i| options.seed_base + i).collect();
    let perturbed_seeds: Vec<i64> = (0..n).map(|i| options.seed_base + n + i).collect();

    let evaluate =
        |scenario: &ScenarioParams, seeds: &[i64]| -> Result<Vec<f64>, ExperimentError> {
            let records = run_records(
                backend,
                settings,
                templates,
                scenario,
                seeds,
                options.parallelism,
            );
            let values: Vec<f64> = records
                .iter()
                .filter_map(|r| feature.eval(r, taxonomies))
                .collect();
            if values.is_empty() {
                return Err(ExperimentError::EmptyBatch);
            }
            Ok(values)
        };

    let base_values = evaluate(params, &base_seeds)?;
    let perturbed_values = evaluate(&perturbed, &perturbed_seeds)?;

    let (base_mean, base_var) = mean_and_var(&base_values);
    let (perturbed_mean, perturbed_var) = mean_and_var(&perturbed_values);
    let delta = (perturbed_mean - base_mean) / step;
    let se = (base_var / base_values.len() as f64 + perturbed_var / perturbed_values.len() as f64)
        .sqrt()
        / step.abs();
    let half_width = 1.96 * se;
    Ok(SensitivityEstimate {
        parameter: parameter.as_str().to_string(),
        step,
        feature: feature.describe(),
        delta_estimate: delta,
        ci_low: delta - half_width,
        ci_high: delta + half_width,
        replicates: options.replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{MockBackend, MockPreset};

    #[test]
    fn planted_slope_recovered_exactly() {
        let backend = MockBackend::with_preset(MockPreset::LinearWeight);
        let estimate = sensitivity(
            &backend,
            &PipelineSettings::default(),
            &TemplateSet::default(),
            &ScenarioParams::default(),
            ParamName::TeamSize,
            5.0,
            &FeatureFn::MeanObjectiveWeight {
                category: "ENRM".into(),
            },
            &Taxonomies::default(),
            &SensitivityOptions::default(),
        )
        .unwrap();
        assert!(
            (estimate.delta_estimate - 0.01).abs() < 1e-12,
            "delta = {}",
            estimate.delta_estimate
        );
        // zero-noise mock means a degenerate interval
        assert_eq!(estimate.ci_low, estimate.delta_estimate);
        assert_eq!(estimate.ci_high, estimate.delta_estimate);
    }

    #[test]
    fn infeasible_direction_rejected() {
        let params = ScenarioParams {
            team_size: 1,
            ..ScenarioParams::default()
        };
        assert!(matches!(
            ParamName::TeamSize.perturb(&params, -5.0),
            Err(ExperimentError::InfeasibleDirection(_))
        ));
        assert!(matches!(
            ParamName::DelphiRounds.perturb(&ScenarioParams::default(), -3.0),
            Err(ExperimentError::InfeasibleDirection(_))
        ));
        assert!(matches!(
            ParamName::TeamSize.perturb(&ScenarioParams::default(), 0.5),
            Err(ExperimentError::InfeasibleDirection(_))
        ));
        assert!(matches!(
            ParamName::TeamSize.perturb(&ScenarioParams::default(), 0.0),
            Err(ExperimentError::ZeroStep)
        ));
    }

    #[test]
    fn insufficient_replicates_rejected() {
        let backend = MockBackend::standard();
        let options = SensitivityOptions {
            replicates: 1,
            ..SensitivityOptions::default()
        };
        assert!(matches!(
            sensitivity(
                &backend,
                &PipelineSettings::default(),
                &TemplateSet::default(),
                &ScenarioParams::default(),
                ParamName::TeamSize,
                5.0,
                &FeatureFn::WinningTotal,
                &Taxonomies::default(),
                &options,
            ),
            Err(ExperimentError::InsufficientReplicates(1))
        ));
    }

    #[test]
    fn presence_and_winning_total_features() {
        use crate::pipeline::Pipeline;
        let backend = MockBackend::standard();
        let record = Pipeline::new(&backend).run_full_scenario(&ScenarioParams::default(), 3);
        let taxonomies = Taxonomies::default();

        // presence is 1 exactly when the category maps to some avatar
        let present_category = taxonomies
            .stakeholder
            .classify(&format!(
                "{} {}",
                record.avatars[0].raw_role, record.avatars[0].profile
            ))
            .to_string();
        let feature = FeatureFn::Presence {
            category: present_category,
        };
        assert_eq!(feature.eval(&record, &taxonomies), Some(1.0));
        let absent = FeatureFn::Presence {
            category: "No Such Category".into(),
        };
        assert_eq!(absent.eval(&record, &taxonomies), Some(0.0));

        // winning total equals the max split-convention total
        let matrix = record.evaluation.as_ref().unwrap();
        let totals =
            crate::mcda::weighted_scores(matrix, crate::mcda::Convention::Split).unwrap();
        let max = totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(
            FeatureFn::WinningTotal.eval(&record, &taxonomies),
            Some(max)
        );
    }

    #[test]
    fn feature_parsing() {
        assert_eq!(
            FeatureFn::parse("mean_weight:ENRM").unwrap(),
            FeatureFn::MeanObjectiveWeight {
                category: "ENRM".into()
            }
        );
        assert_eq!(
            FeatureFn::parse("presence:Policy Maker")
                .unwrap()
                .describe(),
            "presence:Policy Maker"
        );
        assert!(FeatureFn::parse("nope").is_err());
    }

    #[test]
    fn budget_takes_fractional_steps() {
        let perturbed = ParamName::BudgetMCad
            .perturb(&ScenarioParams::default(), 12.5)
            .unwrap();
        assert_eq!(perturbed.budget_m_cad, 112.5);
    }
}
