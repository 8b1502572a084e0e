//! The four-step planning workflow.
//!
//! Form a synthetic stakeholder team, run the Delphi visioning round,
//! brainstorm budget-constrained alternatives, and evaluate them on the agreed
//! metrics. Each step extends the shared transcript, so step k's conversation
//! is an exact prefix of step k+1's. A run that fails any step is recorded as
//! dropped with diagnostics; it never aborts a batch.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{Backend, BackendError, FinishReason, GenerationRequest, GenerationResponse};
use crate::extract::{
    self, DelphiOutcome, DesignAlternative, ExtractError, ExtractOptions, PlanningOutcome,
    StakeholderAvatar,
};
use crate::mcda::{EvaluationMatrix, McdaError};
use crate::prompt::{
    with_structured_suffix, PromptError, ScenarioParams, Stage, TemplateId, TemplateSet, Transcript,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("extraction failed at {step}: {source}")]
    Extraction {
        step: &'static str,
        source: ExtractError,
    },
    #[error(transparent)]
    Matrix(#[from] McdaError),
    #[error("model refused at {step}: asked a question instead of generating")]
    Refusal { step: &'static str },
    #[error("{step} produced {found} {what}, expected {expected}")]
    CountViolation {
        step: &'static str,
        what: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("transcript at stage {found} cannot run step {step}")]
    WrongStage { step: &'static str, found: Stage },
}

/// How many times a refused step is re-issued. The default of zero drops the
/// run on first refusal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_retries: u32,
}

/// Record counts the visioning step must yield.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    pub issues: usize,
    pub objectives: usize,
    pub metrics: usize,
}

impl Default for ExpectedCounts {
    fn default() -> Self {
        ExpectedCounts {
            issues: 5,
            objectives: 5,
            metrics: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineSettings {
    pub model_id: String,
    pub temperature: f64,
    pub structured_output: bool,
    pub retry: RetryPolicy,
    pub extract: ExtractOptions,
    pub counts: ExpectedCounts,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            model_id: "gpt-4-turbo".into(),
            temperature: 1.0,
            structured_output: true,
            retry: RetryPolicy::default(),
            extract: ExtractOptions::default(),
            counts: ExpectedCounts::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub stage: String,
    pub message: String,
}

/// One complete simulation run: parameters, conversation, extracted outcome,
/// evaluation, and diagnostics. Dropped runs carry no outcome objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub seed: i64,
    pub params: ScenarioParams,
    pub transcript: Transcript,
    /// Parsed avatar team; cleared on dropped runs so a dropped record holds
    /// no partial outcome objects.
    pub avatars: Vec<StakeholderAvatar>,
    pub outcome: Option<PlanningOutcome>,
    pub evaluation: Option<EvaluationMatrix>,
    pub diagnostics: Vec<Diagnostic>,
    pub dropped: bool,
}

impl RunRecord {
    pub fn to_json_string(&self) -> String {
        let mut body = serde_json::to_string_pretty(self).expect("run record serializes");
        body.push('\n');
        body
    }

    /// dropped implies no outcome; a kept run has both outcome and evaluation.
    pub fn invariants_hold(&self) -> bool {
        if self.dropped {
            self.outcome.is_none() && self.evaluation.is_none() && self.avatars.is_empty()
        } else {
            self.outcome.is_some() && self.evaluation.is_some()
        }
    }
}

pub fn run_id_for_seed(seed: i64) -> String {
    if seed >= 0 {
        format!("run-{seed:06}")
    } else {
        format!("run-m{:06}", -seed)
    }
}

fn ends_interrogative(text: &str) -> bool {
    text.trim_end().ends_with('?')
}

/// The refusal classifier: zero extracted records and a reply whose final
/// sentence is a question.
fn is_refusal(response: &GenerationResponse, records_found: usize) -> bool {
    response.finish_reason == FinishReason::Refusal
        || (records_found == 0 && ends_interrogative(&response.content))
}

pub struct Pipeline<'a> {
    backend: &'a dyn Backend,
    templates: TemplateSet,
    pub settings: PipelineSettings,
}

impl<'a> Pipeline<'a> {
    pub fn new(backend: &'a dyn Backend) -> Self {
        Pipeline {
            backend,
            templates: TemplateSet::default(),
            settings: PipelineSettings::default(),
        }
    }

    pub fn with_settings(mut self, settings: PipelineSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_templates(mut self, templates: TemplateSet) -> Self {
        self.templates = templates;
        self
    }

    fn complete(
        &self,
        transcript: &Transcript,
        user_prompt: &str,
        seed: i64,
    ) -> Result<GenerationResponse, PipelineError> {
        let mut messages = transcript.messages.clone();
        messages.push(crate::backend::Message::user(user_prompt));
        let request = GenerationRequest::new(messages, self.settings.model_id.clone())
            .with_temperature(self.settings.temperature)
            .with_seed(seed);
        let response = self.backend.complete(&request)?;
        response.validate()?;
        Ok(response)
    }

    fn step_prompt(
        &self,
        id: TemplateId,
        params: &ScenarioParams,
        stage: Stage,
    ) -> Result<String, PipelineError> {
        let rendered = self.templates.render(id, params)?;
        Ok(with_structured_suffix(
            &rendered,
            stage,
            self.settings.structured_output,
        ))
    }

    fn fence_diagnostic(&self, step: &'static str, reply: &str, diagnostics: &mut Vec<Diagnostic>) {
        if self.settings.structured_output && !extract::has_valid_fence(reply) {
            diagnostics.push(Diagnostic {
                severity: Severity::Info,
                stage: step.into(),
                message: "no valid fenced JSON block; lenient parser used".into(),
            });
        }
    }

    /// Step 1: create the avatar team.
    pub fn form_team(
        &self,
        params: &ScenarioParams,
        seed: i64,
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<(Transcript, Vec<StakeholderAvatar>), PipelineError> {
        params.validate()?;
        let system = self.templates.render(TemplateId::Rho0, params)?;
        let transcript = Transcript::with_system(system);
        let user = self.step_prompt(TemplateId::Rho1, params, Stage::TeamFormed)?;
        let response = self.complete(&transcript, &user, seed)?;
        let found = extract::parse_avatars_any_count(&response.content)
            .map(|a| a.len())
            .unwrap_or(0);
        if is_refusal(&response, found) {
            return Err(PipelineError::Refusal { step: "team" });
        }
        let avatars = extract::parse_avatars(&response.content, params.team_size as usize)
            .map_err(|source| PipelineError::Extraction {
                step: "team",
                source,
            })?;
        self.fence_diagnostic("team", &response.content, diagnostics);
        Ok((transcript.extend(user, response.content)?, avatars))
    }

    /// Step 2: Delphi visioning round.
    pub fn run_delphi(
        &self,
        transcript: &Transcript,
        params: &ScenarioParams,
        seed: i64,
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<(Transcript, DelphiOutcome), PipelineError> {
        if transcript.stage != Stage::TeamFormed {
            return Err(PipelineError::WrongStage {
                step: "delphi",
                found: transcript.stage,
            });
        }
        let user = self.step_prompt(TemplateId::Rho2_1, params, Stage::Visioned)?;
        let response = self.complete(transcript, &user, seed)?;
        let parsed = extract::parse_delphi(&response.content, &self.settings.extract);
        if is_refusal(
            &response,
            parsed.as_ref().map(|o| o.objectives.len()).unwrap_or(0),
        ) {
            return Err(PipelineError::Refusal { step: "delphi" });
        }
        let outcome = parsed.map_err(|source| PipelineError::Extraction {
            step: "delphi",
            source,
        })?;
        let counts = &self.settings.counts;
        for (what, found, expected) in [
            ("issues", outcome.issues.len(), counts.issues),
            ("objectives", outcome.objectives.len(), counts.objectives),
            ("metrics", outcome.metrics.len(), counts.metrics),
        ] {
            if found != expected {
                return Err(PipelineError::CountViolation {
                    step: "delphi",
                    what,
                    found,
                    expected,
                });
            }
        }
        self.fence_diagnostic("delphi", &response.content, diagnostics);
        Ok((transcript.extend(user, response.content)?, outcome))
    }

    /// Step 3: free-style brainstorming of design alternatives.
    pub fn run_brainstorm(
        &self,
        transcript: &Transcript,
        params: &ScenarioParams,
        seed: i64,
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<(Transcript, Vec<DesignAlternative>), PipelineError> {
        if transcript.stage != Stage::Visioned {
            return Err(PipelineError::WrongStage {
                step: "ideation",
                found: transcript.stage,
            });
        }
        let user = self.step_prompt(TemplateId::Rho2_2, params, Stage::Ideated)?;
        let response = self.complete(transcript, &user, seed)?;
        let parsed = extract::parse_alternatives(
            &response.content,
            params.budget_m_cad,
            &self.settings.extract,
        );
        if is_refusal(
            &response,
            parsed.as_ref().map(|p| p.alternatives.len()).unwrap_or(0),
        ) {
            return Err(PipelineError::Refusal { step: "ideation" });
        }
        let parsed = parsed.map_err(|source| PipelineError::Extraction {
            step: "ideation",
            source,
        })?;
        for message in parsed.diagnostics {
            diagnostics.push(Diagnostic {
                severity: Severity::Warning,
                stage: "ideation".into(),
                message,
            });
        }
        self.fence_diagnostic("ideation", &response.content, diagnostics);
        Ok((
            transcript.extend(user, response.content)?,
            parsed.alternatives,
        ))
    }

    /// Step 4: multi-criteria evaluation of the alternatives.
    pub fn run_evaluation(
        &self,
        transcript: &Transcript,
        params: &ScenarioParams,
        delphi: &DelphiOutcome,
        alternatives: &[DesignAlternative],
        seed: i64,
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<(Transcript, EvaluationMatrix), PipelineError> {
        if transcript.stage != Stage::Ideated {
            return Err(PipelineError::WrongStage {
                step: "evaluation",
                found: transcript.stage,
            });
        }
        let user = self.step_prompt(TemplateId::Rho3, params, Stage::Evaluated)?;
        let response = self.complete(transcript, &user, seed)?;
        let parsed = extract::parse_evaluation(
            &response.content,
            &delphi.objectives,
            &delphi.metrics,
            alternatives,
        );
        if is_refusal(&response, parsed.as_ref().map(|_| 1).unwrap_or(0)) {
            return Err(PipelineError::Refusal { step: "evaluation" });
        }
        let matrix = parsed.map_err(|source| PipelineError::Extraction {
            step: "evaluation",
            source,
        })?;
        matrix.validate()?;
        self.fence_diagnostic("evaluation", &response.content, diagnostics);
        Ok((transcript.extend(user, response.content)?, matrix))
    }

    /// Compose all four steps into a [`RunRecord`]. Refused steps are retried
    /// per the policy; errors end the run as dropped rather than propagating.
    pub fn run_full_scenario(&self, params: &ScenarioParams, seed: i64) -> RunRecord {
        let mut diagnostics = Vec::new();
        let result = self.try_run(params, seed, &mut diagnostics);
        match result {
            Ok((transcript, avatars, outcome, evaluation)) => RunRecord {
                run_id: run_id_for_seed(seed),
                seed,
                params: *params,
                transcript,
                avatars,
                outcome: Some(outcome),
                evaluation: Some(evaluation),
                diagnostics,
                dropped: false,
            },
            Err((transcript, error)) => {
                diagnostics.push(Diagnostic {
                    severity: Severity::Error,
                    stage: "run".into(),
                    message: error.to_string(),
                });
                RunRecord {
                    run_id: run_id_for_seed(seed),
                    seed,
                    params: *params,
                    transcript: transcript
                        .unwrap_or_else(|| Transcript::with_system("(unavailable)")),
                    avatars: Vec::new(),
                    outcome: None,
                    evaluation: None,
                    diagnostics,
                    dropped: true,
                }
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn try_run(
        &self,
        params: &ScenarioParams,
        seed: i64,
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<
        (
            Transcript,
            Vec<StakeholderAvatar>,
            PlanningOutcome,
            EvaluationMatrix,
        ),
        (Option<Transcript>, PipelineError),
    > {
        let max = self.settings.retry.max_retries;

        let (transcript, avatars) = retry(max, diagnostics, "team", |d| {
            self.form_team(params, seed, d)
        })
        .map_err(|e| (None, e))?;

        let (transcript, delphi) = retry(max, diagnostics, "delphi", |d| {
            self.run_delphi(&transcript, params, seed, d)
        })
        .map_err(|e| (Some(transcript.clone()), e))?;

        let (transcript, alternatives) = retry(max, diagnostics, "ideation", |d| {
            self.run_brainstorm(&transcript, params, seed, d)
        })
        .map_err(|e| (Some(transcript.clone()), e))?;

        let (transcript, evaluation) = retry(max, diagnostics, "evaluation", |d| {
            self.run_evaluation(&transcript, params, &delphi, &alternatives, seed, d)
        })
        .map_err(|e| (Some(transcript.clone()), e))?;

        let outcome = PlanningOutcome {
            issues: delphi.issues,
            constraints: delphi.constraints,
            objectives: delphi.objectives,
            metrics: delphi.metrics,
            alternatives,
        };
        Ok((transcript, avatars, outcome, evaluation))
    }
}

fn retry<T>(
    max_retries: u32,
    diagnostics: &mut Vec<Diagnostic>,
    step: &'static str,
    mut call: impl FnMut(&mut Vec<Diagnostic>) -> Result<T, PipelineError>,
) -> Result<T, PipelineError> {
    let mut attempt = 0;
    loop {
        match call(diagnostics) {
            Err(PipelineError::Refusal { .. }) if attempt < max_retries => {
                attempt += 1;
                diagnostics.push(Diagnostic {
                    severity: Severity::Warning,
                    stage: step.into(),
                    message: format!("refusal; retry {attempt} of {max_retries}"),
                });
            }
            other => return other,
        }
    }
}

/// Convenience wrapper running one scenario with default settings.
pub fn run_full_scenario(
    params: &ScenarioParams,
    seed: i64,
    backend: &dyn Backend,
    retry_policy: RetryPolicy,
) -> RunRecord {
    let settings = PipelineSettings {
        retry: retry_policy,
        ..PipelineSettings::default()
    };
    Pipeline::new(backend)
        .with_settings(settings)
        .run_full_scenario(params, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{MockBackend, ScriptRule};

    fn base() -> ScenarioParams {
        ScenarioParams::default()
    }

    #[test]
    fn full_scenario_on_mock_is_valid_and_deterministic() {
        let backend = MockBackend::standard();
        let pipeline = Pipeline::new(&backend);
        let record = pipeline.run_full_scenario(&base(), 42);
        assert!(!record.dropped, "diagnostics: {:?}", record.diagnostics);
        assert!(record.invariants_hold());
        let outcome = record.outcome.as_ref().unwrap();
        assert_eq!(outcome.issues.len(), 5);
        assert_eq!(outcome.objectives.len(), 5);
        assert_eq!(outcome.metrics.len(), 10);
        assert_eq!(outcome.alternatives.len(), 3);
        let weight_sum: f64 = outcome.objectives.iter().map(|o| o.weight).sum();
        assert!((weight_sum - 1.0).abs() < 1e-9);
        for alternative in &outcome.alternatives {
            assert!(alternative.plan_total() <= base().budget_m_cad + 1e-9);
        }
        let matrix = record.evaluation.as_ref().unwrap();
        assert_eq!(matrix.scores.len(), 3);
        assert_eq!(matrix.scores[0].len(), 10);
        assert_eq!(record.transcript.stage, Stage::Evaluated);
        assert!(record.transcript.roles_valid());

        // byte-identical rerun
        let again = pipeline.run_full_scenario(&base(), 42);
        assert_eq!(record.to_json_string(), again.to_json_string());
    }

    #[test]
    fn transcript_prefixes_across_steps() {
        let backend = MockBackend::standard();
        let pipeline = Pipeline::new(&backend);
        let mut diags = Vec::new();
        let (t1, avatars) = pipeline.form_team(&base(), 1, &mut diags).unwrap();
        assert_eq!(avatars.len(), 10);
        let (t2, delphi) = pipeline.run_delphi(&t1, &base(), 1, &mut diags).unwrap();
        assert!(t1.is_prefix_of(&t2));
        let (t3, alternatives) = pipeline
            .run_brainstorm(&t2, &base(), 1, &mut diags)
            .unwrap();
        assert!(t2.is_prefix_of(&t3));
        let (t4, _matrix) = pipeline
            .run_evaluation(&t3, &base(), &delphi, &alternatives, 1, &mut diags)
            .unwrap();
        assert!(t3.is_prefix_of(&t4));
        assert_eq!(t4.messages.len(), 9);
    }

    #[test]
    fn refusal_with_zero_retries_drops() {
        let backend = MockBackend::refusing_first(usize::MAX);
        let pipeline = Pipeline::new(&backend);
        let record = pipeline.run_full_scenario(&base(), 0);
        assert!(record.dropped);
        assert!(record.outcome.is_none());
        assert!(record.evaluation.is_none());
        assert!(record
            .diagnostics
            .iter()
            .any(|d| d.message.contains("refused")));
    }

    #[test]
    fn refusal_recovered_with_one_retry() {
        let backend = MockBackend::refusing_first(1);
        let settings = PipelineSettings {
            retry: RetryPolicy { max_retries: 1 },
            ..PipelineSettings::default()
        };
        let pipeline = Pipeline::new(&backend).with_settings(settings);
        let record = pipeline.run_full_scenario(&base(), 0);
        assert!(!record.dropped);
        assert!(record
            .diagnostics
            .iter()
            .any(|d| d.message.contains("retry 1 of 1")));
    }

    #[test]
    fn team_size_one_works() {
        let backend = MockBackend::standard();
        let pipeline = Pipeline::new(&backend);
        let mut diags = Vec::new();
        let params = ScenarioParams {
            team_size: 1,
            ..base()
        };
        let (_, avatars) = pipeline.form_team(&params, 9, &mut diags).unwrap();
        assert_eq!(avatars.len(), 1);
    }

    #[test]
    fn scripted_out_of_range_score_drops_run() {
        // standard mock for the first three steps, scripted bad evaluation
        let backend = MockBackend::standard().add_rule(ScriptRule {
            system: None,
            user: None,
            user_contains: Some("Evaluate the alternatives".into()),
            replies: vec![
                "```json\n{\"scores\": [{\"alternative_id\": \"x\", \"cells\": [{\"metric_id\": \"m\", \"score\": 11}]}]}\n```".into(),
            ],
            finish: None,
        });
        let pipeline = Pipeline::new(&backend);
        let record = pipeline.run_full_scenario(&base(), 0);
        assert!(record.dropped);
        let joined = record
            .diagnostics
            .iter()
            .map(|d| d.message.clone())
            .collect::<Vec<_>>()
            .join("\n");
        assert!(joined.contains("outside [0, 10]"), "{joined}");
    }

    #[test]
    fn wrong_stage_rejected() {
        let backend = MockBackend::standard();
        let pipeline = Pipeline::new(&backend);
        let transcript = Transcript::with_system("sys");
        let mut diags = Vec::new();
        assert!(matches!(
            pipeline.run_delphi(&transcript, &base(), 0, &mut diags),
            Err(PipelineError::WrongStage { .. })
        ));
    }
}
