//! Prompt templates and the growing conversation transcript.
//!
//! Five templates drive the workflow: the system framing, team creation, the
//! Delphi visioning round, the brainstorming session, and the evaluation
//! instruction. Templates carry named `{theta_*}` slots filled from
//! [`ScenarioParams`]; everything else is fixed text.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{Message, Role};

pub const RHO0: &str = "You are an expert in simulating a participatory planning process for the City of Montreal's future shared automated electric mobility systems (SAEMS). Suppose the planning activity occurs in the year 2024, and the planning horizon year is 2044.";

pub const RHO1: &str = "Create {theta_1} stakeholder(s) as their digital avatar(s).";

pub const RHO2_1: &str = "Concretely simulate the process and obtain the results from using a {theta_2_1}-round Delphi method to let them collaboratively identify issues, objectives, performance metrics, and decision weights for each round. Then synthesize the information to form 5 issues, 5 objectives, 10 performance metrics (0-10 for each metric), and decision weights (sum up to 1.0). Be clear which performance metric is for which objective.";

pub const RHO2_2: &str = "Concretely simulate a {theta_2_2}-min free-style brainstorming session to generate 3 mutually exclusive SAEMS alternatives with detailed specifications and the corresponding 20-year implementation plans with 4-year intervals (with a specific monetary amount for each interval) under a total budget of ${theta_2_3} million CAD (Net Present Value).";

pub const RHO3: &str = "Evaluate the alternatives using the previously identified performance metrics -- make best guess about values about the variables and probabilities collaboratively. Compare the final scores and recommend the best alternative.";

const PLACEHOLDERS: [&str; 4] = ["theta_1", "theta_2_1", "theta_2_2", "theta_2_3"];

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("template {template:?} still contains placeholder {{{placeholder}}} after rendering")]
    UnresolvedPlaceholder {
        template: TemplateId,
        placeholder: String,
    },
    #[error("template {template:?} contains unknown placeholder {{{placeholder}}}")]
    UnknownPlaceholder {
        template: TemplateId,
        placeholder: String,
    },
    #[error("cannot extend a transcript past the {0:?} stage")]
    StageOverflow(Stage),
    #[error("scenario parameter {name} must be strictly positive (got {value})")]
    NonPositiveParam { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Rho0,
    Rho1,
    Rho2_1,
    Rho2_2,
    Rho3,
}

impl TemplateId {
    pub const ALL: [TemplateId; 5] = [
        TemplateId::Rho0,
        TemplateId::Rho1,
        TemplateId::Rho2_1,
        TemplateId::Rho2_2,
        TemplateId::Rho3,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: String,
}

impl PromptTemplate {
    pub fn new(id: TemplateId, body: impl Into<String>) -> Result<Self, PromptError> {
        let template = PromptTemplate {
            id,
            body: body.into(),
        };
        template.check_placeholders()?;
        Ok(template)
    }

    fn check_placeholders(&self) -> Result<(), PromptError> {
        for found in find_placeholders(&self.body) {
            if !PLACEHOLDERS.contains(&found.as_str()) {
                return Err(PromptError::UnknownPlaceholder {
                    template: self.id,
                    placeholder: found,
                });
            }
        }
        Ok(())
    }
}

fn find_placeholders(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = body;
    while let Some(start) = rest.find('{') {
        let tail = &rest[start + 1..];
        match tail.find('}') {
            Some(end) => {
                out.push(tail[..end].to_string());
                rest = &tail[end + 1..];
            }
            None => break,
        }
    }
    out
}

/// The scenario parameter vector: team size, Delphi rounds, brainstorming
/// minutes, and the NPV budget in million CAD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub team_size: u32,
    pub delphi_rounds: u32,
    pub brainstorm_minutes: u32,
    pub budget_m_cad: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            team_size: 10,
            delphi_rounds: 3,
            brainstorm_minutes: 90,
            budget_m_cad: 100.0,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), PromptError> {
        let checks: [(&'static str, f64); 4] = [
            ("team_size", self.team_size as f64),
            ("delphi_rounds", self.delphi_rounds as f64),
            ("brainstorm_minutes", self.brainstorm_minutes as f64),
            ("budget_m_cad", self.budget_m_cad),
        ];
        for (name, value) in checks {
            if value <= 0.0 {
                return Err(PromptError::NonPositiveParam { name, value });
            }
        }
        Ok(())
    }

    /// Scenario label in the `S{team}-R{rounds}-D{minutes}-B{budget}` format.
    pub fn label(&self) -> String {
        format!(
            "S{}-R{}-D{}-B{}",
            self.team_size,
            self.delphi_rounds,
            self.brainstorm_minutes,
            format_amount(self.budget_m_cad)
        )
    }
}

/// Render a real without a trailing `.0` when it is integral.
pub fn format_amount(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

/// The full template set, either the built-in defaults or overrides loaded
/// from a JSON file keyed `rho0`..`rho3`.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    templates: HashMap<TemplateId, PromptTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        let mut templates = HashMap::new();
        for (id, body) in [
            (TemplateId::Rho0, RHO0),
            (TemplateId::Rho1, RHO1),
            (TemplateId::Rho2_1, RHO2_1),
            (TemplateId::Rho2_2, RHO2_2),
            (TemplateId::Rho3, RHO3),
        ] {
            templates.insert(id, PromptTemplate::new(id, body).expect("default template"));
        }
        TemplateSet { templates }
    }
}

impl TemplateSet {
    /// Apply overrides parsed from a `{"rho0": …, "rho1": …}` JSON document.
    /// Missing keys keep their defaults.
    pub fn with_overrides(overrides: &TemplateOverrides) -> Result<Self, PromptError> {
        let mut set = TemplateSet::default();
        let pairs = [
            (TemplateId::Rho0, overrides.rho0.as_ref()),
            (TemplateId::Rho1, overrides.rho1.as_ref()),
            (TemplateId::Rho2_1, overrides.rho2_1.as_ref()),
            (TemplateId::Rho2_2, overrides.rho2_2.as_ref()),
            (TemplateId::Rho3, overrides.rho3.as_ref()),
        ];
        for (id, body) in pairs {
            if let Some(body) = body {
                set.templates.insert(id, PromptTemplate::new(id, body)?);
            }
        }
        Ok(set)
    }

    pub fn get(&self, id: TemplateId) -> &PromptTemplate {
        &self.templates[&id]
    }

    /// Substitute every theta slot from `params`; the result must contain no
    /// unresolved placeholder.
    pub fn render(&self, id: TemplateId, params: &ScenarioParams) -> Result<String, PromptError> {
        params.validate()?;
        let template = self.get(id);
        let rendered = template
            .body
            .replace("{theta_1}", &params.team_size.to_string())
            .replace("{theta_2_1}", &params.delphi_rounds.to_string())
            .replace("{theta_2_2}", &params.brainstorm_minutes.to_string())
            .replace("{theta_2_3}", &format_amount(params.budget_m_cad));
        if let Some(placeholder) = find_placeholders(&rendered).into_iter().next() {
            return Err(PromptError::UnresolvedPlaceholder {
                template: id,
                placeholder,
            });
        }
        Ok(rendered)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct TemplateOverrides {
    pub rho0: Option<String>,
    pub rho1: Option<String>,
    #[serde(alias = "rho2_1")]
    pub rho2_1: Option<String>,
    #[serde(alias = "rho2_2")]
    pub rho2_2: Option<String>,
    pub rho3: Option<String>,
}

/// Workflow stages in order. Each stage's transcript is an exact prefix of the
/// next stage's transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Empty,
    TeamFormed,
    Visioned,
    Ideated,
    Evaluated,
}

impl Stage {
    pub fn next(self) -> Option<Stage> {
        match self {
            Stage::Empty => Some(Stage::TeamFormed),
            Stage::TeamFormed => Some(Stage::Visioned),
            Stage::Visioned => Some(Stage::Ideated),
            Stage::Ideated => Some(Stage::Evaluated),
            Stage::Evaluated => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Empty => "empty",
            Stage::TeamFormed => "team_formed",
            Stage::Visioned => "visioned",
            Stage::Ideated => "ideated",
            Stage::Evaluated => "evaluated",
        };
        f.write_str(s)
    }
}

/// The ordered conversation tuple accumulated across pipeline steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub stage: Stage,
}

impl Transcript {
    /// A fresh transcript holding only the system instruction.
    pub fn with_system(system_prompt: impl Into<String>) -> Self {
        Transcript {
            messages: vec![Message::system(system_prompt)],
            stage: Stage::Empty,
        }
    }

    /// Append one user prompt and its assistant reply, advancing the stage.
    /// The original transcript is left untouched.
    pub fn extend(
        &self,
        user_prompt: impl Into<String>,
        assistant_reply: impl Into<String>,
    ) -> Result<Transcript, PromptError> {
        let next_stage = self
            .stage
            .next()
            .ok_or(PromptError::StageOverflow(self.stage))?;
        let mut messages = self.messages.clone();
        messages.push(Message::user(user_prompt));
        messages.push(Message::assistant(assistant_reply));
        Ok(Transcript {
            messages,
            stage: next_stage,
        })
    }

    /// True when `self`'s message list is an exact prefix of `later`'s.
    pub fn is_prefix_of(&self, later: &Transcript) -> bool {
        later.messages.len() >= self.messages.len()
            && later.messages[..self.messages.len()] == self.messages[..]
    }

    /// Roles alternate user/assistant after the single leading system message.
    pub fn roles_valid(&self) -> bool {
        if self.messages.first().map(|m| m.role) != Some(Role::System) {
            return false;
        }
        self.messages[1..].iter().enumerate().all(|(i, m)| {
            let expected = if i % 2 == 0 {
                Role::User
            } else {
                Role::Assistant
            };
            m.role == expected
        })
    }
}

/// Fenced-JSON output contract appended to a step prompt when structured
/// output is enabled. Idempotent: a prompt already carrying the suffix is
/// returned unchanged.
pub fn structured_suffix(step: Stage, enabled: bool) -> String {
    if !enabled {
        return String::new();
    }
    let schema = match step {
        Stage::TeamFormed => Some((
            "avatars.v1",
            r#"{"stakeholders": [{"name": "...", "role": "...", "profile": "..."}]}"#,
        )),
        Stage::Visioned => Some((
            "delphi.v1",
            r#"{"issues": ["..."], "constraints": [{"kind": "soft|hard", "text": "..."}], "objectives": [{"id": "...", "name": "...", "weight": 0.0, "metrics": [{"id": "...", "name": "..."}]}]}"#,
        )),
        Stage::Ideated => Some((
            "alternatives.v1",
            r#"{"alternatives": [{"id": "...", "name": "...", "description": "...", "specifications": ["..."], "plan": [{"start_year": 2024, "end_year": 2028, "cost_m_cad": 0.0, "activities": "..."}]}]}"#,
        )),
        Stage::Evaluated => Some((
            "evaluation.v1",
            r#"{"scores": [{"alternative_id": "...", "cells": [{"metric_id": "...", "score": 0}], "reported_total": 0.0}], "recommendation": "..."}"#,
        )),
        Stage::Empty => None,
    };
    match schema {
        Some((name, shape)) => format!(
            "\n\nIn addition to the prose, emit exactly one fenced ```json code block conforming to schema {name}: {shape}"
        ),
        None => String::new(),
    }
}

/// Append the structured suffix for `step` unless the prompt already ends
/// with it.
pub fn with_structured_suffix(prompt: &str, step: Stage, enabled: bool) -> String {
    let suffix = structured_suffix(step, enabled);
    if suffix.is_empty() || prompt.contains(&suffix) {
        return prompt.to_string();
    }
    format!("{prompt}{suffix}")
}
