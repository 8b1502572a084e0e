//! Deterministic offline backend.
//!
//! Replies are generated from a ChaCha stream keyed on (step tag, request
//! seed), so identical requests always yield identical text. The generator
//! reads the scenario parameters straight out of the prompt text, which keeps
//! the mock decoupled from the pipeline: perturbing a parameter in the prompt
//! perturbs the generated content the same way a live model would.

use std::sync::Mutex;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::backend::{
    Backend, BackendError, FinishReason, GenerationRequest, GenerationResponse, Message, Role,
};
use crate::extract::schema::{
    AlternativeEntry, AlternativesV1, AvatarEntry, AvatarsV1, ConstraintEntry, DelphiV1,
    EvaluationV1, MetricEntry, ObjectiveEntry, PlanEntry, ScoreCell, ScoreRow,
};
use crate::extract::{slug, ConstraintKind};

/// Workflow step a request belongs to, inferred from the last user prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepTag {
    Team,
    Delphi,
    Ideation,
    Evaluation,
    Generic,
}

impl StepTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepTag::Team => "team",
            StepTag::Delphi => "delphi",
            StepTag::Ideation => "ideation",
            StepTag::Evaluation => "evaluation",
            StepTag::Generic => "generic",
        }
    }

    pub fn infer(messages: &[Message]) -> StepTag {
        let last_user = messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("");
        if last_user.contains("stakeholder(s) as their digital avatar(s)") {
            StepTag::Team
        } else if last_user.contains("Delphi") {
            StepTag::Delphi
        } else if last_user.contains("brainstorming") {
            StepTag::Ideation
        } else if last_user.contains("Evaluate the alternatives") {
            StepTag::Evaluation
        } else {
            StepTag::Generic
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MockPreset {
    /// Valid structured output at every step, varying with the seed.
    #[default]
    Standard,
    /// Ask a clarifying question instead of producing the team.
    Refusal,
    /// Standard, except the first Delphi objective's weight is exactly
    /// 0.01 x team size with no noise. Used for sensitivity calibration.
    LinearWeight,
}

/// Exact or substring matcher mapping a request onto scripted replies.
/// Successive matching calls consume successive replies; the last one repeats.
#[derive(Debug, Clone, Deserialize)]
pub struct ScriptRule {
    #[serde(default)]
    pub system: Option<String>,
    #[serde(default)]
    pub user: Option<String>,
    #[serde(default)]
    pub user_contains: Option<String>,
    pub replies: Vec<String>,
    #[serde(default)]
    pub finish: Option<FinishReason>,
}

impl ScriptRule {
    fn matches(&self, request: &GenerationRequest) -> bool {
        let system = request
            .messages
            .first()
            .filter(|m| m.role == Role::System)
            .map(|m| m.content.as_str())
            .unwrap_or("");
        let last_user = request
            .messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("");
        self.system.as_deref().is_none_or(|s| s == system)
            && self.user.as_deref().is_none_or(|u| u == last_user)
            && self
                .user_contains
                .as_deref()
                .is_none_or(|u| last_user.contains(u))
    }
}

pub struct MockBackend {
    preset: MockPreset,
    rules: Vec<ScriptRule>,
    /// How many initial team-step calls refuse before behaving (refusal preset).
    refuse_attempts: usize,
    rule_calls: Mutex<Vec<usize>>,
    refusal_calls: Mutex<usize>,
}

impl Default for MockBackend {
    fn default() -> Self {
        MockBackend::standard()
    }
}

impl MockBackend {
    pub fn standard() -> Self {
        Self::with_preset(MockPreset::Standard)
    }

    pub fn with_preset(preset: MockPreset) -> Self {
        MockBackend {
            preset,
            rules: Vec::new(),
            refuse_attempts: usize::MAX,
            rule_calls: Mutex::new(Vec::new()),
            refusal_calls: Mutex::new(0),
        }
    }

    /// Refuse the first `attempts` team-step calls, then answer normally.
    pub fn refusing_first(attempts: usize) -> Self {
        MockBackend {
            refuse_attempts: attempts,
            ..Self::with_preset(MockPreset::Refusal)
        }
    }

    pub fn with_rules(rules: Vec<ScriptRule>) -> Self {
        MockBackend {
            rule_calls: Mutex::new(vec![0; rules.len()]),
            rules,
            ..Self::standard()
        }
    }

    pub fn add_rule(mut self, rule: ScriptRule) -> Self {
        self.rules.push(rule);
        self.rule_calls = Mutex::new(vec![0; self.rules.len()]);
        self
    }
}

impl Backend for MockBackend {
    fn complete(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        request.validate()?;
        for (index, rule) in self.rules.iter().enumerate() {
            if rule.matches(request) {
                let mut calls = self.rule_calls.lock().expect("rule counter");
                let call = calls[index];
                calls[index] += 1;
                let reply = rule
                    .replies
                    .get(call)
                    .or_else(|| rule.replies.last())
                    .cloned()
                    .unwrap_or_default();
                let mut response = GenerationResponse::stop(reply);
                if let Some(finish) = rule.finish {
                    response.finish_reason = finish;
                }
                return Ok(response);
            }
        }

        let step = StepTag::infer(&request.messages);
        if self.preset == MockPreset::Refusal && step == StepTag::Team {
            let mut calls = self.refusal_calls.lock().expect("refusal counter");
            if *calls < self.refuse_attempts {
                *calls += 1;
                return Ok(GenerationResponse::stop(
                    "Could you clarify the stakeholder groups and the level of detail you want for each digital avatar?",
                ));
            }
        }

        let seed = request.seed.unwrap_or(0);
        let params = PromptParams::parse(&request.messages);
        let text = match step {
            StepTag::Team => team_reply(seed, &params),
            StepTag::Delphi => delphi_reply(seed, &params, self.preset),
            StepTag::Ideation => ideation_reply(seed, &params),
            StepTag::Evaluation => evaluation_reply(seed, &params, self.preset),
            StepTag::Generic => format!("Acknowledged (ref {}).", &request.digest()[..12]),
        };
        Ok(GenerationResponse::stop(text))
    }

    fn name(&self) -> &str {
        "mock"
    }
}

/// Scenario parameters recovered from the conversation text.
#[derive(Debug, Clone, Copy)]
struct PromptParams {
    team_size: u32,
    rounds: u32,
    budget: f64,
}

impl PromptParams {
    fn parse(messages: &[Message]) -> PromptParams {
        let text: String = messages
            .iter()
            .filter(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        let capture = |pattern: &str| -> Option<f64> {
            Regex::new(pattern)
                .ok()?
                .captures(&text)?
                .get(1)?
                .as_str()
                .parse()
                .ok()
        };
        PromptParams {
            team_size: capture(r"Create (\d+) stakeholder").unwrap_or(10.0) as u32,
            rounds: capture(r"(\d+)-round").unwrap_or(3.0) as u32,
            budget: capture(r"\$\s*([0-9]+(?:\.[0-9]+)?) million CAD").unwrap_or(100.0),
        }
    }
}

fn rng_for(step: StepTag, seed: i64) -> ChaCha8Rng {
    let hash = Sha256::digest(format!("{}:{}", step.as_str(), seed).as_bytes());
    let mut key = [0u8; 8];
    key.copy_from_slice(&hash[..8]);
    ChaCha8Rng::seed_from_u64(u64::from_le_bytes(key))
}

fn fenced(prose: &str, json: &impl serde::Serialize) -> String {
    format!(
        "{prose}\n\n```json\n{}\n```\n",
        serde_json::to_string_pretty(json).expect("mock payload serializes")
    )
}

const FIRST_NAMES: [&str; 16] = [
    "Jean",
    "Marie",
    "Arjun",
    "Lila",
    "Elijah",
    "Amira",
    "Carlos",
    "Sophie",
    "Annette",
    "Jamal",
    "Noah",
    "Chen",
    "Fatima",
    "Luc",
    "Priya",
    "Gabrielle",
];

const LAST_NAMES: [&str; 16] = [
    "Beaulieu", "Tremblay", "Patel", "Dupuis", "Smith", "Hussein", "Gomez", "Labelle", "Giroux",
    "Carter", "Nguyen", "Roy", "Gagnon", "Bouchard", "Singh", "Cote",
];

const ROLES: [(&str, &str); 14] = [
    (
        "City Planner",
        "An experienced urban planner specializing in transportation infrastructure and land use.",
    ),
    (
        "Transport Engineer",
        "A professional designing transportation facilities such as signal timing and intersection channelization.",
    ),
    (
        "Policy Maker",
        "A government official developing policies and investments for the mobility network.",
    ),
    (
        "Environmental Advocate",
        "A non-profit representative dedicated to reducing carbon emissions and promoting green transportation.",
    ),
    (
        "Community Representative",
        "A respected member of a local community group voicing resident concerns.",
    ),
    (
        "Technology Entrepreneur",
        "A startup founder specializing in shared autonomous vehicle technology.",
    ),
    (
        "Academic Researcher",
        "A scientist researching the impacts of shared automated electric mobility on urban environments.",
    ),
    (
        "Local Business Owner",
        "Represents local businesses focused on commerce, foot traffic and parking impacts.",
    ),
    (
        "Public Transit Authority Representative",
        "An official from the public transportation agency integrating the service with existing transit networks.",
    ),
    (
        "Public Safety Official",
        "An expert on emergency response, accident prevention and security measures.",
    ),
    (
        "Senior Citizen Representative",
        "An advocate for older adults, their mobility needs and accessibility concerns.",
    ),
    (
        "Youth Advocate",
        "A young community organizer pushing for innovative digital engagement.",
    ),
    (
        "Accessibility Advocate",
        "A disability rights advocate ensuring inclusive design for riders of all abilities.",
    ),
    (
        "Tourism Director",
        "Promotes the city as a destination and better transport links for visitors.",
    ),
];

fn team_reply(seed: i64, params: &PromptParams) -> String {
    let mut rng = rng_for(StepTag::Team, seed);
    let stakeholders: Vec<AvatarEntry> = (0..params.team_size)
        .map(|_| {
            let (role, profile) = ROLES[rng.gen_range(0..ROLES.len())];
            let name = format!(
                "{} {}",
                FIRST_NAMES[rng.gen_range(0..FIRST_NAMES.len())],
                LAST_NAMES[rng.gen_range(0..LAST_NAMES.len())]
            );
            AvatarEntry {
                name,
                role: role.to_string(),
                profile: profile.to_string(),
            }
        })
        .collect();
    fenced(
        &format!(
            "Here are {} stakeholder avatars for the participatory planning simulation.",
            params.team_size
        ),
        &AvatarsV1 { stakeholders },
    )
}

const OBJECTIVES: [(&str, [&str; 2]); 10] = [
    (
        "Minimize Environmental Footprint",
        ["GHG emissions reduction", "Energy efficiency"],
    ),
    (
        "Improve Traffic Flow and Reduce Congestion",
        [
            "Average travel time reduction",
            "Congestion reduction percentage",
        ],
    ),
    (
        "Enhance Safety and Regulatory Compliance",
        ["Accident rate reduction", "Perceived safety rating"],
    ),
    (
        "Enhance Mobility Access",
        ["Coverage ratio", "Service availability"],
    ),
    (
        "Integrate with Public Transit",
        ["Transit connectivity", "Multimodal transfer rate"],
    ),
    (
        "Foster Economic Growth",
        ["Jobs created", "Return on investment"],
    ),
    (
        "Build Public Trust and Adoption",
        ["Public approval rating", "User adoption rate"],
    ),
    (
        "Strengthen System Reliability and Resilience",
        ["System uptime", "Emergency response time"],
    ),
    (
        "Advance Equity and Inclusivity",
        [
            "Accessibility index for disadvantaged groups",
            "Affordability index",
        ],
    ),
    (
        "Utilize Existing Infrastructure Efficiently",
        ["Charging station utilization", "Facility utilization rate"],
    ),
];

const ISSUES: [&str; 8] = [
    "Traffic congestion",
    "Aging infrastructure",
    "Service coverage gaps",
    "Limited charging capacity",
    "Air quality concerns",
    "Transit affordability",
    "Road safety incidents",
    "Data privacy concerns",
];

/// Which objective pool entries a run uses, and their weights.
fn delphi_selection(seed: i64, params: &PromptParams, preset: MockPreset) -> Vec<(usize, f64)> {
    if preset == MockPreset::LinearWeight {
        // fixed objectives, first weight exactly 0.01 x team size, zero noise
        let first = 0.01 * params.team_size as f64;
        let rest = (1.0 - first) / 4.0;
        return vec![(0, first), (1, rest), (3, rest), (5, rest), (7, rest)];
    }
    let mut rng = rng_for(StepTag::Delphi, seed);
    let mut indices: Vec<usize> = (0..OBJECTIVES.len()).collect();
    indices.shuffle(&mut rng);
    indices.truncate(5);
    // composition of 20 into 5 parts >= 1 gives weights on a 0.05 grid
    let mut cuts: Vec<u32> = Vec::new();
    while cuts.len() < 4 {
        let cut = rng.gen_range(1..20u32);
        if !cuts.contains(&cut) {
            cuts.push(cut);
        }
    }
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(5);
    let mut previous = 0;
    for cut in &cuts {
        parts.push(cut - previous);
        previous = *cut;
    }
    parts.push(20 - previous);
    indices
        .into_iter()
        .zip(parts.into_iter().map(|p| p as f64 / 20.0))
        .collect()
}

fn delphi_payload(seed: i64, params: &PromptParams, preset: MockPreset) -> DelphiV1 {
    let selection = delphi_selection(seed, params, preset);
    let mut rng = rng_for(StepTag::Delphi, seed.wrapping_add(1));
    let mut issue_pool: Vec<&str> = ISSUES.to_vec();
    issue_pool.shuffle(&mut rng);
    let objectives = selection
        .iter()
        .map(|(index, weight)| {
            let (name, metric_names) = OBJECTIVES[*index];
            ObjectiveEntry {
                id: Some(slug(name)),
                name: name.to_string(),
                weight: *weight,
                metrics: metric_names
                    .iter()
                    .map(|m| MetricEntry {
                        id: Some(slug(m)),
                        name: m.to_string(),
                    })
                    .collect(),
            }
        })
        .collect();
    DelphiV1 {
        issues: issue_pool[..5].iter().map(|s| s.to_string()).collect(),
        constraints: vec![
            ConstraintEntry {
                kind: ConstraintKind::Hard,
                text: "Implementation plans must stay within the announced total budget.".into(),
            },
            ConstraintEntry {
                kind: ConstraintKind::Soft,
                text: "Prefer solutions that integrate with the existing transit network.".into(),
            },
        ],
        objectives,
        metrics: vec![],
    }
}

fn delphi_reply(seed: i64, params: &PromptParams, preset: MockPreset) -> String {
    let payload = delphi_payload(seed, params, preset);
    fenced(
        &format!(
            "The synthetic team ran a {}-round Delphi process and synthesized 5 issues, 5 objectives and 10 performance metrics with consensus decision weights.",
            params.rounds
        ),
        &payload,
    )
}

const ALTERNATIVES: [(&str, &str); 8] = [
    (
        "Multimodal Mobility Network",
        "Fully integrate the fleet with public transit and bikesharing for seamless multimodal trip planning and fare integration.",
    ),
    (
        "Integrated MaaS Platform",
        "A Mobility-as-a-Service platform offering personalized booking, payment and routing across all modes.",
    ),
    (
        "Urban Mobility Hubs",
        "Centralized mobility hubs connecting the fleet with transit, cycling and walking, equipped with charging capacity.",
    ),
    (
        "Automated Shuttle Corridors",
        "A network of automated shuttles providing first-mile and last-mile connectivity.",
    ),
    (
        "Basic Fleet Upgrade",
        "A basic system with limited coverage and a modest vehicle fleet.",
    ),
    (
        "Sustainable Mobility Districts",
        "Deployment integrated with green spaces and urban planning for a livable, sustainable city.",
    ),
    (
        "Smart Infrastructure Backbone",
        "Road infrastructure upgraded with smart sensors and communication technology for traffic management.",
    ),
    (
        "Urban Air Mobility Pilot",
        "Autonomous aerial vehicles for passenger and cargo transport to relieve ground congestion.",
    ),
];

const PHASE_ACTIVITIES: [&str; 5] = [
    "Pilot deployment in the core network",
    "Service expansion to new districts",
    "Fleet and charging build-out",
    "System optimization and integration upgrades",
    "Evaluation, renewal and technology refresh",
];

fn ideation_payload(seed: i64, params: &PromptParams) -> AlternativesV1 {
    let mut rng = rng_for(StepTag::Ideation, seed);
    let mut indices: Vec<usize> = (0..ALTERNATIVES.len()).collect();
    indices.shuffle(&mut rng);
    indices.truncate(3);
    let alternatives = indices
        .iter()
        .map(|&index| {
            let (name, description) = ALTERNATIVES[index];
            let budget_units = params.budget.floor().max(0.0) as u64;
            let plan = if budget_units >= 5 {
                // composition of the integer budget into 5 positive parts
                let mut cuts: Vec<u64> = Vec::new();
                while cuts.len() < 4 {
                    let cut = rng.gen_range(1..budget_units);
                    if !cuts.contains(&cut) {
                        cuts.push(cut);
                    }
                }
                cuts.sort_unstable();
                let mut bounds = vec![0];
                bounds.extend(&cuts);
                bounds.push(budget_units);
                bounds
                    .windows(2)
                    .enumerate()
                    .map(|(phase, pair)| PlanEntry {
                        start_year: 2024 + 4 * phase as i32,
                        end_year: 2028 + 4 * phase as i32,
                        cost_m_cad: (pair[1] - pair[0]) as f64,
                        activities: PHASE_ACTIVITIES[phase].to_string(),
                    })
                    .collect()
            } else {
                vec![PlanEntry {
                    start_year: 2024,
                    end_year: 2044,
                    cost_m_cad: params.budget,
                    activities: PHASE_ACTIVITIES[0].to_string(),
                }]
            };
            let fleet = 100 * rng.gen_range(1..=6u32);
            AlternativeEntry {
                id: Some(slug(name)),
                name: name.to_string(),
                description: description.to_string(),
                specifications: vec![
                    format!("Fleet size: {fleet} shared automated electric vehicles"),
                    format!("Charging: {} stations across the service area", fleet / 10),
                    "Operations: on-demand dispatch with real-time monitoring".to_string(),
                ],
                plan,
            }
        })
        .collect();
    AlternativesV1 { alternatives }
}

fn ideation_reply(seed: i64, params: &PromptParams) -> String {
    let payload = ideation_payload(seed, params);
    fenced(
        &format!(
            "The brainstorming session produced 3 mutually exclusive alternatives within the ${} million CAD budget.",
            crate::prompt::format_amount(params.budget)
        ),
        &payload,
    )
}

fn evaluation_reply(seed: i64, params: &PromptParams, preset: MockPreset) -> String {
    // regenerate the earlier steps' structures from their seeds
    let delphi = delphi_payload(seed, params, preset);
    let ideation = ideation_payload(seed, params);
    let mut rng = rng_for(StepTag::Evaluation, seed);

    let metric_ids: Vec<String> = delphi
        .objectives
        .iter()
        .flat_map(|o| o.metrics.iter().map(|m| m.id.clone().unwrap()))
        .collect();
    let split_weights: Vec<f64> = delphi
        .objectives
        .iter()
        .flat_map(|o| {
            let share = o.weight / o.metrics.len() as f64;
            o.metrics.iter().map(move |_| share)
        })
        .collect();

    let mut rows = Vec::new();
    let mut totals = Vec::new();
    for alternative in &ideation.alternatives {
        let scores: Vec<f64> = (0..metric_ids.len())
            .map(|_| rng.gen_range(0..=10u32) as f64)
            .collect();
        let exact: f64 = scores.iter().zip(&split_weights).map(|(g, w)| g * w).sum();
        let reported = (exact * 100.0).round() / 100.0;
        totals.push(exact);
        rows.push(ScoreRow {
            alternative_id: alternative.id.clone().unwrap(),
            cells: metric_ids
                .iter()
                .zip(&scores)
                .map(|(id, score)| ScoreCell {
                    metric_id: id.clone(),
                    score: *score,
                })
                .collect(),
            reported_total: Some(reported),
        });
    }
    let best = totals
        .iter()
        .enumerate()
        .max_by(|a, b| {
            a.1.partial_cmp(b.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.0.cmp(&a.0))
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let recommendation = ideation.alternatives[best].name.clone();
    let payload = EvaluationV1 {
        scores: rows,
        recommendation: Some(ideation.alternatives[best].id.clone().unwrap()),
    };
    fenced(
        &format!(
            "The team scored every alternative on the agreed metrics and recommends the {recommendation}."
        ),
        &payload,
    )
}
