//! Synthetic participatory planning toolkit.
//!
//! Simulates a multi-stakeholder planning workflow with language-model
//! avatars: a synthetic team is formed, runs a Delphi visioning round to agree
//! on objectives, metrics and decision weights, brainstorms budget-constrained
//! design alternatives, and scores them with weighted multi-criteria
//! evaluation. Around that core sit deterministic mock and record/replay
//! backends, Monte Carlo batch experiments with taxonomy-based aggregation,
//! finite-difference parameter sensitivity, and avatar calibration against
//! recorded stakeholder answers.
//!
//! ## Examples
//!
//! One runnable example per capability; start here:
//!
//! - **`replay_session`** - replay the bundled planning session from its
//!   cassette and walk the extracted outcome
//! - **`score_report`** - weighted totals, rankings, and the arithmetic audit
//!   of model-reported scores
//! - **`batch_experiment`** - 150 seeded mock runs, aggregated into presence
//!   fractions, weight statistics, and radar rows
//! - **`sensitivity_probe`** - finite-difference slopes of workflow features
//!   with respect to the scenario parameters
//! - **`calibrate_avatar`** - search candidate avatar profiles against
//!   recorded stakeholder answers
//! - **`record_live`** - run against a live provider and record a cassette
//!   (needs `SYNTHPART_BASE_URL` and `SYNTHPART_API_KEY`)
//!
//! ```bash
//! cargo run --example replay_session
//! cargo run --release --example batch_experiment
//! ```
//!
//! ## Library map
//!
//! - [`backend`] - provider abstraction: live HTTP, deterministic mock,
//!   record/replay cassettes
//! - [`prompt`] - step templates with scenario-parameter slots and the
//!   growing conversation transcript
//! - [`pipeline`] - the four workflow steps composed into a [`RunRecord`]
//! - [`extract`] - strict fenced-JSON parsing with a lenient markdown
//!   fallback
//! - [`mcda`] - weighted scoring, ranking, and reported-total auditing
//! - [`experiments`] - batch execution, taxonomies, aggregation, sensitivity
//! - [`calibration`] - embedding similarity, calibration loss, profile search
//!
//! A thin `synthpart` binary exposes the same machinery as subcommands
//! (`run`, `replay`, `batch`, `analyze`, `score`, `sensitivity`,
//! `calibrate`).

pub mod backend;
pub mod calibration;
pub mod cli;
pub mod config;
pub mod embedding;
pub mod experiments;
pub mod extract;
pub mod mcda;
pub mod pipeline;
pub mod prompt;

pub use backend::{Backend, BackendError, GenerationRequest, GenerationResponse, Message};
pub use pipeline::{run_full_scenario, RetryPolicy, RunRecord};
pub use prompt::{ScenarioParams, Stage, Transcript};
