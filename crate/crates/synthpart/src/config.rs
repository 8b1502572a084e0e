//! Run configuration: one JSON file plus flag overrides (flags win).
//!
//! Relative paths inside a config file (cassette, taxonomies, templates) are
//! resolved against the file's own directory, so bundled configs work from
//! any working directory. The API key is never part of the file; it comes
//! from the `SYNTHPART_API_KEY` environment variable.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::backend::{
    Backend, HttpBackend, MockBackend, MockPreset, RecordingBackend, ReplayBackend, ScriptRule,
};
use crate::experiments::{Taxonomies, Taxonomy};
use crate::extract::ExtractOptions;
use crate::pipeline::{ExpectedCounts, PipelineSettings, RetryPolicy};
use crate::prompt::{ScenarioParams, TemplateOverrides, TemplateSet};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("backend kind '{0}' requires {1}")]
    MissingField(&'static str, &'static str),
    #[error("invalid templates: {0}")]
    Templates(String),
    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),
    #[error("cassette error: {0}")]
    Cassette(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    #[default]
    Mock,
    Replay,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub base_url: Option<String>,
    pub model_id: String,
    pub temperature: f64,
    /// Replay source; with an http backend, exchanges are recorded into it.
    pub cassette_path: Option<PathBuf>,
    pub embedding_model: Option<String>,
    pub mock_preset: MockPreset,
    pub mock_script: Vec<ScriptRule>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            base_url: None,
            model_id: "gpt-4-turbo".into(),
            temperature: 1.0,
            cassette_path: None,
            embedding_model: None,
            mock_preset: MockPreset::Standard,
            mock_script: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub structured_output: bool,
    pub max_retries: u32,
    pub weight_tolerance: f64,
    pub strict_phases: bool,
    pub expected_alternatives: usize,
    pub expected_issues: usize,
    pub expected_objectives: usize,
    pub expected_metrics: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            structured_output: true,
            max_retries: 0,
            weight_tolerance: crate::extract::DEFAULT_WEIGHT_TOLERANCE,
            strict_phases: false,
            expected_alternatives: 3,
            expected_issues: 5,
            expected_objectives: 5,
            expected_metrics: 10,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaxonomyPaths {
    pub stakeholder: Option<PathBuf>,
    pub objective: Option<PathBuf>,
    pub alternative: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub backend: BackendConfig,
    pub scenario: ScenarioParams,
    pub pipeline: PipelineConfig,
    pub taxonomies: TaxonomyPaths,
    pub templates_path: Option<PathBuf>,
}

fn resolve(base: &Path, path: &mut Option<PathBuf>) {
    if let Some(p) = path {
        if p.is_relative() {
            *p = base.join(&p);
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config: Config =
            serde_json::from_str(&raw).map_err(|source| ConfigError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        resolve(&base, &mut config.backend.cassette_path);
        resolve(&base, &mut config.taxonomies.stakeholder);
        resolve(&base, &mut config.taxonomies.objective);
        resolve(&base, &mut config.taxonomies.alternative);
        resolve(&base, &mut config.templates_path);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.backend.kind {
            BackendKind::Http if self.backend.base_url.is_none() => {
                Err(ConfigError::MissingField("http", "base_url"))
            }
            BackendKind::Replay if self.backend.cassette_path.is_none() => {
                Err(ConfigError::MissingField("replay", "cassette_path"))
            }
            _ => Ok(()),
        }
    }

    pub fn build_backend(&self) -> Result<Box<dyn Backend>, ConfigError> {
        match self.backend.kind {
            BackendKind::Mock => {
                let mut mock = MockBackend::with_preset(self.backend.mock_preset);
                for rule in &self.backend.mock_script {
                    mock = mock.add_rule(rule.clone());
                }
                Ok(Box::new(mock))
            }
            BackendKind::Replay => {
                let path = self
                    .backend
                    .cassette_path
                    .as_ref()
                    .ok_or(ConfigError::MissingField("replay", "cassette_path"))?;
                let replay = ReplayBackend::from_path(path)
                    .map_err(|e| ConfigError::Cassette(e.to_string()))?;
                Ok(Box::new(replay))
            }
            BackendKind::Http => {
                let base_url = self
                    .backend
                    .base_url
                    .as_ref()
                    .ok_or(ConfigError::MissingField("http", "base_url"))?;
                let mut http = HttpBackend::new(base_url);
                if let Some(model) = &self.backend.embedding_model {
                    http = http.with_embedding_model(model.clone());
                }
                match &self.backend.cassette_path {
                    Some(path) => Ok(Box::new(RecordingBackend::new(http, path.clone()))),
                    None => Ok(Box::new(http)),
                }
            }
        }
    }

    pub fn pipeline_settings(&self) -> PipelineSettings {
        PipelineSettings {
            model_id: self.backend.model_id.clone(),
            temperature: self.backend.temperature,
            structured_output: self.pipeline.structured_output,
            retry: RetryPolicy {
                max_retries: self.pipeline.max_retries,
            },
            extract: ExtractOptions {
                weight_tolerance: self.pipeline.weight_tolerance,
                strict_phases: self.pipeline.strict_phases,
                expected_alternatives: self.pipeline.expected_alternatives,
            },
            counts: ExpectedCounts {
                issues: self.pipeline.expected_issues,
                objectives: self.pipeline.expected_objectives,
                metrics: self.pipeline.expected_metrics,
            },
        }
    }

    pub fn templates(&self) -> Result<TemplateSet, ConfigError> {
        match &self.templates_path {
            None => Ok(TemplateSet::default()),
            Some(path) => {
                let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                let overrides: TemplateOverrides =
                    serde_json::from_str(&raw).map_err(|source| ConfigError::Parse {
                        path: path.display().to_string(),
                        source,
                    })?;
                TemplateSet::with_overrides(&overrides)
                    .map_err(|e| ConfigError::Templates(e.to_string()))
            }
        }
    }

    pub fn taxonomies(&self) -> Result<Taxonomies, ConfigError> {
        let load = |path: &Option<PathBuf>, default: fn() -> Taxonomy| {
            path.as_ref()
                .map(|p| Taxonomy::load(p).map_err(|e| ConfigError::Taxonomy(e.to_string())))
                .unwrap_or_else(|| Ok(default()))
        };
        Ok(Taxonomies {
            stakeholder: load(&self.taxonomies.stakeholder, Taxonomy::stakeholder_default)?,
            objective: load(&self.taxonomies.objective, Taxonomy::objective_default)?,
            alternative: load(&self.taxonomies.alternative, Taxonomy::alternative_default)?,
        })
    }
}
