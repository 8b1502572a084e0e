//! Keyword taxonomies for deterministic text classification.
//!
//! Three editable taxonomies ship as embedded defaults: stakeholder roles,
//! objective categories, and design-alternative families. Classification
//! counts case-insensitive keyword hits; the category with the most distinct
//! keyword matches wins, ties break by category order in the file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentError;

pub const UNCATEGORIZED: &str = "uncategorized";

const STAKEHOLDER10: &str = include_str!("../../data/taxonomies/stakeholder10.json");
const OBJECTIVE10: &str = include_str!("../../data/taxonomies/objective10.json");
const ALTERNATIVE8: &str = include_str!("../../data/taxonomies/alternative8.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Category {
    pub label: String,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Taxonomy {
    pub name: String,
    pub categories: Vec<Category>,
}

impl Taxonomy {
    pub fn from_json(raw: &str) -> Result<Taxonomy, ExperimentError> {
        let taxonomy: Taxonomy = serde_json::from_str(raw)?;
        taxonomy.validate()?;
        Ok(taxonomy)
    }

    pub fn load(path: &Path) -> Result<Taxonomy, ExperimentError> {
        Taxonomy::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn stakeholder_default() -> Taxonomy {
        Taxonomy::from_json(STAKEHOLDER10).expect("embedded stakeholder taxonomy")
    }

    pub fn objective_default() -> Taxonomy {
        Taxonomy::from_json(OBJECTIVE10).expect("embedded objective taxonomy")
    }

    pub fn alternative_default() -> Taxonomy {
        Taxonomy::from_json(ALTERNATIVE8).expect("embedded alternative taxonomy")
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        let mut seen = Vec::new();
        for category in &self.categories {
            if seen.contains(&category.label) {
                return Err(ExperimentError::InvalidTaxonomy(format!(
                    "duplicate label {}",
                    category.label
                )));
            }
            if category.keywords.is_empty() {
                return Err(ExperimentError::InvalidTaxonomy(format!(
                    "category {} has no keywords",
                    category.label
                )));
            }
            seen.push(category.label.clone());
        }
        Ok(())
    }

    /// Deterministic and total: every text gets a label or "uncategorized".
    pub fn classify(&self, text: &str) -> &str {
        let lower = text.to_lowercase();
        let mut best: Option<(&str, usize)> = None;
        for category in &self.categories {
            let hits = category
                .keywords
                .iter()
                .filter(|k| lower.contains(&k.to_lowercase()))
                .count();
            if hits > 0 && best.is_none_or(|(_, b)| hits > b) {
                best = Some((category.label.as_str(), hits));
            }
        }
        best.map(|(label, _)| label).unwrap_or(UNCATEGORIZED)
    }

    /// Category labels in file order, with "uncategorized" appended.
    pub fn labels_with_uncategorized(&self) -> Vec<String> {
        self.categories
            .iter()
            .map(|c| c.label.clone())
            .chain(std::iter::once(UNCATEGORIZED.to_string()))
            .collect()
    }

    /// Ask a backend to pick one label. Replies that name no known label,
    /// and transport errors, fall back to the keyword classifier so the
    /// result stays total.
    pub fn classify_llm(
        &self,
        text: &str,
        backend: &dyn crate::backend::Backend,
        model_id: &str,
    ) -> String {
        use crate::backend::{GenerationRequest, Message};
        let labels: Vec<&str> = self.categories.iter().map(|c| c.label.as_str()).collect();
        let prompt = format!(
            "Assign exactly one category label to the text. Reply with the label only.\n\nLabels:\n{}\n\nText: {}\n\nLabel:",
            labels
                .iter()
                .map(|l| format!("- {l}"))
                .collect::<Vec<_>>()
                .join("\n"),
            text
        );
        let request = GenerationRequest::new(
            vec![
                Message::system("You are a precise text classifier."),
                Message::user(prompt),
            ],
            model_id,
        )
        .with_temperature(0.0);
        if let Ok(response) = backend.complete(&request) {
            let reply = response.content.trim();
            if let Some(label) = labels.iter().find(|l| {
                reply.eq_ignore_ascii_case(l)
                    || reply.to_lowercase().contains(&l.to_lowercase())
            }) {
                return label.to_string();
            }
        }
        self.classify(text).to_string()
    }
}

/// How aggregation maps texts onto taxonomy categories: the deterministic
/// keyword default, or a backend-driven classifier that must be enabled
/// explicitly.
#[derive(Clone, Copy, Default)]
pub enum Classification<'a> {
    #[default]
    Keyword,
    Llm {
        backend: &'a dyn crate::backend::Backend,
        model_id: &'a str,
    },
}

impl Classification<'_> {
    pub fn label(&self, taxonomy: &Taxonomy, text: &str) -> String {
        match self {
            Classification::Keyword => taxonomy.classify(text).to_string(),
            Classification::Llm { backend, model_id } => {
                taxonomy.classify_llm(text, *backend, model_id)
            }
        }
    }
}

/// The three taxonomies used during aggregation.
#[derive(Debug, Clone)]
pub struct Taxonomies {
    pub stakeholder: Taxonomy,
    pub objective: Taxonomy,
    pub alternative: Taxonomy,
}

impl Default for Taxonomies {
    fn default() -> Self {
        Taxonomies {
            stakeholder: Taxonomy::stakeholder_default(),
            objective: Taxonomy::objective_default(),
            alternative: Taxonomy::alternative_default(),
        }
    }
}
