//! Avatar fidelity measurement and profile-parameter search.
//!
//! An avatar profile is judged by how closely its simulated answers to
//! recorded stakeholder questions match the recorded answers, measured as
//! embedding cosine similarity. The aggregate loss is the Euclidean norm of
//! per-record dissimilarities (1 - similarity), and the search explores a
//! combinatorial space of profile text fragments with per-slot options.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{Backend, BackendError, GenerationRequest, Message};
use crate::embedding::{centroid, cosine, euclidean_distance, EmbeddingError};

pub use crate::embedding::{bag_of_words_embed, pair_vectors};

pub const DEFAULT_MAX_PROFILE_LEN: usize = 4000;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("dataset invalid: {0}")]
    InvalidDataset(String),
    #[error("candidate set is empty")]
    EmptyCandidateSet,
    #[error("assembled profile is empty (space {0})")]
    EmptyProfile(usize),
    #[error("assembled profile exceeds {limit} characters (space {space})")]
    ProfileTooLong { space: usize, limit: usize },
    #[error("invalid strategy '{0}' (exhaustive | random:<k>:<seed> | coordinate:<max_passes>)")]
    InvalidStrategy(String),
    #[error("split {0:?} has no records")]
    EmptySplit(Split),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validate,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub question: String,
    pub response: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationDataset {
    pub stakeholder_id: String,
    pub records: Vec<CalibrationRecord>,
}

impl CalibrationDataset {
    pub fn load(path: &Path) -> Result<CalibrationDataset, CalibrationError> {
        let dataset: CalibrationDataset = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        dataset.validate()?;
        Ok(dataset)
    }

    /// At least one train and one validate record; questions unique per split.
    pub fn validate(&self) -> Result<(), CalibrationError> {
        for required in [Split::Train, Split::Validate] {
            if !self.records.iter().any(|r| r.split == required) {
                return Err(CalibrationError::InvalidDataset(format!(
                    "no {required:?} records"
                )));
            }
        }
        for split in [Split::Train, Split::Validate, Split::Test] {
            let mut seen = Vec::new();
            for record in self.records.iter().filter(|r| r.split == split) {
                if seen.contains(&&record.question) {
                    return Err(CalibrationError::InvalidDataset(format!(
                        "duplicate question '{}' in {split:?}",
                        record.question
                    )));
                }
                seen.push(&record.question);
            }
        }
        Ok(())
    }

    pub fn split(&self, split: Split) -> Vec<&CalibrationRecord> {
        self.records.iter().filter(|r| r.split == split).collect()
    }
}

/// Fixed text fragments interleaved with slots, each slot carrying candidate
/// values. `fragments[0] slot[0] fragments[1] slot[1] ... fragments[n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSpace {
    pub fragments: Vec<String>,
    #[serde(default)]
    pub slots: Vec<Vec<String>>,
}

impl CandidateSpace {
    /// Number of full assignments in this space.
    pub fn assignment_count(&self) -> usize {
        self.slots.iter().map(|s| s.len()).product()
    }

    pub fn assemble(&self, choice: &[usize]) -> String {
        let mut out = String::new();
        for (i, fragment) in self.fragments.iter().enumerate() {
            out.push_str(fragment);
            if let (Some(slot), Some(&pick)) = (self.slots.get(i), choice.get(i)) {
                if let Some(value) = slot.get(pick) {
                    out.push_str(value);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub spaces: Vec<CandidateSpace>,
}

impl CandidateSet {
    pub fn load(path: &Path) -> Result<CandidateSet, CalibrationError> {
        let spaces: Vec<CandidateSpace> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Ok(CandidateSet { spaces })
    }

    /// Every full assignment across every space, in enumeration order
    /// (space-major, slot options odometer-style with the last slot fastest).
    pub fn enumerate(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for (space_index, space) in self.spaces.iter().enumerate() {
            if space.slots.is_empty() {
                out.push((space_index, Vec::new()));
                continue;
            }
            if space.slots.iter().any(|s| s.is_empty()) {
                continue;
            }
            let mut choice = vec![0usize; space.slots.len()];
            loop {
                out.push((space_index, choice.clone()));
                let mut position = space.slots.len();
                loop {
                    if position == 0 {
                        break;
                    }
                    position -= 1;
                    choice[position] += 1;
                    if choice[position] < space.slots[position].len() {
                        break;
                    }
                    choice[position] = 0;
                }
                if choice.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
        out
    }

    pub fn assemble_checked(
        &self,
        space_index: usize,
        choice: &[usize],
        max_len: usize,
    ) -> Result<String, CalibrationError> {
        let profile = self.spaces[space_index].assemble(choice);
        if profile.trim().is_empty() {
            return Err(CalibrationError::EmptyProfile(space_index));
        }
        if profile.len() > max_len {
            return Err(CalibrationError::ProfileTooLong {
                space: space_index,
                limit: max_len,
            });
        }
        Ok(profile)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Exhaustive,
    Random { k: usize, seed: u64 },
    Coordinate { max_passes: usize },
}

impl Strategy {
    pub fn parse(s: &str) -> Result<Strategy, CalibrationError> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["exhaustive"] => Ok(Strategy::Exhaustive),
            ["random", k, seed] => Ok(Strategy::Random {
                k: k.parse()
                    .map_err(|_| CalibrationError::InvalidStrategy(s.into()))?,
                seed: seed
                    .parse()
                    .map_err(|_| CalibrationError::InvalidStrategy(s.into()))?,
            }),
            ["coordinate", passes] => Ok(Strategy::Coordinate {
                max_passes: passes
                    .parse()
                    .map_err(|_| CalibrationError::InvalidStrategy(s.into()))?,
            }),
            _ => Err(CalibrationError::InvalidStrategy(s.into())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CalibrationOptions {
    pub model_id: String,
    pub temperature: f64,
    pub samples: usize,
    /// Minimize the norm of raw similarities instead of dissimilarities.
    pub literal_loss: bool,
    pub max_profile_len: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            model_id: "gpt-4-turbo".into(),
            temperature: 1.0,
            samples: 1,
            literal_loss: false,
            max_profile_len: DEFAULT_MAX_PROFILE_LEN,
        }
    }
}

/// Ask the backend the question under the given profile. With several samples
/// the answer nearest the centroid of all sample embeddings is returned, which
/// realizes the expectation over completions as a deterministic medoid.
pub fn simulate_response(
    profile: &str,
    question: &str,
    backend: &dyn Backend,
    samples: usize,
    options: &CalibrationOptions,
) -> Result<String, CalibrationError> {
    let request = GenerationRequest::new(
        vec![Message::system(profile), Message::user(question)],
        options.model_id.clone(),
    )
    .with_temperature(options.temperature);
    if samples <= 1 {
        return Ok(backend.complete(&request)?.content);
    }
    let mut texts = Vec::with_capacity(samples);
    let mut embeddings = Vec::with_capacity(samples);
    for _ in 0..samples {
        let text = backend.complete(&request)?.content;
        embeddings.push(backend.embed(&text)?);
        texts.push(text);
    }
    let center = centroid(&embeddings)?;
    let mut best = 0usize;
    let mut best_distance = f64::INFINITY;
    for (i, embedding) in embeddings.iter().enumerate() {
        let d = euclidean_distance(embedding, &center)?;
        if d < best_distance {
            best_distance = d;
            best = i;
        }
    }
    Ok(texts.swap_remove(best))
}

/// Cosine similarity of the two texts' embeddings, in [-1, 1].
pub fn response_similarity(
    actual: &str,
    predicted: &str,
    backend: &dyn Backend,
) -> Result<f64, CalibrationError> {
    let a = backend.embed(actual)?;
    let b = backend.embed(predicted)?;
    Ok(cosine(&a, &b)?)
}

/// Aggregate loss over one dataset split:
/// `sqrt(sum_n (1 - J_n)^2)` where J_n is the record's similarity.
pub fn calibration_loss(
    dataset: &CalibrationDataset,
    split: Split,
    profile: &str,
    backend: &dyn Backend,
    options: &CalibrationOptions,
) -> Result<f64, CalibrationError> {
    let records = dataset.split(split);
    if records.is_empty() {
        return Err(CalibrationError::EmptySplit(split));
    }
    let mut sum = 0.0;
    for record in records {
        let predicted =
            simulate_response(profile, &record.question, backend, options.samples, options)?;
        let similarity = response_similarity(&record.response, &predicted, backend)?;
        let term = if options.literal_loss {
            similarity
        } else {
            1.0 - similarity
        };
        sum += term * term;
    }
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub index: usize,
    pub train_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best_index: usize,
    pub best_profile: String,
    pub train_loss: f64,
    pub validate_loss: f64,
    pub trace: Vec<TraceEntry>,
}

/// Search the candidate set for the profile minimizing the train-split loss.
/// Ties break by enumeration order. The winner's validate-split loss is
/// reported alongside.
pub fn search_parameters(
    dataset: &CalibrationDataset,
    candidates: &CandidateSet,
    backend: &dyn Backend,
    strategy: Strategy,
    options: &CalibrationOptions,
) -> Result<SearchOutcome, CalibrationError> {
    dataset.validate()?;
    let assignments = candidates.enumerate();
    if assignments.is_empty() {
        return Err(CalibrationError::EmptyCandidateSet);
    }

    let mut cache: HashMap<usize, f64> = HashMap::new();
    let mut trace = Vec::new();
    let mut evaluate = |index: usize| -> Result<f64, CalibrationError> {
        if let Some(&loss) = cache.get(&index) {
            return Ok(loss);
        }
        let (space, choice) = &assignments[index];
        let profile = candidates.assemble_checked(*space, choice, options.max_profile_len)?;
        let loss = calibration_loss(dataset, Split::Train, &profile, backend, options)?;
        cache.insert(index, loss);
        trace.push(TraceEntry {
            index,
            train_loss: loss,
        });
        Ok(loss)
    };

    let evaluated: Vec<usize> = match strategy {
        Strategy::Exhaustive => (0..assignments.len()).collect(),
        Strategy::Random { k, seed } => {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut indices: Vec<usize> = (0..assignments.len()).collect();
            indices.shuffle(&mut rng);
            indices.truncate(k.max(1));
            indices
        }
        Strategy::Coordinate { max_passes } => {
            coordinate_indices(candidates, &assignments, max_passes, &mut evaluate)?
        }
    };

    let mut best: Option<(usize, f64)> = None;
    for index in evaluated {
        let loss = evaluate(index)?;
        let better = match best {
            None => true,
            Some((best_index, best_loss)) => {
                loss < best_loss || (loss == best_loss && index < best_index)
            }
        };
        if better {
            best = Some((index, loss));
        }
    }
    let (best_index, train_loss) = best.ok_or(CalibrationError::EmptyCandidateSet)?;
    let (space, choice) = &assignments[best_index];
    let best_profile = candidates.assemble_checked(*space, choice, options.max_profile_len)?;
    let validate_loss =
        calibration_loss(dataset, Split::Validate, &best_profile, backend, options)?;
    trace.sort_by_key(|t| t.index);
    Ok(SearchOutcome {
        best_index,
        best_profile,
        train_loss,
        validate_loss,
        trace,
    })
}

/// Coordinate descent within each space: start from all-zero slot choices and
/// repeatedly sweep the slots, keeping the best option per slot, until a full
/// pass changes nothing or `max_passes` is hit. Returns every index touched.
fn coordinate_indices(
    candidates: &CandidateSet,
    assignments: &[(usize, Vec<usize>)],
    max_passes: usize,
    evaluate: &mut impl FnMut(usize) -> Result<f64, CalibrationError>,
) -> Result<Vec<usize>, CalibrationError> {
    let index_of: HashMap<(usize, Vec<usize>), usize> = assignments
        .iter()
        .enumerate()
        .map(|(i, key)| (key.clone(), i))
        .collect();
    let mut touched = Vec::new();
    for (space_index, space) in candidates.spaces.iter().enumerate() {
        if space.slots.iter().any(|s| s.is_empty()) {
            continue;
        }
        let mut choice = vec![0usize; space.slots.len()];
        let lookup = |c: &Vec<usize>| index_of[&(space_index, c.clone())];
        touched.push(lookup(&choice));
        let mut current_loss = evaluate(lookup(&choice))?;
        for _ in 0..max_passes.max(1) {
            let mut changed = false;
            for slot in 0..space.slots.len() {
                let mut best_option = choice[slot];
                let mut best_loss = current_loss;
                for option in 0..space.slots[slot].len() {
                    if option == choice[slot] {
                        continue;
                    }
                    let mut trial = choice.clone();
                    trial[slot] = option;
                    let index = lookup(&trial);
                    touched.push(index);
                    let loss = evaluate(index)?;
                    if loss < best_loss || (loss == best_loss && option < best_option) {
                        best_loss = loss;
                        best_option = option;
                    }
                }
                if best_option != choice[slot] {
                    choice[slot] = best_option;
                    current_loss = best_loss;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    if touched.is_empty() {
        return Err(CalibrationError::EmptyCandidateSet);
    }
    Ok(touched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{MockBackend, ScriptRule};
    use approx::assert_relative_eq;

    fn single_profile_set(profiles: &[&str]) -> CandidateSet {
        CandidateSet {
            spaces: profiles
                .iter()
                .map(|p| CandidateSpace {
                    fragments: vec![p.to_string()],
                    slots: vec![],
                })
                .collect(),
        }
    }

    fn rule(system: &str, user: &str, reply: &str) -> ScriptRule {
        ScriptRule {
            system: Some(system.into()),
            user: Some(user.into()),
            user_contains: None,
            replies: vec![reply.into()],
            finish: None,
        }
    }

    fn dataset() -> CalibrationDataset {
        CalibrationDataset {
            stakeholder_id: "s1".into(),
            records: vec![
                CalibrationRecord {
                    question: "q1".into(),
                    response: "x y".into(),
                    split: Split::Train,
                },
                CalibrationRecord {
                    question: "q2".into(),
                    response: "a a b".into(),
                    split: Split::Train,
                },
                CalibrationRecord {
                    question: "q3".into(),
                    response: "x y".into(),
                    split: Split::Validate,
                },
            ],
        }
    }

    /// Losses by construction: P0 -> 0.5, P1 -> 0.2, P2 -> 0.2.
    fn scripted_backend() -> MockBackend {
        MockBackend::with_rules(vec![
            rule("P0", "q1", "y z"),   // cosine 0.5 -> term 0.5
            rule("P0", "q2", "a a b"), // cosine 1.0 -> term 0
            rule("P0", "q3", "x y"),
            rule("P1", "q1", "x y"),   // cosine 1.0
            rule("P1", "q2", "a b b"), // cosine 0.8 -> term 0.2
            rule("P1", "q3", "x y"),
            rule("P2", "q1", "x y"),
            rule("P2", "q2", "a b b"),
            rule("P2", "q3", "y z"),
        ])
    }

    #[test]
    fn similarity_identities() {
        let backend = MockBackend::standard();
        assert_relative_eq!(
            response_similarity("same words here", "same words here", &backend).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            response_similarity("red bike", "blue car", &backend).unwrap(),
            0.0
        );
        let c = response_similarity("bike lane bike", "bike lane", &backend).unwrap();
        assert_relative_eq!(c, 3.0 / (5.0f64.sqrt() * 2.0f64.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn punctuation_only_text_is_zero_vector() {
        let backend = MockBackend::standard();
        let err = response_similarity("real words", "!!! ...", &backend).unwrap_err();
        assert!(matches!(
            err,
            CalibrationError::Embedding(crate::embedding::EmbeddingError::ZeroVector)
        ));
    }

    #[test]
    fn loss_hand_values() {
        let backend = scripted_backend();
        let options = CalibrationOptions::default();
        let loss = calibration_loss(&dataset(), Split::Train, "P0", &backend, &options).unwrap();
        assert_relative_eq!(loss, 0.5, epsilon = 1e-12);
        let loss = calibration_loss(&dataset(), Split::Train, "P1", &backend, &options).unwrap();
        assert_relative_eq!(loss, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn loss_two_records_hand_computed() {
        // J = 0.6 and 0.8 -> sqrt(0.16 + 0.04) = sqrt(0.20)
        // cosine 0.6: "p p q" (2,1) vs "p q q" (1,2): dot 4, norms 5 -> 0.8... use
        // counts (3,1) vs (1,3): dot 6, norms 10 -> 0.6
        let backend = MockBackend::with_rules(vec![
            rule("P", "q1", "p q q q"),
            rule("P", "q2", "a b b"),
            rule("P", "q3", "x"),
        ]);
        let dataset = CalibrationDataset {
            stakeholder_id: "s".into(),
            records: vec![
                CalibrationRecord {
                    question: "q1".into(),
                    response: "p p p q".into(),
                    split: Split::Train,
                },
                CalibrationRecord {
                    question: "q2".into(),
                    response: "a a b".into(),
                    split: Split::Train,
                },
                CalibrationRecord {
                    question: "q3".into(),
                    response: "x".into(),
                    split: Split::Validate,
                },
            ],
        };
        let loss = calibration_loss(
            &dataset,
            Split::Train,
            "P",
            &backend,
            &CalibrationOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(loss, 0.2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(loss, 0.4472, epsilon = 1e-4);
    }

    #[test]
    fn perfect_predictions_zero_loss() {
        let backend = MockBackend::with_rules(vec![
            rule("P", "q1", "x y"),
            rule("P", "q2", "a a b"),
            rule("P", "q3", "x y"),
        ]);
        let loss = calibration_loss(
            &dataset(),
            Split::Train,
            "P",
            &backend,
            &CalibrationOptions::default(),
        )
        .unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn medoid_selection_among_samples() {
        // samples {"a a", "a a", "b"}: centroid nearest is "a a"
        let backend = MockBackend::with_rules(vec![ScriptRule {
            system: Some("P".into()),
            user: Some("q".into()),
            user_contains: None,
            replies: vec!["a a".into(), "a a".into(), "b".into()],
            finish: None,
        }]);
        let options = CalibrationOptions::default();
        let picked = simulate_response("P", "q", &backend, 3, &options).unwrap();
        assert_eq!(picked, "a a");
    }

    #[test]
    fn single_sample_is_raw_completion() {
        let backend = MockBackend::with_rules(vec![rule("P", "q", "the answer")]);
        let options = CalibrationOptions::default();
        assert_eq!(
            simulate_response("P", "q", &backend, 1, &options).unwrap(),
            "the answer"
        );
    }

    #[test]
    fn scripted_losses_tie_break_by_order() {
        let backend = scripted_backend();
        let outcome = search_parameters(
            &dataset(),
            &single_profile_set(&["P0", "P1", "P2"]),
            &backend,
            Strategy::Exhaustive,
            &CalibrationOptions::default(),
        )
        .unwrap();
        assert_eq!(outcome.best_index, 1);
        assert_relative_eq!(outcome.train_loss, 0.2, epsilon = 1e-12);
        assert_eq!(outcome.trace.len(), 3);
    }

    #[test]
    fn planted_optimum_wins_with_zero_loss() {
        let mut rules = vec![
            rule("planted", "q1", "x y"),
            rule("planted", "q2", "a a b"),
            rule("planted", "q3", "x y"),
        ];
        rules.extend(vec![
            rule("other", "q1", "zz"),
            rule("other", "q2", "zz"),
            rule("other", "q3", "zz"),
        ]);
        let backend = MockBackend::with_rules(rules);
        let outcome = search_parameters(
            &dataset(),
            &single_profile_set(&["other", "planted"]),
            &backend,
            Strategy::Exhaustive,
            &CalibrationOptions::default(),
        )
        .unwrap();
        assert_eq!(outcome.best_index, 1);
        assert_eq!(outcome.train_loss, 0.0);
        assert_eq!(outcome.validate_loss, 0.0);
    }

    #[test]
    fn exhaustive_over_single_candidate() {
        let backend = scripted_backend();
        let outcome = search_parameters(
            &dataset(),
            &single_profile_set(&["P0"]),
            &backend,
            Strategy::Exhaustive,
            &CalibrationOptions::default(),
        )
        .unwrap();
        assert_eq!(outcome.best_index, 0);
    }

    #[test]
    fn empty_candidates_rejected() {
        let backend = MockBackend::standard();
        assert!(matches!(
            search_parameters(
                &dataset(),
                &CandidateSet { spaces: vec![] },
                &backend,
                Strategy::Exhaustive,
                &CalibrationOptions::default(),
            ),
            Err(CalibrationError::EmptyCandidateSet)
        ));
    }

    #[test]
    fn slot_enumeration_and_coordinate_descent() {
        // one space, two slots of two options -> 4 assignments
        let set = CandidateSet {
            spaces: vec![CandidateSpace {
                fragments: vec!["".into(), " ".into(), "".into()],
                slots: vec![vec!["P".into(), "Q".into()], vec!["0".into(), "1".into()]],
            }],
        };
        let assignments = set.enumerate();
        assert_eq!(assignments.len(), 4);
        assert_eq!(set.spaces[0].assemble(&[1, 0]), "Q 0");

        // plant the optimum at "Q 1" (index 3)
        let mut rules = Vec::new();
        for profile in ["P 0", "P 1", "Q 0"] {
            rules.push(rule(profile, "q1", "n n"));
            rules.push(rule(profile, "q2", "n n"));
            rules.push(rule(profile, "q3", "n n"));
        }
        rules.push(rule("Q 1", "q1", "x y"));
        rules.push(rule("Q 1", "q2", "a a b"));
        rules.push(rule("Q 1", "q3", "x y"));
        let backend = MockBackend::with_rules(rules);

        let exhaustive = search_parameters(
            &dataset(),
            &set,
            &backend,
            Strategy::Exhaustive,
            &CalibrationOptions::default(),
        )
        .unwrap();
        assert_eq!(exhaustive.best_index, 3);
        assert_eq!(exhaustive.train_loss, 0.0);

        // a slot-monotone landscape for coordinate descent: improving slot 0
        // first ("Q 0" beats "P 0"), then slot 1 reaches the optimum "Q 1"
        let backend = MockBackend::with_rules({
            let mut rules = Vec::new();
            for profile in ["P 0", "P 1"] {
                rules.push(rule(profile, "q1", "n n"));
                rules.push(rule(profile, "q2", "n n"));
                rules.push(rule(profile, "q3", "n n"));
            }
            rules.push(rule("Q 0", "q1", "x y"));
            rules.push(rule("Q 0", "q2", "n n"));
            rules.push(rule("Q 0", "q3", "n n"));
            rules.push(rule("Q 1", "q1", "x y"));
            rules.push(rule("Q 1", "q2", "a a b"));
            rules.push(rule("Q 1", "q3", "x y"));
            rules
        });
        let coordinate = search_parameters(
            &dataset(),
            &set,
            &backend,
            Strategy::Coordinate { max_passes: 4 },
            &CalibrationOptions::default(),
        )
        .unwrap();
        assert_eq!(coordinate.best_index, 3);
        assert_eq!(coordinate.train_loss, 0.0);
    }

    #[test]
    fn random_strategy_is_deterministic() {
        let run = || {
            let backend = scripted_backend();
            search_parameters(
                &dataset(),
                &single_profile_set(&["P0", "P1", "P2"]),
                &backend,
                Strategy::Random { k: 2, seed: 9 },
                &CalibrationOptions::default(),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!(Strategy::parse("exhaustive").unwrap(), Strategy::Exhaustive);
        assert_eq!(
            Strategy::parse("random:5:42").unwrap(),
            Strategy::Random { k: 5, seed: 42 }
        );
        assert_eq!(
            Strategy::parse("coordinate:3").unwrap(),
            Strategy::Coordinate { max_passes: 3 }
        );
        assert!(Strategy::parse("annealing").is_err());
    }
}
