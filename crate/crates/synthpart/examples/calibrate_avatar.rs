//! Avatar calibration: fit a profile to recorded stakeholder answers.
//!
//! The dataset holds question/answer records split into train and validate.
//! Candidate profiles are fragments with per-slot options; the search picks
//! the assembly minimizing the train loss, the Euclidean norm of per-record
//! embedding dissimilarities (1 - cosine similarity).
//!
//! Run with: `cargo run --example calibrate_avatar`

use synthpart::backend::{MockBackend, ScriptRule};
use synthpart::calibration::{
    calibration_loss, response_similarity, search_parameters, CalibrationDataset,
    CalibrationOptions, CalibrationRecord, CandidateSet, CandidateSpace, Split, Strategy,
};

fn rule(profile: &str, question: &str, reply: &str) -> ScriptRule {
    ScriptRule {
        system: Some(profile.into()),
        user: Some(question.into()),
        user_contains: None,
        replies: vec![reply.into()],
        finish: None,
    }
}

fn main() {
    // recorded answers from one stakeholder
    let dataset = CalibrationDataset {
        stakeholder_id: "cyclist-committee-chair".into(),
        records: vec![
            CalibrationRecord {
                question: "What should the network prioritize?".into(),
                response: "protected bike lanes and safe intersections".into(),
                split: Split::Train,
            },
            CalibrationRecord {
                question: "How should winter service work?".into(),
                response: "plow bike lanes before car lanes".into(),
                split: Split::Train,
            },
            CalibrationRecord {
                question: "What about fares?".into(),
                response: "keep shared rides affordable for residents".into(),
                split: Split::Validate,
            },
        ],
    };

    // candidate profiles: one fixed fragment, one slot with three tones
    let candidates = CandidateSet {
        spaces: vec![CandidateSpace {
            fragments: vec![
                "You are a Montreal cycling advocate. ".into(),
                String::new(),
            ],
            slots: vec![vec![
                "Answer tersely.".into(),
                "Answer with safety as the top concern.".into(),
                "Answer with budgets as the top concern.".into(),
            ]],
        }],
    };

    // a scripted backend stands in for the language model: the safety-toned
    // profile reproduces the recorded answers, the others drift
    let profile = |slot: &str| format!("You are a Montreal cycling advocate. {slot}");
    let q = |i: usize| dataset.records[i].question.clone();
    let backend = MockBackend::with_rules(vec![
        rule(&profile("Answer tersely."), &q(0), "bike lanes"),
        rule(&profile("Answer tersely."), &q(1), "plow early"),
        rule(&profile("Answer tersely."), &q(2), "cheap fares"),
        rule(
            &profile("Answer with safety as the top concern."),
            &q(0),
            "protected bike lanes and safe intersections",
        ),
        rule(
            &profile("Answer with safety as the top concern."),
            &q(1),
            "plow bike lanes before car lanes",
        ),
        rule(
            &profile("Answer with safety as the top concern."),
            &q(2),
            "keep shared rides affordable for residents",
        ),
        rule(
            &profile("Answer with budgets as the top concern."),
            &q(0),
            "cheapest paint-only lanes",
        ),
        rule(
            &profile("Answer with budgets as the top concern."),
            &q(1),
            "no extra winter spending",
        ),
        rule(
            &profile("Answer with budgets as the top concern."),
            &q(2),
            "raise fares to cover costs",
        ),
    ]);

    let options = CalibrationOptions::default();
    println!("=== Per-candidate train losses ===");
    for slot in [
        "Answer tersely.",
        "Answer with safety as the top concern.",
        "Answer with budgets as the top concern.",
    ] {
        let loss =
            calibration_loss(&dataset, Split::Train, &profile(slot), &backend, &options).unwrap();
        println!("  {:<44} {:.4}", slot, loss);
    }

    let outcome = search_parameters(
        &dataset,
        &candidates,
        &backend,
        Strategy::Exhaustive,
        &options,
    )
    .unwrap();
    println!("\n=== Search result (exhaustive) ===");
    println!("  best_index:    {}", outcome.best_index);
    println!("  best_profile:  {}", outcome.best_profile);
    println!("  train_loss:    {:.4}", outcome.train_loss);
    println!("  validate_loss: {:.4}", outcome.validate_loss);

    // similarity itself is symmetric cosine over bag-of-words counts
    let j = response_similarity("bike lane bike", "bike lane", &backend).unwrap();
    println!("\ncosine('bike lane bike', 'bike lane') = {j:.4}");
}
