//! Strict/lenient agreement on the bundled session fixtures.
//!
//! Each recorded prose reply has an equivalent structured (fenced-JSON)
//! rendering under `data/structured/`. Parsing the prose through the lenient
//! heuristics must produce exactly what the strict schema path produces.

use std::path::{Path, PathBuf};

use synthpart::backend::Cassette;
use synthpart::extract::{
    parse_alternatives, parse_avatars, parse_delphi, parse_evaluation, ExtractOptions,
};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn cassette() -> Cassette {
    Cassette::load(&data().join("montreal_cassette.json")).expect("bundled cassette verifies")
}

/// Wrap a structured JSON document in a fence so the strict path parses it.
fn fenced(path: &str) -> String {
    let body = std::fs::read_to_string(data().join(path)).unwrap();
    format!("```json\n{body}\n```")
}

fn reply(index: usize) -> String {
    cassette().entries[index].response.content.clone()
}

#[test]
fn cassette_has_four_chained_exchanges() {
    let cassette = cassette();
    assert_eq!(cassette.entries.len(), 4);
    for (i, entry) in cassette.entries.iter().enumerate() {
        assert_eq!(entry.request.messages.len(), 2 * i + 2);
        assert_eq!(entry.request.model_id, "gpt-4-turbo");
        assert_eq!(entry.request.temperature, 1.0);
    }
    // each request's conversation is a prefix of the next one's
    for pair in cassette.entries.windows(2) {
        let earlier = &pair[0].request.messages;
        let later = &pair[1].request.messages;
        assert_eq!(&later[..earlier.len()], &earlier[..]);
    }
}

#[test]
fn cassette_prompts_are_the_rendered_templates() {
    use synthpart::prompt::{ScenarioParams, TemplateId, TemplateSet};
    let cassette = cassette();
    let templates = TemplateSet::default();
    let params = ScenarioParams::default();
    assert_eq!(
        cassette.entries[0].request.messages[0].content,
        templates.render(TemplateId::Rho0, &params).unwrap()
    );
    let prompts = [
        TemplateId::Rho1,
        TemplateId::Rho2_1,
        TemplateId::Rho2_2,
        TemplateId::Rho3,
    ];
    for (entry, template) in cassette.entries.iter().zip(prompts) {
        let user = entry.request.messages.last().unwrap();
        assert_eq!(user.content, templates.render(template, &params).unwrap());
    }
}

#[test]
fn avatars_lenient_equals_strict() {
    let lenient = parse_avatars(&reply(0), 10).unwrap();
    let strict = parse_avatars(&fenced("structured/session_avatars.json"), 10).unwrap();
    assert_eq!(lenient, strict);
    assert_eq!(lenient[9].raw_role, "Youth Advocate");
}

#[test]
fn avatars_count_mismatch_reports_both_numbers() {
    let err = parse_avatars(&reply(0), 5).unwrap_err();
    assert_eq!(err.to_string(), "found 10 records, expected 5");
}

#[test]
fn delphi_lenient_equals_strict() {
    let options = ExtractOptions::default();
    let lenient = parse_delphi(&reply(1), &options).unwrap();
    let strict = parse_delphi(&fenced("structured/session_delphi.json"), &options).unwrap();
    assert_eq!(lenient, strict);
    assert_eq!(lenient.issues[0], "Accessibility");
    assert_eq!(lenient.metrics.len(), 10);
}

#[test]
fn alternatives_lenient_equals_strict() {
    let options = ExtractOptions::default();
    let lenient = parse_alternatives(&reply(2), 100.0, &options).unwrap();
    let strict = parse_alternatives(
        &fenced("structured/session_alternatives.json"),
        100.0,
        &options,
    )
    .unwrap();
    assert_eq!(lenient.alternatives, strict.alternatives);
    let names: Vec<&str> = lenient
        .alternatives
        .iter()
        .map(|a| a.name.as_str())
        .collect();
    assert_eq!(
        names,
        vec![
            "Fully Automated Taxi Network",
            "Neighborhood Electric Pods (NEP) Initiative",
            "Integrated Public AEV System"
        ]
    );
    // the second plan is 15+20+30+35
    assert_eq!(lenient.alternatives[1].plan_total(), 100.0);
}

#[test]
fn alternatives_reject_tighter_budget() {
    let options = ExtractOptions::default();
    let err = parse_alternatives(&reply(2), 90.0, &options).unwrap_err();
    match err {
        synthpart::extract::ExtractError::BudgetViolation { violations, .. } => {
            assert_eq!(violations.len(), 3);
            assert!(violations.iter().all(|(_, total)| *total == 100.0));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn evaluation_lenient_equals_strict() {
    let options = ExtractOptions::default();
    let delphi = parse_delphi(&reply(1), &options).unwrap();
    let alternatives = parse_alternatives(&reply(2), 100.0, &options)
        .unwrap()
        .alternatives;

    let lenient = parse_evaluation(
        &reply(3),
        &delphi.objectives,
        &delphi.metrics,
        &alternatives,
    )
    .unwrap();
    let strict = parse_evaluation(
        &fenced("structured/session_evaluation.json"),
        &delphi.objectives,
        &delphi.metrics,
        &alternatives,
    )
    .unwrap();
    assert_eq!(lenient, strict);

    assert_eq!(
        lenient.scores[0],
        vec![8.0, 7.0, 9.0, 9.0, 6.0, 7.0, 9.0, 8.0, 8.0, 9.0]
    );
    assert_eq!(
        lenient.scores[1],
        vec![6.0, 8.0, 6.0, 7.0, 7.0, 6.0, 7.0, 7.0, 7.0, 8.0]
    );
    assert_eq!(
        lenient.scores[2],
        vec![9.0, 9.0, 8.0, 8.0, 8.0, 8.0, 8.0, 7.0, 9.0, 9.0]
    );
    assert_eq!(
        lenient.reported_totals,
        vec![Some(8.1), Some(6.85), Some(8.55)]
    );
    assert_eq!(
        lenient.recommendation.as_deref(),
        Some("integrated-public-aev-system")
    );
}

#[test]
fn first_avatar_classifies_as_city_planner() {
    use synthpart::experiments::Taxonomy;
    let avatars = parse_avatars(&reply(0), 10).unwrap();
    let taxonomy = Taxonomy::stakeholder_default();
    let text = format!("{} {}", avatars[0].raw_role, avatars[0].profile);
    assert_eq!(taxonomy.classify(&text), "City Planner");
}

#[test]
fn session_audit_and_raw_totals() {
    use synthpart::extract::read_matrix_file;
    use synthpart::mcda::{audit, raw_totals};
    let matrix = read_matrix_file(&data().join("matrices/session_matrix.json")).unwrap();

    // raw row sums, also recomputed by direct summation
    let raw = raw_totals(&matrix);
    assert_eq!(raw, vec![80.0, 69.0, 83.0]);
    let by_hand: Vec<f64> = matrix.scores.iter().map(|row| row.iter().sum()).collect();
    assert_eq!(raw, by_hand);

    // at the default 0.05 tolerance only the second reported total is within
    // reach of a recomputation (6.85 vs split 6.875)
    let entries = audit(&matrix, 0.05).unwrap();
    assert_eq!(
        entries.iter().map(|e| e.consistent).collect::<Vec<_>>(),
        vec![Some(false), Some(true), Some(false)]
    );
    let entries = audit(&matrix, 0.01).unwrap();
    assert!(entries.iter().all(|e| e.consistent == Some(false)));
}

#[test]
fn missing_cassette_entry_is_a_clean_error() {
    use synthpart::backend::{Backend, GenerationRequest, Message, ReplayBackend};
    let replay = ReplayBackend::from_path(&data().join("montreal_cassette.json")).unwrap();
    let request =
        GenerationRequest::new(vec![Message::system("something unrecorded")], "gpt-4-turbo");
    let digest = request.digest();
    match replay.complete(&request) {
        Err(synthpart::BackendError::NoCassetteMatch { digest: named }) => {
            assert_eq!(named, digest)
        }
        other => panic!("unexpected {other:?}"),
    }
}
