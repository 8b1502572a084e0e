//! Finite-difference sensitivity of workflow outputs to scenario parameters.
//!
//! First a calibration check: a mock whose first objective weight is exactly
//! 0.01 x team size must yield a slope estimate of 0.01 with a zero-width
//! confidence interval. Then the same estimator on the stochastic mock, where
//! the interval reflects Monte Carlo noise.
//!
//! Run with: `cargo run --release --example sensitivity_probe`

use synthpart::backend::{MockBackend, MockPreset};
use synthpart::experiments::{sensitivity, FeatureFn, ParamName, SensitivityOptions, Taxonomies};
use synthpart::pipeline::PipelineSettings;
use synthpart::prompt::{ScenarioParams, TemplateSet};

fn main() {
    let taxonomies = Taxonomies::default();
    let settings = PipelineSettings::default();
    let templates = TemplateSet::default();
    let params = ScenarioParams::default();
    let feature = FeatureFn::MeanObjectiveWeight {
        category: "ENRM".into(),
    };

    println!("=== Planted linear response (zero noise) ===");
    let backend = MockBackend::with_preset(MockPreset::LinearWeight);
    let estimate = sensitivity(
        &backend,
        &settings,
        &templates,
        &params,
        ParamName::TeamSize,
        5.0,
        &feature,
        &taxonomies,
        &SensitivityOptions::default(),
    )
    .unwrap();
    println!(
        "  d({})/d({}) = {:.6}  ci [{:.6}, {:.6}]  (true slope 0.01)",
        estimate.feature,
        estimate.parameter,
        estimate.delta_estimate,
        estimate.ci_low,
        estimate.ci_high
    );

    println!("\n=== Stochastic mock, several parameters ===");
    let backend = MockBackend::standard();
    let probes = [
        (ParamName::TeamSize, 5.0),
        (ParamName::DelphiRounds, 2.0),
        (ParamName::BudgetMCad, 50.0),
    ];
    for (parameter, step) in probes {
        let estimate = sensitivity(
            &backend,
            &settings,
            &templates,
            &params,
            parameter,
            step,
            &FeatureFn::WinningTotal,
            &taxonomies,
            &SensitivityOptions {
                replicates: 30,
                ..SensitivityOptions::default()
            },
        )
        .unwrap();
        println!(
            "  d(winning_total)/d({:<18}) step {:>5}: {:>9.5}  ci [{:.5}, {:.5}]",
            estimate.parameter,
            estimate.step,
            estimate.delta_estimate,
            estimate.ci_low,
            estimate.ci_high
        );
    }

    println!("\n=== Infeasible directions are rejected, not differentiated ===");
    let tiny = ScenarioParams {
        team_size: 1,
        ..ScenarioParams::default()
    };
    let err = ParamName::TeamSize.perturb(&tiny, -5.0).unwrap_err();
    println!("  team_size 1, step -5 -> {err}");
}
