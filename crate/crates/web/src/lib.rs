//! Browser bindings for the demo page in `www/`.
//!
//! Every entry point takes and returns JSON strings. The plain functions are
//! usable natively; the `#[wasm_bindgen]` wrappers turn errors into JS
//! exceptions.

use nodesamp::experiment::{run_experiment, sweep_alpha, SweepRow};
use nodesamp::{select_rank, svd, ExperimentConfig, Scheme};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct SchemeView {
    pub scheme: Scheme,
    pub selected: Vec<usize>,
    pub error_db: f64,
    pub condition_ast: f64,
    pub reconstructed: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct RunView {
    pub family: String,
    pub rank: usize,
    pub weights: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub signals: Vec<Vec<f64>>,
    pub schemes: Vec<SchemeView>,
}

#[derive(Debug, Serialize)]
pub struct ProfilePoint {
    pub epsilon: f64,
    pub rank: usize,
    /// `sqrt(discarded / total)`, the achieved relative approximation error.
    pub relative_error: f64,
}

fn parse_config(config: &str) -> Result<ExperimentConfig, String> {
    ExperimentConfig::from_json(config).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Full pipeline: signals, selections and reconstructions per scheme.
pub fn run_json(config: &str) -> Result<String, String> {
    let cfg = parse_config(config)?;
    let outcome = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let schemes = outcome
        .runs
        .iter()
        .map(|run| SchemeView {
            scheme: run.report.scheme,
            selected: run.report.selected.clone(),
            error_db: run.report.error_db,
            condition_ast: run.report.condition_ast,
            reconstructed: run
                .report
                .y_hat
                .as_ref()
                .map(|y| y.values().to_rows())
                .unwrap_or_default(),
        })
        .collect();
    to_json(&RunView {
        family: cfg.family(),
        rank: outcome.model.rank.rank,
        weights: outcome.model.graph.weights().to_rows(),
        singular_values: outcome.model.singular_values.clone(),
        signals: outcome.signals.values().to_rows(),
        schemes,
    })
}

/// Alpha sweep rows for a `figure1a` config.
pub fn sweep_json(config: &str, alphas: &str) -> Result<String, String> {
    let cfg = parse_config(config)?;
    let alphas: Vec<f64> = serde_json::from_str(alphas).map_err(|e| e.to_string())?;
    let rows: Vec<SweepRow> = sweep_alpha(&cfg, &alphas).map_err(|e| e.to_string())?;
    to_json(&rows)
}

/// Rank chosen for each tolerance, on the config's generator.
pub fn epsilon_profile_json(config: &str, epsilons: &str) -> Result<String, String> {
    let cfg = parse_config(config)?;
    let epsilons: Vec<f64> = serde_json::from_str(epsilons).map_err(|e| e.to_string())?;
    let model = nodesamp::experiment::build_model(&cfg).map_err(|e| e.to_string())?;
    let sv = svd(&model.b).map_err(|e| e.to_string())?.singular_values;
    let points = epsilons
        .iter()
        .map(|&epsilon| {
            let r = select_rank(&sv, epsilon).map_err(|e| e.to_string())?;
            Ok(ProfilePoint {
                epsilon,
                rank: r.rank,
                relative_error: (r.discarded_energy / r.total_energy).sqrt(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&points)
}

#[wasm_bindgen]
pub fn run(config: &str) -> Result<String, JsValue> {
    run_json(config).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sweep(config: &str, alphas: &str) -> Result<String, JsValue> {
    sweep_json(config, alphas).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn epsilon_profile(config: &str, epsilons: &str) -> Result<String, JsValue> {
    epsilon_profile_json(config, epsilons).map_err(|e| JsValue::from_str(&e))
}
