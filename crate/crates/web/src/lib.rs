//! WebAssembly bindings for the static demo in `www/`.
//!
//! Every export takes plain numbers and strings and returns a JSON string, so
//! the page needs no generated TypeScript types. The `*_json` functions hold
//! the logic and run natively under `cargo test`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use boostqaoa::boost::{builtin, builtin_names, DesignWeights};
use boostqaoa::merit::{MeritRow, TTS_INFINITE};
use boostqaoa::model::{didactic_qubo, QuboModel};
use boostqaoa::oracle::{classify, enumerate, ground_states, separation_report, SolutionClass, Spectrum, Unconstrained};
use boostqaoa::qaoa::{GridAxis, QaoaProblem, TrainConfig};

/// Largest landscape side the page may request.
pub const MAX_POINTS: usize = 201;
/// Largest depth the page may request.
pub const MAX_DEPTH: usize = 15;
/// How many of the most probable states `train` reports.
const TOP_STATES: usize = 12;

struct Loaded {
    qubo: QuboModel,
    spectrum: Spectrum,
    weights: Option<DesignWeights>,
}

/// `m5`/`m6` override the bundled resonance weights when finite.
fn load(name: &str, m5: f64, m6: f64) -> Result<Loaded, String> {
    if name == "didactic" {
        let qubo = didactic_qubo();
        let spectrum = classify(&enumerate(&qubo).map_err(str_err)?, &Unconstrained(&qubo)).map_err(str_err)?;
        return Ok(Loaded {
            qubo,
            spectrum,
            weights: None,
        });
    }
    let file = builtin(name).ok_or_else(|| format!("unknown instance '{name}'"))?;
    let design = file.instance().map_err(str_err)?;
    let mut w = file.weights.ok_or_else(|| format!("{name} carries no weights"))?;
    if m5.is_finite() {
        w.m5 = m5;
    }
    if m6.is_finite() {
        w.m6 = m6;
    }
    let qubo = design.build_qubo(&w).map_err(str_err)?.qubo;
    let spectrum = classify(&enumerate(&qubo).map_err(str_err)?, &design).map_err(str_err)?;
    Ok(Loaded {
        qubo,
        spectrum,
        weights: Some(w),
    })
}

fn str_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn class_of(spectrum: &Spectrum, index: usize) -> SolutionClass {
    spectrum.entries[index].class.unwrap_or(SolutionClass::Infeasible)
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn instances_json() -> String {
    let names: Vec<&str> = std::iter::once("didactic").chain(builtin_names()).collect();
    json!(names).to_string()
}

/// Energies of all basis states, sorted ascending, with their classes.
pub fn spectrum_json(name: &str, m5: f64, m6: f64) -> Result<String, String> {
    let l = load(name, m5, m6)?;
    let sorted = l.spectrum.sorted_by_energy();
    let states: Vec<Value> = sorted
        .entries
        .iter()
        .map(|e| json!([e.index, e.energy, e.class.map(|c| c.as_str())]))
        .collect();
    let sep = separation_report(&l.spectrum).ok();
    Ok(json!({
        "n": l.spectrum.n,
        "weights": l.weights.map(|w| w.as_array()),
        "ground_states": ground_states(&l.spectrum),
        "max_feasible": sep.map(|s| s.max_feasible),
        "min_infeasible": sep.map(|s| s.min_infeasible),
        "gap": sep.map(|s| s.gap),
        "states": states,
    })
    .to_string())
}

/// The p = 1 expectation on a `points x points` grid over [-pi/4, pi/4]^2.
pub fn landscape_json(name: &str, points: usize) -> Result<String, String> {
    if points == 0 || points > MAX_POINTS {
        return Err(format!("points must be in 1..={MAX_POINTS}"));
    }
    let l = load(name, f64::NAN, f64::NAN)?;
    let qaoa = QaoaProblem::new(&l.qubo).map_err(str_err)?;
    let axis = GridAxis::quarter_pi(points);
    let land = qaoa.landscape_scan(1, axis, axis).map_err(str_err)?;
    let (beta, gamma, min) = land.minimum();
    Ok(json!({
        "betas": land.betas,
        "gammas": land.gammas,
        "values": land.values,
        "minimum": { "beta": beta, "gamma": gamma, "value": min },
    })
    .to_string())
}

/// Trains a depth-`p` ansatz with Adam and reports its figures of merit.
pub fn train_json(name: &str, p: usize, iters: usize, m5: f64, m6: f64) -> Result<String, String> {
    if p == 0 || p > MAX_DEPTH {
        return Err(format!("p must be in 1..={MAX_DEPTH}"));
    }
    let l = load(name, m5, m6)?;
    let qaoa = QaoaProblem::new(&l.qubo).map_err(str_err)?;
    let cfg = TrainConfig {
        max_iters: iters,
        ..TrainConfig::default()
    };
    let trace = qaoa.train_adam(p, &cfg).map_err(str_err)?;
    let probs = qaoa.probabilities(&trace.params).map_err(str_err)?;
    let classes: Vec<SolutionClass> = (0..probs.len()).map(|i| class_of(&l.spectrum, i)).collect();
    let row = MeritRow::from_distribution(p, trace.expectation, &probs, &classes);
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    let top: Vec<Value> = order
        .iter()
        .take(TOP_STATES)
        .map(|&i| json!([i, probs[i], classes[i].as_str()]))
        .collect();
    Ok(json!({
        "p": p,
        "expectation": trace.expectation,
        "beta": trace.params.beta,
        "gamma": trace.params.gamma,
        "history": trace.expectations,
        "prob_optimal": row.prob_optimal,
        "prob_feasible": row.prob_feasible,
        "cop": finite_or_null(row.cop),
        "tts": (row.tts != TTS_INFINITE).then_some(row.tts),
        "most_probable": [row.most_probable_index, row.most_probable_class.as_str()],
        "top": top,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn instances() -> String {
    instances_json()
}

/// Pass `NaN` for either weight to keep the bundled value.
#[wasm_bindgen]
pub fn spectrum(name: &str, m5: f64, m6: f64) -> Result<String, JsError> {
    spectrum_json(name, m5, m6).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn landscape(name: &str, points: usize) -> Result<String, JsError> {
    landscape_json(name, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn train(name: &str, p: usize, iters: usize, m5: f64, m6: f64) -> Result<String, JsError> {
    train_json(name, p, iters, m5, m6).map_err(|e| JsError::new(&e))
}
