//! Browser bindings for a few shiftmetrics computations.
//!
//! Every export returns a JSON string; errors surface as thrown strings.
//! The `*_json` functions hold the logic and also build natively, which is
//! how they are tested.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use shiftmetrics::certify::{certify_scheme, long_range_scheme};
use shiftmetrics::distances::{dbar_upper_markov, projective_markov, vague_distance};
use shiftmetrics::entropy::relative_entropy_rate;
use shiftmetrics::measures::{prefix_separation, truncated_projective_family, SeparabilityMeasure, SequenceRule};
use shiftmetrics::{Alphabet, Enclosure, MarkovMeasure};

/// Largest `lmax` the page offers; higher levels need tables of `2^lmax` entries.
pub const MAX_LEVEL: usize = 16;

/// Largest prefix length for the separation series.
pub const MAX_PREFIX: usize = 2000;

fn two_state(stay0: f64, stay1: f64) -> Result<MarkovMeasure, String> {
    if !(0.0 < stay0 && stay0 < 1.0 && 0.0 < stay1 && stay1 < 1.0) {
        return Err("staying probabilities must lie strictly between 0 and 1".into());
    }
    let kernel = vec![vec![stay0, 1.0 - stay0], vec![1.0 - stay1, stay1]];
    MarkovMeasure::stationary_from_kernel(Alphabet::numeric(2).map_err(err)?, 1, &kernel).map_err(err)
}

fn err(e: shiftmetrics::Error) -> String {
    e.to_string()
}

fn enclosure(e: &Enclosure) -> Value {
    json!({ "lo": e.lo, "hi": e.hi, "method": e.method })
}

/// Projective, vague and coupling distances plus the relative entropy rate
/// between two stationary two-state chains, each given by its probabilities
/// of staying in state 0 and in state 1.
pub fn chain_distances_json(a0: f64, a1: f64, b0: f64, b1: f64) -> Result<String, String> {
    let (a, b) = (two_state(a0, a1)?, two_state(b0, b1)?);
    let rho = projective_markov(&a, &b, 1e-9).map_err(err)?;
    let vague = vague_distance(&a, &b, 12).map_err(err)?;
    let dbar = dbar_upper_markov(&a, &b).map_err(err)?;
    let kl = relative_entropy_rate(&a, &b).map_err(err)?;
    Ok(json!({
        "projective": enclosure(&rho),
        "vague": enclosure(&vague),
        "dbar_upper": dbar.upper,
        "relative_entropy": kl,
        "stationary_a": a.block_probs(),
        "stationary_b": b.block_probs(),
    })
    .to_string())
}

/// Uniqueness certificate rows for the long-range Ising scheme.
pub fn long_range_certificate_json(beta: f64, lmax: usize) -> Result<String, String> {
    if !(1..=MAX_LEVEL).contains(&lmax) {
        return Err(format!("lmax must be between 1 and {MAX_LEVEL}"));
    }
    let c = certify_scheme(&long_range_scheme(beta).map_err(err)?, lmax, 1e-12).map_err(err)?;
    let finite = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
    let rows: Vec<Value> = c
        .rows
        .iter()
        .map(|r| {
            json!({
                "ell": r.ell,
                "eps": r.eps,
                "svar": r.svar,
                "c": r.c,
                "cauchy_bound": finite(r.cauchy_bound),
            })
        })
        .collect();
    Ok(json!({ "verdict": c.verdict.label(), "rows": rows }).to_string())
}

/// `(1/n)|log(nu_x[x_1^n] / nu_y[x_1^n])|` for `n = 1..=n_max`, where `x`
/// and `y` differ only in their first symbol.
pub fn separability_series_json(alpha: f64, n_max: usize) -> Result<String, String> {
    if !(1..=MAX_PREFIX).contains(&n_max) {
        return Err(format!("n must be between 1 and {MAX_PREFIX}"));
    }
    let rule = |first| SequenceRule::new(vec![first], vec![0, 1, 1]).map_err(err);
    let x = SeparabilityMeasure::new(rule(1)?, alpha).map_err(err)?;
    let y = SeparabilityMeasure::new(rule(0)?, alpha).map_err(err)?;
    let series: Vec<f64> = (1..=n_max).map(|n| prefix_separation(&x, &y, n)).collect();
    Ok(json!({
        "series": series,
        "truncated_rho": truncated_projective_family(&x, &y, n_max),
        "limit": (2.0 * alpha / (1.0 + alpha)).ln().abs(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn chain_distances(a0: f64, a1: f64, b0: f64, b1: f64) -> Result<String, JsValue> {
    chain_distances_json(a0, a1, b0, b1).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn long_range_certificate(beta: f64, lmax: usize) -> Result<String, JsValue> {
    long_range_certificate_json(beta, lmax).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn separability_series(alpha: f64, n_max: usize) -> Result<String, JsValue> {
    separability_series_json(alpha, n_max).map_err(|e| JsValue::from_str(&e))
}
