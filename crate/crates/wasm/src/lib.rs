//! Browser bindings: generalized trig curves, the return-map displacement
//! curve and the classifier, for the static page in `www/`.

use wasm_bindgen::prelude::*;

use nilfocus::gtrig::GenTrig;
use nilfocus::lyapunov::{self, MValue, Params};
use nilfocus::simulate;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn params(l: u32, k: u32, s: u32, m: &str) -> Result<Params, JsError> {
    Params::new(l, k, s, MValue::parse(m).map_err(js_err)?).map_err(js_err)
}

/// `n + 1` samples of `(θ, Cs, Sn)` over one period, flattened.
#[wasm_bindgen]
pub fn gtrig_curve(l: u32, n: usize) -> Result<Vec<f64>, JsError> {
    let trig = GenTrig::new(l, 1e-10).map_err(js_err)?;
    Ok(trig.sample(n.max(2)).iter().flat_map(|s| [s.theta, s.cs, s.sn]).collect())
}

/// `(ρ, δ(ρ))` pairs for `n` radii evenly spaced in `(0, rho_hi]`, flattened.
/// Radii where the polar pass is not valid give `NaN`.
#[wasm_bindgen]
pub fn return_map_curve(l: u32, k: u32, s: u32, m: &str, rho_hi: f64, n: usize, tol: f64) -> Result<Vec<f64>, JsError> {
    let p = params(l, k, s, m)?;
    let n = n.max(1);
    Ok((1..=n)
        .flat_map(|i| {
            let rho = rho_hi * i as f64 / n as f64;
            let delta = simulate::return_map(&p, rho, tol).map(|r| r.delta).unwrap_or(f64::NAN);
            [rho, delta]
        })
        .collect())
}

/// Conservative a-priori radius; larger values are still attempted and monitored.
#[wasm_bindgen]
pub fn rho_limit(l: u32, k: u32, s: u32, m: &str) -> Result<f64, JsError> {
    Ok(simulate::rho_max(&params(l, k, s, m)?))
}

/// The classification report as JSON.
#[wasm_bindgen]
pub fn classify_json(l: u32, k: u32, s: u32, m: &str) -> Result<String, JsError> {
    let report = lyapunov::classify(&params(l, k, s, m)?).map_err(js_err)?;
    serde_json::to_string(&report).map_err(js_err)
}

#[wasm_bindgen]
pub fn m_star(l: u32, k: u32) -> String {
    nilfocus::rational::display(&lyapunov::m_star(l, k))
}
