//! Browser bindings: zonal spherical functions on `S^{n-1}`, Weyl-ball
//! volume growth, and the rigidity exponents for a given `(n, p)`.
//!
//! Each export returns a JSON string. The `*_json` functions carry the
//! logic and are plain Rust so they can be tested natively.

use mcert_core::composition_calculus::rank_choice;
use mcert_core::group_geometry::weyl_ball_volume;
use mcert_core::sphere_spectra::{multiplicity, phi_k, RigidityExponents};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_DEGREE: usize = 400;

/// `φ_k(x)` and the multiplicity of degree `k` for `k = 0..=k_max`.
pub fn sphere_table_json(n: usize, k_max: usize, x: f64) -> Result<String, String> {
    if k_max > MAX_DEGREE {
        return Err(format!("k_max is capped at {MAX_DEGREE}"));
    }
    let rows = (0..=k_max)
        .map(|k| {
            let m = multiplicity(n, k).map_err(|e| e.to_string())?;
            let v = phi_k(n, k, x).map_err(|e| e.to_string())?;
            Ok(json!({ "k": k, "multiplicity": m.to_string(), "phi": v }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json!({ "n": n, "x": x, "rows": rows }).to_string())
}

/// `log vol B_R` on `steps` equally spaced radii up to `r_max`, with the
/// least-squares slope over the outer half of the range.
pub fn weyl_growth_json(n: usize, r_max: f64, steps: usize) -> Result<String, String> {
    if !(r_max > 0.0 && r_max <= 12.0) || !(4..=64).contains(&steps) {
        return Err("need 0 < r_max <= 12 and 4 <= steps <= 64".into());
    }
    let mut points = Vec::with_capacity(steps);
    for i in 1..=steps {
        let r = r_max * i as f64 / steps as f64;
        let v = weyl_ball_volume(n, r).map_err(|e| e.to_string())?;
        points.push((r, v.ln()));
    }
    let tail = &points[steps / 2..];
    let len = tail.len() as f64;
    let (mr, ml) = tail.iter().fold((0.0, 0.0), |(a, b), (r, l)| (a + r / len, b + l / len));
    let (sxy, sxx) = tail
        .iter()
        .fold((0.0, 0.0), |(a, b), (r, l)| (a + (r - mr) * (l - ml), b + (r - mr) * (r - mr)));
    Ok(json!({ "n": n, "points": points, "slope": sxy / sxx }).to_string())
}

/// `α_0`, `α`, `c_k`, and for each `1 <= k < α` the rank `m` used in the
/// derivative estimate.
pub fn rigidity_exponents_json(n: usize, p: f64) -> Result<String, String> {
    let e = RigidityExponents::new(n, p).map_err(|e| e.to_string())?;
    let ranks = (1..e.c.len())
        .filter(|&k| (k as f64) < e.alpha)
        .map(|k| rank_choice(n, k, p).map(|rc| json!({ "k": k, "m": rc.m, "beta": rc.beta })))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(json!({ "exponents": e, "ranks": ranks }).to_string())
}

#[wasm_bindgen]
pub fn sphere_table(n: usize, k_max: usize, x: f64) -> Result<String, JsValue> {
    sphere_table_json(n, k_max, x).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn weyl_growth(n: usize, r_max: f64, steps: usize) -> Result<String, JsValue> {
    weyl_growth_json(n, r_max, steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn rigidity_exponents(n: usize, p: f64) -> Result<String, JsValue> {
    rigidity_exponents_json(n, p).map_err(|e| JsValue::from_str(&e))
}
