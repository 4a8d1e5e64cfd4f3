//! Browser bindings: Laplace transform of a monomial, the convolution of
//! two monomials, and the normal-form solver on a pasted problem file.
//! Every export returns a JSON string.

use num_complex::Complex64 as C64;
use serde_json::json;
use wasm_bindgen::prelude::*;

use nfk_core::convolution::{convolve_monomial, convolve_numeric, QuadratureConfig};
use nfk_core::laplace::{laplace_polynomial, LaplaceOptions};
use nfk_core::pipeline::{laplace_monomial_exact, normal_form, DEFAULT_TOL};
use nfk_core::problem::ProblemSpec;
use nfk_core::sector::SectorSpec;

pub fn laplace_monomial_json(n: usize, k: usize, x: f64, theta: f64) -> Result<String, String> {
    if !(x > 0.0) {
        return Err(format!("|x| = {x} must be positive"));
    }
    let alpha = std::f64::consts::PI / (2.0 * k.max(1) as f64);
    let nu = 1.01 * x;
    let mu = 0.99 * (k as f64 * alpha / 4.0).sin().powf(1.0 / k as f64) / nu;
    let sec = SectorSpec::new(theta, alpha, nu, mu, k);
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[n] = C64::new(1.0, 0.0);
    let xc = C64::from_polar(x, theta);
    let v = laplace_polynomial(&coeffs, xc, &sec, &LaplaceOptions::default()).map_err(|e| e.to_string())?;
    let exact = laplace_monomial_exact(n, xc, k);
    Ok(json!({
        "value": [v.value.re, v.value.im],
        "exact": [exact.re, exact.im],
        "relative_error": (v.value - exact).norm() / exact.norm(),
        "error_estimate": v.error_estimate,
    })
    .to_string())
}

pub fn convolve_monomials_json(a: usize, b: usize, k: usize, nodes: usize) -> Result<String, String> {
    if k == 0 {
        return Err("rank k must be >= 1".into());
    }
    let (degree, coefficient) = convolve_monomial(a, b, k);
    let cfg = QuadratureConfig { node_count: nodes, ..QuadratureConfig::default() };
    let one = C64::new(1.0, 0.0);
    let q = convolve_numeric(&|s| s.powu(a as u32), &|s| s.powu(b as u32), one, k, &cfg).map_err(|e| e.to_string())?;
    Ok(json!({
        "degree": degree,
        "coefficient": coefficient,
        "quadrature": q.value.re,
        "error_estimate": q.error_estimate,
    })
    .to_string())
}

pub fn normal_form_json(spec: &str) -> Result<String, String> {
    let spec = ProblemSpec::from_json(spec).map_err(|e| e.to_string())?;
    let out = normal_form(&spec).map_err(|e| e.to_string())?;
    let mut v = serde_json::to_value(&out).map_err(|e| e.to_string())?;
    v["passed"] = json!(out.within_tolerance(DEFAULT_TOL));
    serde_json::to_string_pretty(&v).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn laplace_monomial(n: usize, k: usize, x: f64, theta: f64) -> Result<String, JsError> {
    laplace_monomial_json(n, k, x, theta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn convolve_monomials(a: usize, b: usize, k: usize, nodes: usize) -> Result<String, JsError> {
    convolve_monomials_json(a, b, k, nodes).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve_normal_form(spec: &str) -> Result<String, JsError> {
    normal_form_json(spec).map_err(|e| JsError::new(&e))
}
