//! Browser demo: three operations on small toric varieties, returning JSON.

use num_traits::ToPrimitive;
use serde_json::json;
use wasm_bindgen::prelude::*;

use toric_hodge::divisor::{ToricVariety, WeilDivisor};
use toric_hodge::fan;
use toric_hodge::jacobian::{primitive_hodge_dims, Section, DEFAULT_PRIME};
use toric_hodge::oda::check_pair_divisors;

const MAX_A: u32 = 6;
const MAX_COEFF: i64 = 12;
const MAX_FERMAT_DIM: usize = 5;
const MAX_FERMAT_DEGREE: i64 = 8;

fn hirzebruch(a: u32) -> Result<ToricVariety, String> {
    if a > MAX_A {
        return Err(format!("a must be at most {MAX_A}"));
    }
    ToricVariety::new(fan::hirzebruch(a).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn divisor(coeffs: &[i64]) -> Result<WeilDivisor, String> {
    if coeffs.len() != 4 {
        return Err("a Hirzebruch divisor has 4 coefficients".into());
    }
    if coeffs.iter().any(|c| c.abs() > MAX_COEFF) {
        return Err(format!("coefficients must lie in [-{MAX_COEFF}, {MAX_COEFF}]"));
    }
    Ok(WeilDivisor::new(coeffs.to_vec()))
}

fn polytope_json(var: &ToricVariety, d: &WeilDivisor) -> Result<serde_json::Value, String> {
    let poly = var.polytope(d).map_err(|e| e.to_string())?;
    let vertices: Vec<Vec<f64>> = poly
        .vertices()
        .iter()
        .map(|v| v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let points = poly.lattice_points().map_err(|e| e.to_string())?;
    Ok(json!({ "vertices": vertices, "points": points }))
}

/// Divisor polytope of `sum c_i D_i` on the Hirzebruch surface `F_a`, with its
/// class and positivity.
pub fn hirzebruch_polytope_json(a: u32, coeffs: &[i64]) -> Result<String, String> {
    let var = hirzebruch(a)?;
    let d = divisor(coeffs)?;
    let class = var.class_of(&d).map_err(|e| e.to_string())?;
    let mut out = polytope_json(&var, &d)?;
    out["class"] = json!(class.coords());
    out["nef"] = json!(var.is_nef(&d).map_err(|e| e.to_string())?);
    out["ample"] = json!(var.is_ample(&d).map_err(|e| e.to_string())?);
    Ok(out.to_string())
}

/// Lattice-point decomposition of `P_{alpha+beta}` on `F_a`.
pub fn oda_pair_json(a: u32, alpha: &[i64], beta: &[i64]) -> Result<String, String> {
    let var = hirzebruch(a)?;
    let (da, db) = (divisor(alpha)?, divisor(beta)?);
    let r = check_pair_divisors(&var, &da, &db).map_err(|e| e.to_string())?;
    Ok(json!({
        "alpha": polytope_json(&var, &da)?,
        "beta": polytope_json(&var, &db)?,
        "target": polytope_json(&var, &(&da + &db))?,
        "surjective": r.surjective,
        "undecomposable": r.undecomposable,
        "witnesses": r.decomposition_witness,
    })
    .to_string())
}

/// `dim R(f)_{(q+1)d - (n+1)}` for the Fermat hypersurface of degree `d` in `P^n`.
pub fn fermat_hodge_json(n: usize, degree: i64) -> Result<String, String> {
    if !(1..=MAX_FERMAT_DIM).contains(&n) {
        return Err(format!("n must lie in 1..={MAX_FERMAT_DIM}"));
    }
    if !(1..=MAX_FERMAT_DEGREE).contains(&degree) {
        return Err(format!("degree must lie in 1..={MAX_FERMAT_DEGREE}"));
    }
    let var = ToricVariety::new(fan::projective_space(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let class = var.class_from(&[degree]).map_err(|e| e.to_string())?;
    let f = Section::fermat(&var, &class).map_err(|e| e.to_string())?;
    let dims = primitive_hodge_dims(&var, &f, DEFAULT_PRIME).map_err(|e| e.to_string())?;
    Ok(json!({
        "dims": dims.iter().map(|h| h.dim).collect::<Vec<_>>(),
        "classes": dims.iter().map(|h| h.class.coords()).collect::<Vec<_>>(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn hirzebruch_polytope(a: u32, coeffs: Vec<i64>) -> Result<String, JsValue> {
    hirzebruch_polytope_json(a, &coeffs).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn oda_pair(a: u32, alpha: Vec<i64>, beta: Vec<i64>) -> Result<String, JsValue> {
    oda_pair_json(a, &alpha, &beta).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn fermat_hodge(n: usize, degree: i64) -> Result<String, JsValue> {
    fermat_hodge_json(n, degree).map_err(|e| JsValue::from_str(&e))
}
