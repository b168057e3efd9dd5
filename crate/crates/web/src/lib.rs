//! Browser bindings. Each exported function has a plain Rust twin so the
//! logic is testable natively.

use nalgebra::DMatrix;
use nilqc::corpus;
use nilqc::metric::QuasiNorm;
use nilqc::spd::{bound_check, circumcenter, SpdPoint};
use wasm_bindgen::prelude::*;

/// Poincaré disk point to the unit-determinant 2×2 SPD matrix
/// `[[X₀+X₁, X₂], [X₂, X₀−X₁]]` on the hyperboloid.
pub fn disk_to_spd(x: f64, y: f64) -> Result<SpdPoint, String> {
    let r2 = x * x + y * y;
    if !(r2 < 1.0) {
        return Err(format!("({x}, {y}) is outside the unit disk"));
    }
    let k = 1.0 / (1.0 - r2);
    let (x0, x1, x2) = ((1.0 + r2) * k, 2.0 * x * k, 2.0 * y * k);
    SpdPoint::new(DMatrix::from_row_slice(2, 2, &[x0 + x1, x2, x2, x0 - x1])).map_err(|e| e.to_string())
}

pub fn spd_to_disk(p: &SpdPoint) -> (f64, f64) {
    let m = p.matrix();
    let x0 = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let (x1, x2) = ((m[(0, 0)] - m[(1, 1)]) / 2.0, m[(0, 1)]);
    (x1 / (1.0 + x0), x2 / (1.0 + x0))
}

/// `[cx, cy, radius]` for disk points given as `[x₁, y₁, x₂, y₂, …]`.
pub fn disk_circumcenter(coords: &[f64]) -> Result<Vec<f64>, String> {
    if coords.is_empty() || coords.len() % 2 != 0 {
        return Err("expected a non-empty list of (x, y) pairs".into());
    }
    let pts = coords.chunks(2).map(|c| disk_to_spd(c[0], c[1])).collect::<Result<Vec<_>, _>>()?;
    let c = circumcenter(&pts, 1e-12).map_err(|e| e.to_string())?;
    let (cx, cy) = spd_to_disk(&c.center);
    Ok(vec![cx, cy, c.radius])
}

/// `ρ` on a `size × size` grid over `[−extent, extent]²` in the plane of basis
/// vectors `i` and `j` of a bundled example, row-major from the top-left.
pub fn norm_slice(example: &str, i: usize, j: usize, extent: f64, size: usize) -> Result<Vec<f64>, String> {
    let spec = corpus::example(example).map_err(|e| e.to_string())?;
    let pair = spec.pair().map_err(|e| e.to_string())?;
    let n = pair.dim();
    if i >= n || j >= n || i == j {
        return Err(format!("need two distinct axes below {n}"));
    }
    let ip = spec.rational_inner_product(&pair, None).map_err(|e| e.to_string())?;
    let qn = QuasiNorm::new(&pair, &ip);
    let step = if size > 1 { 2.0 * extent / (size - 1) as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            let mut v = vec![0.0; n];
            v[i] = -extent + c as f64 * step;
            v[j] = extent - r as f64 * step;
            out.push(qn.norm(&v));
        }
    }
    Ok(out)
}

/// JSON `{dilatation, distance, bound, holds}` for `A = [[a, b], [c, d]]`.
pub fn dilatation_report(a: f64, b: f64, c: f64, d: f64) -> Result<String, String> {
    let r = bound_check(&DMatrix::from_row_slice(2, 2, &[a, b, c, d])).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = diskCircumcenter)]
pub fn disk_circumcenter_js(coords: &[f64]) -> Result<Vec<f64>, JsValue> {
    disk_circumcenter(coords).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = normSlice)]
pub fn norm_slice_js(example: &str, i: usize, j: usize, extent: f64, size: usize) -> Result<Vec<f64>, JsValue> {
    norm_slice(example, i, j, extent, size).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = dilatationReport)]
pub fn dilatation_report_js(a: f64, b: f64, c: f64, d: f64) -> Result<String, JsValue> {
    dilatation_report(a, b, c, d).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = exampleNames)]
pub fn example_names_js() -> Vec<String> {
    corpus::example_names().into_iter().map(String::from).collect()
}
