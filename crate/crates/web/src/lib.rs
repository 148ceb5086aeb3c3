//! Browser bindings: spectrum of a damped cat map, damping statistics and
//! Birkhoff deviation samples. The `#[wasm_bindgen]` wrappers only convert
//! errors; the computations live in plain functions that also run natively.

use qmap_core::classical::{default_geometric_mean, deviation_distribution, ClassicalMap, DampingSymbol};
use qmap_core::quantization::PropagatorSpec;
use qmap_core::spectral::{spectrum, width};
use wasm_bindgen::prelude::*;

/// Largest matrix the page may request; larger ones take too long in a tab.
pub const MAX_DIM: usize = 600;

pub fn damping_from(kind: &str, value: f64) -> Result<DampingSymbol, String> {
    let a = match kind {
        "a1" => DampingSymbol::A1,
        "a2" => DampingSymbol::A2,
        "constant" => DampingSymbol::constant(value),
        other => return Err(format!("unknown damping '{other}'")),
    };
    a.validate().map_err(|e| e.to_string())?;
    Ok(a)
}

fn map_from(m: u32, alpha: f64) -> Result<ClassicalMap, String> {
    if m == 0 {
        return Err("m must be at least 1".into());
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(format!("alpha must be ≥ 0, got {alpha}"));
    }
    Ok(ClassicalMap::new(m, alpha))
}

/// `[re₀, im₀, re₁, im₁, …]` sorted by decreasing modulus.
pub fn spectrum_points(dim: usize, m: u32, alpha: f64, kind: &str, value: f64) -> Result<Vec<f64>, String> {
    if !(4..=MAX_DIM).contains(&dim) {
        return Err(format!("N must lie in [4, {MAX_DIM}]"));
    }
    let spec = PropagatorSpec::new(map_from(m, alpha)?, damping_from(kind, value)?, dim).map_err(|e| e.to_string())?;
    let s = spectrum(&spec).map_err(|e| e.to_string())?;
    Ok(s.eigenvalues.iter().flat_map(|z| [z.re, z.im]).collect())
}

/// `[a₋, a₊, ⟨a⟩]`.
pub fn damping_summary(kind: &str, value: f64) -> Result<Vec<f64>, String> {
    let a = damping_from(kind, value)?;
    let r = a.range();
    Ok(vec![r.a_minus, r.a_plus, default_geometric_mean(&a)])
}

/// Width `r_{⌊N/4⌋} − r_{⌊3N/4⌋}` of interleaved eigenvalue pairs.
pub fn width_of_points(points: &[f64]) -> Result<f64, String> {
    let values = points
        .chunks_exact(2)
        .map(|p| qmap_core::Complex64::new(p[0], p[1]))
        .collect();
    let s = qmap_core::spectral::SpectrumResult::from_eigenvalues(values, String::new(), 0.0);
    width(&s).map_err(|e| e.to_string())
}

/// Samples of `x_n = ℓa_n − log⟨a⟩` at seeded uniform starting points.
pub fn birkhoff_samples(
    kind: &str,
    value: f64,
    m: u32,
    alpha: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let a = damping_from(kind, value)?;
    let map = map_from(m, alpha)?;
    deviation_distribution(&a, &map, n, samples, seed)
        .map(|s| s.values)
        .map_err(|e| e.to_string())
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = spectrumPoints)]
pub fn spectrum_points_js(dim: usize, m: u32, alpha: f64, kind: &str, value: f64) -> Result<Vec<f64>, JsError> {
    spectrum_points(dim, m, alpha, kind, value).map_err(js)
}

#[wasm_bindgen(js_name = dampingSummary)]
pub fn damping_summary_js(kind: &str, value: f64) -> Result<Vec<f64>, JsError> {
    damping_summary(kind, value).map_err(js)
}

#[wasm_bindgen(js_name = spectralWidth)]
pub fn width_js(points: &[f64]) -> Result<f64, JsError> {
    width_of_points(points).map_err(js)
}

#[wasm_bindgen(js_name = birkhoffSamples)]
pub fn birkhoff_samples_js(
    kind: &str,
    value: f64,
    m: u32,
    alpha: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    birkhoff_samples(kind, value, m, alpha, n, samples, seed).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_points_lie_on_circle() {
        let pts = spectrum_points(16, 1, 0.05, "constant", 1.0).unwrap();
        assert_eq!(pts.len(), 32);
        for p in pts.chunks_exact(2) {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-9);
        }
        assert!(width_of_points(&pts).unwrap().abs() < 1e-9);
    }

    #[test]
    fn summary_values() {
        let s = damping_summary("a2", 0.0).unwrap();
        assert_eq!(s[0], 0.5);
        assert_eq!(s[1], 1.0);
        assert!((s[2] - 0.72855).abs() < 1e-4);
        assert!(damping_summary("nope", 0.0).is_err());
        assert!(damping_summary("constant", 0.0).is_err());
    }

    #[test]
    fn input_checks() {
        assert!(spectrum_points(2, 1, 0.05, "a2", 0.0).is_err());
        assert!(spectrum_points(MAX_DIM + 1, 1, 0.05, "a2", 0.0).is_err());
        assert!(spectrum_points(8, 0, 0.05, "a2", 0.0).is_err());
        assert!(birkhoff_samples("a2", 0.0, 1, -1.0, 10, 10, 1).is_err());
    }

    #[test]
    fn birkhoff_is_seeded() {
        let a = birkhoff_samples("a2", 0.0, 1, 0.05, 20, 50, 7).unwrap();
        let b = birkhoff_samples("a2", 0.0, 1, 0.05, 20, 50, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        let c = birkhoff_samples("constant", 0.4, 1, 0.05, 20, 5, 7).unwrap();
        assert!(c.iter().all(|&x| x == 0.0));
    }
}
