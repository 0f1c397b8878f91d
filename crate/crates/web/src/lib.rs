//! Browser bindings for the holodeconv demo page. Every export returns plain
//! numbers or `Vec<f64>` so the same functions are testable natively.

use holodeconv::error_analysis::{expected_error, weight_map_closed_form, weight_map_subsampled};
use holodeconv::forward::{diffract, make_composite, ReferenceKind};
use holodeconv::harness::{phantom, PHANTOM_NAMES};
use holodeconv::linalg::triangular_svd;
use holodeconv::noise::{corrupt, PoissonConfig};
use holodeconv::recovery::recover;
use wasm_bindgen::prelude::*;

fn js_err(e: holodeconv::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn parse_kind(reference: &str) -> Result<ReferenceKind, JsError> {
    let kind: ReferenceKind = reference.parse().map_err(js_err)?;
    if kind == ReferenceKind::None {
        return Err(JsError::new("deconvolution needs a reference"));
    }
    Ok(kind)
}

#[wasm_bindgen]
pub fn phantom_names() -> Vec<String> {
    PHANTOM_NAMES.iter().map(|s| s.to_string()).collect()
}

/// Singular values of the `n x n` lower-triangular ones matrix, largest first.
#[wasm_bindgen]
pub fn singular_values(n: usize) -> Result<Vec<f64>, JsError> {
    Ok(triangular_svd(n).map_err(js_err)?.sigmas.to_vec())
}

/// `log10` of the weight map for `reference`, row-major on the strided grid
/// (side `ceil(m / stride)`). Zero weights map to `-inf`.
#[wasm_bindgen]
pub fn log_weight_map(n: usize, m: usize, reference: &str, stride: usize) -> Result<Vec<f64>, JsError> {
    let map = weight_map_subsampled(n, m, parse_kind(reference)?, stride).map_err(js_err)?;
    Ok(map.s.iter().map(|v| v.log10()).collect())
}

/// One noisy simulation and recovery of a phantom.
#[wasm_bindgen]
pub struct Reconstruction {
    n: usize,
    truth: Vec<f64>,
    estimate: Vec<f64>,
    relative_error: f64,
    expected_relative_error: f64,
}

#[wasm_bindgen]
impl Reconstruction {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Specimen magnitudes, row-major `n x n`.
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }

    /// Recovered magnitudes, row-major `n x n`.
    pub fn estimate(&self) -> Vec<f64> {
        self.estimate.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn relative_error(&self) -> f64 {
        self.relative_error
    }

    #[wasm_bindgen(getter)]
    pub fn expected_relative_error(&self) -> f64 {
        self.expected_relative_error
    }
}

#[wasm_bindgen]
pub fn simulate_and_recover(
    phantom_name: &str,
    n: usize,
    m: usize,
    reference: &str,
    photons_per_pixel: f64,
    seed: u64,
) -> Result<Reconstruction, JsError> {
    let kind = parse_kind(reference)?;
    let x = phantom(phantom_name, n).map_err(js_err)?;
    let clean = diffract(&make_composite(&x, kind), m).map_err(js_err)?;
    let n_photons = photons_per_pixel * (m * m) as f64;
    let noisy = corrupt(&clean, &PoissonConfig::new(n_photons, seed).map_err(js_err)?).map_err(js_err)?;
    let x_hat = recover(&noisy, n, kind).map_err(js_err)?.x_hat;

    let err: f64 = x_hat.iter().zip(x.values().iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    let s = weight_map_closed_form(n, m, kind).map_err(js_err)?;
    let expected = expected_error(&s, &clean, n_photons).map_err(js_err)?.with_specimen_norm_sqr(x.norm_sqr());
    Ok(Reconstruction {
        n,
        truth: x.values().iter().map(|z| z.norm()).collect(),
        estimate: x_hat.iter().map(|z| z.norm()).collect(),
        relative_error: err / x.norm_sqr(),
        expected_relative_error: expected.expected_relative.unwrap_or(f64::NAN),
    })
}
