//! Synthetic specimens with smooth, low-frequency-dominant content.
//!
//! All generators work in normalised coordinates `(u, v)` in `[0, 1)^2` so
//! the same phantom can be rendered at any side length.

use ndarray::Array2;

use crate::forward::SpecimenImage;
use crate::{Error, Result};

pub const PHANTOM_NAMES: [&str; 5] = ["cell", "virus", "blobs", "cluster", "rings"];

/// Smooth step that goes from 1 inside (`d < 0`) to 0 outside.
fn soft_inside(d: f64, width: f64) -> f64 {
    0.5 * (1.0 - (d / width).tanh())
}

fn gauss(u: f64, v: f64, cu: f64, cv: f64, s: f64) -> f64 {
    (-((u - cu).powi(2) + (v - cv).powi(2)) / (2.0 * s * s)).exp()
}

/// Signed distance-like value for an axis-aligned ellipse rotated by `theta`.
fn ellipse(u: f64, v: f64, cu: f64, cv: f64, a: f64, b: f64, theta: f64) -> f64 {
    let (du, dv) = (u - cu, v - cv);
    let (c, s) = (theta.cos(), theta.sin());
    let x = c * du + s * dv;
    let y = -s * du + c * dv;
    ((x / a).powi(2) + (y / b).powi(2)).sqrt() - 1.0
}

fn cell(u: f64, v: f64) -> f64 {
    let body = soft_inside(ellipse(u, v, 0.5, 0.5, 0.36, 0.27, 0.5), 0.15);
    let nucleus = soft_inside(ellipse(u, v, 0.45, 0.55, 0.12, 0.09, -0.3), 0.15);
    let vesicles = 0.25 * gauss(u, v, 0.65, 0.38, 0.035) + 0.2 * gauss(u, v, 0.35, 0.42, 0.03);
    0.7 * body - 0.35 * nucleus + vesicles * body
}

fn virus(u: f64, v: f64) -> f64 {
    // hexagonal capsid: max of three rotated slabs
    let (du, dv) = (u - 0.5, v - 0.5);
    let r = 0.3;
    let hex = (0..3)
        .map(|k| {
            let t = k as f64 * std::f64::consts::PI / 3.0;
            (du * t.cos() + dv * t.sin()).abs()
        })
        .fold(0.0, f64::max);
    let capsid = soft_inside(hex / r - 1.0, 0.12);
    let core = gauss(u, v, 0.52, 0.48, 0.09);
    let halo = 0.15 * gauss(u, v, 0.5, 0.5, 0.25);
    0.6 * capsid + 0.3 * core + halo
}

fn blobs(u: f64, v: f64) -> f64 {
    const B: [(f64, f64, f64, f64); 5] = [
        (0.30, 0.35, 0.10, 0.8),
        (0.62, 0.30, 0.08, 0.6),
        (0.55, 0.65, 0.13, 0.7),
        (0.25, 0.70, 0.06, 0.5),
        (0.75, 0.75, 0.07, 0.4),
    ];
    B.iter().map(|&(cu, cv, s, a)| a * gauss(u, v, cu, cv, s)).sum()
}

fn cluster(u: f64, v: f64) -> f64 {
    const C: [(f64, f64, f64, f64); 4] = [
        (0.32, 0.32, 0.17, 0.55),
        (0.68, 0.36, 0.14, 0.75),
        (0.40, 0.70, 0.15, 0.65),
        (0.70, 0.70, 0.11, 0.45),
    ];
    C.iter()
        .map(|&(cu, cv, r, a)| {
            let d = ((u - cu).powi(2) + (v - cv).powi(2)).sqrt() / r - 1.0;
            a * soft_inside(d, 0.6)
        })
        .sum()
}

fn rings(u: f64, v: f64) -> f64 {
    let r = ((u - 0.5).powi(2) + (v - 0.5).powi(2)).sqrt();
    let envelope = gauss(u, v, 0.5, 0.5, 0.2);
    envelope * (0.55 + 0.35 * (2.0 * std::f64::consts::PI * r / 0.18).cos())
}

/// Renders the named phantom at side `n`, values clipped to `[0, 1]`.
pub fn phantom(name: &str, n: usize) -> Result<SpecimenImage> {
    if n == 0 {
        return Err(Error::InvalidSize("phantom side must be positive".into()));
    }
    let f: fn(f64, f64) -> f64 = match name {
        "cell" => cell,
        "virus" => virus,
        "blobs" => blobs,
        "cluster" => cluster,
        "rings" => rings,
        other => return Err(Error::InvalidArgument(format!("unknown phantom `{other}`"))),
    };
    let nf = n as f64;
    let values = Array2::from_shape_fn((n, n), |(i, j)| {
        let (u, v) = ((i as f64 + 0.5) / nf, (j as f64 + 0.5) / nf);
        f(u, v).clamp(0.0, 1.0)
    });
    SpecimenImage::from_real(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::fft2_zero_padded;

    #[test]
    fn phantoms_are_valid_and_nontrivial() {
        for name in PHANTOM_NAMES {
            let x = phantom(name, 32).unwrap();
            assert!(x.norm_sqr() > 1.0, "{name}");
            assert!(x.values().iter().all(|v| v.re >= 0.0 && v.re <= 1.0 && v.im == 0.0));
        }
        assert!(phantom("nope", 8).is_err());
    }

    #[test]
    fn spectra_are_low_frequency_dominant() {
        let n = 32;
        let m = 128;
        for name in PHANTOM_NAMES {
            let x = phantom(name, n).unwrap();
            let spec = fft2_zero_padded(x.values().view(), m).mapv(|z| z.norm_sqr());
            let total: f64 = spec.sum();
            // at least 80% of the energy within the lowest eighth of frequencies
            let band = m / 16;
            let low: f64 = spec
                .indexed_iter()
                .filter(|((a, b), _)| {
                    let fa = (*a).min(m - a);
                    let fb = (*b).min(m - b);
                    fa <= band && fb <= band
                })
                .map(|(_, v)| v)
                .sum();
            assert!(low / total > 0.8, "{name}: {}", low / total);
        }
    }
}
