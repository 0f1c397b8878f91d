//! Oracle-equivalence checks runnable from the command line.
//!
//! Each check compares a fast path against an independent dense route at
//! small sizes.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error_analysis::{weight_map_closed_form, weight_map_from_operator};
use crate::forward::{
    autocorrelation_direct, autocorrelation_from_data, diffract, make_composite, ReferenceKind, SpecimenImage,
};
use crate::linalg::{ones_lower, triangular_svd};
use crate::noise::{corrupt, entry_rng, PoissonConfig};
use crate::recovery::{recover, recover_dual_fast, recover_dual_naive};
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

/// Random complex specimen with magnitudes in `[0, 1]`.
pub fn random_specimen(n: usize, seed: u64) -> SpecimenImage {
    let mut rng = entry_rng(seed, n as u64);
    let values = Array2::from_shape_fn((n, n), |_| {
        Complex64::from_polar(rng.random::<f64>(), 2.0 * std::f64::consts::PI * rng.random::<f64>())
    });
    SpecimenImage::new(values).expect("magnitudes are in [0, 1]")
}

fn rel_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let num: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    for n in [1usize, 2, 8, 64, 256] {
        let svd = triangular_svd(n)?;
        let err = (svd.reconstruct() - ones_lower(n)?).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        checks.push(Check::new(format!("svd reconstruction n={n}"), err, 1e-10 * n as f64));
    }

    for n in [2usize, 4] {
        let comp = make_composite(&random_specimen(n, seed), ReferenceKind::Dual);
        let fast = autocorrelation_from_data(&diffract(&comp, 4 * n)?, n)?;
        let direct = autocorrelation_direct(&comp);
        checks.push(Check::new(format!("autocorrelation n={n}"), rel_diff(&fast.lags, &direct.lags), 1e-10));
    }

    for n in [1usize, 2, 4, 8, 16] {
        let x = random_specimen(n, seed ^ 1);
        for kind in [ReferenceKind::Dual, ReferenceKind::Block, ReferenceKind::Pinhole] {
            let y = diffract(&make_composite(&x, kind), 4 * n)?;
            let r = recover(&y, n, kind)?;
            checks.push(Check::new(format!("noiseless {kind} n={n}"), rel_diff(&r.x_hat, x.values()), 1e-9));
        }
    }

    for n in [2usize, 4, 6] {
        let x = random_specimen(n, seed ^ 2);
        let y = diffract(&make_composite(&x, ReferenceKind::Dual), 4 * n - 1)?;
        let noisy = corrupt(&y, &PoissonConfig::new(1e3, seed)?)?;
        let fast = recover_dual_fast(&noisy, n)?;
        let naive = recover_dual_naive(&noisy, n)?;
        checks.push(Check::new(format!("fast vs naive n={n}"), rel_diff(&fast.x_hat, &naive.x_hat), 1e-8));
    }

    for (n, m) in [(1usize, 4usize), (2, 8), (3, 16)] {
        for kind in [ReferenceKind::Dual, ReferenceKind::Block, ReferenceKind::Pinhole] {
            let closed = weight_map_closed_form(n, m, kind)?;
            let direct = weight_map_from_operator(n, m, kind)?;
            // relative to the largest weight; some entries vanish exactly
            let scale = direct.s.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
            let dev = closed.s.iter().zip(direct.s.iter()).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max);
            checks.push(Check::new(format!("weight map {kind} n={n} m={m}"), dev, 1e-10));
        }
    }
    Ok(checks)
}
