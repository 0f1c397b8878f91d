//! Poisson shot noise on diffraction intensities.
//!
//! Each entry is drawn as `(|Y|_1 / N_p) * Pois(N_p * y / |Y|_1)`, so the
//! noisy data are unbiased with per-entry variance `(|Y|_1 / N_p) * y`.

use ndarray::{Array2, Zip};
use rand_distr::{Distribution, Poisson};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::forward::DiffractionData;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonConfig {
    /// Expected total photon count over the detector.
    pub n_photons: f64,
    pub seed: u64,
}

impl PoissonConfig {
    pub fn new(n_photons: f64, seed: u64) -> Result<Self> {
        if !(n_photons > 0.0) || !n_photons.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "photon count must be positive and finite, got {n_photons}"
            )));
        }
        Ok(Self { n_photons, seed })
    }
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one detector entry: a PCG64 stream selected by the entry
/// index and seeded from `(seed, index)`, so draws do not depend on the order
/// in which entries are visited.
pub fn entry_rng(seed: u64, index: u64) -> Pcg64 {
    let hi = mix64(seed ^ mix64(index));
    let lo = mix64(hi ^ index.rotate_left(17));
    let state = ((hi as u128) << 64) | lo as u128;
    Pcg64::new(state, index as u128)
}

fn draw(rate: f64, rng: &mut Pcg64) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    // `Poisson::new` only fails for non-finite or absurd rates, which the
    // caller has already excluded.
    Poisson::new(rate).map(|p| p.sample(rng)).unwrap_or(rate)
}

pub fn corrupt(y: &DiffractionData, cfg: &PoissonConfig) -> Result<DiffractionData> {
    if !(cfg.n_photons > 0.0) || !cfg.n_photons.is_finite() {
        return Err(Error::InvalidArgument("photon count must be positive".into()));
    }
    if y.y().iter().any(|&v| v < 0.0) {
        return Err(Error::OutOfRange("Poisson model needs nonnegative intensities".into()));
    }
    let total = y.l1_norm();
    if total == 0.0 {
        return Ok(y.clone());
    }
    let m = y.m();
    let gain = cfg.n_photons / total;
    let scale = total / cfg.n_photons;
    let mut out = Array2::<f64>::zeros((m, m));
    Zip::indexed(&mut out).and(y.y()).par_for_each(|(k1, k2), o, &v| {
        let mut rng = entry_rng(cfg.seed, (k1 * m + k2) as u64);
        *o = scale * draw(gain * v, &mut rng);
    });
    DiffractionData::new(out)
}
