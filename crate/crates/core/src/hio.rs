//! Hybrid input-output (Fienup) baseline, with optional known reference
//! pixels.
//!
//! The iterate lives on the full `m x m` frame. Each step replaces the
//! Fourier modulus by `sqrt(y)` and then, in the object domain, keeps the
//! projected values inside the support and applies `g - beta * g'` outside.
//! The last `polish_iters` steps use error reduction (zero outside the
//! support). Known reference pixels are reset after every step.

use ndarray::{s, Array2};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use crate::clock::Stopwatch;

use crate::fft::Fft2;
use crate::forward::{DiffractionData, ReferenceKind};
use crate::noise::{entry_rng, mix64};
use crate::recovery::{Method, RecoveryResult};
use crate::{Error, Result};

/// Pixels of the composite plane whose values are known a priori.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownRegion {
    pub mask: Array2<bool>,
    pub values: Array2<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HioConfig {
    pub beta: f64,
    /// Total iterations, the final `polish_iters` of which are error
    /// reduction.
    pub n_iters: usize,
    pub polish_iters: usize,
    pub n_restarts: usize,
    pub seed: u64,
    /// Support over the composite plane (placed top-left on the detector
    /// frame).
    pub support: Array2<bool>,
    pub known: Option<KnownRegion>,
    /// Reset `known` after every step; otherwise it is only used to align
    /// the final estimate.
    pub enforce_known: bool,
}

/// Tunables without the geometry, as carried in experiment files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HioParams {
    pub beta: f64,
    pub n_iters: usize,
    pub polish_iters: usize,
    pub n_restarts: usize,
    /// Reset the reference pixels to their known values after every step.
    /// When off, the reference only enters through the support and through
    /// resolving the twin-image and global-phase ambiguity at the end.
    pub enforce_reference: bool,
}

impl Default for HioParams {
    fn default() -> Self {
        Self { beta: 0.9, n_iters: 2000, polish_iters: 50, n_restarts: 5, enforce_reference: true }
    }
}

impl HioConfig {
    /// Configuration for the specimen alone (`None`) or `[X R]` with a known
    /// block or pinhole reference.
    pub fn for_kind(kind: ReferenceKind, n: usize, params: HioParams, seed: u64) -> Result<Self> {
        let (support, known) = match kind {
            ReferenceKind::None => (Array2::from_elem((n, n), true), None),
            ReferenceKind::Block | ReferenceKind::Pinhole => {
                let support = Array2::from_elem((n, 2 * n), true);
                let mut mask = Array2::from_elem((n, 2 * n), false);
                mask.slice_mut(s![.., n..]).fill(true);
                let mut values = Array2::zeros((n, 2 * n));
                values
                    .slice_mut(s![.., n..])
                    .assign(&kind.reference(n).expect("single reference"));
                (support, Some(KnownRegion { mask, values }))
            }
            ReferenceKind::Dual => {
                return Err(Error::UnsupportedKind("HIO baselines use none/block/pinhole".into()))
            }
        };
        let cfg = Self {
            beta: params.beta,
            n_iters: params.n_iters,
            polish_iters: params.polish_iters,
            n_restarts: params.n_restarts,
            seed,
            support,
            known,
            enforce_known: params.enforce_reference,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidArgument(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.n_iters == 0 || self.n_restarts == 0 {
            return Err(Error::InvalidArgument("HIO needs at least one iteration and one restart".into()));
        }
        if let Some(k) = &self.known {
            if k.mask.dim() != self.support.dim() || k.values.dim() != self.support.dim() {
                return Err(Error::DimensionMismatch("known region must match the support plane".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HioOutcome {
    /// Top-left `n x n` block of the best restart.
    pub result: RecoveryResult,
    /// Full composite-plane estimate of the best restart.
    pub composite: Array2<Complex64>,
    /// Relative Fourier-modulus residual of the best restart.
    pub residual: f64,
    /// Number of negative data entries clamped to zero.
    pub clamped: usize,
}

/// Square-rooted, clamped intensities.
pub fn modulus_from_data(y: &DiffractionData) -> (Array2<f64>, usize) {
    let mut clamped = 0;
    let modulus = y.y().mapv(|v| {
        if v < 0.0 {
            clamped += 1;
            0.0
        } else {
            v.sqrt()
        }
    });
    (modulus, clamped)
}

/// Replace the Fourier modulus of `g` by `modulus`, keeping its phase.
pub fn project_magnitude(plan: &Fft2, g: &Array2<Complex64>, modulus: &Array2<f64>) -> Array2<Complex64> {
    let mut buf = g.clone();
    plan.forward(&mut buf);
    ndarray::Zip::from(&mut buf).and(modulus).for_each(|z, &a| {
        let r = z.norm();
        *z = if r > 0.0 { *z * (a / r) } else { Complex64::new(a, 0.0) };
    });
    plan.inverse(&mut buf);
    let m = plan.size() as f64;
    buf.mapv_inplace(|z| z / (m * m));
    buf
}

fn fourier_residual(plan: &Fft2, estimate: &Array2<Complex64>, modulus: &Array2<f64>) -> f64 {
    let mut buf = estimate.clone();
    plan.forward(&mut buf);
    let num: f64 = buf.iter().zip(modulus.iter()).map(|(z, a)| (z.norm() - a).powi(2)).sum();
    let den: f64 = modulus.iter().map(|a| a * a).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn random_start(cfg: &HioConfig, m: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = entry_rng(seed, 0);
    let mut g = Array2::zeros((m, m));
    for ((i, j), &inside) in cfg.support.indexed_iter() {
        if inside {
            let mag: f64 = rng.random();
            let phase: f64 = rng.random::<f64>() * 2.0 * PI;
            g[[i, j]] = Complex64::from_polar(mag, phase);
        }
    }
    apply_known(&mut g, cfg);
    g
}

fn apply_known(g: &mut Array2<Complex64>, cfg: &HioConfig) {
    if let Some(k) = cfg.known.as_ref().filter(|_| cfg.enforce_known) {
        for ((i, j), &fixed) in k.mask.indexed_iter() {
            if fixed {
                g[[i, j]] = k.values[[i, j]];
            }
        }
    }
}

/// Runs `n_iters` steps from `start` and returns the support-restricted
/// estimate.
pub fn iterate_from(
    plan: &Fft2,
    modulus: &Array2<f64>,
    cfg: &HioConfig,
    start: Array2<Complex64>,
) -> Array2<Complex64> {
    let m = plan.size();
    let (sr, sc) = cfg.support.dim();
    let mut support = Array2::from_elem((m, m), false);
    support.slice_mut(s![..sr, ..sc]).assign(&cfg.support);

    let hio_steps = cfg.n_iters.saturating_sub(cfg.polish_iters);
    let mut g = start;
    let mut last = g.clone();
    for it in 0..cfg.n_iters {
        let gp = project_magnitude(plan, &g, modulus);
        let polish = it >= hio_steps;
        ndarray::Zip::from(&mut g)
            .and(&gp)
            .and(&support)
            .for_each(|g, &p, &inside| {
                *g = if inside {
                    p
                } else if polish {
                    Complex64::default()
                } else {
                    *g - p * cfg.beta
                };
            });
        apply_known(&mut g, cfg);
        last = gp;
    }
    let mut estimate = Array2::zeros((m, m));
    ndarray::Zip::from(&mut estimate)
        .and(&last)
        .and(&support)
        .for_each(|e, &p, &inside| {
            if inside {
                *e = p;
            }
        });
    apply_known(&mut estimate, cfg);
    estimate
}

pub fn recover_hio(y: &DiffractionData, n: usize, kind: ReferenceKind, cfg: &HioConfig) -> Result<HioOutcome> {
    cfg.validate()?;
    let m = y.m();
    let (sr, sc) = cfg.support.dim();
    if sr > m || sc > m || sr < n || sc < n {
        return Err(Error::DimensionMismatch(format!(
            "support plane {sr}x{sc} incompatible with n = {n} and m = {m}"
        )));
    }
    let method = match kind {
        ReferenceKind::None => Method::HioNone,
        ReferenceKind::Block => Method::HioBlock,
        ReferenceKind::Pinhole => Method::HioPinhole,
        ReferenceKind::Dual => return Err(Error::UnsupportedKind("dual".into())),
    };
    let start = Stopwatch::start();
    let (modulus, clamped) = modulus_from_data(y);
    let plan = Fft2::new(m);

    let runs: Vec<(f64, Array2<Complex64>)> = (0..cfg.n_restarts)
        .into_par_iter()
        .map(|r| {
            let seed = mix64(cfg.seed ^ mix64(r as u64 + 1));
            let est = iterate_from(&plan, &modulus, cfg, random_start(cfg, m, seed));
            (fourier_residual(&plan, &est, &modulus), est)
        })
        .collect();
    let (residual, best) = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one restart");

    let mut composite = best.slice(s![..sr, ..sc]).to_owned();
    if let Some(k) = cfg.known.as_ref().filter(|_| !cfg.enforce_known) {
        composite = align_to_known(&composite, k);
    }
    let x_hat = composite.slice(s![..n, ..n]).to_owned();
    Ok(HioOutcome {
        result: RecoveryResult { x_hat, method, wall_time: start.seconds() },
        composite,
        residual,
        clamped,
    })
}

/// Picks the estimate or its twin image (conjugate flip over the support
/// plane), times the global phase that best matches the known pixels.
pub fn align_to_known(composite: &Array2<Complex64>, known: &KnownRegion) -> Array2<Complex64> {
    let (r, c) = composite.dim();
    let twin = Array2::from_shape_fn((r, c), |(i, j)| composite[[r - 1 - i, c - 1 - j]].conj());
    let mut best = (f64::INFINITY, composite.clone());
    for candidate in [composite.clone(), twin] {
        let mut inner = Complex64::default();
        for ((&e, &v), &fixed) in candidate.iter().zip(known.values.iter()).zip(known.mask.iter()) {
            if fixed {
                inner += e.conj() * v;
            }
        }
        let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
        let err: f64 = candidate
            .iter()
            .zip(known.values.iter())
            .zip(known.mask.iter())
            .filter(|(_, &fixed)| fixed)
            .map(|((&e, &v), _)| (e * phase - v).norm_sqr())
            .sum();
        if err < best.0 {
            best = (err, candidate.mapv(|v| v * phase));
        }
    }
    best.1
}

/// Aligns an estimate of a reference-free recovery to the truth, undoing the
/// trivial ambiguities (global phase, circular shift, conjugate flip).
/// Only meant for error reporting.
pub fn register_to(estimate: &Array2<Complex64>, truth: &Array2<Complex64>) -> Array2<Complex64> {
    let n = truth.nrows();
    let flipped = Array2::from_shape_fn((n, n), |(i, j)| estimate[[n - 1 - i, n - 1 - j]].conj());
    let mut best = (f64::INFINITY, estimate.clone());
    for candidate in [estimate, &flipped] {
        for d1 in 0..n {
            for d2 in 0..n {
                let shifted = Array2::from_shape_fn((n, n), |(i, j)| candidate[[(i + d1) % n, (j + d2) % n]]);
                let inner: Complex64 = shifted.iter().zip(truth.iter()).map(|(e, t)| e.conj() * t).sum();
                let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
                let err: f64 = shifted.iter().zip(truth.iter()).map(|(e, t)| (e * phase - t).norm_sqr()).sum();
                if err < best.0 {
                    best = (err, shifted.mapv(|v| v * phase));
                }
            }
        }
    }
    best.1
}
