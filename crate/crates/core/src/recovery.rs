//! Referenced deconvolution.
//!
//! With the cross-correlation windows `C_B = 1_L X 1_L^T` and `C_P = X`, the
//! dual-reference estimate is the least-squares solution of
//! `[1_L ⊗ 1_L; I] vec(X) = [vec(C_B); vec(C_P)]`. Writing `1_L = U S V^T`
//! turns the normal equations into a diagonal system in the `V` basis:
//!
//! ```text
//! Z(r,s) = (s_r s_s (U^T C_B U)(r,s) + (V^T C_P V)(r,s)) / (s_r^2 s_s^2 + 1)
//! X      = V Z V^T
//! ```
//!
//! which costs `O(n^3)` on top of the inverse FFT.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use crate::clock::Stopwatch;

use crate::forward::{
    autocorrelation_from_data, check_detector, extract_cross_correlations, Autocorrelation,
    DiffractionData, ReferenceKind,
};
use crate::linalg::{kron, ones_lower, pinv_naive, real_matvec, real_sandwich, triangular_svd, unvec_col, vec_col};
use crate::{Error, Result};

/// Largest `n` the dense `O(n^6)` paths accept by default.
pub const DEFAULT_ORACLE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DualFast,
    DualNaive,
    BlockSingle,
    PinholeSingle,
    HioNone,
    HioBlock,
    HioPinhole,
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub x_hat: Array2<Complex64>,
    pub method: Method,
    /// Seconds spent in the recovery call, including the inverse FFT.
    pub wall_time: f64,
}

/// Per-(r,s) weights `(s_r s_s / (s_r^2 s_s^2 + 1), 1 / (s_r^2 s_s^2 + 1))`.
pub fn dual_weights(sigmas: &Array1<f64>) -> (Array2<f64>, Array2<f64>) {
    let n = sigmas.len();
    let mut wb = Array2::zeros((n, n));
    let mut wp = Array2::zeros((n, n));
    for r in 0..n {
        for s in 0..n {
            let p = sigmas[r] * sigmas[s];
            let d = p * p + 1.0;
            wb[[r, s]] = p / d;
            wp[[r, s]] = 1.0 / d;
        }
    }
    (wb, wp)
}

/// Least-squares combination of the two cross-correlation windows.
pub fn solve_dual_windows(cb: &Array2<Complex64>, cp: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = cb.nrows();
    if cb.dim() != (n, n) || cp.dim() != (n, n) {
        return Err(Error::DimensionMismatch("cross-correlation windows must be n x n".into()));
    }
    let svd = triangular_svd(n)?;
    let (wb, wp) = dual_weights(&svd.sigmas);
    let block = real_sandwich(&svd.u.t().to_owned(), cb, &svd.u);
    let pinhole = real_sandwich(&svd.v.t().to_owned(), cp, &svd.v);
    let mut z = Array2::<Complex64>::zeros((n, n));
    ndarray::Zip::from(&mut z)
        .and(&block)
        .and(&pinhole)
        .and(&wb)
        .and(&wp)
        .for_each(|z, &b, &p, &wb, &wp| *z = b * wb + p * wp);
    Ok(real_sandwich(&svd.v, &z, &svd.v.t().to_owned()))
}

pub fn recover_dual_fast(y: &DiffractionData, n: usize) -> Result<RecoveryResult> {
    let start = Stopwatch::start();
    let a = autocorrelation_from_data(y, n)?;
    let (cb, cp) = extract_cross_correlations(&a, n)?;
    let x_hat = solve_dual_windows(&cb, &cp)?;
    Ok(RecoveryResult { x_hat, method: Method::DualFast, wall_time: start.seconds() })
}

/// Dense system matrix `M` for a reference kind.
pub fn system_matrix(n: usize, kind: ReferenceKind) -> Result<Array2<f64>> {
    let n2 = n * n;
    match kind {
        ReferenceKind::Dual => {
            let l = ones_lower(n)?;
            let mut m = Array2::zeros((2 * n2, n2));
            m.slice_mut(s![..n2, ..]).assign(&kron(&l, &l));
            m.slice_mut(s![n2.., ..]).assign(&Array2::eye(n2));
            Ok(m)
        }
        ReferenceKind::Block => {
            let l = ones_lower(n)?;
            Ok(kron(&l, &l))
        }
        ReferenceKind::Pinhole => Ok(Array2::eye(n2)),
        ReferenceKind::None => Err(Error::UnsupportedKind("no reference".into())),
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::OracleCapExceeded { n, cap });
    }
    Ok(())
}

/// Right-hand side `b` for a kind, given the autocorrelation windows.
fn stacked_rhs(a: &Autocorrelation, n: usize, kind: ReferenceKind) -> Result<Array1<Complex64>> {
    let (w1, w2) = extract_cross_correlations(a, n)?;
    match kind {
        ReferenceKind::Dual => {
            let mut b = vec_col(&w1).to_vec();
            b.extend(vec_col(&w2).iter());
            Ok(Array1::from(b))
        }
        ReferenceKind::Block | ReferenceKind::Pinhole => Ok(vec_col(&w1)),
        ReferenceKind::None => Err(Error::UnsupportedKind("no reference".into())),
    }
}

fn solve_dense(a: &Autocorrelation, n: usize, kind: ReferenceKind) -> Result<Array2<Complex64>> {
    let pinv = pinv_naive(&system_matrix(n, kind)?)?;
    let b = stacked_rhs(a, n, kind)?;
    unvec_col(&real_matvec(&pinv, &b), n, n)
}

/// Explicit pseudoinverse solve, `O(n^6)`; `n` must not exceed `cap`.
pub fn recover_dual_naive_capped(y: &DiffractionData, n: usize, cap: usize) -> Result<RecoveryResult> {
    check_cap(n, cap)?;
    let start = Stopwatch::start();
    let a = autocorrelation_from_data(y, n)?;
    let x_hat = solve_dense(&a, n, ReferenceKind::Dual)?;
    Ok(RecoveryResult { x_hat, method: Method::DualNaive, wall_time: start.seconds() })
}

pub fn recover_dual_naive(y: &DiffractionData, n: usize) -> Result<RecoveryResult> {
    recover_dual_naive_capped(y, n, DEFAULT_ORACLE_CAP)
}

/// Inverts `C = 1_L X 1_L^T` by differencing along both axes.
pub fn invert_block_window(c: &Array2<Complex64>) -> Array2<Complex64> {
    let (r, k) = c.dim();
    Array2::from_shape_fn((r, k), |(i, j)| {
        let at = |i: Option<usize>, j: Option<usize>| match (i, j) {
            (Some(i), Some(j)) => c[[i, j]],
            _ => Complex64::default(),
        };
        let (ip, jp) = (i.checked_sub(1), j.checked_sub(1));
        at(Some(i), Some(j)) - at(ip, Some(j)) - at(Some(i), jp) + at(ip, jp)
    })
}

/// Single-reference deconvolution for data measured on `[X R]`.
pub fn recover_single(y: &DiffractionData, n: usize, kind: ReferenceKind) -> Result<RecoveryResult> {
    let start = Stopwatch::start();
    let (method, block) = match kind {
        ReferenceKind::Block => (Method::BlockSingle, true),
        ReferenceKind::Pinhole => (Method::PinholeSingle, false),
        other => {
            return Err(Error::UnsupportedKind(format!(
                "single-reference recovery needs block or pinhole, got {other}"
            )))
        }
    };
    let a = autocorrelation_from_data(y, n)?;
    let (window, _) = extract_cross_correlations(&a, n)?;
    let x_hat = if block { invert_block_window(&window) } else { window };
    Ok(RecoveryResult { x_hat, method, wall_time: start.seconds() })
}

/// Deconvolution recovery for the layout that produced `y`.
pub fn recover(y: &DiffractionData, n: usize, kind: ReferenceKind) -> Result<RecoveryResult> {
    match kind {
        ReferenceKind::Dual => recover_dual_fast(y, n),
        ReferenceKind::Block | ReferenceKind::Pinhole => recover_single(y, n, kind),
        ReferenceKind::None => Err(Error::UnsupportedKind(
            "deconvolution needs a reference; use HIO for the bare specimen".into(),
        )),
    }
}

/// Autocorrelation lag window of the indicator intensity at `(k1, k2)`,
/// written out from the DFT definition.
fn indicator_autocorrelation(n: usize, m: usize, k1: usize, k2: usize) -> Autocorrelation {
    let l = (2 * n - 1) as f64;
    let width = 4 * n - 1;
    let norm = 1.0 / (m as f64 * m as f64);
    let lags = Array2::from_shape_fn((width, width), |(i, j)| {
        let (s1, s2) = (i as f64 - l, j as f64 - l);
        let phase = 2.0 * PI * (k1 as f64 * s1 + k2 as f64 * s2) / m as f64;
        Complex64::from_polar(norm, phase)
    });
    Autocorrelation { n, lags }
}

/// Columns of the linear recovery operator `T` (mapping `vec(Y)` to
/// `vec(X~)`), built from dense pieces: the DFT sum for the autocorrelation
/// and the explicit pseudoinverse of `M`.
///
/// Column `(k1, k2)` is the recovery of the indicator intensity at that
/// frequency; its position in `vec(Y)` is `k1 + m k2`.
pub fn build_t_columns(
    n: usize,
    m: usize,
    kind: ReferenceKind,
    indices: &[(usize, usize)],
) -> Result<Vec<Array1<Complex64>>> {
    check_detector(n, m)?;
    check_cap(n, DEFAULT_ORACLE_CAP)?;
    if indices.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(&(k1, k2)) = indices.iter().find(|&&(k1, k2)| k1 >= m || k2 >= m) {
        return Err(Error::OutOfRange(format!("frequency ({k1},{k2}) outside {m}x{m}")));
    }
    let pinv = pinv_naive(&system_matrix(n, kind)?)?;
    indices
        .iter()
        .map(|&(k1, k2)| {
            let a = indicator_autocorrelation(n, m, k1, k2);
            let b = stacked_rhs(&a, n, kind)?;
            Ok(real_matvec(&pinv, &b))
        })
        .collect()
}
