//! Expected recovery error under Poisson noise and the per-frequency weight
//! maps `S(k1, k2) = ||T(:, k)||^2` that drive it.
//!
//! The recovery operator `T` is linear in the data, so with independent
//! noise of variance `(|Y|_1 / N_p) y` the expected squared error is
//! `(|Y|_1 / N_p) <S, Y>`.
//!
//! Maps are indexed like the data: `S[[k1, k2]]` belongs to `Y[[k1, k2]]`.

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use serde::Serialize;

use crate::forward::{check_detector, DiffractionData, ReferenceKind};
use crate::linalg::triangular_svd;
use crate::recovery::{build_t_columns, dual_weights};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    pub kind: ReferenceKind,
    pub m: usize,
    /// Row frequencies `k1` present in `s`.
    pub k1: Vec<usize>,
    /// Column frequencies `k2` present in `s`.
    pub k2: Vec<usize>,
    pub s: Array2<f64>,
}

impl WeightMap {
    pub fn is_full(&self) -> bool {
        self.k1.len() == self.m
            && self.k2.len() == self.m
            && self.k1.iter().enumerate().all(|(i, &k)| i == k)
            && self.k2.iter().enumerate().all(|(i, &k)| i == k)
    }
}

/// `n x K` matrix with entries `exp(2 pi i k (t + offset) / m)`, i.e. the
/// selected lag rows of `F^*` restricted to the frequencies `ks`.
fn window_phases(n: usize, m: usize, offset: isize, ks: &[usize]) -> Array2<Complex64> {
    let mm = m as i128;
    Array2::from_shape_fn((n, ks.len()), |(t, j)| {
        let lag = t as i128 + offset as i128;
        let r = (ks[j] as i128 * lag).rem_euclid(mm);
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / m as f64)
    })
}

fn real_times_complex(a: &Array2<f64>, z: &Array2<Complex64>) -> Array2<Complex64> {
    let re = a.dot(&z.mapv(|v| v.re));
    let im = a.dot(&z.mapv(|v| v.im));
    let mut out = Array2::zeros(re.dim());
    ndarray::Zip::from(&mut out)
        .and(&re)
        .and(&im)
        .for_each(|o, &r, &i| *o = Complex64::new(r, i));
    out
}

fn check_grid(m: usize, ks: &[usize]) -> Result<()> {
    match ks.iter().find(|&&k| k >= m) {
        Some(k) => Err(Error::OutOfRange(format!("frequency {k} outside 0..{m}"))),
        None => Ok(()),
    }
}

/// Closed-form weight map evaluated on the sub-grid `k1s x k2s`.
pub fn weight_map_on_grid(
    n: usize,
    m: usize,
    kind: ReferenceKind,
    k1s: &[usize],
    k2s: &[usize],
) -> Result<WeightMap> {
    check_detector(n, m)?;
    check_grid(m, k1s)?;
    check_grid(m, k2s)?;
    let p1 = -(n as isize - 1);
    let p2 = -(2 * n as isize - 1);
    let m4 = (m as f64).powi(4);

    let s = match kind {
        ReferenceKind::Dual => {
            let svd = triangular_svd(n)?;
            let ut = svd.u.t().to_owned();
            let vt = svd.v.t().to_owned();
            // Block term pairs u_r with the P1 window at k1 and u_s with the
            // P2 window at k2; the pinhole term uses v with the windows
            // swapped.
            let a = real_times_complex(&ut, &window_phases(n, m, p1, k1s));
            let c = real_times_complex(&vt, &window_phases(n, m, p2, k1s));
            let b = real_times_complex(&ut, &window_phases(n, m, p2, k2s));
            let d = real_times_complex(&vt, &window_phases(n, m, p1, k2s));
            let (wb, wp) = dual_weights(&svd.sigmas);

            // |wb a_r b_s + wp c_r d_s|^2 summed over (r, s), expanded into
            // three real bilinear forms.
            let a2 = a.mapv(|v| v.norm_sqr());
            let b2 = b.mapv(|v| v.norm_sqr());
            let c2 = c.mapv(|v| v.norm_sqr());
            let d2 = d.mapv(|v| v.norm_sqr());
            let g = &a * &c.mapv(|v| v.conj());
            let h = &b * &d.mapv(|v| v.conj());
            let wbb = wb.mapv(|v| v * v);
            let wpp = wp.mapv(|v| v * v);
            let wbp = &wb * &wp;

            let block = a2.t().dot(&wbb).dot(&b2);
            let pinhole = c2.t().dot(&wpp).dot(&d2);
            let g_re = g.mapv(|v| v.re);
            let g_im = g.mapv(|v| v.im);
            let h_re = h.mapv(|v| v.re);
            let h_im = h.mapv(|v| v.im);
            let cross = g_re.t().dot(&wbp).dot(&h_re) - g_im.t().dot(&wbp).dot(&h_im);
            let mut s = block + pinhole + cross * 2.0;
            s.mapv_inplace(|v| v.max(0.0) / m4);
            s
        }
        ReferenceKind::Block | ReferenceKind::Pinhole => {
            // T is the rank-one map Y -> R P1 F^* Y F̄ P2^T R^T / m^2 with R
            // the inverse of 1_L (block) or the identity (pinhole).
            let rows = column_norms(&window_phases(n, m, p1, k1s), kind);
            let cols = column_norms(&window_phases(n, m, p2, k2s), kind);
            let mut s = Array2::zeros((k1s.len(), k2s.len()));
            for (i, r) in rows.iter().enumerate() {
                for (j, c) in cols.iter().enumerate() {
                    s[[i, j]] = r * c / m4;
                }
            }
            s
        }
        ReferenceKind::None => {
            return Err(Error::UnsupportedKind("weight maps need a reference".into()))
        }
    };
    Ok(WeightMap { kind, m, k1: k1s.to_vec(), k2: k2s.to_vec(), s })
}

fn column_norms(phases: &Array2<Complex64>, kind: ReferenceKind) -> Array1<f64> {
    let n = phases.nrows();
    phases
        .axis_iter(Axis(1))
        .map(|col| {
            (0..n)
                .map(|t| match kind {
                    ReferenceKind::Block if t > 0 => (col[t] - col[t - 1]).norm_sqr(),
                    _ => col[t].norm_sqr(),
                })
                .sum()
        })
        .collect()
}

pub fn weight_map_closed_form(n: usize, m: usize, kind: ReferenceKind) -> Result<WeightMap> {
    let all: Vec<usize> = (0..m).collect();
    weight_map_on_grid(n, m, kind, &all, &all)
}

/// Closed-form map on every `stride`-th frequency in both axes.
pub fn weight_map_subsampled(n: usize, m: usize, kind: ReferenceKind, stride: usize) -> Result<WeightMap> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let ks: Vec<usize> = (0..m).step_by(stride).collect();
    weight_map_on_grid(n, m, kind, &ks, &ks)
}

/// Weight map from the squared column norms of the explicitly assembled
/// recovery operator. Dense and slow; for validation at small sizes.
pub fn weight_map_from_operator(n: usize, m: usize, kind: ReferenceKind) -> Result<WeightMap> {
    let indices: Vec<(usize, usize)> = (0..m).flat_map(|k1| (0..m).map(move |k2| (k1, k2))).collect();
    let cols = build_t_columns(n, m, kind, &indices)?;
    let mut s = Array2::zeros((m, m));
    for (&(k1, k2), col) in indices.iter().zip(cols.iter()) {
        s[[k1, k2]] = col.iter().map(|v| v.norm_sqr()).sum();
    }
    let all: Vec<usize> = (0..m).collect();
    Ok(WeightMap { kind, m, k1: all.clone(), k2: all, s })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    /// `E ||X~ - X||_F^2`.
    pub expected_mse: f64,
    pub empirical_mse: Option<f64>,
    /// `expected_mse / ||X||_F^2`, when the specimen norm is known.
    pub expected_relative: Option<f64>,
    pub empirical_relative: Option<f64>,
    pub n_trials: usize,
}

impl ErrorReport {
    pub fn with_specimen_norm_sqr(mut self, norm_sqr: f64) -> Self {
        if norm_sqr > 0.0 {
            self.expected_relative = Some(self.expected_mse / norm_sqr);
            self.empirical_relative = self.empirical_mse.map(|e| e / norm_sqr);
        }
        self
    }

    pub fn with_empirical(mut self, mean_sq_error: f64, n_trials: usize) -> Self {
        self.empirical_mse = Some(mean_sq_error);
        self.n_trials = n_trials;
        self
    }
}

/// `(|y|_1 / N_p) <S, y>`.
pub fn expected_error(s: &WeightMap, y: &DiffractionData, n_photons: f64) -> Result<ErrorReport> {
    if !s.is_full() || s.m != y.m() {
        return Err(Error::DimensionMismatch(format!(
            "weight map ({}x{} of m={}) does not cover data of side {}",
            s.k1.len(),
            s.k2.len(),
            s.m,
            y.m()
        )));
    }
    if !(n_photons > 0.0) {
        return Err(Error::InvalidArgument("photon count must be positive".into()));
    }
    let inner: f64 = s.s.iter().zip(y.y().iter()).map(|(a, b)| a * b).sum();
    Ok(ErrorReport {
        expected_mse: y.l1_norm() / n_photons * inner,
        empirical_mse: None,
        expected_relative: None,
        empirical_relative: None,
        n_trials: 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BorderSections {
    /// `S(0, k)` for `k` in `0..m`.
    pub top: Vec<f64>,
    /// `S(m-1, k)`.
    pub bottom: Vec<f64>,
    /// `S(k, 0)`.
    pub left: Vec<f64>,
    /// `S(k, m-1)`.
    pub right: Vec<f64>,
}

impl BorderSections {
    pub fn len(&self) -> usize {
        self.top.len() + self.bottom.len() + self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct WeightMapComparison {
    pub block: WeightMap,
    pub pinhole: WeightMap,
    pub dual: WeightMap,
    /// `S_dual / min(S_block, S_pinhole)` on the same grid.
    pub ratio: Array2<f64>,
    pub median_ratio: f64,
    pub borders: Vec<(ReferenceKind, BorderSections)>,
}

fn borders(n: usize, m: usize, kind: ReferenceKind) -> Result<BorderSections> {
    let all: Vec<usize> = (0..m).collect();
    let rows = weight_map_on_grid(n, m, kind, &[0, m - 1], &all)?;
    let cols = weight_map_on_grid(n, m, kind, &all, &[0, m - 1])?;
    Ok(BorderSections {
        top: rows.s.row(0).to_vec(),
        bottom: rows.s.row(1).to_vec(),
        left: cols.s.column(0).to_vec(),
        right: cols.s.column(1).to_vec(),
    })
}

pub fn compare_weight_maps(n: usize, m: usize, stride: usize) -> Result<WeightMapComparison> {
    let block = weight_map_subsampled(n, m, ReferenceKind::Block, stride)?;
    let pinhole = weight_map_subsampled(n, m, ReferenceKind::Pinhole, stride)?;
    let dual = weight_map_subsampled(n, m, ReferenceKind::Dual, stride)?;
    let mut ratio = Array2::zeros(dual.s.dim());
    ndarray::Zip::from(&mut ratio)
        .and(&dual.s)
        .and(&block.s)
        .and(&pinhole.s)
        .for_each(|r, &d, &b, &p| *r = d / b.min(p));
    let mut sorted: Vec<f64> = ratio.iter().copied().collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median_ratio = if sorted.is_empty() {
        f64::NAN
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let borders = [ReferenceKind::Block, ReferenceKind::Pinhole, ReferenceKind::Dual]
        .into_iter()
        .map(|k| borders(n, m, k).map(|b| (k, b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightMapComparison { block, pinhole, dual, ratio, median_ratio, borders })
}
