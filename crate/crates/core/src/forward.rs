//! Reference layouts, oversampled diffraction data and the autocorrelation
//! windows that hold the specimen/reference cross-correlations.

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::{fft2_zero_padded, ifft2_lag_window};
use crate::{Error, Result};

/// Unknown `n x n` specimen with entry magnitudes in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecimenImage {
    values: Array2<Complex64>,
}

impl SpecimenImage {
    pub fn new(values: Array2<Complex64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r == 0 || r != c {
            return Err(Error::InvalidSize(format!("specimen must be square and nonempty, got {r}x{c}")));
        }
        if let Some(((i, j), v)) = values
            .indexed_iter()
            .find(|(_, v)| !(v.norm() <= 1.0) || !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::OutOfRange(format!(
                "specimen entry ({i},{j}) has magnitude {} outside [0, 1]",
                v.norm()
            )));
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &Array2<f64>) -> Result<Self> {
        Self::new(values.mapv(|v| Complex64::new(v, 0.0)))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Block,
    Pinhole,
    Dual,
    None,
}

impl ReferenceKind {
    /// The `n x n` reference block for single references.
    pub fn reference(self, n: usize) -> Option<Array2<Complex64>> {
        match self {
            ReferenceKind::Block => Some(Array2::from_elem((n, n), Complex64::new(1.0, 0.0))),
            ReferenceKind::Pinhole => {
                let mut r = Array2::zeros((n, n));
                r[[n - 1, n - 1]] = Complex64::new(1.0, 0.0);
                Some(r)
            }
            ReferenceKind::Dual | ReferenceKind::None => None,
        }
    }
}

impl std::fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ReferenceKind::Block => "block",
            ReferenceKind::Pinhole => "pinhole",
            ReferenceKind::Dual => "dual",
            ReferenceKind::None => "none",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ReferenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "block" => Ok(ReferenceKind::Block),
            "pinhole" => Ok(ReferenceKind::Pinhole),
            "dual" => Ok(ReferenceKind::Dual),
            "none" => Ok(ReferenceKind::None),
            other => Err(Error::InvalidArgument(format!("unknown reference kind `{other}`"))),
        }
    }
}

/// Specimen plus references laid out on the diffraction plane.
///
/// * `Dual`: `2n x 2n`, `[X R_B; R_P 0]`.
/// * `Block` / `Pinhole`: `n x 2n`, `[X R]`.
/// * `None`: the bare `n x n` specimen.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub kind: ReferenceKind,
    pub n: usize,
    pub values: Array2<Complex64>,
}

pub fn make_composite(x: &SpecimenImage, kind: ReferenceKind) -> Composite {
    let n = x.n();
    let values = match kind {
        ReferenceKind::Dual => {
            let mut c = Array2::zeros((2 * n, 2 * n));
            c.slice_mut(s![..n, ..n]).assign(x.values());
            c.slice_mut(s![..n, n..]).fill(Complex64::new(1.0, 0.0));
            c[[2 * n - 1, n - 1]] = Complex64::new(1.0, 0.0);
            c
        }
        ReferenceKind::Block | ReferenceKind::Pinhole => {
            let mut c = Array2::zeros((n, 2 * n));
            c.slice_mut(s![.., ..n]).assign(x.values());
            c.slice_mut(s![.., n..])
                .assign(&kind.reference(n).expect("single reference"));
            c
        }
        ReferenceKind::None => x.values().clone(),
    };
    Composite { kind, n, values }
}

/// `m x m` measured intensities, zero frequency at `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionData {
    y: Array2<f64>,
}

impl DiffractionData {
    pub fn new(y: Array2<f64>) -> Result<Self> {
        let (r, c) = y.dim();
        if r == 0 || r != c {
            return Err(Error::InvalidSize(format!("diffraction data must be square, got {r}x{c}")));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange("diffraction data contains non-finite values".into()));
        }
        Ok(Self { y })
    }

    pub fn m(&self) -> usize {
        self.y.nrows()
    }

    pub fn y(&self) -> &Array2<f64> {
        &self.y
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.y
    }

    pub fn l1_norm(&self) -> f64 {
        self.y.iter().map(|v| v.abs()).sum()
    }
}

fn min_detector(n: usize) -> usize {
    4 * n - 1
}

pub(crate) fn check_detector(n: usize, m: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSize("specimen side must be positive".into()));
    }
    let required = min_detector(n);
    if m < required {
        return Err(Error::DetectorTooSmall { n, m, required });
    }
    Ok(())
}

/// Squared magnitudes of the `m x m` zero-padded DFT of the composite.
pub fn diffract(c: &Composite, m: usize) -> Result<DiffractionData> {
    check_detector(c.n, m)?;
    let spectrum = fft2_zero_padded(c.values.view(), m);
    DiffractionData::new(spectrum.mapv(|z| z.norm_sqr()))
}

/// Autocorrelation lags `-(2n-1)..=2n-1` in both axes, lag `s` at index
/// `s + 2n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    pub n: usize,
    pub lags: Array2<Complex64>,
}

impl Autocorrelation {
    pub fn max_lag(&self) -> usize {
        2 * self.n - 1
    }

    pub fn at(&self, s1: isize, s2: isize) -> Complex64 {
        let l = self.max_lag() as isize;
        self.lags[[(s1 + l) as usize, (s2 + l) as usize]]
    }
}

pub fn autocorrelation_from_data(y: &DiffractionData, n: usize) -> Result<Autocorrelation> {
    check_detector(n, y.m())?;
    let lags = ifft2_lag_window(y.y().view(), 2 * n - 1);
    Ok(Autocorrelation { n, lags })
}

/// Direct `sum_t c(t) conj(c(t - s))` over the lag window, `O(n^4)`.
pub fn autocorrelation_direct(c: &Composite) -> Autocorrelation {
    let n = c.n;
    let l = (2 * n - 1) as isize;
    let (rows, cols) = c.values.dim();
    let width = 4 * n - 1;
    let lags = Array2::from_shape_fn((width, width), |(i, j)| {
        let (s1, s2) = (i as isize - l, j as isize - l);
        let mut acc = Complex64::default();
        for t1 in 0..rows as isize {
            let u1 = t1 - s1;
            if u1 < 0 || u1 >= rows as isize {
                continue;
            }
            for t2 in 0..cols as isize {
                let u2 = t2 - s2;
                if u2 < 0 || u2 >= cols as isize {
                    continue;
                }
                acc += c.values[[t1 as usize, t2 as usize]]
                    * c.values[[u1 as usize, u2 as usize]].conj();
            }
        }
        acc
    });
    Autocorrelation { n, lags }
}

/// Cross-correlation windows `(P1 A P2^T, P2 A P1^T)`.
///
/// `P1` keeps lags `-(n-1)..=0` and `P2` keeps lags `-(2n-1)..=-n`. For the
/// dual layout the first window is `1_L X 1_L^T` (block) and the second is
/// `X` itself (pinhole). For the single-reference layouts `[X R]` the
/// reference sits to the right of the specimen, so its cross-correlation is
/// always the first window.
pub fn extract_cross_correlations(
    a: &Autocorrelation,
    n: usize,
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    if a.n != n || a.lags.dim() != (4 * n - 1, 4 * n - 1) {
        return Err(Error::DimensionMismatch(format!(
            "autocorrelation of shape {:?} does not match n = {n}",
            a.lags.dim()
        )));
    }
    let cb = a.lags.slice(s![n..2 * n, ..n]).to_owned();
    let cp = a.lags.slice(s![..n, n..2 * n]).to_owned();
    Ok((cb, cp))
}

/// Detector sampling condition `delta / (lambda z) <= 1 / (2B)` under which
/// the sampled spectrum determines the autocorrelation without aliasing.
pub fn check_sampling_condition(delta: f64, lambda: f64, z: f64, b: f64) -> Result<bool> {
    for (name, v) in [("delta", delta), ("lambda", lambda), ("z", z), ("B", b)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(delta * 2.0 * b <= lambda * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ones_lower;
    use ndarray::array;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn specimen(n: usize, seed: u64) -> SpecimenImage {
        // small deterministic pseudo-random complex values with |x| <= 1
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        SpecimenImage::new(Array2::from_shape_fn((n, n), |_| {
            Complex64::from_polar(next(), 2.0 * std::f64::consts::PI * next())
        }))
        .unwrap()
    }

    #[test]
    fn specimen_rejects_large_magnitude() {
        assert!(SpecimenImage::from_real(&array![[1.5]]).is_err());
        assert!(SpecimenImage::from_real(&array![[1.0, 0.0]]).is_err());
        assert!(SpecimenImage::from_real(&array![[1.0]]).is_ok());
    }

    #[test]
    fn dual_composite_layouts() {
        let x = SpecimenImage::from_real(&array![[0.5]]).unwrap();
        let comp = make_composite(&x, ReferenceKind::Dual);
        assert_eq!(comp.values, array![[c(0.5), c(1.0)], [c(1.0), c(0.0)]]);

        let x = SpecimenImage::from_real(&Array2::zeros((2, 2))).unwrap();
        let comp = make_composite(&x, ReferenceKind::Dual);
        let bottom_left = comp.values.slice(s![2.., ..2]);
        assert_eq!(bottom_left, array![[c(0.0), c(0.0)], [c(0.0), c(1.0)]]);
        assert!(comp.values.slice(s![..2, 2..]).iter().all(|v| *v == c(1.0)));
        assert!(comp.values.slice(s![2.., 2..]).iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn block_composite_layout() {
        let x = specimen(2, 3);
        let comp = make_composite(&x, ReferenceKind::Block);
        assert_eq!(comp.values.dim(), (2, 4));
        assert_eq!(comp.values.slice(s![.., ..2]), x.values().view());
        assert!(comp.values.slice(s![.., 2..]).iter().all(|v| *v == c(1.0)));
    }

    #[test]
    fn diffract_basic_values() {
        let zero = make_composite(&SpecimenImage::from_real(&Array2::zeros((2, 2))).unwrap(), ReferenceKind::None);
        assert!(diffract(&zero, 7).unwrap().y().iter().all(|v| *v == 0.0));

        let x = SpecimenImage::from_real(&array![[0.5]]).unwrap();
        let y = diffract(&make_composite(&x, ReferenceKind::Dual), 4).unwrap();
        assert!((y.y()[[0, 0]] - 6.25).abs() < 1e-12);
    }

    #[test]
    fn diffract_rejects_small_detector() {
        let x = specimen(4, 1);
        let err = diffract(&make_composite(&x, ReferenceKind::Dual), 14).unwrap_err();
        assert!(matches!(err, Error::DetectorTooSmall { required: 15, .. }));
    }

    #[test]
    fn autocorrelation_round_trip_n2() {
        let comp = make_composite(&specimen(2, 7), ReferenceKind::Dual);
        let y = diffract(&comp, 8).unwrap();
        let fast = autocorrelation_from_data(&y, 2).unwrap();
        let direct = autocorrelation_direct(&comp);
        for (a, b) in fast.lags.iter().zip(direct.lags.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_data_gives_zero_lags() {
        let y = DiffractionData::new(Array2::zeros((8, 8))).unwrap();
        let a = autocorrelation_from_data(&y, 2).unwrap();
        assert!(a.lags.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn cross_correlation_windows_noiseless() {
        for n in [1usize, 2, 3, 5] {
            let x = specimen(n, n as u64);
            let comp = make_composite(&x, ReferenceKind::Dual);
            let a = autocorrelation_from_data(&diffract(&comp, 4 * n).unwrap(), n).unwrap();
            let (cb, cp) = extract_cross_correlations(&a, n).unwrap();
            let l = ones_lower(n).unwrap().mapv(|v| c(v));
            let expected_cb = l.dot(x.values()).dot(&l.t());
            for (a, b) in cp.iter().zip(x.values().iter()) {
                assert!((a - b).norm() < 1e-10);
            }
            for (a, b) in cb.iter().zip(expected_cb.iter()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn block_window_for_unit_impulse() {
        // vec(CB) = (1_L ⊗ 1_L) e_1: every entry whose row of the Kronecker
        // matrix touches index 1, which for the first basis vector is all.
        let x = SpecimenImage::from_real(&array![[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let comp = make_composite(&x, ReferenceKind::Dual);
        let a = autocorrelation_direct(&comp);
        let (cb, _) = extract_cross_correlations(&a, 2).unwrap();
        assert_eq!(cb, array![[c(1.0), c(1.0)], [c(1.0), c(1.0)]]);

        let x = SpecimenImage::from_real(&array![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let a = autocorrelation_direct(&make_composite(&x, ReferenceKind::Dual));
        let (cb, _) = extract_cross_correlations(&a, 2).unwrap();
        assert_eq!(cb, array![[c(0.0), c(0.0)], [c(1.0), c(1.0)]]);
    }

    #[test]
    fn single_reference_windows() {
        let n = 3;
        let x = specimen(n, 11);
        let l = ones_lower(n).unwrap().mapv(|v| c(v));
        let a = autocorrelation_direct(&make_composite(&x, ReferenceKind::Pinhole));
        let (w, _) = extract_cross_correlations(&a, n).unwrap();
        for (a, b) in w.iter().zip(x.values().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        let a = autocorrelation_direct(&make_composite(&x, ReferenceKind::Block));
        let (w, _) = extract_cross_correlations(&a, n).unwrap();
        let expected = l.dot(x.values()).dot(&l.t());
        for (a, b) in w.iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugate_symmetry_for_real_specimen() {
        let x = SpecimenImage::from_real(&Array2::from_shape_fn((3, 3), |(i, j)| (i + 2 * j) as f64 / 8.0)).unwrap();
        let y = diffract(&make_composite(&x, ReferenceKind::Dual), 13).unwrap();
        let m = 13;
        for ((k1, k2), v) in y.y().indexed_iter() {
            let w = y.y()[[(m - k1) % m, (m - k2) % m]];
            assert!((v - w).abs() <= 1e-9 * v.abs().max(1.0));
        }
    }

    #[test]
    fn sampling_condition() {
        assert!(check_sampling_condition(1.0, 2.0, 1.0, 1.0).unwrap());
        assert!(!check_sampling_condition(2.0, 1.0, 1.0, 1.0).unwrap());
        // 1e-5 * 2e-6 = 2e-11 <= 1e-10
        assert!(check_sampling_condition(1e-5, 1e-10, 1.0, 1e-6).unwrap());
        assert!(check_sampling_condition(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(check_sampling_condition(1.0, -1.0, 1.0, 1.0).is_err());
    }
}
