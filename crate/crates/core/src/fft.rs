//! Two-dimensional FFT helpers on row-major `ndarray` buffers.
//!
//! Forward transforms use `exp(-2 pi i k t / m)` and are unnormalised;
//! inverse transforms use `exp(+2 pi i k t / m)` and are also unnormalised
//! (callers divide by `m^2`).

use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

/// Square `m x m` transform plan, reusable across calls.
pub struct Fft2 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft(m, FftDirection::Forward),
            inverse: planner.plan_fft(m, FftDirection::Inverse),
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn forward(&self, buf: &mut Array2<Complex64>) {
        self.process(buf, &self.forward);
    }

    pub fn inverse(&self, buf: &mut Array2<Complex64>) {
        self.process(buf, &self.inverse);
    }

    fn process(&self, buf: &mut Array2<Complex64>, plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(buf.dim(), (self.m, self.m), "buffer does not match plan size");
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        transform_rows(buf, plan, &mut scratch);
        let mut t = buf.t().as_standard_layout().into_owned();
        transform_rows(&mut t, plan, &mut scratch);
        buf.assign(&t.t());
    }
}

fn transform_rows(buf: &mut Array2<Complex64>, plan: &Arc<dyn Fft<f64>>, scratch: &mut [Complex64]) {
    let slice = buf
        .as_slice_mut()
        .expect("fft buffers are in standard layout");
    plan.process_with_scratch(slice, scratch);
}

/// Unnormalised forward DFT of `data` zero-padded (top-left) into an
/// `m x m` frame.
pub fn fft2_zero_padded(data: ArrayView2<Complex64>, m: usize) -> Array2<Complex64> {
    let (rows, cols) = data.dim();
    assert!(rows <= m && cols <= m, "data larger than the transform frame");
    let plan = FftPlanner::new().plan_fft_forward(m);
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];

    // Transposed intermediate: row `j` holds column `j` of the padded frame
    // after the first pass. Only the first `rows` entries of each column are
    // nonzero before the column pass, so transform the nonzero rows first.
    let mut row_pass = Array2::<Complex64>::zeros((rows, m));
    row_pass.slice_mut(ndarray::s![.., ..cols]).assign(&data);
    if rows > 0 {
        transform_rows(&mut row_pass, &plan, &mut scratch);
    }
    let mut cols_buf = Array2::<Complex64>::zeros((m, m));
    cols_buf
        .slice_mut(ndarray::s![.., ..rows])
        .assign(&row_pass.t());
    transform_rows(&mut cols_buf, &plan, &mut scratch);
    cols_buf.t().as_standard_layout().into_owned()
}

/// Inverse DFT of a real `m x m` array evaluated only on the lag window
/// `-max_lag..=max_lag` in both axes, including the `1/m^2` factor.
///
/// Output index `s + max_lag` holds lag `s`.
pub fn ifft2_lag_window(y: ArrayView2<f64>, max_lag: usize) -> Array2<Complex64> {
    let m = y.nrows();
    assert_eq!(y.ncols(), m, "data must be square");
    let width = 2 * max_lag + 1;
    assert!(width <= m, "lag window wider than the frame");
    let plan = FftPlanner::new().plan_fft_inverse(m);
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];

    let lag_index = |s: isize| -> usize { s.rem_euclid(m as isize) as usize };

    // Pass 1: inverse transform along k2 for every row, keep the lag columns.
    let mut rows = y.mapv(|v| Complex64::new(v, 0.0));
    transform_rows(&mut rows, &plan, &mut scratch);
    // `kept` is transposed: row `c` is lag column `c - max_lag` over all k1.
    let mut kept = Array2::<Complex64>::zeros((width, m));
    for (c, mut dst) in kept.axis_iter_mut(Axis(0)).enumerate() {
        let col = lag_index(c as isize - max_lag as isize);
        dst.assign(&rows.column(col));
    }
    // Pass 2: inverse transform along k1.
    transform_rows(&mut kept, &plan, &mut scratch);

    let norm = 1.0 / (m as f64 * m as f64);
    Array2::from_shape_fn((width, width), |(r, c)| {
        kept[[c, lag_index(r as isize - max_lag as isize)]] * norm
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(data: &Array2<Complex64>, m: usize, sign: f64) -> Array2<Complex64> {
        Array2::from_shape_fn((m, m), |(k1, k2)| {
            let mut acc = Complex64::default();
            for ((t1, t2), v) in data.indexed_iter() {
                let ph = sign * 2.0 * PI * ((k1 * t1 + k2 * t2) as f64) / m as f64;
                acc += v * Complex64::from_polar(1.0, ph);
            }
            acc
        })
    }

    #[test]
    fn zero_padded_matches_naive_dft() {
        let data = Array2::from_shape_fn((3, 2), |(i, j)| Complex64::new(i as f64 + 0.5, j as f64 - 0.25));
        let fast = fft2_zero_padded(data.view(), 7);
        let slow = naive_dft(&data, 7, -1.0);
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn plan_round_trip() {
        let m = 8;
        let plan = Fft2::new(m);
        let orig = Array2::from_shape_fn((m, m), |(i, j)| Complex64::new((i * j) as f64, i as f64 - j as f64));
        let mut buf = orig.clone();
        plan.forward(&mut buf);
        let slow = naive_dft(&orig, m, -1.0);
        for (a, b) in buf.iter().zip(slow.iter()) {
            assert!((a - b).norm() < 1e-9);
        }
        plan.inverse(&mut buf);
        for (a, b) in buf.iter().zip(orig.iter()) {
            assert!((a / (m * m) as f64 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn lag_window_matches_direct_sum() {
        let m = 9;
        let y = Array2::from_shape_fn((m, m), |(i, j)| ((i * 3 + j * 5) % 7) as f64);
        let w = ifft2_lag_window(y.view(), 2);
        for r in 0..5 {
            for c in 0..5 {
                let (s1, s2) = (r as f64 - 2.0, c as f64 - 2.0);
                let mut acc = Complex64::default();
                for ((k1, k2), &v) in y.indexed_iter() {
                    let ph = 2.0 * PI * (k1 as f64 * s1 + k2 as f64 * s2) / m as f64;
                    acc += v * Complex64::from_polar(1.0, ph);
                }
                acc /= (m * m) as f64;
                assert!((acc - w[[r, c]]).norm() < 1e-12);
            }
        }
    }
}
