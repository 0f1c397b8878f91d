//! Dual-reference holographic phase retrieval.
//!
//! A specimen `X` is placed next to a block reference (all ones) and a
//! pinhole reference (a single one), the oversampled squared Fourier
//! magnitudes of the composite are simulated with Poisson shot noise, and
//! `X` is recovered by a structured least-squares deconvolution that runs in
//! `O(n^3 + m^2 log m)`. The crate also evaluates the expected recovery error
//! in closed form and ships single-reference and HIO baselines for
//! comparison.
//!
//! Conventions used throughout:
//!
//! * matrices are row-major [`ndarray::Array2`] values;
//! * `vec(.)` stacks columns (column-major), see [`linalg::vec_col`];
//! * the forward DFT is `sum_t x(t) exp(-2 pi i k t / m)`, unnormalised, with
//!   the zero frequency at index `(0, 0)`; the inverse carries `1/m^2`;
//! * autocorrelation lags `s` in `-(2n-1)..=2n-1` live at index `s + 2n - 1`.

mod clock;
pub mod error;
pub mod error_analysis;
pub mod fft;
pub mod forward;
pub mod harness;
pub mod hio;
pub mod linalg;
pub mod noise;
pub mod recovery;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
