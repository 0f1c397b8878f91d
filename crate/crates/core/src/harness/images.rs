//! Specimen ingestion: grayscale PGM or CSV, normalised to `[0, 1]` and
//! box-resampled to `n x n`.

use ndarray::Array2;
use std::path::Path;

use super::io::{parse_csv_matrix, parse_pgm};
use crate::forward::SpecimenImage;
use crate::{Error, Result};

/// Area-weighted box resampling of `src` to `n x n`. When the source side is
/// a multiple of `n` each output pixel is the plain mean of its block.
pub fn box_resample(src: &Array2<f64>, n: usize) -> Array2<f64> {
    let (h, w) = src.dim();
    let rows = box_weights(h, n);
    let cols = box_weights(w, n);
    rows.dot(src).dot(&cols.t())
}

/// `n x len` row-stochastic matrix of interval overlaps.
fn box_weights(len: usize, n: usize) -> Array2<f64> {
    let step = len as f64 / n as f64;
    let mut w = Array2::zeros((n, len));
    for i in 0..n {
        let (lo, hi) = (i as f64 * step, (i + 1) as f64 * step);
        let first = lo.floor() as usize;
        let last = (hi.ceil() as usize).min(len);
        for k in first..last {
            let overlap = (hi.min(k as f64 + 1.0) - lo.max(k as f64)).max(0.0);
            w[[i, k]] = overlap / step;
        }
    }
    w
}

/// Loads a specimen: `.pgm` files are scaled by `1/maxval` (`1/255` for
/// ordinary 8-bit images), anything else is read as a CSV matrix whose
/// entries must already lie in `[0, 1]`.
pub fn ingest_image(path: &Path, n: usize) -> Result<SpecimenImage> {
    if n == 0 {
        return Err(Error::InvalidSize("target side must be positive".into()));
    }
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let pixels = match ext.as_str() {
        "pgm" => {
            let img = parse_pgm(&std::fs::read(path)?)?;
            img.pixels.mapv(|v| v / img.maxval as f64)
        }
        "csv" | "txt" => {
            let a = parse_csv_matrix(&std::fs::read_to_string(path)?)?;
            if let Some(v) = a.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::OutOfRange(format!("CSV specimen value {v} outside [0, 1]")));
            }
            a
        }
        "ppm" => return Err(Error::UnsupportedFormat("color images are not grayscale".into())),
        other => return Err(Error::UnsupportedFormat(format!("unknown image extension `{other}`"))),
    };
    let resized = if pixels.dim() == (n, n) { pixels } else { box_resample(&pixels, n) };
    SpecimenImage::from_real(&resized.mapv(|v| v.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn constant_pgm_normalises() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.pgm");
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(b"P5\n4 4\n255\n").unwrap();
        f.write_all(&[128u8; 16]).unwrap();
        let x = ingest_image(&p, 4).unwrap();
        assert!(x.values().iter().all(|v| (v.re - 128.0 / 255.0).abs() < 1e-15 && v.im == 0.0));
        assert!((x.values()[[0, 0]].re - 0.50196).abs() < 1e-5);
    }

    #[test]
    fn two_by_two_block_means() {
        let src = Array2::from_shape_fn((128, 128), |(i, j)| ((i * 31 + j * 17) % 256) as f64);
        let out = box_resample(&src, 64);
        for i in 0..64 {
            for j in 0..64 {
                let mean = (src[[2 * i, 2 * j]] + src[[2 * i + 1, 2 * j]] + src[[2 * i, 2 * j + 1]] + src[[2 * i + 1, 2 * j + 1]]) / 4.0;
                assert!((out[[i, j]] - mean).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fractional_resample_preserves_mean() {
        let src = Array2::from_shape_fn((10, 7), |(i, j)| (i + j) as f64);
        let out = box_resample(&src, 3);
        assert!((out.mean().unwrap() - src.mean().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn csv_out_of_range_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "0.5,1.5\n0,0\n").unwrap();
        assert!(matches!(ingest_image(&p, 2), Err(Error::OutOfRange(_))));
        std::fs::write(&p, "0.5,1\n0,0\n").unwrap();
        assert!(ingest_image(&p, 2).is_ok());
    }

    #[test]
    fn unknown_format_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        std::fs::write(&p, b"\x89PNG").unwrap();
        assert!(matches!(ingest_image(&p, 2), Err(Error::UnsupportedFormat(_))));
    }
}
