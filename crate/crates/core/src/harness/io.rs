//! CSV and PGM readers/writers.

use ndarray::Array2;
use num_complex::Complex64;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// Writes a real matrix as comma-separated rows with round-trip precision.
pub fn write_csv_matrix(path: &Path, a: &Array2<f64>) -> Result<()> {
    let mut out = String::with_capacity(a.len() * 24);
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn parse_csv_matrix(text: &str) -> Result<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: `{}`: {e}", lineno + 1, tok.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.is_empty() || cols == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((flat.len() / cols, cols), flat).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_csv_matrix(path: &Path) -> Result<Array2<f64>> {
    parse_csv_matrix(&fs::read_to_string(path)?)
}

/// Writes `<prefix>_re.csv` and `<prefix>_im.csv`.
pub fn write_complex_csv(prefix: &Path, a: &Array2<Complex64>) -> Result<()> {
    write_csv_matrix(&suffixed(prefix, "_re.csv"), &a.mapv(|z| z.re))?;
    write_csv_matrix(&suffixed(prefix, "_im.csv"), &a.mapv(|z| z.im))
}

pub fn read_complex_csv(prefix: &Path) -> Result<Array2<Complex64>> {
    let re = read_csv_matrix(&suffixed(prefix, "_re.csv"))?;
    let im = read_csv_matrix(&suffixed(prefix, "_im.csv"))?;
    if re.dim() != im.dim() {
        return Err(Error::DimensionMismatch("real and imaginary parts differ in shape".into()));
    }
    let mut out = Array2::zeros(re.dim());
    ndarray::Zip::from(&mut out)
        .and(&re)
        .and(&im)
        .for_each(|o, &r, &i| *o = Complex64::new(r, i));
    Ok(out)
}

fn suffixed(prefix: &Path, suffix: &str) -> std::path::PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

/// 8-bit grayscale image as decoded from a PGM file.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub maxval: u32,
    pub pixels: Array2<f64>,
}

/// Parses plain (`P2`) and raw (`P5`) PGM with `maxval <= 255`.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let magic = bytes.get(..2).ok_or_else(|| Error::UnsupportedFormat("file too short".into()))?;
    let raw = match magic {
        b"P2" => false,
        b"P5" => true,
        b"P3" | b"P6" => {
            return Err(Error::UnsupportedFormat("color PPM is not grayscale".into()));
        }
        _ => return Err(Error::UnsupportedFormat("not a PGM (P2/P5) file".into())),
    };

    let mut pos = 2;
    let mut header = [0u32; 3];
    for slot in header.iter_mut() {
        *slot = next_ascii_uint(bytes, &mut pos)?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 {
        return Err(Error::Parse("PGM has zero size".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat(format!("only 8-bit PGM is supported (maxval {maxval})")));
    }
    let count = width as usize * height as usize;
    let values: Vec<f64> = if raw {
        // exactly one whitespace byte after maxval
        let start = pos + 1;
        let data = bytes
            .get(start..start + count)
            .ok_or_else(|| Error::Parse("truncated P5 pixel data".into()))?;
        data.iter().map(|&b| b as f64).collect()
    } else {
        (0..count)
            .map(|_| next_ascii_uint(bytes, &mut pos).map(|v| v as f64))
            .collect::<Result<_>>()?
    };
    if values.iter().any(|&v| v > maxval as f64) {
        return Err(Error::Parse("pixel value exceeds maxval".into()));
    }
    let pixels = Array2::from_shape_vec((height as usize, width as usize), values)
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(GrayImage { maxval, pixels })
}

fn next_ascii_uint(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while let Some(&c) = bytes.get(*pos) {
                    *pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            }
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::Parse("unexpected end of PGM".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected an integer at byte {start}")))
}

/// Writes an 8-bit raw PGM from values in `[0, 1]`.
pub fn write_pgm8(path: &Path, a: &Array2<f64>) -> Result<()> {
    let (h, w) = a.dim();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(a.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    fs::write(path, out)?;
    Ok(())
}

/// Log-scaled 16-bit raw PGM heatmap. Nonpositive entries map to 0.
pub fn write_pgm16_log(path: &Path, a: &Array2<f64>) -> Result<()> {
    let logs: Vec<f64> = a.iter().filter(|v| **v > 0.0).map(|v| v.log10()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (h, w) = a.dim();
    let mut file = fs::File::create(path)?;
    write!(file, "P5\n{w} {h}\n65535\n")?;
    let mut body = Vec::with_capacity(2 * a.len());
    for &v in a.iter() {
        let level = if v > 0.0 { ((v.log10() - lo) / span * 65535.0).round() as u16 } else { 0 };
        body.extend_from_slice(&level.to_be_bytes());
    }
    file.write_all(&body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_pgm_with_comments() {
        let img = parse_pgm(b"P2\n# hi\n3 2\n255\n0 128 255\n1 2 3\n").unwrap();
        assert_eq!(img.pixels.dim(), (2, 3));
        assert_eq!(img.pixels[[0, 1]], 128.0);
        assert_eq!(img.pixels[[1, 2]], 3.0);
    }

    #[test]
    fn raw_pgm() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend([10u8, 20, 30, 40]);
        let img = parse_pgm(&bytes).unwrap();
        assert_eq!(img.pixels[[1, 0]], 30.0);
    }

    #[test]
    fn rejects_color_and_16_bit() {
        assert!(matches!(parse_pgm(b"P6\n1 1\n255\n\0\0\0"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(parse_pgm(b"P2\n1 1\n65535\n7\n"), Err(Error::UnsupportedFormat(_))));
        assert!(parse_pgm(b"P5\n2 2\n255\n\x01").is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let a = Array2::from_shape_fn((3, 4), |(i, j)| (i as f64 + 0.1) / (j as f64 + 3.0));
        let p = dir.path().join("a.csv");
        write_csv_matrix(&p, &a).unwrap();
        assert_eq!(read_csv_matrix(&p).unwrap(), a);
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        assert!(parse_csv_matrix("1,2\n3\n").is_err());
        assert!(parse_csv_matrix("1,x\n").is_err());
        assert!(parse_csv_matrix("").is_err());
    }
}
