use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::io::{write_csv_matrix, write_pgm16_log};
use crate::error_analysis::compare_weight_maps;
use crate::forward::ReferenceKind;
use crate::Result;

/// Writes the block, pinhole and dual weight maps (on every `stride`-th
/// frequency), their ratio map and the four full-resolution border
/// cross-sections into `dir`.
pub fn emit_weight_maps(n: usize, m: usize, stride: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let cmp = compare_weight_maps(n, m, stride)?;
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (name, map) in [("block", &cmp.block), ("pinhole", &cmp.pinhole), ("dual", &cmp.dual)] {
        let csv = dir.join(format!("weights_{name}.csv"));
        let pgm = dir.join(format!("weights_{name}.pgm"));
        write_csv_matrix(&csv, &map.s)?;
        write_pgm16_log(&pgm, &map.s)?;
        files.extend([csv, pgm]);
    }
    let csv = dir.join("weights_ratio.csv");
    let pgm = dir.join("weights_ratio.pgm");
    write_csv_matrix(&csv, &cmp.ratio)?;
    write_pgm16_log(&pgm, &cmp.ratio)?;
    files.extend([csv, pgm]);

    let section = |kind: ReferenceKind| &cmp.borders.iter().find(|(k, _)| *k == kind).expect("all kinds").1;
    let (b, p, d) = (section(ReferenceKind::Block), section(ReferenceKind::Pinhole), section(ReferenceKind::Dual));
    let mut out = String::from("border,k,block,pinhole,dual\n");
    let borders = [
        ("top", &b.top, &p.top, &d.top),
        ("bottom", &b.bottom, &p.bottom, &d.bottom),
        ("left", &b.left, &p.left, &d.left),
        ("right", &b.right, &p.right, &d.right),
    ];
    for (name, bs, ps, ds) in borders {
        for k in 0..bs.len() {
            let _ = writeln!(out, "{name},{k},{:e},{:e},{:e}", bs[k], ps[k], ds[k]);
        }
    }
    let sections = dir.join("cross_sections.csv");
    std::fs::write(&sections, out)?;
    files.push(sections);

    let summary = dir.join("summary.json");
    let json = serde_json::json!({
        "n": n,
        "m": m,
        "stride": stride,
        "median_ratio_dual_over_min": cmp.median_ratio,
        "max_ratio_dual_over_min": cmp.ratio.iter().copied().fold(0.0, f64::max),
    });
    std::fs::write(&summary, serde_json::to_string_pretty(&json)?)?;
    files.push(summary);
    Ok(files)
}
