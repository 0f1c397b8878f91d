use std::path::Path;
use std::process::Command;

use holodeconv::forward::{diffract, make_composite, ReferenceKind};
use holodeconv::harness::io::{read_complex_csv, read_csv_matrix};
use holodeconv::harness::{emit_weight_maps, phantom, run_experiment, ExperimentConfig, MethodName, TABLE_HEADER};
use holodeconv::hio::HioParams;

fn small_config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        phantoms: vec!["cell".into(), "rings".into()],
        n: 8,
        m: 32,
        methods: vec![MethodName::Dual, MethodName::Block, MethodName::Pinhole, MethodName::HioB],
        n_trials: 6,
        seed: 3,
        output_dir: dir.to_path_buf(),
        timing: false,
        hio: HioParams { n_iters: 30, polish_iters: 5, n_restarts: 2, ..HioParams::default() },
        ..ExperimentConfig::default()
    }
}

#[test]
fn table_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_experiment(&small_config(a.path())).unwrap();
    run_experiment(&small_config(b.path())).unwrap();
    let ta = std::fs::read(a.path().join("table.csv")).unwrap();
    let tb = std::fs::read(b.path().join("table.csv")).unwrap();
    assert_eq!(ta, tb);

    let text = String::from_utf8(ta).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TABLE_HEADER));
    assert_eq!(lines.count(), 8);
    assert!(ra.succeeded());
    assert!(a.path().join("manifest.json").exists());
}

#[test]
fn changing_the_seed_changes_the_noise() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = small_config(a.path());
    let other = ExperimentConfig { seed: 4, output_dir: b.path().to_path_buf(), ..cfg.clone() };
    let ra = run_experiment(&cfg).unwrap();
    let rb = run_experiment(&other).unwrap();
    let ea = ra.row("cell", MethodName::Dual).unwrap().empirical_relative_error;
    let eb = rb.row("cell", MethodName::Dual).unwrap().empirical_relative_error;
    assert_ne!(ea, eb);
}

#[test]
fn missing_image_fails_only_its_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        image_paths: vec![dir.path().join("absent.pgm")],
        methods: vec![MethodName::Dual],
        ..small_config(dir.path())
    };
    let report = run_experiment(&cfg).unwrap();
    assert!(!report.succeeded());
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.rows.len(), 2);
    let table = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(table.lines().any(|l| l.starts_with("absent,dual,NA")), "{table}");
}

#[test]
fn weight_map_files_have_the_documented_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let files = emit_weight_maps(2, 8, 1, dir.path()).unwrap();
    for name in ["block", "pinhole", "dual", "ratio"] {
        let csv = read_csv_matrix(&dir.path().join(format!("weights_{name}.csv"))).unwrap();
        assert_eq!(csv.dim(), (8, 8));
        let pgm = std::fs::read(dir.path().join(format!("weights_{name}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n8 8\n65535\n"));
        assert_eq!(pgm.len(), b"P5\n8 8\n65535\n".len() + 2 * 64);
    }
    let sections = std::fs::read_to_string(dir.path().join("cross_sections.csv")).unwrap();
    assert_eq!(sections.lines().next(), Some("border,k,block,pinhole,dual"));
    assert_eq!(sections.lines().count(), 1 + 4 * 8);
    assert!(files.iter().all(|f| f.exists()));

    let big = tempfile::tempdir().unwrap();
    emit_weight_maps(64, 1024, 8, big.path()).unwrap();
    let dual = read_csv_matrix(&big.path().join("weights_dual.csv")).unwrap();
    assert_eq!(dual.dim(), (128, 128));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holodeconv"))
}

#[test]
fn cli_simulate_then_recover_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let truth = dir.path().join("truth");
    let out = dir.path().join("rec");
    let status = cli()
        .args(["simulate", "--phantom", "virus", "--n", "8", "--m", "32", "--reference", "dual"])
        .arg("--out")
        .arg(&data)
        .arg("--specimen-out")
        .arg(&truth)
        .status()
        .unwrap();
    assert!(status.success());
    let status = cli()
        .args(["recover", "--n", "8", "--method", "dual"])
        .arg("--data")
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let x = read_complex_csv(&truth).unwrap();
    let x_hat = read_complex_csv(&out).unwrap();
    let err = x.iter().zip(x_hat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    // CSV round trip keeps ~16 significant digits
    assert!(err < 1e-9, "{err}");

    let expected = diffract(&make_composite(&phantom("virus", 8).unwrap(), ReferenceKind::Dual), 32).unwrap();
    let written = read_csv_matrix(&data).unwrap();
    let dev = (&written - expected.y()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(dev < 1e-9 * expected.y().iter().fold(0.0f64, |m, v| m.max(*v)));
}

#[test]
fn cli_rejects_undersized_detector() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["simulate", "--phantom", "cell", "--n", "8", "--m", "30"])
        .arg("--out")
        .arg(dir.path().join("d.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("31"));
}

#[test]
fn cli_table_honours_seed_override_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, sub: &str| {
        cli()
            .env("HOLODECONV_SEED", seed)
            .args(["table", "--phantom", "blobs", "--n", "4", "--m", "16", "--trials", "3", "--no-timing"])
            .args(["--methods", "dual,pinhole"])
            .arg("--out")
            .arg(dir.path().join(sub))
            .status()
            .unwrap()
    };
    assert!(run("1", "a").success());
    assert!(run("1", "b").success());
    assert!(run("2", "c").success());
    let read = |sub: &str| std::fs::read(dir.path().join(sub).join("table.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));

    let status = cli()
        .args(["table", "--image", "missing.pgm", "--n", "4", "--m", "16", "--trials", "2", "--methods", "dual"])
        .arg("--out")
        .arg(dir.path().join("d"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn cli_verify_passes() {
    let out = cli().args(["verify"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).lines().all(|l| l.starts_with("PASS")));
}
