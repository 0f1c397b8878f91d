//! Monte-Carlo comparison of recovery methods over a set of specimens.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::images::ingest_image;
use super::phantom::{phantom, PHANTOM_NAMES};
use super::weightmaps::emit_weight_maps;
use crate::error_analysis::{expected_error, weight_map_closed_form, WeightMap};
use crate::forward::{diffract, make_composite, DiffractionData, ReferenceKind, SpecimenImage};
use crate::hio::{recover_hio, register_to, HioConfig, HioParams};
use crate::noise::{corrupt, mix64, PoissonConfig};
use crate::recovery::recover;
use crate::{Error, Result};

pub const TABLE_HEADER: &str = "image,method,empirical_rel_err,expected_rel_err,stderr,trials,wall_time_s";
pub const SEED_ENV: &str = "HOLODECONV_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Dual,
    Block,
    Pinhole,
    HioA,
    HioB,
    HioC,
}

impl MethodName {
    pub const ALL: [MethodName; 6] =
        [Self::Dual, Self::Block, Self::Pinhole, Self::HioA, Self::HioB, Self::HioC];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dual => "dual",
            Self::Block => "block",
            Self::Pinhole => "pinhole",
            Self::HioA => "hio_a",
            Self::HioB => "hio_b",
            Self::HioC => "hio_c",
        }
    }

    /// Layout the data are measured on.
    pub fn layout(self) -> ReferenceKind {
        match self {
            Self::Dual => ReferenceKind::Dual,
            Self::Block | Self::HioB => ReferenceKind::Block,
            Self::Pinhole | Self::HioC => ReferenceKind::Pinhole,
            Self::HioA => ReferenceKind::None,
        }
    }

    pub fn is_hio(self) -> bool {
        matches!(self, Self::HioA | Self::HioB | Self::HioC)
    }
}

impl std::str::FromStr for MethodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub image_paths: Vec<PathBuf>,
    /// Built-in synthetic specimens, see [`PHANTOM_NAMES`].
    pub phantoms: Vec<String>,
    pub n: usize,
    pub m: usize,
    /// `N_p = photons_per_pixel * m^2`.
    pub photons_per_pixel: f64,
    pub methods: Vec<MethodName>,
    pub n_trials: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Skip the Poisson corruption (one exact trial per row).
    pub noiseless: bool,
    /// Record wall times; when false the column is written as 0 so that
    /// repeated runs produce byte-identical tables.
    pub timing: bool,
    pub hio: HioParams,
    /// Also emit weight maps, on every `map_stride`-th frequency.
    pub weight_maps: bool,
    pub map_stride: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            image_paths: Vec::new(),
            phantoms: Vec::new(),
            n: 64,
            m: 1024,
            photons_per_pixel: 1000.0,
            methods: vec![MethodName::Dual, MethodName::Block, MethodName::Pinhole],
            n_trials: 100,
            seed: 0,
            output_dir: PathBuf::from("results"),
            noiseless: false,
            timing: true,
            hio: HioParams::default(),
            weight_maps: false,
            map_stride: 8,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSize("n must be positive".into()));
        }
        if self.m < 4 * self.n - 1 {
            return Err(Error::DetectorTooSmall { n: self.n, m: self.m, required: 4 * self.n - 1 });
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
        }
        if !(self.photons_per_pixel > 0.0) {
            return Err(Error::InvalidArgument("photons_per_pixel must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods selected".into()));
        }
        Ok(())
    }

    pub fn n_photons(&self) -> f64 {
        self.photons_per_pixel * (self.m as f64).powi(2)
    }

    /// Applies the `HOLODECONV_SEED` override, if set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}=`{v}` is not a u64")))?;
        }
        Ok(())
    }

    /// `(image id, source)` pairs; falls back to every phantom when no
    /// images are given.
    pub fn specimen_sources(&self) -> Vec<(String, Source)> {
        let mut out: Vec<(String, Source)> = self
            .image_paths
            .iter()
            .map(|p| {
                let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string();
                (id, Source::File(p.clone()))
            })
            .collect();
        out.extend(self.phantoms.iter().map(|p| (p.clone(), Source::Phantom(p.clone()))));
        if out.is_empty() {
            out = PHANTOM_NAMES.iter().map(|p| (p.to_string(), Source::Phantom(p.to_string()))).collect();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Phantom(String),
}

pub fn load_specimen(source: &Source, n: usize) -> Result<SpecimenImage> {
    match source {
        Source::File(p) => ingest_image(p, n),
        Source::Phantom(name) => phantom(name, n),
    }
}

fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Stable per-trial seed from `(master, image, method, trial)`.
pub fn trial_seed(master: u64, image_id: &str, method: MethodName, trial: usize) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325;
    h = fnv1a(&master.to_le_bytes(), h);
    h = fnv1a(image_id.as_bytes(), h);
    h = fnv1a(&[0xff], h);
    h = fnv1a(method.as_str().as_bytes(), h);
    h = fnv1a(&(trial as u64).to_le_bytes(), h);
    mix64(h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub image_id: String,
    pub method: MethodName,
    pub empirical_relative_error: f64,
    /// Closed-form expectation; absent for HIO rows.
    pub expected_relative_error: Option<f64>,
    pub std_error: f64,
    pub trials: usize,
    /// Mean seconds per recovery.
    pub wall_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RowFailure {
    pub image_id: String,
    pub method: MethodName,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialSeeds {
    pub image_id: String,
    pub method: MethodName,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<RowFailure>,
    pub seeds: Vec<TrialSeeds>,
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn row(&self, image_id: &str, method: MethodName) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.image_id == image_id && r.method == method)
    }

    /// CSV table with the fixed header; failed rows are written with `NA`.
    pub fn table_csv(&self, order: &[(String, MethodName)]) -> String {
        let mut out = String::from(TABLE_HEADER);
        out.push('\n');
        for (image, method) in order {
            match self.row(image, *method) {
                Some(r) => {
                    let expected = r.expected_relative_error.map_or("NA".to_string(), |v| format!("{v:e}"));
                    let _ = writeln!(
                        out,
                        "{},{},{:e},{},{:e},{},{:e}",
                        r.image_id, method.as_str(), r.empirical_relative_error, expected, r.std_error, r.trials, r.wall_time
                    );
                }
                None => {
                    let _ = writeln!(out, "{},{},NA,NA,NA,0,NA", image, method.as_str());
                }
            }
        }
        out
    }
}

fn rel_sq_error(x_hat: &Array2<Complex64>, x: &SpecimenImage) -> f64 {
    let num: f64 = x_hat.iter().zip(x.values().iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    num / x.norm_sqr()
}

struct Trial {
    rel_err: f64,
    seconds: f64,
}

fn run_trial(
    cfg: &ExperimentConfig,
    x: &SpecimenImage,
    method: MethodName,
    clean: &DiffractionData,
    seed: u64,
) -> Result<Trial> {
    let data = if cfg.noiseless {
        clean.clone()
    } else {
        corrupt(clean, &PoissonConfig::new(cfg.n_photons(), seed)?)?
    };
    let kind = method.layout();
    let (x_hat, seconds) = if method.is_hio() {
        let hcfg = HioConfig::for_kind(kind, cfg.n, cfg.hio, mix64(seed ^ 0x5151))?;
        let out = recover_hio(&data, cfg.n, kind, &hcfg)?;
        let x_hat = if kind == ReferenceKind::None {
            register_to(&out.result.x_hat, x.values())
        } else {
            out.result.x_hat
        };
        (x_hat, out.result.wall_time)
    } else {
        let r = recover(&data, cfg.n, kind)?;
        (r.x_hat, r.wall_time)
    };
    Ok(Trial { rel_err: rel_sq_error(&x_hat, x), seconds })
}

/// Runs every (specimen, method) row in memory. Nothing is written.
pub fn run_rows(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::default();
    let mut maps: HashMap<ReferenceKind, WeightMap> = HashMap::new();
    let trials = if cfg.noiseless { 1 } else { cfg.n_trials };

    for (image_id, source) in cfg.specimen_sources() {
        let x = match load_specimen(&source, cfg.n) {
            Ok(x) => x,
            Err(e) => {
                for &method in &cfg.methods {
                    report.failures.push(RowFailure { image_id: image_id.clone(), method, message: e.to_string() });
                }
                continue;
            }
        };
        for &method in &cfg.methods {
            let seeds: Vec<u64> = (0..trials).map(|t| trial_seed(cfg.seed, &image_id, method, t)).collect();
            let outcome = (|| -> Result<ResultRow> {
                if x.norm_sqr() == 0.0 {
                    return Err(Error::InvalidArgument("specimen is identically zero".into()));
                }
                let kind = method.layout();
                let clean = diffract(&make_composite(&x, kind), cfg.m)?;
                let expected = if method.is_hio() {
                    None
                } else {
                    if !maps.contains_key(&kind) {
                        maps.insert(kind, weight_map_closed_form(cfg.n, cfg.m, kind)?);
                    }
                    let report = expected_error(&maps[&kind], &clean, cfg.n_photons())?;
                    if cfg.noiseless {
                        Some(0.0)
                    } else {
                        report.with_specimen_norm_sqr(x.norm_sqr()).expected_relative
                    }
                };
                let results: Vec<Trial> = seeds
                    .par_iter()
                    .map(|&s| run_trial(cfg, &x, method, &clean, s))
                    .collect::<Result<_>>()?;
                let k = results.len() as f64;
                let mean = results.iter().map(|t| t.rel_err).sum::<f64>() / k;
                let std_error = if results.len() > 1 {
                    let var = results.iter().map(|t| (t.rel_err - mean).powi(2)).sum::<f64>() / (k - 1.0);
                    (var / k).sqrt()
                } else {
                    0.0
                };
                let wall_time = if cfg.timing { results.iter().map(|t| t.seconds).sum::<f64>() / k } else { 0.0 };
                Ok(ResultRow {
                    image_id: image_id.clone(),
                    method,
                    empirical_relative_error: mean,
                    expected_relative_error: expected,
                    std_error,
                    trials: results.len(),
                    wall_time,
                })
            })();
            match outcome {
                Ok(row) => report.rows.push(row),
                Err(e) => report.failures.push(RowFailure { image_id: image_id.clone(), method, message: e.to_string() }),
            }
            report.seeds.push(TrialSeeds { image_id: image_id.clone(), method, seeds });
        }
    }
    Ok(report)
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    config: &'a ExperimentConfig,
    n_photons: f64,
    trial_seeds: &'a [TrialSeeds],
    failures: &'a [RowFailure],
}

/// Runs the experiment and writes `table.csv`, `manifest.json` and, when
/// requested, weight-map files into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = run_rows(cfg)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let order: Vec<(String, MethodName)> = cfg
        .specimen_sources()
        .into_iter()
        .flat_map(|(id, _)| cfg.methods.iter().map(move |&m| (id.clone(), m)))
        .collect();
    let table = cfg.output_dir.join("table.csv");
    std::fs::write(&table, report.table_csv(&order))?;
    let manifest_path = cfg.output_dir.join("manifest.json");
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        n_photons: cfg.n_photons(),
        trial_seeds: &report.seeds,
        failures: &report.failures,
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    report.files.push(table);
    report.files.push(manifest_path);
    if cfg.weight_maps {
        let maps_dir = cfg.output_dir.join("weight_maps");
        report.files.extend(emit_weight_maps(cfg.n, cfg.m, cfg.map_stride, &maps_dir)?);
    }
    Ok(report)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(methods: Vec<MethodName>) -> ExperimentConfig {
        ExperimentConfig {
            phantoms: vec!["cell".into(), "blobs".into()],
            n: 16,
            m: 64,
            methods,
            n_trials: 4,
            seed: 11,
            timing: false,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn noiseless_rows_are_exact() {
        let mut cfg = small(vec![MethodName::Dual, MethodName::Block, MethodName::Pinhole]);
        cfg.noiseless = true;
        let report = run_rows(&cfg).unwrap();
        assert!(report.succeeded());
        for r in &report.rows {
            assert!(r.empirical_relative_error <= 1e-18, "{r:?}");
            assert_eq!(r.trials, 1);
        }
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let a = trial_seed(1, "cell", MethodName::Dual, 0);
        assert_eq!(a, trial_seed(1, "cell", MethodName::Dual, 0));
        assert_ne!(a, trial_seed(1, "cell", MethodName::Dual, 1));
        assert_ne!(a, trial_seed(1, "cell", MethodName::Block, 0));
        assert_ne!(a, trial_seed(2, "cell", MethodName::Dual, 0));
    }

    #[test]
    fn failed_rows_are_flagged_and_others_continue() {
        let mut cfg = small(vec![MethodName::Dual]);
        cfg.image_paths = vec![PathBuf::from("/nonexistent/specimen.pgm")];
        let report = run_rows(&cfg).unwrap();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.rows.len(), 2);
        let order = vec![("specimen".to_string(), MethodName::Dual)];
        assert!(report.table_csv(&order).contains("specimen,dual,NA,NA,NA,0,NA"));
    }

    #[test]
    fn config_validation_and_json() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.m = 100;
        assert!(cfg.validate().is_err());
        let parsed: ExperimentConfig = serde_json::from_str(r#"{"n": 8, "m": 32, "methods": ["dual", "hio_b"]}"#).unwrap();
        assert_eq!(parsed.methods, vec![MethodName::Dual, MethodName::HioB]);
        assert_eq!(parsed.photons_per_pixel, 1000.0);
        assert_eq!("hio_c".parse::<MethodName>().unwrap(), MethodName::HioC);
    }
}
