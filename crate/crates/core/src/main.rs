use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use holodeconv::error_analysis::{expected_error, weight_map_closed_form};
use holodeconv::forward::{diffract, make_composite, DiffractionData, ReferenceKind};
use holodeconv::harness::experiment::{load_specimen, Source, SEED_ENV};
use holodeconv::harness::io::{read_csv_matrix, write_complex_csv, write_csv_matrix, write_pgm8};
use holodeconv::harness::{emit_weight_maps, ingest_image, load_config, run_experiment, ExperimentConfig, MethodName};
use holodeconv::noise::{corrupt, PoissonConfig};
use holodeconv::recovery::{recover, recover_dual_naive};
use holodeconv::{verify, Error, Result};

#[derive(Parser)]
#[command(name = "holodeconv", version, about = "Dual-reference holographic phase retrieval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a composite, diffract it and optionally add shot noise.
    Simulate(SimulateArgs),
    /// Recover a specimen from diffraction data.
    Recover(RecoverArgs),
    /// Write block, pinhole and dual weight maps.
    Errmap(ErrmapArgs),
    /// Run a Monte-Carlo comparison table.
    Table(TableArgs),
    /// Run the oracle-equivalence checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Specimen image (PGM or CSV); defaults to a built-in phantom.
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long, default_value = "cell")]
    phantom: String,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1024)]
    m: usize,
    /// dual, block, pinhole or none.
    #[arg(long, default_value = "dual")]
    reference: ReferenceKind,
    /// Photons per detector pixel; noiseless data when omitted.
    #[arg(long)]
    photons_per_pixel: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV for the m x m intensities.
    #[arg(long, default_value = "data.csv")]
    out: PathBuf,
    /// Also write the specimen as `<prefix>_re.csv` / `<prefix>_im.csv`.
    #[arg(long)]
    specimen_out: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// dual, dual-naive, block or pinhole.
    #[arg(long, default_value = "dual")]
    method: String,
    /// Output prefix; writes `<prefix>_re.csv` and `<prefix>_im.csv`.
    #[arg(long, default_value = "recovered")]
    out: PathBuf,
    /// Optional 8-bit PGM of the recovered magnitudes.
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// Optional ground-truth image to report the relative squared error.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct ErrmapArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1024)]
    m: usize,
    /// Evaluate the maps on every `stride`-th frequency.
    #[arg(long, alias = "subsample", default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value = "weight_maps")]
    out: PathBuf,
}

#[derive(Args)]
struct TableArgs {
    /// JSON experiment file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "image")]
    images: Vec<PathBuf>,
    #[arg(long = "phantom")]
    phantoms: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    photons_per_pixel: Option<f64>,
    /// Comma-separated subset of dual,block,pinhole,hio_a,hio_b,hio_c.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<MethodName>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    noiseless: bool,
    /// Write zero wall times so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    weight_maps: bool,
    #[arg(long, alias = "subsample")]
    map_stride: Option<usize>,
    #[arg(long)]
    hio_iters: Option<usize>,
    #[arg(long)]
    hio_restarts: Option<usize>,
    #[arg(long)]
    hio_beta: Option<f64>,
    /// Run HIO(b)/(c) on the support only, without resetting the reference
    /// pixels in every step.
    #[arg(long)]
    hio_support_only: bool,
}

fn env_seed(default: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}=`{v}` is not a u64"))),
        Err(_) => Ok(default),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let source = match &args.image {
        Some(p) => Source::File(p.clone()),
        None => Source::Phantom(args.phantom.clone()),
    };
    let x = load_specimen(&source, args.n)?;
    let clean = diffract(&make_composite(&x, args.reference), args.m)?;
    let data = match args.photons_per_pixel {
        Some(ppp) => {
            let cfg = PoissonConfig::new(ppp * (args.m as f64).powi(2), env_seed(args.seed)?)?;
            corrupt(&clean, &cfg)?
        }
        None => clean.clone(),
    };
    write_csv_matrix(&args.out, data.y())?;
    if let Some(prefix) = &args.specimen_out {
        write_complex_csv(prefix, x.values())?;
    }
    println!("wrote {} ({}x{}, |Y|_1 = {:e})", args.out.display(), args.m, args.m, clean.l1_norm());
    if let (Some(ppp), ReferenceKind::Dual | ReferenceKind::Block | ReferenceKind::Pinhole) =
        (args.photons_per_pixel, args.reference)
    {
        let s = weight_map_closed_form(args.n, args.m, args.reference)?;
        let report = expected_error(&s, &clean, ppp * (args.m as f64).powi(2))?.with_specimen_norm_sqr(x.norm_sqr());
        println!("expected relative squared error: {:e}", report.expected_relative.unwrap_or(f64::NAN));
    }
    Ok(())
}

fn recover_cmd(args: RecoverArgs) -> Result<()> {
    let y = DiffractionData::new(read_csv_matrix(&args.data)?)?;
    let result = match args.method.as_str() {
        "dual-naive" => recover_dual_naive(&y, args.n)?,
        other => recover(&y, args.n, other.parse()?)?,
    };
    write_complex_csv(&args.out, &result.x_hat)?;
    if let Some(pgm) = &args.pgm {
        write_pgm8(pgm, &result.x_hat.mapv(|z| z.norm()))?;
    }
    println!("recovered {}x{} specimen in {:.3} ms", args.n, args.n, result.wall_time * 1e3);
    if let Some(truth) = &args.truth {
        let x = ingest_image(truth, args.n)?;
        let num: f64 = result.x_hat.iter().zip(x.values().iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        println!("relative squared error: {:e}", num / x.norm_sqr());
    }
    Ok(())
}

fn table(args: TableArgs) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if !args.images.is_empty() {
        cfg.image_paths = args.images;
    }
    if !args.phantoms.is_empty() {
        cfg.phantoms = args.phantoms;
    }
    if !args.methods.is_empty() {
        cfg.methods = args.methods;
    }
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.m = args.m.unwrap_or(cfg.m);
    cfg.photons_per_pixel = args.photons_per_pixel.unwrap_or(cfg.photons_per_pixel);
    cfg.n_trials = args.trials.unwrap_or(cfg.n_trials);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.output_dir = args.out.unwrap_or(cfg.output_dir);
    cfg.noiseless |= args.noiseless;
    cfg.timing &= !args.no_timing;
    cfg.weight_maps |= args.weight_maps;
    cfg.map_stride = args.map_stride.unwrap_or(cfg.map_stride);
    cfg.hio.n_iters = args.hio_iters.unwrap_or(cfg.hio.n_iters);
    cfg.hio.n_restarts = args.hio_restarts.unwrap_or(cfg.hio.n_restarts);
    cfg.hio.beta = args.hio_beta.unwrap_or(cfg.hio.beta);
    cfg.hio.enforce_reference &= !args.hio_support_only;
    cfg.apply_env_seed()?;

    let report = run_experiment(&cfg)?;
    println!("{:<16} {:<8} {:>12} {:>12} {:>10}", "image", "method", "empirical", "expected", "stderr");
    for r in &report.rows {
        let expected = r.expected_relative_error.map_or("-".to_string(), |v| format!("{v:.3e}"));
        println!(
            "{:<16} {:<8} {:>12.3e} {:>12} {:>10.2e}",
            r.image_id,
            r.method.as_str(),
            r.empirical_relative_error,
            expected,
            r.std_error
        );
    }
    for f in &report.failures {
        eprintln!("FAILED {} {}: {}", f.image_id, f.method.as_str(), f.message);
    }
    println!("results in {}", cfg.output_dir.display());
    Ok(report.succeeded())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(args) => simulate(args).map(|_| true),
        Command::Recover(args) => recover_cmd(args).map(|_| true),
        Command::Errmap(args) => {
            let files = emit_weight_maps(args.n, args.m, args.stride, &args.out)?;
            println!("wrote {} files to {}", files.len(), args.out.display());
            Ok(true)
        }
        Command::Table(args) => table(args),
        Command::Verify { seed } => {
            let checks = verify::run_all(seed)?;
            let mut ok = true;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<36} {:.3e} (tol {:.1e})", c.name, c.value, c.tolerance);
                ok &= c.passed;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
