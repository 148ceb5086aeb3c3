use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qmap_core::harness::{self, Experiment, RunOptions};
use qmap_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Run a damped quantum map experiment described by a JSON config.
#[derive(Parser, Debug)]
#[command(name = "qmap", version, about)]
struct Cli {
    /// spectrum, weyl-law, width-scan, angular, large-dev or classical-stats
    experiment: String,
    /// JSON config file (`-` reads standard input)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache directory (overrides QMAP_CACHE and `cache_dir`)
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Worker threads for the N grid
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// PRNG seed (overrides `seed`)
    #[arg(long)]
    seed: Option<u64>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidDamping(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let experiment: Experiment = cli.experiment.parse().map_err(|message| Error::Config {
        path: "<experiment>".into(),
        message,
    })?;
    let mut cfg = harness::parse_config_for(&cli.config, Some(experiment))?;
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(dir) = cli.cache.or_else(|| std::env::var_os("QMAP_CACHE").map(PathBuf::from)) {
        cfg.cache_dir = Some(dir);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report = harness::run_experiment_with(&cfg, &RunOptions { threads: cli.threads.max(1) })?;
    for path in harness::relative_files(&report, &cfg.output_dir) {
        println!("wrote {}", cfg.output_dir.join(path).display());
    }
    if let Some(fit) = &report.fit {
        println!("width fit: A = {:.6}, B = {:.6} ± {:.6}, residual = {:.3e}", fit.a, fit.b, fit.b_stderr, fit.residual);
    }
    for p in &report.large_dev {
        println!("c = {}: Γ = {:.6}, T = {:.6}, Î(ℓc) = {:.6}, ν = {:.6}", p.c, p.gamma, p.t, p.rate, p.nu);
    }
    if let Some(check) = &report.cache_check {
        println!("cache check at N = {}: max difference {:.3e} ({})", check.dim, check.max_difference, if check.ok { "ok" } else { "MISMATCH" });
    }
    println!("config hash {} seed {} ({:.1} s)", report.config_hash, cfg.seed, report.elapsed_seconds);
    let failed = report.failed_rows();
    if failed > 0 {
        eprintln!("{failed} row(s) FAILED");
        return Ok(EXIT_NUMERICAL);
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qmap: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
