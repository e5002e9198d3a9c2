use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};
use valfour_cli::transform::{dump_multipliers, transform_file, ROUND_TRIP_TOL};
use valfour_cli::{run_suite, Config, Format, Result};

#[derive(Parser, Debug)]
#[command(name = "valfour", version, about = "Fourier transform of translation-invariant valuations")]
struct Cli {
    /// TOML file with defaults for the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Restricts checks to this ambient dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Harmonic band limit of random test data.
    #[arg(long, global = true)]
    band_limit: Option<usize>,
    /// Overrides the tolerance of spectral checks.
    #[arg(long, global = true)]
    tol_spectral: Option<f64>,
    /// Overrides the tolerance of quadrature and Monte Carlo checks.
    #[arg(long, global = true)]
    tol_quadrature: Option<f64>,
    /// Seed of the per-suite random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Writes a bar chart of error against tolerance.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs an identity suite; `all` runs every suite.
    Verify {
        /// One of inversion, intrinsic, plane-example, even, selfadjoint, functoriality,
        /// product-convolution, signs, multipliers, or all.
        suite: String,
    },
    /// Transforms a valuation current stored as JSON.
    Transform { input: PathBuf, output: PathBuf },
    /// Writes the multiplier table as CSV.
    DumpMultipliers { csv: PathBuf },
}

impl Cli {
    fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::from_toml_file(p)?,
            None => Config::default(),
        };
        if self.n.is_some() {
            cfg.n = self.n;
        }
        if let Some(b) = self.band_limit {
            cfg.band_limit = b;
        }
        if self.tol_spectral.is_some() {
            cfg.tol_spectral = self.tol_spectral;
        }
        if self.tol_quadrature.is_some() {
            cfg.tol_quadrature = self.tol_quadrature;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if self.svg.is_some() {
            cfg.svg = self.svg.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = cli.config()?;
    match &cli.command {
        Command::Verify { suite } => {
            let names: Vec<&str> =
                if suite == "all" { valfour_cli::SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut ok = true;
            let mut svg = String::new();
            for name in names {
                let report = run_suite(name, &cfg)?;
                print!("{}", report.render(cfg.format));
                ok &= report.passed();
                svg.push_str(&report.to_svg());
            }
            if let Some(path) = &cfg.svg {
                std::fs::write(path, svg)?;
            }
            Ok(ok)
        }
        Command::Transform { input, output } => {
            let out = transform_file(input, output)?;
            let ok = out.round_trip <= ROUND_TRIP_TOL;
            if ok {
                info!("round trip F F = (-id)^*: relative error {:.3e} (tolerance {ROUND_TRIP_TOL:.0e})", out.round_trip);
            } else {
                error!("round trip F F = (-id)^*: relative error {:.3e} exceeds {ROUND_TRIP_TOL:.0e}", out.round_trip);
            }
            Ok(ok)
        }
        Command::DumpMultipliers { csv } => {
            let rows = dump_multipliers(csv, cfg.band_limit)?;
            info!("wrote {rows} multipliers to {}", csv.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            error!("{e}");
            ExitCode::from(2)
        }
    }
}
