//! `mcert`: certify, verify and falsify multiplier conditions on SL_n(R).
//!
//! Exit codes: 0 when no record fails, 1 when some record fails, 2 on
//! input errors, 3 on accuracy or numerical breakdowns.

use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mcert_core::certify::{
    certify_hm, cmd_geometry, cmd_rigidity, cmd_schur_bound, cmd_sphere_spectrum, FamilyKind, HmConfig,
    RigidityConfig, SymbolFamily,
};
use mcert_core::csv_io;
use mcert_core::report::CertificationReport;
use mcert_core::schur_numerics::RadialMode;
use mcert_core::{Error, Result};

#[derive(Parser)]
#[command(name = "mcert", version, about = "Numerical certification of multiplier conditions on SL_n(R)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Hs,
    Op,
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct FamilyArgs {
    /// radial-power, radial-log-power, hm-bump, riesz-like, csv-sampled, sine or step.
    #[arg(long)]
    family: String,
    /// Family parameter as key=value; repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
    /// Smooth cutoff radius.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Two-column CSV (x, value) for csv-sampled.
    #[arg(long)]
    table: Option<PathBuf>,
}

impl FamilyArgs {
    fn build(&self) -> Result<SymbolFamily> {
        let kind: FamilyKind = self.family.parse()?;
        let mut fam = SymbolFamily::new(kind).parse_params(&self.params)?;
        if let Some(r) = self.cutoff {
            fam = fam.with_cutoff(r);
        }
        if let Some(path) = &self.table {
            fam = fam.with_table(csv_io::read_profile(open(path)?)?);
        }
        Ok(fam)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Hörmander–Mikhlin sweep over local shells and asymptotic rays.
    CertifyHm {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        family: FamilyArgs,
        /// Highest derivative order; defaults to [n²/2]+1.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 8)]
        grid_levels: usize,
        /// Multi-indices sampled per order.
        #[arg(long, default_value_t = 12)]
        gamma_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Radial rigidity inequalities, with Schur lower bounds on request.
    Rigidity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        family: FamilyArgs,
        /// Group elements, one per row with n² entries.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Nested section sizes, e.g. 8,16,32; alone they select the orbit design.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, value_enum, default_value = "hs")]
        mode: Mode,
        /// Largest x sampled is 10^levels.
        #[arg(long, default_value_t = 7)]
        grid_levels: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Sphere eigenvalue tables and S_p sums.
    SphereSpectrum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        r: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Lower bound for the Schur norm of a square symbol matrix.
    SchurBound {
        /// Square real matrix with a header row.
        #[arg(long)]
        input: PathBuf,
        /// Schatten exponent; "inf" for the operator norm.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 30)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Weyl-chamber ball volumes and their growth rate.
    Geometry {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10")]
        radii: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
}

fn open(path: &PathBuf) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(mut report: CertificationReport, output: &Output) -> Result<i32> {
    report.finish();
    let text = match output.format {
        Format::Json => report.to_json(),
        Format::Csv => match report.tables.values().next() {
            Some(t) => t.to_csv()?,
            None => report.records_csv()?,
        },
    };
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(report.exit_code())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::CertifyHm {
            n,
            family,
            order,
            grid_levels,
            gamma_samples,
            seed,
            output,
        } => {
            let cfg = HmConfig {
                order,
                levels: grid_levels,
                seed,
                gamma_samples,
                ..HmConfig::new(n)
            };
            emit(certify_hm(&family.build()?, &cfg)?, &output)
        }
        Command::Rigidity {
            n,
            p,
            family,
            points,
            sizes,
            mode,
            grid_levels,
            seed,
            output,
        } => {
            let mut cfg = RigidityConfig::new(n, p);
            cfg.sizes = sizes;
            cfg.witness.seed = seed;
            cfg.witness.grid.far_decades = grid_levels.max(3);
            cfg.witness.mode = match mode {
                Mode::Hs => RadialMode::HilbertSchmidt,
                Mode::Op => RadialMode::Operator,
            };
            if let Some(path) = &points {
                cfg.points = Some(csv_io::read_points(open(path)?, n)?);
            }
            emit(cmd_rigidity(&family.build()?, &cfg)?, &output)
        }
        Command::SphereSpectrum {
            n,
            p,
            r,
            x,
            kmax,
            output,
        } => emit(cmd_sphere_spectrum(n, p, r, &x, kmax)?, &output),
        Command::SchurBound {
            input,
            p,
            iterations,
            seed,
            output,
        } => {
            let m = csv_io::read_matrix(open(&input)?)?;
            emit(cmd_schur_bound(&m, p, iterations, seed)?, &output)
        }
        Command::Geometry { n, radii, output } => emit(cmd_geometry(n, &radii)?, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("mcert: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
