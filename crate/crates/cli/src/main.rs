//! Command-line front end for the exponent toolkit: builds spectral-measure
//! documents, evaluates transforms, computes exponent profiles,
//! distributions and determinants, solves the growth-threshold equation,
//! drives the finite-matrix Monte Carlo oracle, and runs the built-in
//! verification suite.
//!
//! Exit codes: `0` success, `2` usage/input/domain error, `3` a consistency
//! or acceptance gate failed (artifacts are still written).

mod commands;
mod out;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status for usage, input, and domain errors.
pub const EXIT_ERROR: u8 = 2;
/// Exit status for runs whose artifacts were written but whose consistency
/// gates did not hold.
pub const EXIT_GATE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "freelyap",
    version,
    about = "Exponent spectra of large operator products: analytic pipeline and matrix Monte Carlo"
)]
pub struct Cli {
    /// Output directory, or a .json path for the primary document.
    #[arg(short, long, global = true, default_value = ".", value_name = "PATH")]
    pub out: PathBuf,

    /// Seed override for the Monte Carlo command.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Gate for cross-checked quantities (determinant route agreement,
    /// growth-threshold consistency).
    #[arg(long, global = true, default_value_t = 1e-6, value_name = "FLOAT")]
    pub tol: f64,

    /// Serialization of derived tables; `svg` also writes plots.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build or normalize a spectral-measure document
    Measure(MeasureArgs),
    /// Evaluate an analytic transform of a measure on a grid of points
    Transform(TransformArgs),
    /// Exponent profile (t, F, f) and optional threshold distribution
    Lyapunov(LyapunovArgs),
    /// Extended determinant, by spectral definition and by profile integral
    Det(DetArgs),
    /// Growth-threshold equation H(x) with its distribution cross-check
    Newman(NewmanArgs),
    /// Finite-matrix Monte Carlo run from a config document
    Mc(McArgs),
    /// Run the built-in verification suite
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct MeasureArgs {
    /// Marchenko-Pastur law with the given shape parameter.
    #[arg(long, value_name = "LAMBDA", allow_negative_numbers = true)]
    pub mp: Option<f64>,

    /// Compress the law by a free projection of this trace (with --mp).
    #[arg(long, value_name = "T", requires = "mp", allow_negative_numbers = true)]
    pub compress: Option<f64>,

    /// Unit point mass at the given location.
    #[arg(long, value_name = "X", allow_negative_numbers = true, conflicts_with = "mp")]
    pub point: Option<f64>,

    /// Purely atomic law, as comma-separated `x:mass` pairs.
    #[arg(long, value_name = "LIST", conflicts_with_all = ["mp", "point"])]
    pub atoms: Option<String>,

    /// Revalidate and re-emit an existing document.
    #[arg(
        short,
        long,
        value_name = "FILE",
        conflicts_with_all = ["mp", "point", "atoms"]
    )]
    pub input: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// Cauchy transform G(z)
    Cauchy,
    /// Moment transform psi(z)
    Psi,
    /// Functional inverse of the moment transform
    PsiInverse,
    /// S-transform (free-product S when several inputs are given)
    S,
}

#[derive(Args)]
pub struct TransformArgs {
    /// Input measure document; repeat for a free-product S evaluation.
    #[arg(short, long, value_name = "FILE", required = true)]
    pub input: Vec<PathBuf>,

    /// Which transform to evaluate.
    #[arg(long, value_enum)]
    pub kind: KindArg,

    /// Comma-separated evaluation points.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub points: Option<String>,

    /// Uniform evaluation grid.
    #[arg(
        long,
        num_args = 3,
        value_names = ["LO", "HI", "COUNT"],
        allow_hyphen_values = true,
        conflicts_with = "points"
    )]
    pub range: Option<Vec<String>>,
}

#[derive(Args)]
pub struct LyapunovArgs {
    /// Input measure document.
    #[arg(short, long, value_name = "FILE")]
    pub input: PathBuf,

    /// Interior grid size for the profile.
    #[arg(long, default_value_t = 99, value_name = "N")]
    pub grid: usize,

    /// Also emit the threshold distribution of the exponents.
    #[arg(long)]
    pub dist: bool,

    /// Explicit threshold grid for --dist, comma separated.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub x_points: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DetMethodArg {
    /// Spectral integral of log over the nonzero part
    Definition,
    /// Integral of the marginal exponent profile (invertible operators)
    SIntegral,
    /// Both routes, cross-checked against --tol
    Both,
}

#[derive(Args)]
pub struct DetArgs {
    /// Input measure document.
    #[arg(short, long, value_name = "FILE")]
    pub input: PathBuf,

    /// Evaluation route.
    #[arg(long, value_enum, default_value_t = DetMethodArg::Both)]
    pub method: DetMethodArg,
}

#[derive(Args)]
pub struct NewmanArgs {
    /// Input measure document.
    #[arg(short, long, value_name = "FILE")]
    pub input: PathBuf,

    /// Smallest growth threshold of the grid.
    #[arg(long, value_name = "FLOAT", allow_negative_numbers = true)]
    pub x_min: Option<f64>,

    /// Largest growth threshold of the grid (default: past the support).
    #[arg(long, value_name = "FLOAT", allow_negative_numbers = true)]
    pub x_max: Option<f64>,

    /// Number of grid points.
    #[arg(long, default_value_t = 50, value_name = "N")]
    pub points: usize,
}

#[derive(Args)]
pub struct McArgs {
    /// Ensemble configuration document.
    #[arg(short, long, value_name = "FILE")]
    pub config: PathBuf,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Run only these criteria (comma-separated ids, 1..=11).
    #[arg(long, value_delimiter = ',', value_name = "IDS")]
    pub only: Option<Vec<u32>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(commands::Status::Clean) => ExitCode::SUCCESS,
        Ok(commands::Status::GateFailed) => ExitCode::from(EXIT_GATE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
