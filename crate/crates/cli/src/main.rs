mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Modular polynomials, special geodesics and real modular curves.
///
/// Exit codes: 0 success or positive verdict, 1 negative verdict or failed
/// certification, 2 level or precision budget exceeded, 3 no seeds found,
/// 4 inconclusive or evidence-only verdict, 64 usage error.
#[derive(Parser, Debug)]
#[command(name = "geoproj", version)]
pub struct Cli {
    /// Working precision in bits (at least 64).
    #[arg(long, global = true, default_value_t = 192)]
    pub prec: u32,
    /// Numerical tolerance; each command has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Highest modular polynomial level the cache may compute.
    #[arg(long, global = true)]
    pub max_level: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Svg,
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute Φ_N and print or write it as JSON.
    Modpoly { n: u32 },
    /// Evaluate j at a point of the upper half-plane.
    JEval {
        #[arg(allow_hyphen_values = true)]
        re: String,
        #[arg(allow_hyphen_values = true)]
        im: String,
        /// Also print j'(z).
        #[arg(long)]
        derivative: bool,
    },
    /// A point of the fundamental domain with the given j-value.
    JInv {
        #[arg(allow_hyphen_values = true)]
        re: String,
        #[arg(allow_hyphen_values = true)]
        im: String,
    },
    /// Special geodesics given by trace-zero matrices (a b; c −a).
    Geodesic {
        #[command(subcommand)]
        op: GeodesicOp,
    },
    /// The real curves Z_N.
    Zn {
        #[command(subcommand)]
        op: ZnOp,
    },
    /// Real and imaginary parts of a complex plane curve.
    Restrict {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Trace Z_N or the intersection of a restricted curve with Z_M × ℝ².
    Trace {
        #[command(subcommand)]
        kind: TraceKind,
    },
    /// Decide whether a plane curve is strongly special.
    Detect(DetectArgs),
}

#[derive(Args, Debug, Clone)]
pub struct MatrixEntries {
    #[arg(allow_hyphen_values = true)]
    pub a: String,
    #[arg(allow_hyphen_values = true)]
    pub b: String,
    #[arg(allow_hyphen_values = true)]
    pub c: String,
}

#[derive(Subcommand, Debug)]
pub enum GeodesicOp {
    Endpoints(MatrixEntries),
    Locus(MatrixEntries),
    /// B·A·B⁻¹ for B with positive determinant.
    Conjugate {
        #[arg(long, num_args = 4, allow_hyphen_values = true, value_names = ["B11", "B12", "B21", "B22"])]
        by: Vec<String>,
        #[command(flatten)]
        entries: MatrixEntries,
    },
    /// Draw geodesics given as `a,b,c` triples.
    Plot {
        #[arg(required = true)]
        geodesics: Vec<String>,
        /// Window `x0 x1 ymax` in the upper half-plane.
        #[arg(long, num_args = 3, allow_hyphen_values = true)]
        view: Option<Vec<f64>>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ZnTraceArgs {
    pub n: u32,
    /// `x0 x1 y0 y1`.
    #[arg(long, num_args = 4, allow_hyphen_values = true, default_values_t = [-2000.0, 10000.0, -5000.0, 5000.0])]
    pub bbox: Vec<f64>,
    #[arg(long, default_value_t = 20.0)]
    pub step: f64,
    /// Seeding grid resolution per side.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ZnOp {
    /// The integer polynomial F_N(x, y) = Φ_N(x+iy, x−iy).
    Build { n: u32 },
    Trace(ZnTraceArgs),
    /// Certify that a point of Z_N(ℝ) lies on a special geodesic.
    Certify {
        n: u32,
        #[arg(allow_hyphen_values = true)]
        x: f64,
        #[arg(allow_hyphen_values = true)]
        y: f64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct IntersectArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long = "M", default_value_t = 1)]
    pub m: u32,
    /// `x0 x1 y0 y1`, used for both planes.
    #[arg(long, num_args = 4, allow_hyphen_values = true, default_values_t = [-2000.0, 10000.0, -5000.0, 5000.0])]
    pub bbox: Vec<f64>,
    #[arg(long, default_value_t = 50.0)]
    pub step: f64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum TraceKind {
    Zn(ZnTraceArgs),
    Intersect(IntersectArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DetectArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub nmax_exact: u32,
    #[arg(long, default_value_t = 12)]
    pub nmax_search: u32,
    #[arg(long = "M", value_delimiter = ',', default_values_t = [1, 2, 3])]
    pub m_list: Vec<u32>,
    /// Distinct certified level pairs needed for an evidence verdict.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// `x0 x1 y0 y1`, used for both planes.
    #[arg(long, num_args = 4, allow_hyphen_values = true, default_values_t = [-2000.0, 10000.0, -5000.0, 5000.0])]
    pub bbox: Vec<f64>,
    #[arg(long, default_value_t = 50.0)]
    pub step: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
