//! Command-line front end: `select`, `decompose` and `codelength`.
//!
//! [`run`] takes the argument list and returns the process exit code, so the
//! whole tool can be driven from tests without spawning a process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::LevelFilter;

use rankmdl_core::io::{
    export_artifacts, load_frame_stack, load_matrix_csv, save_matrix_csv, FrameStackManifest,
};
use rankmdl_core::numerics::DEFAULT_RANK_TOL;
use rankmdl_core::select::{default_coder_mode, default_delta_e, refine_quantization, CandidateKind};
use rankmdl_core::solver::{rpca_alm, rpca_objective, Decomposition};
use rankmdl_core::{
    select_model, BitAllocation, CoderMode, DataMatrix, Error, Lambda, LambdaSchedule, QuantizationGrid,
    SelectionOptions, SolverConfig,
};

mod format;

pub use format::sig6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "rankmdl",
    version,
    about = "Rank selection for robust PCA by minimum description length"
)]
struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the regularization path and pick the shortest description.
    Select(SelectArgs),
    /// Solve robust PCA for one weight and write A and E as CSV.
    Decompose(DecomposeArgs),
    /// Score a given split X = A + E.
    Codelength(CodelengthArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Directory of PGM frames or a CSV matrix.
    #[arg(long, short)]
    input: PathBuf,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Relative residual at which the solver stops.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            ..SolverConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UCoder {
    Auto,
    Predictive,
    Spherical,
}

#[derive(Clone, Copy, Debug)]
enum DeltaE {
    Auto,
    Value(f64),
}

fn parse_delta_e(s: &str) -> Result<DeltaE, String> {
    if s == "auto" {
        return Ok(DeltaE::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(DeltaE::Value(v)),
        _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
    }
}

#[derive(Args, Debug)]
struct CodingArgs {
    #[arg(long, value_enum, default_value_t = UCoder::Auto)]
    u_coder: UCoder,
    /// Step of the error lattice, or `auto` (1 for integer data).
    #[arg(long, default_value = "auto", value_parser = parse_delta_e)]
    delta_e: DeltaE,
}

impl CodingArgs {
    fn u_mode(&self) -> Option<CoderMode> {
        match self.u_coder {
            UCoder::Auto => None,
            UCoder::Predictive => Some(CoderMode::Predictive),
            UCoder::Spherical => Some(CoderMode::Spherical),
        }
    }

    fn delta_e(&self) -> Option<f64> {
        match self.delta_e {
            DeltaE::Auto => None,
            DeltaE::Value(v) => Some(v),
        }
    }
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for curve.csv, report.json and the exported frames.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Weights on the l1 term: `lo:hi:count` (geometric) or a comma list.
    /// Defaults to 30 values spanning [0.05, 4] / sqrt(max(m, n)).
    #[arg(long, value_parser = parse_schedule)]
    lambdas: Option<LambdaSchedule>,
    #[command(flatten)]
    coding: CodingArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for A.csv and E.csv.
    #[arg(long, short)]
    out: PathBuf,
    /// Weight on the l1 term; defaults to 1 / sqrt(max(m, n)).
    #[arg(long)]
    lambda: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct CodelengthArgs {
    #[command(flatten)]
    input: InputArgs,
    /// CSV of the low-rank part.
    #[arg(long)]
    low_rank: PathBuf,
    /// CSV of the error part.
    #[arg(long)]
    error: PathBuf,
    /// Largest accepted relative Frobenius gap between A + E and X.
    #[arg(long, default_value_t = 1e-6)]
    consistency_tol: f64,
    #[command(flatten)]
    coding: CodingArgs,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Select(args) => select(args, &mut out),
        Command::Decompose(args) => decompose(args, &mut out),
        Command::Codelength(args) => codelength(args, &mut out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a library error: 3 for solver and pipeline failures, 2 for
/// everything about the data.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence { .. } | Error::PathStep { .. } | Error::Pipeline(_) => EXIT_SOLVER,
        _ => EXIT_DATA,
    }
}

fn load_input(path: &Path) -> rankmdl_core::Result<(DataMatrix, Option<FrameStackManifest>)> {
    if path.is_dir() {
        let (x, manifest) = load_frame_stack(path)?;
        Ok((x, Some(manifest)))
    } else {
        Ok((load_matrix_csv(path)?, None))
    }
}

fn parse_schedule(spec: &str) -> Result<LambdaSchedule, String> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{}` is not a number", s.trim()))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [lo, hi, count] => {
            let count = count
                .trim()
                .parse::<usize>()
                .map_err(|_| "count must be a positive integer".to_string())?;
            LambdaSchedule::geometric(number(lo)?, number(hi)?, count).map_err(|e| e.to_string())
        }
        [list] => {
            let weights = list.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
            LambdaSchedule::from_sparse_weights(&weights).map_err(|e| e.to_string())
        }
        _ => Err("expected lo:hi:count or a comma-separated list".into()),
    }
}

fn write_allocation(out: &mut impl Write, a: &BitAllocation) -> std::io::Result<()> {
    writeln!(out, "L(U)     {} bits", sig6(a.l_u.bits()))?;
    writeln!(out, "L(sigma) {} bits", sig6(a.l_sigma.bits()))?;
    writeln!(out, "L(V)     {} bits", sig6(a.l_v.bits()))?;
    writeln!(out, "L(E)     {} bits", sig6(a.l_e.bits()))?;
    writeln!(out, "total    {} bits", sig6(a.total.bits()))
}

fn stdout_error(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn select(args: &SelectArgs, out: &mut impl Write) -> rankmdl_core::Result<()> {
    let (x, manifest) = load_input(&args.input.input)?;
    let schedule = match &args.lambdas {
        Some(s) => s.clone(),
        None => LambdaSchedule::default_for(x.rows(), x.cols()),
    };
    let options = SelectionOptions {
        u_mode: args.coding.u_mode(),
        delta_e: args.coding.delta_e(),
        rank_tol: None,
    };
    log::info!(
        "{}x{} matrix, {} weights, {} U coder",
        x.rows(),
        x.cols(),
        schedule.len(),
        options.u_mode.unwrap_or_else(|| default_coder_mode(&x))
    );
    let report = select_model(&x, &schedule, &args.solver.config(), &options)?;

    let mut print = || -> std::io::Result<()> {
        writeln!(
            out,
            "{:>4}  {:<9}  {:>12}  {:>4}  {:>12}",
            "#", "kind", "lambda", "rank", "total_bits"
        )?;
        for (i, c) in report.candidates.iter().enumerate() {
            let kind = match c.kind {
                CandidateKind::Path => "path",
                CandidateKind::ZeroRank => "zero_rank",
                CandidateKind::FullRank => "full_rank",
            };
            let lambda = c
                .lambda
                .map_or_else(|| "-".to_string(), |l| sig6(l.sparse_weight()));
            let total = c
                .allocation()
                .map_or_else(|| "failed".to_string(), |a| sig6(a.total.bits()));
            let mark = if i == report.best_index { "*" } else { "" };
            writeln!(
                out,
                "{i:>4}  {kind:<9}  {lambda:>12}  {:>4}  {total:>12}{mark}",
                c.rank
            )?;
        }
        let best = report.best();
        writeln!(
            out,
            "selected rank {} (candidate {})",
            best.rank, report.best_index
        )?;
        if let Some(a) = best.allocation() {
            write_allocation(out, a)?;
        }
        Ok(())
    };
    print().map_err(stdout_error)?;

    if let Some(dir) = &args.out {
        let files = export_artifacts(&report, manifest.as_ref(), dir)?;
        log::info!("wrote {} files to {}", files.files.len(), dir.display());
    }
    Ok(())
}

fn decompose(args: &DecomposeArgs, out: &mut impl Write) -> rankmdl_core::Result<()> {
    let (x, _) = load_input(&args.input.input)?;
    let lambda = match args.lambda {
        Some(w) => Lambda::sparse(w)?,
        None => Lambda::standard(x.rows(), x.cols()),
    };
    let d = rpca_alm(&x, lambda, None, &args.solver.config())?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;
    save_matrix_csv(&d.a, &args.out.join("A.csv"))?;
    save_matrix_csv(&d.e, &args.out.join("E.csv"))?;
    let objective = rpca_objective(&x, &d.a, lambda.nuclear_weight())?;
    (|| -> std::io::Result<()> {
        writeln!(out, "lambda     {}", sig6(lambda.sparse_weight()))?;
        writeln!(out, "rank       {}", d.rank())?;
        writeln!(out, "iterations {}", d.iterations)?;
        writeln!(out, "residual   {}", sig6(d.residual))?;
        writeln!(out, "objective  {}", sig6(objective))
    })()
    .map_err(stdout_error)
}

fn codelength(args: &CodelengthArgs, out: &mut impl Write) -> rankmdl_core::Result<()> {
    let (x, _) = load_input(&args.input.input)?;
    let a = load_matrix_csv(&args.low_rank)?.into_values();
    let e = load_matrix_csv(&args.error)?.into_values();
    // The weight plays no part here; the constructor only checks A + E = X.
    let d = Decomposition::new(
        &x,
        a,
        e,
        Lambda::standard(x.rows(), x.cols()),
        args.consistency_tol,
    )
    .map_err(|err| match err {
        Error::Consistency(msg) => Error::Consistency(format!("losslessness violated: {msg}")),
        other => other,
    })?;
    let u_mode = args.coding.u_mode().unwrap_or_else(|| default_coder_mode(&x));
    if u_mode == CoderMode::Predictive && x.frame_shape().is_none() {
        return Err(Error::InvalidInput(
            "predictive U coding requires frame-shaped data".into(),
        ));
    }
    let delta_e = args.coding.delta_e().unwrap_or_else(|| default_delta_e(&x));
    let start = QuantizationGrid::starting(x.rows(), x.cols(), delta_e)?;
    let r = refine_quantization(&x, &d.a, &start, u_mode, DEFAULT_RANK_TOL)?;
    (|| -> std::io::Result<()> {
        writeln!(out, "rank     {}", r.model.rank())?;
        writeln!(out, "halvings {}", r.halvings)?;
        write_allocation(out, &r.allocation)
    })()
    .map_err(stdout_error)
}
