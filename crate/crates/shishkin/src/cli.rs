//! Command line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shishkin_core::harness::{
    self, emit_csv, emit_pretty, paired_sizes, solution_pair, CellOptions, FineMesh, Target,
};
use shishkin_core::interp::{bilinear_eval, nodal_diff};
use shishkin_core::mesh::TensorMesh;
use shishkin_core::problem::{check_compatibility, Amplitudes, Condition, ProblemSpec, YProblem};
use shishkin_core::solver::{reconstruct_u, solve_y, GridFunction};

use crate::error::CliError;
use crate::output::{self, Metadata};
use crate::problem_file::{self, parse_eps};
use crate::table::build_table_parallel;

#[derive(Debug, Parser)]
#[command(
    name = "shishkin",
    version,
    about = "Shishkin mesh solver for reaction-diffusion with a corner jump in the data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on one Shishkin mesh and write the solution CSV and metadata JSON.
    Solve(SolveArgs),
    /// Two-mesh differences and orders over an epsilon sweep.
    Table(TableArgs),
    /// Corner compatibility conditions and singular amplitudes.
    Check(CheckArgs),
    /// Bilinear interpolant of the discrete solution at given points.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Problem JSON file or the built-in name `example23`.
    #[arg(long, default_value = problem_file::BUILTIN)]
    pub problem: String,
    /// Overrides eps; `2^-k` or decimal.
    #[arg(long, value_parser = eps_arg)]
    pub eps: Option<f64>,
    /// Overrides beta.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SizeArgs {
    /// Space cells; at least 8 and divisible by 4.
    #[arg(long = "N", default_value_t = 64)]
    pub n: usize,
    /// Time steps; at least 4 and even.
    #[arg(long = "M", default_value_t = 64)]
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FineArg {
    /// Fresh space mesh for 2N, coarse time steps halved.
    KeepTau,
    /// Both directions of the coarse mesh halved.
    Bisected,
    /// Fresh Shishkin mesh for (2N, 2M).
    Shishkin,
}

impl From<FineArg> for FineMesh {
    fn from(f: FineArg) -> Self {
        match f {
            FineArg::KeepTau => FineMesh::KeepTau,
            FineArg::Bisected => FineMesh::Bisected,
            FineArg::Shishkin => FineMesh::Shishkin,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub size: SizeArgs,
    /// Directory for the output files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Write U = A0 z0 + Y instead of Y.
    #[arg(long)]
    pub reconstructed: bool,
    /// Also write the mesh nodes to mesh.csv.
    #[arg(long)]
    pub dump_mesh: bool,
    /// Also write surface and two-mesh difference data, full domain and corner zoom.
    #[arg(long)]
    pub plot_data: bool,
    /// Comparison mesh used by --plot-data.
    #[arg(long, value_enum, default_value_t = FineArg::KeepTau)]
    pub fine_mesh: FineArg,
    /// Record wall time in the metadata (output then differs between runs).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Problem JSON file or the built-in name `example23`.
    #[arg(long, default_value = problem_file::BUILTIN)]
    pub problem: String,
    /// Overrides beta.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Explicit eps values; defaults to 2^0, 2^-1, ..., 2^-kmax.
    #[arg(long, value_parser = eps_arg, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Last exponent of the default sweep.
    #[arg(long, default_value_t = 30)]
    pub kmax: u32,
    /// Space cell counts; defaults to 64, 128, ..., 4096.
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Time steps paired with each N; defaults to N/4.
    #[arg(long = "M", value_delimiter = ',')]
    pub m: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compare U = A0 z0 + Y instead of Y.
    #[arg(long)]
    pub reconstructed: bool,
    #[arg(long, value_enum, default_value_t = FineArg::KeepTau)]
    pub fine_mesh: FineArg,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pretty,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub size: SizeArgs,
    /// Evaluation point `x,t`; repeatable.
    #[arg(long = "at", value_parser = point_arg, required = true)]
    pub at: Vec<(f64, f64)>,
    /// Evaluate U = A0 z0 + Y instead of Y.
    #[arg(long)]
    pub reconstructed: bool,
}

fn eps_arg(s: &str) -> Result<f64, String> {
    parse_eps(s).map_err(|e| e.to_string())
}

fn point_arg(s: &str) -> Result<(f64, f64), String> {
    let (x, t) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,t, got '{s}'"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number '{v}'"))
    };
    Ok((parse(x)?, parse(t)?))
}

fn validate_size(n: usize, m: usize) -> Result<(), CliError> {
    if n < 8 || !n.is_multiple_of(4) {
        return Err(CliError::Config(format!(
            "N must be at least 8 and divisible by 4, got {n}"
        )));
    }
    if m < 4 || !m.is_multiple_of(2) {
        return Err(CliError::Config(format!(
            "M must be at least 4 and even, got {m}"
        )));
    }
    Ok(())
}

fn load(args: &ProblemArgs) -> Result<ProblemSpec, CliError> {
    let p = problem_file::load_problem(&args.problem)?;
    problem_file::with_overrides(p, args.eps, args.beta)
}

fn problem_name(source: &str) -> String {
    if source == problem_file::BUILTIN {
        return source.to_string();
    }
    Path::new(source)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| source.to_string())
}

fn target_of(reconstructed: bool) -> Target {
    if reconstructed {
        Target::U
    } else {
        Target::Y
    }
}

fn reconstruct(p: &ProblemSpec, y: &GridFunction) -> Result<GridFunction, CliError> {
    let data = YProblem::new(p)?;
    Ok(reconstruct_u(y, data.a0(), data.params())?)
}

fn solve(args: &SolveArgs) -> Result<(), CliError> {
    validate_size(args.size.n, args.size.m)?;
    let p = load(&args.problem)?;
    let started = Instant::now();
    let mesh = TensorMesh::shishkin(args.size.n, args.size.m, p.eps(), p.beta(), p.t_final())?;
    let y = solve_y(&p, &mesh)?;
    let a0 = YProblem::new(&p)?.a0();
    let u = if args.reconstructed || args.plot_data {
        Some(reconstruct(&p, &y)?)
    } else {
        None
    };
    let solution = if args.reconstructed {
        u.as_ref().unwrap_or(&y)
    } else {
        &y
    };
    let dir = &args.out_dir;
    output::write_file(&dir.join("solution.csv"), &output::grid_csv(solution))?;
    if args.dump_mesh {
        output::write_file(&dir.join("mesh.csv"), &output::mesh_csv(&mesh))?;
    }
    if args.plot_data {
        let sigma = mesh.sigma().unwrap_or(0.25);
        let tau = mesh.tau().unwrap_or(0.5 * p.t_final());
        let (x_max, t_max) = (4.0 * sigma, 4.0 * tau);
        let u = u.as_ref().unwrap_or(&y);
        output::write_file(&dir.join("u_surface.csv"), &output::grid_csv(u))?;
        output::write_file(
            &dir.join("u_surface_zoom.csv"),
            &output::zoom_csv(u, x_max, t_max),
        )?;
        let opts = CellOptions {
            target: Target::Y,
            fine: args.fine_mesh.into(),
        };
        let (coarse, fine) = solution_pair(&p, args.size.n, args.size.m, opts)?;
        let diff = nodal_diff(&coarse, &fine)?;
        output::write_file(&dir.join("y_two_mesh_diff.csv"), &output::grid_csv(&diff))?;
        output::write_file(
            &dir.join("y_two_mesh_diff_zoom.csv"),
            &output::zoom_csv(&diff, x_max, t_max),
        )?;
    }
    let meta = Metadata {
        problem: problem_name(&args.problem.problem),
        eps: p.eps(),
        beta: p.beta(),
        t_final: p.t_final(),
        n: mesh.n(),
        m: mesh.m(),
        sigma: mesh.sigma(),
        tau: mesh.tau(),
        a0,
        target: if args.reconstructed { "U" } else { "Y" },
        wall_time_s: args.timing.then(|| started.elapsed().as_secs_f64()),
    };
    output::write_file(&dir.join("metadata.json"), &meta.to_json())
}

fn table(args: &TableArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sizes = if args.n.is_empty() {
        if !args.m.is_empty() {
            return Err(CliError::Config("--M needs an explicit --N list".into()));
        }
        paired_sizes(64, 4096)
    } else if args.m.is_empty() {
        args.n.iter().map(|&n| (n, n / 4)).collect()
    } else if args.m.len() == args.n.len() {
        args.n.iter().copied().zip(args.m.iter().copied()).collect()
    } else {
        return Err(CliError::Config("--M must list one value per --N".into()));
    };
    for &(n, m) in &sizes {
        validate_size(n, m)?;
    }
    if args.threads == Some(0) {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    let eps = if args.eps.is_empty() {
        harness::eps_ladder(args.kmax)
    } else {
        args.eps.clone()
    };
    let p = problem_file::load_problem(&args.problem)?;
    let p = problem_file::with_overrides(p, None, args.beta)?;
    let opts = CellOptions {
        target: target_of(args.reconstructed),
        fine: args.fine_mesh.into(),
    };
    let table = build_table_parallel(&p, &eps, &sizes, opts, args.threads)?;
    let text = match args.format {
        Format::Csv => emit_csv(&table),
        Format::Pretty => emit_pretty(&table),
    };
    match &args.out {
        Some(path) => output::write_file(path, &text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn fmt_value(v: f64) -> String {
    if v == 0.0 || (1e-4..1e6).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(&args.problem)?;
    let amps = Amplitudes::compute(&p)?;
    let report = check_compatibility(&p)?;
    let mut text = format!(
        "eps = {}\nbeta = {}\n",
        fmt_value(p.eps()),
        fmt_value(p.beta())
    );
    text += &format!("A0 = {}\n", fmt_value(amps.a0));
    let scaled = amps.scaled(p.eps());
    for (name, value, scaled, power) in [
        ("A1", amps.a1, scaled.1, "eps"),
        ("A2", amps.a2, scaled.2, "eps^2"),
    ] {
        match (value, scaled) {
            (Some(v), Some(s)) => {
                text += &format!(
                    "{name} = {}  ({power} {name} = {})\n",
                    fmt_value(v),
                    fmt_value(s)
                )
            }
            _ => text += &format!("{name} = unavailable (derivatives missing)\n"),
        }
    }
    for (name, cond) in report.conditions() {
        let line = match cond {
            Condition::Evaluated { lhs, rhs } => {
                let status = if cond.satisfied() == Some(true) {
                    "satisfied"
                } else {
                    "violated"
                };
                format!(
                    "{name:<13} {status:<10} lhs = {}  rhs = {}  residual = {}\n",
                    fmt_value(lhs),
                    fmt_value(rhs),
                    fmt_value(lhs - rhs)
                )
            }
            Condition::Missing(what) => format!("{name:<13} {:<10} missing {what}\n", "unknown"),
        };
        text += &line;
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    validate_size(args.size.n, args.size.m)?;
    let p = load(&args.problem)?;
    let mesh = TensorMesh::shishkin(args.size.n, args.size.m, p.eps(), p.beta(), p.t_final())?;
    let y = solve_y(&p, &mesh)?;
    let g = if args.reconstructed {
        reconstruct(&p, &y)?
    } else {
        y
    };
    let mut text = format!("x,t,{}\n", if args.reconstructed { "U" } else { "Y" });
    for &(x, t) in &args.at {
        let v = bilinear_eval(&g, x, t)?;
        text += &format!("{},{},{}\n", output::num(x), output::num(t), output::num(v));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Table(a) => table(a, out),
        Command::Check(a) => check(a, out),
        Command::Eval(a) => eval(a, out),
    }
}

/// Parses `args`, runs, reports errors on `err` and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
