//! `cmopt` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure or failed check, 2 invalid input,
//! 3 solver or projection non-convergence.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use cmopt::io::{load_instance, point_from_json, point_to_json, Instance, RunConfig, RunReport};
use cmopt::oracle::suites::{run_suite, Suite};
use cmopt::oracle::{enumerate_set, EnumerationBudget};
use cmopt::penalties::eval_penalized;
use cmopt::solver::{best_index, multi_start};
use cmopt::{CmSetSpec, Error, PenaltyConfig, PenaltyKind, Point};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "cmopt", version, about = "Constant-modulus optimization by extreme point pursuit")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance with the homotopy method (best of several starts).
    Solve(SolveArgs),
    /// Project a point onto the convex hull of a set.
    Project(ProjectArgs),
    /// Run a seeded verification suite.
    Check(CheckArgs),
    /// Tabulate the penalized objective over a 1-D or 2-D slice of the hull.
    Landscape(LandscapeArgs),
    /// List every member of a finite set.
    Enumerate(EnumerateArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    /// JSON run configuration (schedule and solver overrides).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of starts; seeds run from `--seed` upward.
    #[arg(long, default_value_t = 1)]
    starts: usize,
    /// Feasibility tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long, value_parser = parse_penalty)]
    penalty: Option<PenaltyKind>,
    /// Start with one convex stage at negative λ.
    #[arg(long)]
    warm_start: bool,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    /// Set specification: inline JSON or a path to a JSON file.
    #[arg(long)]
    set: String,
    /// Point: inline JSON or a path to a JSON file.
    #[arg(long)]
    point: String,
    /// Tolerance for the membership flags in the output.
    #[arg(long, default_value_t = cmopt::FEAS_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(value_parser = parse_suite)]
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Args, Debug)]
struct LandscapeArgs {
    instance: PathBuf,
    /// Comma-separated penalty weights.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    lambdas: Vec<f64>,
    #[arg(long, value_parser = parse_penalty, default_value = "neg_square")]
    penalty: PenaltyKind,
    /// Slice origin (default: the zero point).
    #[arg(long)]
    origin: Option<String>,
    /// First slice direction (default: the first coordinate axis).
    #[arg(long)]
    dir1: Option<String>,
    /// Second slice direction; makes the slice two-dimensional.
    #[arg(long)]
    dir2: Option<String>,
    /// Use the first two coordinate axes as directions.
    #[arg(long, conflicts_with_all = ["dir1", "dir2"])]
    plane: bool,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    to: f64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 201)]
    steps: usize,
    /// Hull membership tolerance for grid points.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    set: String,
    #[arg(long, default_value_t = EnumerationBudget::default().max_points)]
    max_points: u64,
}

fn parse_penalty(s: &str) -> Result<PenaltyKind, String> {
    serde_json::from_value(Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown penalty {s:?} (neg_square, sqrt_deficit, squared_deficit)"))
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } | Error::SvdFailed => 3,
            Error::InvariantViolated(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Output text plus the exit code to report after writing it.
struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn json_text(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Inline JSON if the argument looks like JSON, otherwise a file path.
fn read_json_arg(arg: &str) -> Result<Value, Failure> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| invalid(format!("cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| invalid(format!("malformed JSON in {arg}: {e}")))
}

fn read_spec(arg: &str) -> Result<CmSetSpec, Failure> {
    let spec: CmSetSpec =
        serde_json::from_value(read_json_arg(arg)?).map_err(|e| invalid(format!("invalid set specification: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

fn solve(args: &SolveArgs) -> Result<Output, Failure> {
    let inst = load_instance(&args.instance)?;
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.lambda0 = args.lambda0.or(cfg.lambda0);
    cfg.gamma = args.gamma.or(cfg.gamma);
    cfg.lambda_max = args.lambda_max.or(cfg.lambda_max);
    cfg.penalty = args.penalty.or(cfg.penalty);
    if args.warm_start {
        cfg.warm_start_convex = Some(true);
    }
    if let Some(tol) = args.tol {
        let mut solver = cfg.solver.unwrap_or_default();
        solver.feas_tol = tol;
        cfg.solver = Some(solver);
    }
    let schedule = cfg.schedule(&inst)?;
    let scfg = cfg.solver_config()?;
    if args.starts == 0 {
        return Err(invalid("--starts must be at least 1"));
    }

    let clock = Instant::now();
    let seeds: Vec<u64> = (0..args.starts as u64).map(|k| args.seed.wrapping_add(k)).collect();
    let results = multi_start(&inst.problem, &inst.set, &schedule, &scfg, &seeds)?;
    let best = best_index(&results).expect("at least one start");
    let report = RunReport::new(
        &inst,
        args.seed,
        &seeds,
        &results,
        best,
        schedule,
        scfg.feas_tol,
        clock.elapsed().as_secs_f64(),
    );
    let code = if report.converged { 0 } else { 3 };
    Ok(Output {
        text: json_text(&report),
        code,
    })
}

fn project(args: &ProjectArgs) -> Result<Output, Failure> {
    let spec = read_spec(&args.set)?;
    let z = point_from_json(&read_json_arg(&args.point)?, &spec)?;
    let p = spec.project_hull(&z)?;
    let hull_violation = spec.hull_violation(&p)?;
    let out = json!({
        "projected": point_to_json(&p),
        "distance": (&p - &z).norm(),
        "input_hull_violation": spec.hull_violation(&z)?,
        "hull_violation": hull_violation,
        "in_hull": hull_violation <= args.tol,
        "set_violation": spec.set_violation(&p)?,
    });
    Ok(Output::ok(json_text(&out)))
}

fn check(args: &CheckArgs) -> Result<Output, Failure> {
    if args.trials == 0 {
        return Err(invalid("--trials must be at least 1"));
    }
    let report = run_suite(args.suite, args.seed, args.trials)?;
    let code = if report.all_passed() { 0 } else { 1 };
    Ok(Output {
        text: report.to_string(),
        code,
    })
}

fn axis(dim: (usize, usize), k: usize) -> Point {
    let mut e = Point::zeros(dim.0, dim.1);
    e[k] = 1.0;
    e
}

fn landscape(args: &LandscapeArgs) -> Result<Output, Failure> {
    let inst: Instance = load_instance(&args.instance)?;
    let spec = &inst.set;
    let shape = spec.shape();
    let len = shape.0 * shape.1;
    if args.steps < 2 || !(args.from < args.to) {
        return Err(invalid("need --steps >= 2 and --from < --to"));
    }
    let read_point = |arg: &Option<String>| -> Result<Option<Point>, Failure> {
        arg.as_deref()
            .map(|a| Ok(point_from_json(&read_json_arg(a)?, spec)?))
            .transpose()
    };
    let origin = read_point(&args.origin)?.unwrap_or_else(|| Point::zeros(shape.0, shape.1));
    let mut dirs = vec![read_point(&args.dir1)?.unwrap_or_else(|| axis(shape, 0))];
    if args.plane {
        if len < 2 {
            return Err(invalid("--plane needs at least two coordinates"));
        }
        dirs.push(axis(shape, 1));
    } else if let Some(d2) = read_point(&args.dir2)? {
        dirs.push(d2);
    }

    let step = (args.to - args.from) / (args.steps - 1) as f64;
    let coord = |i: usize| args.from + i as f64 * step;
    let mut grid: Vec<(Vec<f64>, Point)> = Vec::new();
    let count = if dirs.len() == 2 { args.steps * args.steps } else { args.steps };
    for idx in 0..count {
        let ts: Vec<f64> = if dirs.len() == 2 {
            vec![coord(idx / args.steps), coord(idx % args.steps)]
        } else {
            vec![coord(idx)]
        };
        let mut x = origin.clone();
        for (t, d) in ts.iter().zip(&dirs) {
            x += d * *t;
        }
        let violation = spec.hull_violation(&x)?;
        if violation > args.tol {
            return Err(invalid(format!(
                "slice leaves the hull at coordinates {ts:?} (violation {violation:e})"
            )));
        }
        grid.push((ts, x));
    }

    let mut text = String::new();
    text.push_str(if dirs.len() == 2 { "coord1,coord2,lambda,F\n" } else { "coord1,lambda,F\n" });
    for &lambda in &args.lambdas {
        let pen = PenaltyConfig::new(args.penalty, lambda)?;
        for (ts, x) in &grid {
            let value = eval_penalized(&inst.problem, spec, &pen, x)?.value;
            for t in ts {
                write!(text, "{t},").expect("string write");
            }
            writeln!(text, "{lambda},{value}").expect("string write");
        }
    }
    Ok(Output::ok(text))
}

fn enumerate(args: &EnumerateArgs) -> Result<Output, Failure> {
    let spec = read_spec(&args.set)?;
    if args.max_points == 0 {
        return Err(invalid("--max-points must be positive"));
    }
    let points = enumerate_set(&spec, EnumerationBudget { max_points: args.max_points })?;
    let out = json!({
        "count": points.len(),
        "points": points.iter().map(point_to_json).collect::<Vec<_>>(),
    });
    Ok(Output::ok(json_text(&out)))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let io_fail = |e: std::io::Error| Failure {
        code: 1,
        message: format!("write failed: {e}"),
    };
    match out {
        Some(path) => fs::write(path, text).map_err(io_fail),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(io_fail),
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let output = match &cli.command {
        Command::Solve(a) => solve(a)?,
        Command::Project(a) => project(a)?,
        Command::Check(a) => check(a)?,
        Command::Landscape(a) => landscape(a)?,
        Command::Enumerate(a) => enumerate(a)?,
    };
    emit(&output.text, cli.out.as_deref())?;
    Ok(output.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
