//! Command-line front end.
//!
//! Exit codes: 0 success (admissible, converged); 1 I/O, parse or usage
//! error; 2 targets not admissible; 3 admissibility inconclusive; 4 solver
//! stopped without converging.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::admissibility::{self, SampledVerdict, SUBSET_CAP};
use crate::assembly::full_report;
use crate::complex::{CellComplex, Targets};
use crate::error::Error;
use crate::io::{self, ProblemDocument};
use crate::solver::{self, Integrator, Method, Precheck, SolveConfig, Status, StepRule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "hyperpack", version, about = "Generalized hyperbolic circle packings on cell complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the document's targets are realizable.
    Check {
        file: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Find curvatures realizing the document's targets.
    Solve(SolveArgs),
    /// Forward map at given curvatures.
    Eval {
        file: PathBuf,
        /// JSON file with a `k` object mapping vertex ids to curvatures.
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw one face in the Poincaré disk as SVG.
    Render {
        file: PathBuf,
        #[arg(long)]
        k: PathBuf,
        #[arg(long, default_value_t = 0)]
        face: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Sampling {
    /// Random subsets tried when the complex is too large to enumerate.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, default_value = "calabi", value_parser = parse_with::<Method>)]
    method: Method,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    #[arg(long, default_value_t = 1e12)]
    dt_max: f64,
    /// `implicit` or `rk4`.
    #[arg(long, default_value = "implicit", value_parser = parse_with::<Integrator>)]
    integrator: Integrator,
    /// `surrogate` or `potential`.
    #[arg(long, default_value = "surrogate", value_parser = parse_with::<StepRule>)]
    step_rule: StepRule,
    /// CSV trace path.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    trace_every: usize,
    /// Append one log-curvature column per vertex to the trace.
    #[arg(long)]
    trace_state: bool,
    /// Result JSON path; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even if the targets fail the admissibility precheck.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    sampling: Sampling,
}

fn parse_with<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inadmissible { .. } => EXIT_INADMISSIBLE,
            _ => EXIT_ERROR,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_ERROR,
        message: format!("{}: {e}", path.display()),
    })
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_ERROR,
        message: format!("{}: {e}", path.display()),
    })
}

fn load(path: &Path) -> Result<ProblemDocument, Failure> {
    io::parse(&read(path)?).map_err(|e| Failure {
        code: EXIT_ERROR,
        message: format!("{}: {e}", path.display()),
    })
}

fn require_targets(doc: &ProblemDocument, path: &Path) -> Result<Targets, Failure> {
    doc.targets.clone().ok_or_else(|| Failure {
        code: EXIT_ERROR,
        message: format!("{}: document has no `targets`", path.display()),
    })
}

fn load_k(complex: &CellComplex, path: &Path) -> Result<crate::PackingState, Failure> {
    io::parse_curvatures(complex, &read(path)?).map_err(|e| Failure {
        code: EXIT_ERROR,
        message: format!("{}: {e}", path.display()),
    })
}

fn check(file: &Path, sampling: &Sampling, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let doc = load(file)?;
    let targets = require_targets(&doc, file)?;
    let (verdict, conclusive) = if doc.complex.vertex_count() <= SUBSET_CAP {
        (admissibility::check(&doc.complex, &targets)?, true)
    } else {
        match admissibility::check_sampled(&doc.complex, &targets, sampling.trials, sampling.seed)? {
            SampledVerdict::Violation(v) => (v, true),
            SampledVerdict::NoViolationFound { best } => (best, false),
        }
    };
    emit(stdout, &io::verdict_text(&doc.complex, &verdict, conclusive))?;
    Ok(match (verdict.admissible, conclusive) {
        (false, _) => EXIT_INADMISSIBLE,
        (true, true) => EXIT_OK,
        (true, false) => EXIT_INCONCLUSIVE,
    })
}

fn solve(args: &SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let doc = load(&args.file)?;
    let targets = require_targets(&doc, &args.file)?;
    let cfg = SolveConfig {
        method: args.method,
        integrator: args.integrator,
        step_rule: args.step_rule,
        p: args.p,
        dt: args.dt,
        dt_max: args.dt_max,
        tol: args.tol,
        max_steps: args.max_steps,
        trace_every: args.trace_every,
        trace_state: args.trace_state,
        force: args.force,
        sample_seed: args.sampling.seed,
        sample_trials: args.sampling.trials,
    };
    let sol = solver::solve(&doc.complex, &targets, doc.initial.as_ref(), &cfg)?;
    let _ = match &sol.precheck {
        Precheck::Admissible(_) => Ok(()),
        Precheck::Inconclusive(v) => writeln!(
            stderr,
            "warning: admissibility not established by sampling (best slack {:?})",
            v.slack
        ),
        Precheck::Overridden(v) => writeln!(
            stderr,
            "warning: targets are not admissible (slack {:?}); solving anyway",
            v.slack
        ),
    };
    if let Some(path) = &args.trace {
        write(path, &io::trace_csv(&doc.complex, &sol.trace, args.trace_state)?)?;
    }
    let json = io::to_json_string(&io::solution_json(&doc.complex, args.method, &sol));
    match &args.out {
        Some(path) => {
            write(path, &json)?;
            emit(
                stdout,
                &format!("{}: {} steps, residual {:?}\n", sol.status, sol.steps, sol.residual_inf),
            )?;
        }
        None => emit(stdout, &json)?,
    }
    Ok(if sol.status == Status::Converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn eval(file: &Path, k: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let doc = load(file)?;
    let state = load_k(&doc.complex, k)?;
    let report = full_report(&doc.complex, &state)?;
    let json = io::to_json_string(&io::evaluation_json(
        &doc.complex,
        &state,
        &report,
        doc.targets.as_ref(),
    ));
    match out {
        Some(path) => write(path, &json)?,
        None => emit(stdout, &json)?,
    }
    Ok(EXIT_OK)
}

fn render(file: &Path, k: &Path, face: usize, out: &Path) -> Result<i32, Failure> {
    let doc = load(file)?;
    let state = load_k(&doc.complex, k)?;
    write(out, &io::face_svg(&doc.complex, &state, face)?)?;
    Ok(EXIT_OK)
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<(), Failure> {
    stdout.write_all(text.as_bytes()).map_err(|e| Failure {
        code: EXIT_ERROR,
        message: format!("stdout: {e}"),
    })
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_ERROR
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Check { file, sampling } => check(file, sampling, stdout),
        Command::Solve(args) => solve(args, stdout, stderr),
        Command::Eval { file, k, out } => eval(file, k, out.as_deref(), stdout),
        Command::Render { file, k, face, out } => render(file, k, *face, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
