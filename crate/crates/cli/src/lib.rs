//! Command-line front end: configuration loading, subcommand dispatch and output files.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use heliflow::background::{coefficient_table, critical_step, solve_background};
use heliflow::config::RunConfig;
use heliflow::io::to_json_g17;
use heliflow::solver::fixed_point_solve;
use heliflow::verify::{mms_study, scaling_study, verification_ledger};
use heliflow::Error;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid arguments or configuration.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for numerical failures.
pub const EXIT_SOLVER: i32 = 2;

/// Environment variable capping the worker thread count.
pub const THREADS_VAR: &str = "HELIFLOW_THREADS";

/// Number of randomized equivalence trials run by `verify`.
pub const VERIFY_TRIALS: usize = 32;

#[derive(Debug, Parser)]
#[command(name = "heliflow", version, about = "Helical transonic Euler flow in an annulus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Background profiles and coefficients as CSV.
    Background {
        #[command(flatten)]
        common: Common,
        /// CSV destination (stdout when absent).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Critical helical step, the radius attaining it and the sonic radius.
    SigmaStar {
        #[command(flatten)]
        common: Common,
    },
    /// Fixed-point solve; writes the flow field and the convergence report.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Runs the verification ledger.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Manufactured-solution refinement study of both elliptic solvers.
    Mms {
        #[command(flatten)]
        common: Common,
        /// Number of refinement levels, starting at N_r = 129.
        #[arg(long, value_name = "K", default_value_t = 3)]
        refine: usize,
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Deviation norms against the boundary amplitude.
    Scaling {
        #[command(flatten)]
        common: Common,
        /// Comma-separated amplitudes.
        #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "1e-4,1e-3,1e-2")]
        eps: Vec<f64>,
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
}

/// Failure of a subcommand, carrying the exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    fn from_error(config: &Path, e: Error) -> Self {
        let code = if e.is_validation() { EXIT_VALIDATION } else { EXIT_SOLVER };
        Self {
            code,
            message: format!("{}: {e}", config.display()),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure {
        code: EXIT_SOLVER,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

/// Writes `value` as pretty JSON to `path`, or as one line to `out` when `path` is absent.
fn emit_json<T: Serialize>(value: &T, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, (to_json_g17(value, true) + "\n").as_bytes()),
        None => writeln!(out, "{}", to_json_g17(value, false)).map_err(|e| Failure {
            code: EXIT_SOLVER,
            message: format!("cannot write output: {e}"),
        }),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::validation(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    // A pool that already exists (repeated in-process calls) keeps its width.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let cfg = RunConfig::load(&common.config).map_err(|e| Failure::from_error(&common.config, e))?;
    cfg.validate().map_err(|e| Failure::from_error(&common.config, e))?;
    Ok(cfg)
}

#[derive(Serialize)]
struct SigmaStarLine {
    sigma_star: f64,
    argmin_radius: f64,
    r_c: Option<f64>,
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Background { common, out: path } => {
            let cfg = load(&common)?;
            let fail = |e| Failure::from_error(&common.config, e);
            let bg = solve_background(cfg.inflow(), cfg.grid.n_r).map_err(fail)?;
            let table = coefficient_table(&bg, cfg.helical.sigma).map_err(fail)?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf).expect("in-memory write");
            match path {
                Some(p) => write_file(&p, &buf),
                None => out.write_all(&buf).map_err(|e| Failure {
                    code: EXIT_SOLVER,
                    message: format!("cannot write output: {e}"),
                }),
            }
        }
        Command::SigmaStar { common } => {
            let cfg = load(&common)?;
            let fail = |e| Failure::from_error(&common.config, e);
            let bg = solve_background(cfg.inflow(), cfg.grid.n_r).map_err(fail)?;
            let star = critical_step(&bg).map_err(fail)?;
            let line = SigmaStarLine {
                sigma_star: star.sigma_star,
                argmin_radius: star.argmin_radius,
                r_c: bg.r_c,
            };
            emit_json(&line, None, out)
        }
        Command::Solve {
            common,
            out: path,
            report,
        } => {
            let cfg = load(&common)?;
            let fail = |e| Failure::from_error(&common.config, e);
            let sol = fixed_point_solve(&cfg.solver_config().map_err(fail)?).map_err(fail)?;
            if let Some(p) = path {
                let mut buf = Vec::new();
                sol.flow.write_csv(&mut buf).expect("in-memory write");
                write_file(&p, &buf)?;
            }
            emit_json(&sol.report, report.as_deref(), out)
        }
        Command::Verify { common, report } => {
            let cfg = load(&common)?;
            let fail = |e| Failure::from_error(&common.config, e);
            let ledger = verification_ledger(&cfg.solver_config().map_err(fail)?, VERIFY_TRIALS).map_err(fail)?;
            emit_json(&ledger, report.as_deref(), out)?;
            if ledger.all_pass() {
                Ok(())
            } else {
                let failed: Vec<&str> = ledger.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                Err(Failure {
                    code: EXIT_SOLVER,
                    message: format!("verification failed: {}", failed.join(", ")),
                })
            }
        }
        Command::Mms { common, refine, report } => {
            let cfg = load(&common)?;
            if refine == 0 {
                return Err(Failure::validation("--refine must be at least 1"));
            }
            let study = mms_study(cfg.inflow(), cfg.helical.sigma, refine, cfg.grid.n_eta)
                .map_err(|e| Failure::from_error(&common.config, e))?;
            emit_json(&study, report.as_deref(), out)
        }
        Command::Scaling { common, eps, report } => {
            let cfg = load(&common)?;
            if eps.is_empty() {
                return Err(Failure::validation("--eps needs at least one amplitude"));
            }
            let fail = |e| Failure::from_error(&common.config, e);
            let study = scaling_study(&cfg.solver_config().map_err(fail)?, &eps).map_err(fail)?;
            emit_json(&study, report.as_deref(), out)
        }
    }
}

/// Runs the command line `argv` (program name first), printing results to
/// `out` and diagnostics to `err`. Returns the process exit status.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = configure_threads().and_then(|_| dispatch(cli.command, out));
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// [`run_cli_with`] on the process's standard streams.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
