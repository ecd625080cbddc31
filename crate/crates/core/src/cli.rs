//! Command-line front end. Every subcommand prints exactly one JSON document on
//! stdout; diagnostics go to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::certify::{certify_parameters, certify_parameters_with, LemmaId, ParameterCertificate, DEFAULT_TAU};
use crate::driver::{solve, trace_to_json, Param, SolveStatus, SolverConfig};
use crate::lp::LinearProgram;
use crate::oracle::{generate_instance, vertex_solve, OracleStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CERTIFY_FAILED: i32 = 4;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

#[derive(Debug, Parser)]
#[command(name = "aet-iipm", version, about = "Full-Newton-step infeasible interior-point LP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and print a summary.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// `auto` or a positive real.
        #[arg(long, default_value = "auto", value_parser = parse_auto_f64)]
        xi: Param<f64>,
        /// `auto` or a real in (0, 1).
        #[arg(long, default_value = "auto", value_parser = parse_auto_f64)]
        theta: Param<f64>,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        /// Write the iteration trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Audit every iteration against the analysis bounds.
        #[arg(long)]
        certify_lemmas: bool,
    },
    /// Generate an instance with a known optimal solution.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Size of the optimal support; defaults to m.
        #[arg(long)]
        support: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the parameter conditions for tau = 1/12, theta = 1/(22n).
    Certify {
        #[arg(long)]
        n: usize,
    },
    /// Solve a small problem by vertex enumeration.
    Oracle {
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_auto_f64(s: &str) -> Result<Param<f64>, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Param::Auto);
    }
    s.parse::<f64>().map(Param::Fixed).map_err(|e| format!("expected `auto` or a number: {e}"))
}

/// Sidecar path for a generated problem: `dir/name.json` → `dir/name.sidecar.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.sidecar.json"))
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve { input, epsilon, xi, theta, tau, trace, certify_lemmas } => {
            let config = SolverConfig {
                epsilon,
                xi,
                theta,
                tau,
                certify_lemmas,
                ..SolverConfig::default()
            };
            run_solve(&input, &config, trace.as_deref(), stdout)
        }
        Command::Gen { m, n, seed, support, out } => run_gen(m, n, seed, support.unwrap_or(m), &out, stdout),
        Command::Certify { n } => run_certify(n, stdout),
        Command::Oracle { input } => run_oracle(&input, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn load_problem(path: &Path) -> Result<LinearProgram, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_DATA, format!("cannot read {}: {e}", path.display())))?;
    LinearProgram::from_json(&text)
        .map_err(|e| Failure::new(EXIT_DATA, format!("malformed problem {}: {e}", path.display())))
}

fn emit<T: Serialize>(stdout: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    writeln!(stdout, "{text}").map_err(|e| Failure::new(EXIT_NUMERIC, format!("cannot write output: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new(EXIT_DATA, format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct LemmaTally {
    checked: usize,
    precondition_held: usize,
    violations: usize,
}

#[derive(Serialize)]
struct CertificationSummary {
    parameters: ParameterCertificate,
    lemmas: BTreeMap<LemmaId, LemmaTally>,
}

#[derive(Serialize)]
struct SolveSummary {
    status: SolveStatus,
    iterations: u64,
    iteration_cap: u64,
    restarts: u32,
    xi_used: f64,
    theta: f64,
    objective: Option<f64>,
    gap: Option<f64>,
    norm_rb: Option<f64>,
    norm_rc: Option<f64>,
    residual_drift: f64,
    x: Option<Vec<f64>>,
    y: Option<Vec<f64>>,
    s: Option<Vec<f64>>,
    message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certification: Option<CertificationSummary>,
}

fn run_solve(
    input: &Path,
    config: &SolverConfig,
    trace_out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let problem = load_problem(input)?;
    config.validate().map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let report = solve(&problem, config).map_err(|e| Failure::new(EXIT_NUMERIC, e.to_string()))?;

    if let Some(path) = trace_out {
        write_file(path, &trace_to_json(&report.trace))?;
    }

    let certification = if config.certify_lemmas {
        let parameters = certify_parameters_with(problem.n(), config.tau, report.theta)
            .map_err(|e| Failure::new(EXIT_NUMERIC, e.to_string()))?;
        let mut lemmas: BTreeMap<LemmaId, LemmaTally> = BTreeMap::new();
        for o in report.lemma_outcomes() {
            let t = lemmas
                .entry(o.lemma_id)
                .or_insert(LemmaTally { checked: 0, precondition_held: 0, violations: 0 });
            t.checked += 1;
            t.precondition_held += usize::from(o.precondition_held);
            t.violations += usize::from(o.is_violation());
        }
        Some(CertificationSummary { parameters, lemmas })
    } else {
        None
    };

    let cert = report.certificate.as_ref();
    let summary = SolveSummary {
        status: report.status,
        iterations: report.iterations,
        iteration_cap: report.iteration_cap,
        restarts: report.restarts,
        xi_used: report.xi_used,
        theta: report.theta,
        objective: cert.map(|c| problem.objective(&c.x)),
        gap: cert.map(|c| c.gap),
        norm_rb: cert.map(|c| c.primal_res_norm),
        norm_rc: cert.map(|c| c.dual_res_norm),
        residual_drift: report.residual_drift,
        x: cert.map(|c| c.x.to_vec()),
        y: cert.map(|c| c.y.to_vec()),
        s: cert.map(|c| c.s.to_vec()),
        message: report.message.clone(),
        certification,
    };
    emit(stdout, &summary)?;
    Ok(match report.status {
        SolveStatus::EpsilonOptimal => EXIT_OK,
        SolveStatus::XiSearchExhausted => EXIT_INFEASIBLE,
        _ => EXIT_NUMERIC,
    })
}

#[derive(Serialize)]
struct GenSummary {
    problem: PathBuf,
    sidecar: PathBuf,
    m: usize,
    n: usize,
    seed: u64,
    support: usize,
    xi_true: f64,
    optimal_value: f64,
}

fn run_gen(m: usize, n: usize, seed: u64, support: usize, out: &Path, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let inst = generate_instance(m, n, seed, support).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let sidecar = sidecar_path(out);
    write_file(out, &inst.problem.to_json())?;
    write_file(&sidecar, &serde_json::to_string_pretty(&inst.sidecar()).expect("sidecar serializes"))?;
    emit(
        stdout,
        &GenSummary {
            problem: out.to_path_buf(),
            sidecar,
            m,
            n,
            seed,
            support,
            xi_true: inst.xi_true,
            optimal_value: inst.optimal_value(),
        },
    )?;
    Ok(EXIT_OK)
}

fn run_certify(n: usize, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let cert = certify_parameters(n).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    emit(stdout, &cert)?;
    Ok(if cert.cond1 && cert.cond2 { EXIT_OK } else { EXIT_CERTIFY_FAILED })
}

fn run_oracle(input: &Path, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let problem = load_problem(input)?;
    let sol = vertex_solve(&problem).map_err(|e| Failure::new(EXIT_NUMERIC, e.to_string()))?;
    emit(stdout, &sol)?;
    Ok(match sol.status {
        OracleStatus::Optimal => EXIT_OK,
        OracleStatus::Infeasible | OracleStatus::Unbounded => EXIT_INFEASIBLE,
    })
}
