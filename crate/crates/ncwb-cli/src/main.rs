//! ncwb: run the built-in demonstrations, check theory/model pairs, and
//! solve assignment problems from JSON.
//!
//! Exit codes: 0 = verdict reproduced / checks pass, 1 = a check failed,
//! 2 = usage or parse error.

mod demos;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use ncwb_core::assign::{
    enumerate_deterministic_assignments, enumerate_spectral_assignments, AssignmentMode,
    AssignmentProblem,
};
use ncwb_core::measurement::OperationalTheory;
use ncwb_core::ontology::{
    check_measurement_noncontextual, check_preparation_noncontextual, empirical_adequacy,
    verify_determinism_iff_sharp, OntologicalModel,
};
use ncwb_core::report::Report;

#[derive(Parser)]
#[command(name = "ncwb", version, about = "Noncontextuality workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Global tolerance override (also read from NCWB_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Write the machine-readable report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    /// Seed for randomized property fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Drop exactly-zero effects when reducing joint measurements.
    #[arg(long, global = true)]
    drop_zero_effects: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named demonstration end to end.
    Demo {
        /// One of: fair-coin, cabello-nakamura, same-effect-twice,
        /// coarse-grain-paradox, above-half-filter, trine, gleason,
        /// naimark-pair, ontic-extension, appendix-c, wigner-qutrit,
        /// p1-p2-check.
        name: String,
    },
    /// Check a theory/model pair loaded from JSON files.
    Check {
        #[arg(long, value_name = "PATH")]
        theory: PathBuf,
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
    },
    /// Solve an assignment problem loaded from a JSON file.
    Solve {
        #[arg(long, value_name = "PATH")]
        problem: PathBuf,
        /// Override the problem's mode: d(eterministic) or s(pectral).
        #[arg(long)]
        mode: Option<String>,
    },
}

/// Machine-readable outcome of one invocation. Wall time is printed in the
/// human summary but excluded here so identical inputs yield identical bytes.
#[derive(Serialize)]
struct DemoReport {
    name: String,
    claim: String,
    verdict: String,
    report: Report,
    evidence: serde_json::Value,
    #[serde(skip)]
    wall_time_ms: f64,
}

impl DemoReport {
    fn new(name: &str, claim: String, report: Report, evidence: serde_json::Value, started: Instant) -> Self {
        let verdict = if report.passed() { "reproduced" } else { "failed" };
        Self {
            name: name.to_string(),
            claim,
            verdict: verdict.to_string(),
            report,
            evidence,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }

    fn emit(&self, json_path: Option<&Path>) -> std::io::Result<()> {
        println!("demo: {}", self.name);
        println!("claim: {}", self.claim);
        print!("{}", self.report.render_text());
        println!("verdict: {} ({:.1} ms)", self.verdict, self.wall_time_ms);
        if let Some(path) = json_path {
            let mut text = serde_json::to_string_pretty(self)?;
            text.push('\n');
            std::fs::write(path, text)?;
        }
        Ok(())
    }

    fn exit_code(&self) -> ExitCode {
        if self.verdict == "reproduced" {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    }
}

fn resolve_tol(flag: Option<f64>) -> Result<f64, String> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("NCWB_TOL") {
        Ok(raw) => raw
            .parse::<f64>()
            .map_err(|_| format!("NCWB_TOL value '{raw}' is not a number")),
        Err(_) => Ok(1e-9),
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {what} file {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid {what} file {}: {e}", path.display()))
}

fn run_check(
    theory_path: &Path,
    model_path: &Path,
    tol: f64,
) -> Result<(Report, serde_json::Value), String> {
    let theory: OperationalTheory = load_json(theory_path, "theory")?;
    theory
        .validate(tol.max(1e-9))
        .map_err(|e| format!("invalid theory file {}: {e}", theory_path.display()))?;
    let model: OntologicalModel = load_json(model_path, "model")?;

    let fail = |e: ncwb_core::Error| format!("model does not fit the theory: {e}");
    let adequacy = empirical_adequacy(&model, &theory, tol).map_err(fail)?;
    let mnc = check_measurement_noncontextual(&model, &theory, tol, tol).map_err(fail)?;
    let pnc = check_preparation_noncontextual(&model, &theory, tol, tol).map_err(fail)?;
    let determinism = verify_determinism_iff_sharp(&model, &theory, tol).map_err(fail)?;

    let mut report = Report::new("theory/model check");
    report.push(
        "empirical adequacy",
        adequacy.holds(),
        format!(
            "{} entries, max residual {:.3e}, {} violations",
            adequacy.checked,
            adequacy.max_residual,
            adequacy.violations.len()
        ),
    );
    report.push(
        "measurement noncontextuality",
        mnc.holds(),
        format!("{} violations", mnc.violations.len()),
    );
    report.push(
        "preparation noncontextuality",
        pnc.holds(),
        format!("{} violations", pnc.violations.len()),
    );
    report.push(
        "outcome determinism iff sharp",
        determinism.holds(),
        format!(
            "sharp-but-indeterministic: {:?}, unsharp-but-deterministic: {:?}",
            determinism.sharp_indeterministic, determinism.unsharp_deterministic
        ),
    );
    report.note(
        "equivalence classes and certifying statistics are relative to the preparations \
         and measurements listed in the files",
    );
    let evidence = json!({
        "adequacy": adequacy,
        "measurement_noncontextuality": mnc,
        "preparation_noncontextuality": pnc,
        "determinism_iff_sharp": determinism,
    });
    Ok((report, evidence))
}

fn run_solve(
    problem_path: &Path,
    mode: Option<&str>,
) -> Result<(Report, serde_json::Value), String> {
    let mut problem: AssignmentProblem = load_json(problem_path, "problem")?;
    if let Some(m) = mode {
        let mode = match m {
            "d" | "deterministic" => AssignmentMode::Deterministic,
            "s" | "spectral" => AssignmentMode::Spectral,
            other => return Err(format!("unknown mode '{other}' (use d or s)")),
        };
        problem = problem.with_mode(mode);
    }
    let (mode_name, assignments) = match problem.mode() {
        AssignmentMode::Deterministic => (
            "deterministic",
            enumerate_deterministic_assignments(&problem).map_err(|e| e.to_string())?,
        ),
        AssignmentMode::Spectral => (
            "spectral",
            enumerate_spectral_assignments(&problem).map_err(|e| e.to_string())?,
        ),
    };

    let mut report = Report::new(format!(
        "{mode_name} assignment search over {} effects, {} relations",
        problem.len(),
        problem.relations().len()
    ));
    if assignments.is_empty() {
        report.push(
            "infeasible",
            true,
            "exhaustive enumeration returned no satisfying assignment",
        );
    } else {
        report.push("feasible", true, format!("{} assignment(s)", assignments.len()));
        for (i, a) in assignments.iter().enumerate().take(16) {
            report.push(format!("assignment {i}"), true, format!("{:?}", a.values));
        }
    }
    let evidence = json!({
        "mode": mode_name,
        "feasible": !assignments.is_empty(),
        "assignments": assignments,
    });
    Ok((report, evidence))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let tol = match resolve_tol(cli.tol) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    match &cli.command {
        Command::Demo { name } => {
            match demos::run_demo(name, tol, cli.seed, cli.drop_zero_effects) {
                None => {
                    eprintln!(
                        "error: unknown demo '{name}'; available: {}",
                        demos::DEMO_NAMES.join(", ")
                    );
                    ExitCode::from(2)
                }
                Some(Err(e)) => {
                    eprintln!("error: demo '{name}' failed to run: {e}");
                    ExitCode::from(1)
                }
                Some(Ok(outcome)) => {
                    let report =
                        DemoReport::new(name, outcome.claim, outcome.report, outcome.evidence, started);
                    if let Err(e) = report.emit(cli.json.as_deref()) {
                        eprintln!("error: cannot write report: {e}");
                        return ExitCode::from(2);
                    }
                    report.exit_code()
                }
            }
        }
        Command::Check { theory, model } => match run_check(theory, model, tol) {
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Ok((report, evidence)) => {
                let report = DemoReport::new("check", "user-supplied theory/model pair".into(), report, evidence, started);
                if let Err(e) = report.emit(cli.json.as_deref()) {
                    eprintln!("error: cannot write report: {e}");
                    return ExitCode::from(2);
                }
                report.exit_code()
            }
        },
        Command::Solve { problem, mode } => match run_solve(problem, mode.as_deref()) {
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Ok((report, evidence)) => {
                let report = DemoReport::new("solve", "user-supplied assignment problem".into(), report, evidence, started);
                if let Err(e) = report.emit(cli.json.as_deref()) {
                    eprintln!("error: cannot write report: {e}");
                    return ExitCode::from(2);
                }
                report.exit_code()
            }
        },
    }
}
