//! `incompat`: joint-measurability checks over JSON POVM files.
//!
//! Exit codes: 0 success (valid, undetected, feasible), 1 bad input,
//! 2 validation failure, 3 incompatible or infeasible, 4 inconclusive,
//! 5 solver failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use incompat::bell::{self, chsh_max_qubit};
use incompat::estimation::{central_point, ParamPoint};
use incompat::incompat::{self as criteria, TauOptions, Verdict};
use incompat::io;
use incompat::povm::{self, from_observable, Povm, StochasticMatrix};
use incompat::sdp::{self, JointOptions, JointStatus};
use incompat::{chamber, Error, HermitianOperator};

const POVM_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "incompat", version, about = "Decide and quantify joint measurability of quantum observables")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Numerical tolerance for decisions and solvers.
    #[arg(long, global = true, env = "INCOMPAT_TOL", default_value_t = 1e-7)]
    tolerance: f64,
    #[arg(long, global = true, default_value_t = 200)]
    max_iter: usize,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check positivity and completeness of a POVM.
    Validate { povm: PathBuf },
    /// Incompatibility measure of two or more POVMs.
    Tau {
        #[arg(required = true)]
        povms: Vec<PathBuf>,
    },
    /// Search for a joint observable or an infeasibility certificate.
    CheckJoint {
        #[arg(required = true)]
        povms: Vec<PathBuf>,
    },
    /// Minimal smoothing noise making the set jointly measurable.
    Robustness {
        #[arg(required = true)]
        povms: Vec<PathBuf>,
    },
    /// Measurement uncertainty check of a noisy family.
    Uncertainty {
        #[arg(required = true)]
        povms: Vec<PathBuf>,
        /// Uniform visibility applied to every POVM.
        #[arg(long, conflicts_with = "lambda", required_unless_present = "lambda")]
        eta: Option<f64>,
        /// One stochastic matrix per POVM.
        #[arg(long, num_args = 1..)]
        lambda: Vec<PathBuf>,
        /// Parameter point (defaults to the maximally mixed state with full tangents).
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Maximal CHSH value for two ±1-valued observables.
    Chsh {
        /// Two qubit Bloch axes `a1,a2,a3 b1,b2,b3`.
        #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "observables")]
        qubit: Vec<String>,
        /// Two observable files.
        #[arg(num_args = 2, required_unless_present = "qubit")]
        observables: Vec<PathBuf>,
    },
    /// Sample the boundary of the qubit complementarity chamber.
    ChamberExport {
        #[arg(long)]
        s: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
}

enum Failure {
    Input(String),
    Solver(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { iterations, primal_objective, dual_objective, gap } => Failure::Solver(json!({
                "error": "solver failure",
                "iterations": iterations,
                "primal_objective": primal_objective,
                "dual_objective": dual_objective,
                "gap": gap,
            })),
            other => Failure::Input(other.to_string()),
        }
    }
}

struct Outcome {
    body: String,
    code: u8,
}

impl Outcome {
    fn json(v: Value, code: u8) -> Self {
        Self { body: io::render(v), code }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: incompat::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Parse(m) => Failure::Input(format!("{}: {m}", path.display())),
        other => Failure::Input(format!("{}: {other}", path.display())),
    })
}

fn load_povm(path: &Path) -> Result<Povm<f64>, Failure> {
    with_path(path, io::povm_from_json(&read(path)?))
}

fn load_valid_povms(paths: &[PathBuf]) -> Result<Vec<Povm<f64>>, Failure> {
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let p = load_povm(path)?;
        let report = povm::validate(&p, POVM_TOL);
        if !report.pass() {
            return Err(Failure::Input(format!(
                "{}: not a valid POVM (min eigenvalue {:e}, completeness residual {:e})",
                path.display(),
                report.min_eigenvalue,
                report.completeness_residual
            )));
        }
        if let Some(first) = out.first().map(|q: &Povm<f64>| q.dim()) {
            if first != p.dim() {
                return Err(Error::DimensionMismatch { expected: first, found: p.dim() }.into());
            }
        }
        out.push(p);
    }
    Ok(out)
}

fn parse_triple(text: &str) -> Result<[f64; 3], Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Failure::Input(format!("expected three comma-separated numbers, got {text:?}")));
    }
    let mut v = [0.0; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| Failure::Input(format!("not a number: {part:?}")))?;
    }
    Ok(v)
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let cfg = &cli.run;
    if !(cfg.tolerance > 0.0) {
        return Err(Failure::Input("tolerance must be positive".into()));
    }
    let tol = cfg.tolerance;
    let csv = cfg.format == Some(Format::Csv);
    if csv && !matches!(cli.command, Command::ChamberExport { .. }) {
        return Err(Failure::Input("csv output is only available for chamber-export".into()));
    }
    match &cli.command {
        Command::Validate { povm } => {
            let p = load_povm(povm)?;
            let report = povm::validate(&p, POVM_TOL);
            let code = if report.pass() { 0 } else { 2 };
            Ok(Outcome::json(io::validation_to_json(&report), code))
        }
        Command::Tau { povms } => {
            let ps = load_valid_povms(povms)?;
            let opts = TauOptions { max_iter: cfg.max_iter, ..TauOptions::with_tol(tol) };
            let report = criteria::tau_with(&ps, &opts)?;
            let code = if report.verdict == Verdict::Incompatible { 3 } else { 0 };
            Ok(Outcome::json(io::incompat_report_to_json(&report), code))
        }
        Command::CheckJoint { povms } => {
            let ps = load_valid_povms(povms)?;
            let opts = JointOptions { tol, max_iter: cfg.max_iter, ..JointOptions::default() };
            let sol = sdp::joint_feasibility_with(&ps, &opts)?;
            let code = match sol.status {
                JointStatus::Feasible => 0,
                JointStatus::Infeasible => 3,
                JointStatus::Inconclusive => 4,
            };
            Ok(Outcome::json(io::joint_solution_to_json(&sol), code))
        }
        Command::Robustness { povms } => {
            let ps = load_valid_povms(povms)?;
            let r = criteria::robustness(&ps, tol)?;
            Ok(Outcome::json(io::robustness_to_json(&r, tol), 0))
        }
        Command::Uncertainty { povms, eta, lambda, point } => {
            let ps = load_valid_povms(povms)?;
            let d = ps[0].dim();
            let pt: ParamPoint<f64> = match point {
                Some(path) => with_path(path, io::param_point_from_json(&read(path)?))?,
                None => central_point(d),
            };
            if pt.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: pt.dim() }.into());
            }
            let report = match eta {
                Some(eta) => criteria::uncertainty_check_eta(&ps, *eta, &pt)?,
                None => {
                    let ls = lambda
                        .iter()
                        .map(|path| with_path(path, io::stochastic_from_json(&read(path)?)))
                        .collect::<Result<Vec<StochasticMatrix<f64>>, _>>()?;
                    criteria::uncertainty_check(&ps, &ls, &pt)?
                }
            };
            Ok(Outcome::json(io::uncertainty_to_json(&report, tol), 0))
        }
        Command::Chsh { qubit, observables } => {
            let (a, b, formula) = if qubit.len() == 2 {
                let (a, b) = (parse_triple(&qubit[0])?, parse_triple(&qubit[1])?);
                let formula = chsh_max_qubit(a, b)?;
                (HermitianOperator::bloch(a), HermitianOperator::bloch(b), Some(formula))
            } else {
                let load = |p: &PathBuf| -> Result<HermitianOperator, Failure> { with_path(p, io::operator_from_json(&read(p)?)) };
                (load(&observables[0])?, load(&observables[1])?, None)
            };
            let sa = from_observable(&a, POVM_TOL);
            let sb = from_observable(&b, POVM_TOL);
            let result = bell::chsh_max_general(&sa, &sb)?;
            let mut v = io::chsh_to_json(&result, tol);
            v["commutator_bound"] = json!(bell::chsh_commutator_bound(&a, &b));
            if let Some(f) = formula {
                v["qubit_formula"] = json!(f);
            }
            Ok(Outcome::json(v, 0))
        }
        Command::ChamberExport { s, n } => {
            let s = parse_triple(s)?;
            let cloud = chamber::chamber_export_seeded(s, *n, cfg.seed)?;
            let meta = io::chamber_metadata(&cloud);
            if cfg.format == Some(Format::Json) {
                let points: Vec<Value> = cloud.points.iter().map(|p| json!(p)).collect();
                return Ok(Outcome::json(json!({ "metadata": meta, "points": points }), 0));
            }
            match &cfg.output {
                Some(path) => {
                    let mut side = path.clone().into_os_string();
                    side.push(".meta.json");
                    fs::write(&side, io::render(meta)).map_err(|e| Failure::Input(e.to_string()))?;
                }
                None => eprint!("{}", io::render(meta)),
            }
            Ok(Outcome { body: io::chamber_csv(&cloud), code: 0 })
        }
    }
}

fn emit(cfg: &RunConfig, body: &str) -> std::io::Result<()> {
    match &cfg.output {
        Some(path) => fs::write(path, body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli.run, &out.body) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(out.code)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(v)) => {
            eprint!("{}", io::render(v));
            ExitCode::from(5)
        }
    }
}
