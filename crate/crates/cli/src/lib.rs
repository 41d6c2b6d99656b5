//! `lsc`: validate, solve, certify and simulate scenario files.
//!
//! Exit codes: 0 success, 1 invalid scenario, 2 solver or certification
//! failure, 3 I/O error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use lsc_core::fluctuation::{moments, ExtremumLaw};
use lsc_core::mc::{barrier_sweep, SimConfig, SweepReport};
use lsc_core::scenario::{Scenario, ScenarioValidation};
use lsc_core::threshold::{hjb_residual, Assumption4Report, GridSpec, HjbReport, Problem};
use lsc_core::Error;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const VALUE_HEADER: &str = "x,q,v,c,u,hjb_residual";
pub const SWEEP_HEADER: &str =
    "barrier,mean,stderr,running,continuous_control,jump_control,initial_control,tail_bound";

#[derive(Debug, Parser)]
#[command(name = "lsc", version, about = "Optimal reflecting barriers for singular control of Lévy processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    /// Output path; `-` or absent writes to standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the scenario's model, cost and growth conditions.
    Validate,
    /// Compute the optimal barrier.
    Solve,
    /// Roots of φ = δ and the laws of the supremum and infimum.
    Factors,
    /// Tabulate Q, v, c, u and the HJB residual.
    Value(RangeArgs),
    /// Monte Carlo cost of reflecting at a range of barriers.
    Sweep(RangeArgs),
    /// Check the HJB system at the optimal barrier.
    Certify,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    /// Left end; defaults to x* minus the command's half-width.
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    /// Right end; defaults to x* plus the command's half-width.
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub x_star: f64,
    pub closed_form_x_star: Option<f64>,
    pub q_at_root: f64,
    pub assumption4_report: Assumption4Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSummary {
    pub law: ExtremumLaw,
    pub mean: f64,
    pub second_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorsOutput {
    pub delta: f64,
    pub positive_roots: Vec<f64>,
    pub negative_roots: Vec<f64>,
    pub max_residual: f64,
    pub sup: LawSummary,
    pub inf: LawSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyOutput {
    pub x_star: f64,
    pub report: HjbReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub report: SweepReport,
    pub sim: SimConfig,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidModel(_) | Error::InvalidCost(_) | Error::Domain { .. } | Error::Config(_) => {
                EXIT_VALIDATION
            }
            Error::Convergence(_)
            | Error::Degenerate(_)
            | Error::Integrability(_)
            | Error::NoRoot
            | Error::Assumption4Violation(_) => EXIT_SOLVER,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, Failure> {
    let scenario = load_scenario(&cli.common)?;
    let validation = scenario.validate();
    if let Command::Validate = cli.command {
        emit(&cli.common, &to_json(&validation))?;
        return Ok(if validation.passed { 0 } else { EXIT_VALIDATION });
    }
    require_valid(&validation)?;
    let problem = scenario.problem()?;
    match &cli.command {
        Command::Validate => unreachable!(),
        Command::Solve => emit(&cli.common, &to_json(&solve(&problem)?))?,
        Command::Factors => emit(&cli.common, &to_json(&factors(&problem)?))?,
        Command::Value(range) => emit(&cli.common, &value_table(&problem, range)?)?,
        Command::Sweep(range) => {
            let (csv, summary) = sweep(&scenario, &problem, &cli.common, range)?;
            eprintln!("{}", to_json(&summary));
            emit(&cli.common, &csv)?;
        }
        Command::Certify => {
            let out = certify(&problem)?;
            emit(&cli.common, &to_json(&out))?;
            if !out.report.pass {
                return Ok(EXIT_SOLVER);
            }
        }
    }
    Ok(0)
}

fn load_scenario(common: &Common) -> Result<Scenario, Failure> {
    let name = common
        .scenario
        .as_deref()
        .ok_or_else(|| Failure::validation("--scenario is required"))?;
    let path = PathBuf::from(name);
    if !path.exists() {
        if let Some(s) = Scenario::bundled(name) {
            return Ok(s);
        }
    }
    match Scenario::load(&path) {
        Ok(parsed) => Ok(parsed?),
        Err(e) => Err(Failure::io(format!("cannot read {}: {e}", path.display()))),
    }
}

fn require_valid(v: &ScenarioValidation) -> Result<(), Failure> {
    if v.passed {
        Ok(())
    } else {
        Err(Failure::validation(format!(
            "scenario failed validation: {}",
            v.errors.join("; ")
        )))
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match common.out.as_deref() {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, text)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", p.display()))),
        _ => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::io(format!("cannot write to stdout: {e}"))),
    }
}

pub fn solve(problem: &Problem) -> Result<SolveOutput, Failure> {
    let search = problem.find_threshold()?;
    Ok(SolveOutput {
        x_star: search.x_star,
        closed_form_x_star: problem.closed_form_threshold(),
        q_at_root: search.q_at_root,
        assumption4_report: search.assumption4,
    })
}

pub fn factors(problem: &Problem) -> Result<FactorsOutput, Failure> {
    let summary = |law: &ExtremumLaw| {
        let (mean, second_moment) = moments(law);
        LawSummary {
            law: law.clone(),
            mean,
            second_moment,
        }
    };
    Ok(FactorsOutput {
        delta: problem.delta,
        positive_roots: problem.roots.positive_roots.clone(),
        negative_roots: problem.roots.negative_roots.clone(),
        max_residual: problem.roots.max_residual(&problem.model),
        sup: summary(&problem.sup),
        inf: summary(&problem.inf),
    })
}

pub fn certify(problem: &Problem) -> Result<CertifyOutput, Failure> {
    let sol = problem.solve(GridSpec::default())?;
    Ok(CertifyOutput {
        x_star: sol.x_star,
        report: sol.hjb,
    })
}

fn grid(range: &RangeArgs, center: f64, half_width: f64, default_points: usize) -> Result<Vec<f64>, Failure> {
    let lo = range.from.unwrap_or(center - half_width);
    let hi = range.to.unwrap_or(center + half_width);
    let n = range.points.unwrap_or(default_points);
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) || n == 0 {
        return Err(Failure::validation(format!(
            "invalid range [{lo}, {hi}] with {n} points"
        )));
    }
    Ok(match n {
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    })
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn value_table(problem: &Problem, range: &RangeArgs) -> Result<String, Failure> {
    let x_star = problem.find_threshold()?.x_star;
    let v = problem.stopping_value(x_star)?;
    let u = problem.value_function(&v)?;
    let mut out = String::from(VALUE_HEADER);
    out.push('\n');
    for x in grid(range, x_star, 3.0, 100)? {
        let res = hjb_residual(&u, &problem.cost, &problem.model, problem.delta, x);
        let row = [x, problem.q.eval(x), v.eval(x), problem.cost.c(x), u.eval(x), res];
        let cells: Vec<String> = row.iter().map(|&y| fmt(y)).collect();
        writeln!(out, "{}", cells.join(",")).expect("writing to a string");
    }
    Ok(out)
}

pub fn sim_config(scenario: &Scenario, common: &Common, x_star: f64) -> SimConfig {
    let mut c = scenario.sim_config(x_star);
    if let Some(h) = common.horizon {
        c.horizon = h;
    }
    if let Some(dt) = common.dt {
        c.dt = dt;
    }
    if let Some(p) = common.paths {
        c.paths = p;
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    c
}

pub fn sweep(
    scenario: &Scenario,
    problem: &Problem,
    common: &Common,
    range: &RangeArgs,
) -> Result<(String, SweepSummary), Failure> {
    let x_star = problem.find_threshold()?.x_star;
    let config = sim_config(scenario, common, x_star);
    let barriers = grid(range, x_star, 1.0, 11)?;
    let (rows, report) = barrier_sweep(&problem.model, &problem.cost, problem.delta, &config, &barriers)?;
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in &rows {
        let e = &r.estimate;
        let cells = [
            r.barrier,
            e.mean,
            e.stderr,
            e.components.running,
            e.components.continuous_control,
            e.components.jump_control,
            e.components.initial_control,
            e.tail_bound,
        ]
        .map(fmt);
        writeln!(out, "{}", cells.join(",")).expect("writing to a string");
    }
    Ok((out, SweepSummary { report, sim: config }))
}
