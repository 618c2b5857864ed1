//! `gcmc`: load an instance, run one pipeline mode, write a JSON report.
//!
//! Exit status is 0 on success, 2 when the instance exceeds a size cap or the
//! mode does not support its constraint, and 1 for anything else (bad flags,
//! unreadable or malformed files).

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use gcmc_core::io::{load_instance, load_partition};
use gcmc_core::oracle::{brute_force_opt, certify_solved, feasible_sets};
use gcmc_core::{
    algorithm2, solve_instance, Algorithm2Config, Algorithm2Report, CertifyConfig, Constraint, FamilyMode, GcmcError,
    Instance, OracleReport, PipelineConfig, SolveReport, Vertex,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Solve the LP and round once.
    Solve,
    /// Solve, round, and compare against the brute-force optimum.
    Certify,
    /// Partition meta-algorithm; needs `--partition`.
    Algorithm2,
    /// Brute-force optimum only.
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Reduced,
    Full,
}

impl From<Family> for FamilyMode {
    fn from(f: Family) -> Self {
        match f {
            Family::Reduced => FamilyMode::Reduced,
            Family::Full => FamilyMode::Full,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gcmc", version, about = "Graph-constrained max-cut on bounded-treewidth graphs")]
struct Cli {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// independent-set, vertex-cover, dominating-set or connectivity. Overrides
    /// the constraint stored in the instance file.
    #[arg(long)]
    constraint: Option<Constraint>,
    #[arg(long, value_enum, default_value_t = Mode::Solve)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Family::Reduced)]
    family: Family,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo sample size when certifying an instance whose rounding
    /// distribution is too large to enumerate.
    #[arg(long, default_value_t = 50_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Partition JSON file for `--mode algorithm2`.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Per-bag state-space cap. Defaults to GCMC_STATE_CAP or 5000.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    state_cap: Option<u64>,
    /// Cap on enumerated rounding outcomes.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    enumeration_cap: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print a one-line human summary on standard error.
    #[arg(long)]
    summary: bool,
}

#[derive(Debug, Serialize)]
struct OracleOnly {
    constraint: Constraint,
    n: usize,
    feasible_count: usize,
    opt_value: f64,
    opt_set: Vec<Vertex>,
}

#[derive(Debug, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
enum Report {
    Solve(SolveReport),
    Certify { solve: SolveReport, certificate: OracleReport },
    Algorithm2(Algorithm2Report),
    Oracle(OracleOnly),
}

impl Report {
    fn summary(&self) -> String {
        match self {
            Report::Solve(s) => format!(
                "{}: LP {:.6}, rounded cut {:.6} ({})",
                s.constraint,
                s.lp_value,
                s.cut_value,
                if s.feasible { "feasible" } else { "INFEASIBLE" }
            ),
            Report::Certify { solve, certificate: c } => format!(
                "{}: OPT {:.6}, LP {:.6}, E[cut] {:.6}, ratio {:.4}, rounded cut {:.6}",
                solve.constraint, c.opt_value, c.lp_value, c.expected_cut, c.ratio, solve.cut_value
            ),
            Report::Algorithm2(a) => format!(
                "algorithm2: h = {}, chosen part {}, cut {:.6}, best part value {:.6}",
                a.h, a.chosen_part, a.cut_value, a.best_value
            ),
            Report::Oracle(o) => {
                format!("{}: OPT {:.6} over {} feasible sets", o.constraint, o.opt_value, o.feasible_count)
            }
        }
    }
}

fn pipeline_config(cli: &Cli) -> PipelineConfig {
    let mut cfg = PipelineConfig::default().with_family(cli.family.into());
    if let Some(cap) = cli.state_cap {
        cfg.state_cap = cap as usize;
    }
    if let Some(cap) = cli.enumeration_cap {
        cfg.enumeration_cap = cap as usize;
    }
    cfg
}

fn build_report(cli: &Cli, instance: &Instance) -> Result<Report, GcmcError> {
    let pipeline = pipeline_config(cli);
    match cli.mode {
        Mode::Solve => Ok(Report::Solve(solve_instance(instance, &pipeline)?.report(cli.seed))),
        Mode::Certify => {
            let solved = solve_instance(instance, &pipeline)?;
            let cfg = CertifyConfig { pipeline, seed: cli.seed, trials: cli.trials as usize };
            let certificate = certify_solved(&solved, &cfg)?;
            Ok(Report::Certify { solve: solved.report(cli.seed), certificate })
        }
        Mode::Algorithm2 => {
            let path = cli
                .partition
                .as_ref()
                .ok_or_else(|| GcmcError::Parse("--mode algorithm2 needs --partition".into()))?;
            let partition = load_partition(path, instance.n())?;
            let cfg = Algorithm2Config { pipeline, seed: cli.seed, ..Default::default() };
            Ok(Report::Algorithm2(algorithm2(instance, &partition, &cfg)?.1))
        }
        Mode::Oracle => {
            let (set, value) = brute_force_opt(instance)?;
            Ok(Report::Oracle(OracleOnly {
                constraint: instance.constraint,
                n: instance.n(),
                feasible_count: feasible_sets(&instance.graph, instance.constraint)?.len(),
                opt_value: value,
                opt_set: set.to_vec(),
            }))
        }
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<(), GcmcError> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|source| GcmcError::Io { path: path.display().to_string(), source })
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| GcmcError::Io { path: "<stdout>".into(), source }),
    }
}

fn run(cli: &Cli) -> Result<(), GcmcError> {
    let instance = load_instance(&cli.instance, cli.constraint)?;
    let report = build_report(cli, &instance)?;
    emit(cli, &report)?;
    if cli.summary {
        eprintln!("{}", report.summary());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gcmc: {e}");
            ExitCode::from(if e.is_cap_error() { 2 } else { 1 })
        }
    }
}
