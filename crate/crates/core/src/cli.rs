//! The `aba` command line.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::exact::{solve_exact, ExactOptions, DEFAULT_CAP_LP_VARS};
use crate::fptas::{fptas_a_const, fptas_eb_const, FptasOptions, DEFAULT_CAP_GRID_POINTS};
use crate::instance::total_value_v;
use crate::io::{check_report_to_json, format_real, parse_instance, parse_scheme, report_to_json};
use crate::oracle::{cross_belief_utilities, deviation_check, oracle_optimal};
use crate::report::SolveReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    FptasA,
    FptasEb,
    Oracle,
}

#[derive(Debug, Parser)]
#[command(name = "aba", about = "Optimal signaling commitments in the Alice-Bob-Alice market")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Instance file (JSON).
    pub instance: PathBuf,
    /// Where to write the report; standard output only gets the summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CAP_LP_VARS)]
    pub cap_lp_vars: u128,
    #[arg(long, default_value_t = DEFAULT_CAP_GRID_POINTS)]
    pub cap_grid_points: u128,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute Alice's optimal (or delta-optimal) scheme.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        /// Target suboptimality for the grid methods.
        #[arg(long)]
        delta: Option<f64>,
        /// Consistency slack for fptas-eb; defaults to 2/K.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 0.02)]
        grid_step: f64,
        #[arg(long, default_value_t = 2)]
        max_signals: usize,
    },
    /// Substitutes/complements verdict from the exact solver.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Total market value V.
    Value {
        #[command(flatten)]
        common: Common,
    },
    /// Cross-belief payoffs and the deviation chain for two schemes.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Scheme Bob believes Alice uses.
        #[arg(long)]
        belief: PathBuf,
        /// Scheme Alice actually draws from.
        #[arg(long)]
        actual: PathBuf,
    },
    /// Brute-force search over gridded schemes.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.02)]
        grid_step: f64,
        #[arg(long, default_value_t = 2)]
        max_signals: usize,
    },
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Validation(_) | Error::Io(_) | Error::InvalidArgument(_) => EXIT_INVALID,
        _ => EXIT_SOLVER,
    }
}

fn write_out(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn summary(r: &SolveReport) -> String {
    format!(
        "method {} objective {} bob_utility {} V {} classification {} signals {}",
        r.method,
        format_real(r.sender_objective),
        format_real(r.bob_utility),
        format_real(r.total_value_v),
        r.classification,
        r.scheme.n_signals()
    )
}

fn exact_opts(c: &Common) -> ExactOptions {
    ExactOptions {
        cap_lp_vars: c.cap_lp_vars,
        ..ExactOptions::default()
    }
}

fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Solve {
            common,
            method,
            delta,
            eta,
            grid_step,
            max_signals,
        } => {
            let inst = parse_instance(&common.instance)?;
            let fopts = FptasOptions {
                cap_grid_points: common.cap_grid_points,
                k_override: None,
            };
            let need_delta = || match delta {
                Some(d) if d > 0.0 && d.is_finite() => Ok(d),
                _ => Err(Error::InvalidArgument("--delta > 0 is required for the grid methods".into())),
            };
            let report = match method {
                MethodArg::Exact => solve_exact(&inst.prior, &inst.score, &exact_opts(&common))?,
                MethodArg::FptasA => fptas_a_const(&inst.prior, &inst.score, need_delta()?, &fopts)?,
                MethodArg::FptasEb => fptas_eb_const(&inst.prior, &inst.score, need_delta()?, eta, &fopts)?,
                MethodArg::Oracle => oracle_optimal(&inst.prior, &inst.score, grid_step, max_signals)?,
            };
            write_out(&common, &report_to_json(&report))?;
            Ok(summary(&report))
        }
        Command::Classify { common } => {
            let inst = parse_instance(&common.instance)?;
            let report = solve_exact(&inst.prior, &inst.score, &exact_opts(&common))?;
            write_out(&common, &report_to_json(&report))?;
            Ok(format!("classification {}", report.classification))
        }
        Command::Value { common } => {
            let inst = parse_instance(&common.instance)?;
            let v = total_value_v(&inst.prior, &inst.score)?;
            write_out(&common, &format!("{{\n  \"V\": {}\n}}\n", format_real(v)))?;
            Ok(format!("V {}", format_real(v)))
        }
        Command::Simulate { common, belief, actual } => {
            let inst = parse_instance(&common.instance)?;
            let believed = parse_scheme(&belief)?;
            let actual = parse_scheme(&actual)?;
            believed.validate_against(&inst.prior)?;
            actual.validate_against(&inst.prior)?;
            let cross = cross_belief_utilities(&inst.prior, &inst.score, &believed, &actual)?;
            let mut rep = deviation_check(&inst.prior, &inst.score, &believed, &actual)?;
            rep.values.insert("alice_utility".into(), cross.alice_utility);
            write_out(&common, &check_report_to_json(&rep))?;
            Ok(format!(
                "chain {} {} {} {}",
                format_real(rep.values["u_B(pi;pi_star)"]),
                format_real(rep.values["u_B(pi_star;pi_star)"]),
                format_real(rep.values["u_B(pi;pi)"]),
                if rep.passed { "holds" } else { "VIOLATED" }
            ))
        }
        Command::Oracle {
            common,
            grid_step,
            max_signals,
        } => {
            let inst = parse_instance(&common.instance)?;
            let report = oracle_optimal(&inst.prior, &inst.score, grid_step, max_signals)?;
            write_out(&common, &report_to_json(&report))?;
            Ok(summary(&report))
        }
    }
}
