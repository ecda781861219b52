//! `esbgk solve`

use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::Serialize;

use esbgk_core::{IterationReport, OmegaEntry, Problem, Solution, Termination};

use crate::config::LoadedConfig;
use crate::output;

pub const PROFILE_FILE: &str = "profile.csv";
pub const REPORT_FILE: &str = "report.json";
pub const FIELD_FILE: &str = "field.bin";

#[derive(Debug, Serialize)]
pub struct LedgerRow<'a> {
    pub iteration: usize,
    pub all_pass: bool,
    pub failures: Vec<&'a str>,
}

#[derive(Debug, Serialize)]
pub struct OmegaLedger<'a> {
    /// Every condition passed on the returned iterate.
    pub all_pass: bool,
    pub first_all_pass: Option<usize>,
    pub pass_to_fail_transition: Option<usize>,
    pub final_checks: Option<&'a OmegaEntry>,
    pub per_iteration: Vec<LedgerRow<'a>>,
}

/// Top-level shape of `report.json`.
#[derive(Debug, Serialize)]
pub struct SolveReport<'a> {
    pub termination: &'a Termination,
    pub iterations: usize,
    pub omega_ledger: OmegaLedger<'a>,
    pub report: &'a IterationReport,
}

impl<'a> SolveReport<'a> {
    pub fn new(report: &'a IterationReport) -> Self {
        let per_iteration = report
            .records
            .iter()
            .map(|r| LedgerRow { iteration: r.iteration, all_pass: r.omega.all_pass(), failures: r.omega.failures() })
            .collect();
        SolveReport {
            termination: &report.termination,
            iterations: report.iterations(),
            omega_ledger: OmegaLedger {
                all_pass: report.final_omega().is_some_and(OmegaEntry::all_pass),
                first_all_pass: report.first_all_pass(),
                pass_to_fail_transition: report.pass_to_fail_transition(),
                final_checks: report.final_omega(),
                per_iteration,
            },
            report,
        }
    }
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub solution: Solution,
    pub profile_path: PathBuf,
    pub report_path: PathBuf,
    pub field_path: Option<PathBuf>,
}

/// Solves `problem` and writes profile, report and optionally the field into `out_dir`.
pub fn run(problem: &Problem, out_dir: &Path, dump_field: bool) -> Result<SolveOutcome> {
    let solution = esbgk_core::solve(problem)?;
    let profile_path = out_dir.join(PROFILE_FILE);
    let report_path = out_dir.join(REPORT_FILE);
    output::write_atomic(&profile_path, output::profile_csv(&solution.profile).as_bytes())?;
    output::write_atomic(&report_path, &output::json_pretty(&SolveReport::new(&solution.report))?)?;
    let field_path = if dump_field {
        let p = out_dir.join(FIELD_FILE);
        output::write_atomic(&p, &output::field_dump(&problem.grid, &solution.field))?;
        Some(p)
    } else {
        None
    };
    Ok(SolveOutcome { solution, profile_path, report_path, field_path })
}

pub fn cmd_solve(config_path: &Path, out_dir: Option<PathBuf>, dump_field: bool) -> Result<i32> {
    let loaded = LoadedConfig::read(config_path)?;
    let problem = loaded.problem()?;
    let out_dir = out_dir.unwrap_or_else(|| loaded.output_dir());
    let dump = dump_field || loaded.config.output.dump_field;
    let outcome = run(&problem, &out_dir, dump)?;
    let report = &outcome.solution.report;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match &report.termination {
        Termination::Converged => println!("converged after {} iterations", report.iterations()),
        Termination::MaxIter => println!("stopped at the iteration limit ({})", report.iterations()),
        Termination::HypothesisViolation(d) => println!("hypothesis violation: {d}"),
    }
    if let Some(r) = report.residual {
        println!("mild-form residual {r:.3e}");
    }
    println!("profile: {}", outcome.profile_path.display());
    println!("report:  {}", outcome.report_path.display());
    if let Some(p) = &outcome.field_path {
        println!("field:   {}", p.display());
    }
    Ok(crate::exit_code(&report.termination))
}
