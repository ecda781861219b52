//! `esbgk sweep`: one solve per value of a single parameter, run concurrently.
//!
//! Axes:
//!
//! * `nu`: the Prandtl parameter, with `κ` held fixed;
//! * `tau`: the relaxation time, setting `κ = τ / (1 − ν)`;
//! * `delta`: `δ1`, with `1 − δ1` split between `δ2` and `δ3` in the base
//!   proportion (all to `δ2` when both are zero);
//! * `discrepancy`: both inflow slices rescaled so that `F_L − F_R = value`
//!   while `F_L + F_R` keeps its base value.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use esbgk_core::{BoundarySpec, Problem, Solution, Termination};

use crate::config::LoadedConfig;
use crate::output;
use crate::solve::SolveReport;

pub const SUMMARY_HEADER: &str =
    "value,converged,iterations,fitted_rate,min_eigenvalue,u1_max,lambda_margin,termination";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Nu,
    Tau,
    Delta,
    Discrepancy,
}

impl FromStr for Axis {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "nu" => Axis::Nu,
            "tau" => Axis::Tau,
            "delta" => Axis::Delta,
            "discrepancy" => Axis::Discrepancy,
            other => bail!("unknown sweep axis {other:?}; expected nu, tau, delta or discrepancy"),
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Nu => "nu",
            Axis::Tau => "tau",
            Axis::Delta => "delta",
            Axis::Discrepancy => "discrepancy",
        })
    }
}

/// The base problem with one parameter replaced.
pub fn variant(base: &Problem, axis: Axis, value: f64) -> Result<Problem> {
    let mut p = base.clone();
    let vg = &p.grid.velocity;
    let rebuild = |delta: [f64; 3], f_right: Vec<f64>| {
        BoundarySpec::new(
            vg,
            delta,
            base.spec.wall_temperature(),
            base.spec.f_left().to_vec(),
            f_right,
            base.spec.regime(),
        )
    };
    match axis {
        Axis::Nu => p.config.nu = value,
        Axis::Tau => p.config.kappa = value / (1.0 - p.config.nu),
        Axis::Delta => {
            if !(0.0..=1.0).contains(&value) {
                bail!("delta1 must lie in [0, 1], got {value}");
            }
            let [_, d2, d3] = base.spec.delta();
            let rest = 1.0 - value;
            let delta = if d2 + d3 > 0.0 {
                [value, rest * d2 / (d2 + d3), rest * d3 / (d2 + d3)]
            } else {
                [value, rest, 0.0]
            };
            p.spec = rebuild(delta, base.spec.f_right().to_vec())?;
        }
        Axis::Discrepancy => {
            let (f_l, f_r) = (base.spec.flux_left(vg), base.spec.flux_right(vg));
            let mean = 0.5 * (f_l + f_r);
            let (t_l, t_r) = (mean + 0.5 * value, mean - 0.5 * value);
            if !(f_l > 0.0 && f_r > 0.0 && t_l > 0.0 && t_r > 0.0) {
                bail!("discrepancy {value} leaves an inflow side without positive flux");
            }
            let scale = |s: &[f64], k: f64| s.iter().map(|x| x * k).collect::<Vec<f64>>();
            p.spec = BoundarySpec::new(
                vg,
                base.spec.delta(),
                base.spec.wall_temperature(),
                scale(base.spec.f_left(), t_l / f_l),
                scale(base.spec.f_right(), t_r / f_r),
                base.spec.regime(),
            )?;
        }
    }
    p.config.validate()?;
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub fitted_rate: Option<f64>,
    /// `min_x λ1(T_ν)`
    pub min_eigenvalue: Option<f64>,
    /// `max_x |U1|`
    pub u1_max: Option<f64>,
    /// `min_x λ1 − (lower tensor bound)` from the final ledger.
    pub lambda_margin: Option<f64>,
    pub termination: String,
}

impl SweepRow {
    pub fn from_solution(value: f64, s: &Solution) -> Self {
        let r = &s.report;
        let min_eigenvalue = s.profile.iter().map(|row| row.eigenvalues[0]).reduce(f64::min);
        let u1_max = s.profile.iter().map(|row| row.fields.u[0].abs()).reduce(f64::max);
        let lambda_margin = r.final_omega().and_then(|o| o.get("C_tensor_lower")).map(|c| c.margin);
        SweepRow {
            value,
            converged: r.converged(),
            iterations: r.iterations(),
            fitted_rate: r.contraction.fitted_rate,
            min_eigenvalue,
            u1_max,
            lambda_margin,
            termination: match &r.termination {
                Termination::Converged => "converged".into(),
                Termination::MaxIter => "max_iter".into(),
                Termination::HypothesisViolation(d) => format!("hypothesis_violation: {d}"),
            },
        }
    }

    fn failed(value: f64, err: &anyhow::Error) -> Self {
        SweepRow {
            value,
            converged: false,
            iterations: 0,
            fitted_rate: None,
            min_eigenvalue: None,
            u1_max: None,
            lambda_margin: None,
            termination: format!("error: {err:#}"),
        }
    }

    fn csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        // the last column is free text; keep it a single CSV cell
        let text = self.termination.replace(['"', '\n'], " ");
        format!(
            "{:.16e},{},{},{},{},{},{},\"{}\"",
            self.value,
            self.converged,
            self.iterations,
            opt(self.fitted_rate),
            opt(self.min_eigenvalue),
            opt(self.u1_max),
            opt(self.lambda_margin),
            text
        )
    }
}

pub fn summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

/// Runs every value; per-run outputs go to `out_dir/run_<k>` when a directory is given.
pub fn sweep(base: &Problem, axis: Axis, values: &[f64], out_dir: Option<&Path>) -> Vec<SweepRow> {
    values
        .par_iter()
        .enumerate()
        .map(|(k, &value)| {
            let attempt = || -> Result<SweepRow> {
                let p = variant(base, axis, value)?;
                let s = esbgk_core::solve(&p)?;
                if let Some(dir) = out_dir {
                    let run = dir.join(format!("run_{k:03}"));
                    output::write_atomic(&run.join("profile.csv"), output::profile_csv(&s.profile).as_bytes())?;
                    output::write_atomic(&run.join("report.json"), &output::json_pretty(&SolveReport::new(&s.report))?)?;
                }
                Ok(SweepRow::from_solution(value, &s))
            };
            attempt().unwrap_or_else(|e| SweepRow::failed(value, &e))
        })
        .collect()
}

pub fn cmd_sweep(config_path: &Path, axis: Axis, values: &[f64], out_dir: Option<PathBuf>) -> Result<i32> {
    let loaded = LoadedConfig::read(config_path)?;
    let base = loaded.problem()?;
    let dir = out_dir.unwrap_or_else(|| loaded.output_dir()).join(format!("sweep_{axis}"));
    let rows = sweep(&base, axis, values, Some(&dir));
    let summary = dir.join("summary.csv");
    output::write_atomic(&summary, summary_csv(&rows).as_bytes())?;
    for r in &rows {
        println!(
            "{axis} = {:<10} {:<9} iterations {:>4}  rate {}",
            r.value,
            if r.converged { "converged" } else { "failed" },
            r.iterations,
            r.fitted_rate.map_or("-".to_string(), |x| format!("{x:.4}"))
        );
    }
    println!("summary: {}", summary.display());
    Ok(if rows.iter().any(|r| r.converged) { crate::EXIT_OK } else { crate::EXIT_MAX_ITER })
}
