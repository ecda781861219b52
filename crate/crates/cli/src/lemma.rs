//! `esbgk lemma-check`: the kernel estimate at several relaxation times.

use anyhow::{bail, Result};
use serde::Serialize;

use esbgk_core::transport::kernel_estimate_probe;

/// Largest allowed spread of `probe·τ/(ln τ + 1)` across the list.
pub const MAX_SPREAD: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub tau: f64,
    pub probe: f64,
    /// `probe · τ / (ln τ + 1)`
    pub normalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaCheck {
    pub decay: f64,
    pub rows: Vec<ProbeRow>,
    /// `max normalized / min normalized`
    pub spread: f64,
    pub pass: bool,
}

pub fn lemma_check(taus: &[f64], decay: f64) -> Result<LemmaCheck> {
    if !(decay > 0.0) || !decay.is_finite() {
        bail!("decay must be positive, got {decay}");
    }
    if let Some(t) = taus.iter().find(|t| !(**t > 1.0) || !t.is_finite()) {
        bail!("every tau must exceed 1, got {t}");
    }
    let rows: Vec<ProbeRow> = taus
        .iter()
        .map(|&tau| {
            let probe = kernel_estimate_probe(tau, decay, 1.0);
            ProbeRow { tau, probe, normalized: probe * tau / (tau.ln() + 1.0) }
        })
        .collect();
    let hi = rows.iter().map(|r| r.normalized).fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.normalized).fold(f64::INFINITY, f64::min);
    let spread = hi / lo;
    Ok(LemmaCheck { decay, rows, spread, pass: lo > 0.0 && spread <= MAX_SPREAD })
}

pub fn cmd_lemma_check(taus: &[f64], decay: f64) -> Result<i32> {
    let check = lemma_check(taus, decay)?;
    println!("{:>12}  {:>14}  {:>14}", "tau", "probe", "probe*tau/(ln tau+1)");
    for r in &check.rows {
        println!("{:>12.4e}  {:>14.6e}  {:>14.6e}", r.tau, r.probe, r.normalized);
    }
    println!("spread {:.4} (limit {MAX_SPREAD}): {}", check.spread, if check.pass { "PASS" } else { "FAIL" });
    Ok(if check.pass { crate::EXIT_OK } else { crate::EXIT_BATTERY })
}
