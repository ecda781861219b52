//! Characteristic sweep of the mild form and the kernel-estimate probe.
//!
//! Along each characteristic the source `M_ν(f^n)` is interpolated linearly
//! between spatial nodes and the Duhamel integral is evaluated exactly. With
//! `t = Δx/(τ|v1|)` one step reads
//!
//! ```text
//! f_{k+1} = e^{-t} f_k + a(t) G_k + b(t) G_{k+1}
//! a(t) = (1 − e^{-t}(1 + t)) / t,     b(t) = 1 − e^{-t} − a(t)
//! ```
//!
//! All three weights are positive and sum to one, so the sweep preserves
//! positivity and reproduces constant states exactly.

use rayon::prelude::*;

use crate::boundary::InflowTraces;
use crate::error::{Error, Result};
use crate::grid::{self, DistributionField, PhaseGrid};

/// Step weights `(e^{-t}, a, b)`: decay, far node, near node.
pub fn step_weights(t: f64) -> (f64, f64, f64) {
    let decay = (-t).exp();
    let a = if t < 0.5 {
        // Σ_{n≥2} (−1)^n (n−1)/n! t^{n−1}
        let mut term = 1.0; // t^{n-1}/n!, starting at n = 1
        let mut sum = 0.0;
        for n in 2..24 {
            // t^{n-1}/n! = (t^{n-2}/(n-1)!) · t/n

            term *= t / n as f64;
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += s * (n - 1) as f64 * term;
        }
        sum
    } else {
        (1.0 - decay * (1.0 + t)) / t
    };
    let b = -(-t).exp_m1() - a;
    (decay, a, b)
}

/// Marches every discrete velocity across the slab.
///
/// `v1 > 0` runs left to right from `traces.left`, `v1 < 0` right to left
/// from `traces.right`. Columns are independent and computed in parallel.
pub fn sweep(
    grid: &PhaseGrid,
    traces: &InflowTraces,
    gaussians: &DistributionField,
    tau: f64,
) -> Result<DistributionField> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::config(format!("relaxation time tau must be positive, got {tau}")));
    }
    let vg = &grid.velocity;
    let n_v = vg.len();
    let n_x = grid.space.len();
    assert_eq!(gaussians.n_v(), n_v);
    assert_eq!(gaussians.n_x(), n_x);
    assert_eq!(traces.left.len(), n_v);
    assert_eq!(traces.right.len(), n_v);

    let h = grid.space.spacing();
    let axis1 = vg.axis1();
    // weights[i1][k] for interval k
    let weights: Vec<Vec<(f64, f64, f64)>> = axis1
        .iter()
        .map(|v1| h.iter().map(|hk| step_weights(hk / (tau * v1.abs()))).collect())
        .collect();

    let g = gaussians.values();
    let columns: Vec<Vec<f64>> = (0..n_v)
        .into_par_iter()
        .map(|j| {
            let w = &weights[vg.axis1_index(j)];
            let src = |i: usize| g[i * n_v + j];
            let mut col = vec![0.0; n_x];
            if vg.is_positive(j) {
                col[0] = traces.left[j];
                for k in 0..n_x - 1 {
                    let (e, a, b) = w[k];
                    col[k + 1] = e * col[k] + a * src(k) + b * src(k + 1);
                }
            } else {
                col[n_x - 1] = traces.right[j];
                for k in (0..n_x - 1).rev() {
                    let (e, a, b) = w[k];
                    col[k] = e * col[k + 1] + a * src(k + 1) + b * src(k);
                }
            }
            col
        })
        .collect();

    let mut out = DistributionField::zeros(grid);
    let values = out.values_mut();
    for (j, col) in columns.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            values[i * n_v + j] = *x;
        }
    }
    Ok(out)
}

/// Mild-form defect `sup_x ‖f − S(f)‖_{L¹₂}`, where `S(f)` is the sweep of
/// `gaussians` (normally `M_ν(f)`) started from `f`'s own inflow rows.
pub fn residual(
    grid: &PhaseGrid,
    f: &DistributionField,
    gaussians: &DistributionField,
    tau: f64,
) -> Result<f64> {
    let traces = InflowTraces::of_field(&grid.velocity, f);
    let rhs = sweep(grid, &traces, gaussians, tau)?;
    Ok(grid::sup_l1_2_norm(&grid.velocity, &f.difference(&rhs)))
}

/// `∫₀ˣ ∫_{v>0} (τv)⁻¹ e^{-(x−y)/(τv)} e^{-Cv²} dv dy`.
///
/// The `y`-integral is done in closed form, leaving
/// `∫₀^∞ (1 − e^{-x/(τv)}) e^{-Cv²} dv`, which is integrated with 20-point
/// Gauss–Legendre panels refined geometrically towards `v = 0`.
pub fn kernel_estimate_probe(tau: f64, decay: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (nodes, weights) = grid::gauss_legendre(20);
    let integrand = |v: f64| -(-x / (tau * v)).exp_m1() * (-decay * v * v).exp();
    let v_max = (45.0 / decay).sqrt();
    let mut total = 0.0;
    let mut hi = v_max;
    for _ in 0..80 {
        let lo = 0.5 * hi;
        let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
        total += half * nodes.iter().zip(&weights).map(|(t, w)| w * integrand(mid + half * t)).sum::<f64>();
        hi = lo;
    }
    // integrand ≤ 1 on the remaining [0, hi]
    total + 0.5 * hi
}
