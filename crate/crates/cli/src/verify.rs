//! `esbgk verify`: the property battery as one batch.
//!
//! Randomized items draw from a ChaCha stream seeded by the configuration
//! (or `--seed`), so a failing draw can be replayed.

use std::path::Path;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use esbgk_core::boundary::{wall_maxwellian, Wall};
use esbgk_core::grid::{MomentWeight, QuadratureRule, VelocityGrid};
use esbgk_core::linalg::{self, Mat3};
use esbgk_core::macros::{
    compute_moments, equivalence_lower, equivalence_upper, evaluate_gaussian, tensor_matrix,
    MacroFields, TemperatureTensor,
};
use esbgk_core::{Problem, Termination};

use crate::config::LoadedConfig;

#[derive(Debug, Clone, Serialize)]
pub struct BatteryItem {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl BatteryItem {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        BatteryItem { name, pass, detail }
    }
}

/// Rotation from a random unit quaternion.
fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let q: [f64; 4] = loop {
        let q = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n2: f64 = q.iter().map(|x| x * x).sum();
        if n2 > 1e-3 && n2 <= 1.0 {
            let n = n2.sqrt();
            break [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
        }
    };
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// `R diag(d) Rᵀ`
fn spd_with_spectrum(rng: &mut impl Rng, d: [f64; 3]) -> Mat3 {
    let r = random_rotation(rng);
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| r[i][k] * d[k] * r[j][k]).sum();
        }
    }
    linalg::symmetrize(&m)
}

fn grid_invariants(vg: &VelocityGrid) -> BatteryItem {
    let no_zero = vg.nodes().iter().all(|v| v[0] != 0.0);
    let closed = (0..vg.len()).all(|j| {
        let r = vg.reflect(j);
        let (a, b) = (vg.node(j), vg.node(r));
        a[0] == -b[0] && a[1] == b[1] && a[2] == b[2] && vg.weight(j) == vg.weight(r)
    });
    let positive = vg.weights().iter().all(|w| *w > 0.0);
    let volume = (2.0 * vg.cutoff()).powi(3);
    let total: f64 = vg.weights().iter().sum();
    let vol_ok = (total - volume).abs() <= 1e-10 * volume;
    BatteryItem::new(
        "grid_invariants",
        no_zero && closed && positive && vol_ok,
        format!("no v1=0 node: {no_zero}, reflection-closed: {closed}, positive weights: {positive}, volume error {:.1e}", (total - volume).abs() / volume),
    )
}

fn wall_normalization(problem: &Problem) -> BatteryItem {
    let vg = &problem.grid.velocity;
    let t = problem.spec.wall_temperature();
    let mut worst = 0.0_f64;
    let mut ok = true;
    for (temp, wall) in [(t[0], Wall::Left), (t[1], Wall::Right)] {
        match wall_maxwellian(vg, temp, wall) {
            Ok(m) => worst = worst.max((vg.half_space_moment(&m, wall.inflow_half(), MomentWeight::AbsV1) - 1.0).abs()),
            Err(_) => ok = false,
        }
    }
    BatteryItem::new("wall_flux_normalization", ok && worst <= 1e-12, format!("max |flux − 1| = {worst:.1e}"))
}

fn moment_consistency(nu: f64, rng: &mut impl Rng) -> BatteryItem {
    let grid = VelocityGrid::new(8.0, [24, 24, 24], QuadratureRule::Midpoint).expect("fixed grid");
    let (mut accepted, mut attempts, mut worst) = (0, 0, 0.0_f64);
    while accepted < 50 && attempts < 100_000 {
        attempts += 1;
        let d = [rng.gen_range(0.3..2.5), rng.gen_range(0.3..2.5), rng.gen_range(0.3..2.5)];
        let theta = spd_with_spectrum(rng, d);
        let u = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let m = MacroFields::from_parts(rng.gen_range(0.5..2.0), u, theta);
        let Ok(t) = TemperatureTensor::new(&m, nu) else { continue };
        // only Gaussians the fixed grid resolves
        if t.lambda_min() < 0.4 || t.lambda_max() > 1.6 {
            continue;
        }
        accepted += 1;
        let back = match compute_moments(&grid, &evaluate_gaussian(&m, &t, &grid)) {
            Ok(b) => b,
            Err(_) => {
                worst = f64::INFINITY;
                continue;
            }
        };
        let scale = t.lambda_max();
        let mut err = (back.rho - m.rho).abs() / m.rho;
        for i in 0..3 {
            err = err.max((back.u[i] - m.u[i]).abs() / scale.sqrt());
            for j in 0..3 {
                err = err.max((back.theta[i][j] - t.matrix[i][j]).abs() / scale);
            }
        }
        worst = worst.max(err);
    }
    BatteryItem::new(
        "gaussian_moment_consistency",
        accepted == 50 && worst <= 1e-6,
        format!("{accepted} tuples at nu = {nu}, max relative error {worst:.1e}"),
    )
}

fn equivalence_bounds(nu: f64, rng: &mut impl Rng) -> BatteryItem {
    let mut nus: Vec<f64> = (0..15).map(|k| -0.49 + 0.1 * k as f64).filter(|v| *v < 1.0).collect();
    if nu > -0.5 {
        nus.push(nu);
    }
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for _ in 0..200 {
        // spectra spread over six decades
        let d = [10f64.powf(rng.gen_range(-3.0..3.0)), 10f64.powf(rng.gen_range(-3.0..3.0)), 10f64.powf(rng.gen_range(-3.0..3.0))];
        let m = MacroFields::from_parts(1.0, [0.0; 3], spd_with_spectrum(rng, d));
        for &n in &nus {
            let e = linalg::sym_eigenvalues(&tensor_matrix(&m, n));
            let t = m.temperature;
            let slack = ((e[0] - equivalence_lower(n) * t) / t).min((equivalence_upper(n) * t - e[2]) / t);
            worst = worst.min(slack);
            count += 1;
        }
    }
    BatteryItem::new(
        "equivalence_bounds",
        worst >= -1e-12,
        format!("{count} (Theta, nu) pairs, minimum relative slack {worst:.2e}"),
    )
}

fn critical_identity(rng: &mut impl Rng) -> BatteryItem {
    let grid = VelocityGrid::new(6.0, [12, 10, 10], QuadratureRule::GaussLegendre).expect("fixed grid");
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let c: Vec<[f64; 3]> = (0..3).map(|_| [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]).collect();
        let f: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|v| c.iter().map(|p| (-linalg::norm_sq(&[v[0] - p[0], v[1] - p[1], v[2] - p[2]]) / 1.5).exp()).sum::<f64>() * rng.gen_range(1.0..1.3))
            .collect();
        let Ok(m) = compute_moments(&grid, &f) else {
            worst = f64::INFINITY;
            continue;
        };
        let t = tensor_matrix(&m, -0.5);
        for _ in 0..20 {
            let k = loop {
                let k = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let n = linalg::norm_sq(&k).sqrt();
                if n > 1e-3 {
                    break [k[0] / n, k[1] / n, k[2] / n];
                }
            };
            let lhs = linalg::quadratic_form(&t, &k);
            let rhs = grid.integrate(|j, v| {
                let d = [v[0] - m.u[0], v[1] - m.u[1], v[2] - m.u[2]];
                f[j] * (linalg::norm_sq(&d) - linalg::dot(&d, &k).powi(2))
            }) / (2.0 * m.rho);
            worst = worst.max((lhs - rhs).abs() / rhs.abs());
        }
    }
    BatteryItem::new("critical_identity", worst <= 1e-8, format!("400 directions, max relative error {worst:.1e}"))
}

fn kernel_probe() -> BatteryItem {
    match crate::lemma::lemma_check(&[10.0, 100.0, 1000.0, 10000.0], 1.0) {
        Ok(c) => BatteryItem::new("kernel_estimate", c.pass, format!("normalized spread {:.3} (limit {})", c.spread, crate::lemma::MAX_SPREAD)),
        Err(e) => BatteryItem::new("kernel_estimate", false, format!("{e:#}")),
    }
}

/// Short run of the configured problem.
fn contraction_run(problem: &Problem) -> Vec<BatteryItem> {
    let mut p = problem.clone();
    p.config.max_iter = p.config.max_iter.min(40);
    let s = match esbgk_core::solve(&p) {
        Ok(s) => s,
        Err(e) => return vec![BatteryItem::new("contraction_monitor", false, format!("{e:#}"))],
    };
    let r = &s.report;
    let c = &r.contraction;
    let (pass, detail) = match (&r.termination, c.fitted_rate) {
        (Termination::HypothesisViolation(d), _) => (false, format!("hypothesis violation: {d}")),
        (Termination::Converged, None) => (true, format!("converged in {} iterations; rate indeterminate", r.iterations())),
        (_, Some(rate)) => (
            rate < 1.0,
            format!("{} iterations, fitted rate {rate:.4}, rate estimate {:.4}", r.iterations(), c.rate_estimate),
        ),
        (_, None) => (false, format!("no rate after {} iterations", r.iterations())),
    };
    let mut items = vec![BatteryItem::new("contraction_monitor", pass, detail)];
    if r.converged() {
        let defect = r.boundary_defect.unwrap_or(f64::INFINITY);
        items.push(BatteryItem::new("boundary_idempotence", defect <= 1e-10, format!("defect {defect:.1e}")));
        let flux = esbgk_core::iteration::flux_variation(&s.profile);
        let rho = s.profile.first().map_or(1.0, |row| row.fields.rho);
        items.push(BatteryItem::new("flux_constancy", flux <= 1e-6 * rho, format!("max variation {flux:.1e}")));
    }
    items
}

pub fn battery(problem: &Problem, seed: u64) -> Vec<BatteryItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = problem.config.nu;
    let mut items = vec![
        grid_invariants(&problem.grid.velocity),
        wall_normalization(problem),
        moment_consistency(nu, &mut rng),
        equivalence_bounds(nu, &mut rng),
        critical_identity(&mut rng),
        kernel_probe(),
    ];
    items.extend(contraction_run(problem));
    items
}

pub fn cmd_verify(config_path: &Path, seed: Option<u64>) -> Result<i32> {
    let loaded = LoadedConfig::read(config_path)?;
    let problem = loaded.problem()?;
    let seed = seed.unwrap_or(loaded.config.verify.seed);
    let items = battery(&problem, seed);
    println!("seed {seed}");
    for it in &items {
        println!("{:<30} {:<4}  {}", it.name, if it.pass { "PASS" } else { "FAIL" }, it.detail);
    }
    let failed: Vec<&str> = items.iter().filter(|i| !i.pass).map(|i| i.name).collect();
    if failed.is_empty() {
        Ok(crate::EXIT_OK)
    } else {
        eprintln!("failed: {}", failed.join(", "));
        Ok(crate::EXIT_BATTERY)
    }
}
