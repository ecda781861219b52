//! End-to-end acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the table prints in order;
//! the process exits nonzero when any criterion fails.

use std::path::Path;
use std::process::Command;

use esbgk_cli::lemma::lemma_check;
use esbgk_cli::sweep::{variant, Axis};
use esbgk_core::grid::{PhaseGrid, QuadratureRule, SpatialGrid, VelocityGrid};
use esbgk_core::iteration::{flux_variation, ProfileRow};
use esbgk_core::linalg::Mat3;
use esbgk_core::macros::{
    compute_moments, equivalence_lower, equivalence_upper, evaluate_gaussian, tensor_matrix,
    MacroFields, TemperatureTensor,
};
use esbgk_core::{
    solve, BoundarySpec, InflowData, InitialGuess, Problem, Regime, Solution, SolverConfig,
};
use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Every converged run of the suite, for the flux-constancy criterion.
#[derive(Default)]
struct Runs {
    converged: Vec<(String, f64, f64)>,
}

impl Runs {
    fn record(&mut self, label: &str, s: &Solution) {
        if s.report.converged() {
            self.converged.push((label.to_string(), flux_variation(&s.profile), s.profile[0].fields.rho));
        }
    }
}

fn to_na(m: &Mat3) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| m[r][c])
}

fn from_na(m: &Matrix3<f64>) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = m[(r, c)];
        }
    }
    out
}

fn reference_eigenvalues(m: &Mat3) -> [f64; 3] {
    let mut e: Vec<f64> = SymmetricEigen::new(to_na(m)).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [e[0], e[1], e[2]]
}

/// `Q diag(d) Qᵀ` with `log10 d` uniform in `[lo, hi]`.
fn random_spd(rng: &mut impl Rng, log_lo: f64, log_hi: f64) -> Mat3 {
    let q = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0)).qr().q();
    let d = Vector3::from_fn(|_, _| 10f64.powf(rng.gen_range(log_lo..log_hi)));
    from_na(&(q * Matrix3::from_diagonal(&d) * q.transpose()))
}

fn frobenius(a: &Mat3, b: &Mat3) -> f64 {
    (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).map(|(r, c)| (a[r][c] - b[r][c]).powi(2)).sum::<f64>().sqrt()
}

fn maxwellian(t: f64, flux: f64) -> InflowData {
    InflowData::Maxwellian { density: 1.0, drift: [0.0; 3], temperature: t, flux: Some(flux) }
}

fn phase_grid(t_max: f64, counts: [usize; 3], intervals: usize) -> PhaseGrid {
    PhaseGrid::new(
        VelocityGrid::new(8.0 * t_max.sqrt(), counts, QuadratureRule::Midpoint).unwrap(),
        SpatialGrid::uniform(intervals).unwrap(),
    )
}

/// `δ = (1, 0, 0)`, walls at unit temperature, equal-flux Maxwellian data at `1` and `t_r`.
fn two_temperature(intervals: usize, nu: f64, tau: f64, t_r: f64, tol: f64, guess: InitialGuess) -> Problem {
    let grid = phase_grid(t_r.max(1.0), [24, 16, 16], intervals);
    let spec = BoundarySpec::from_inflow(
        &grid.velocity,
        [1.0, 0.0, 0.0],
        [1.0, 1.0],
        &maxwellian(1.0, 0.5),
        &maxwellian(t_r, 0.5),
        Regime::InflowDominant,
    )
    .unwrap();
    let config = SolverConfig { nu, kappa: tau / (1.0 - nu), tol, max_iter: 500, initial_guess: guess, strict: false };
    Problem { grid, spec, config }
}

fn gaussian_closure() -> Outcome {
    let grid = VelocityGrid::new(8.0, [24, 24, 24], QuadratureRule::Midpoint).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut accepted, mut worst) = (0, 0.0_f64);
    while accepted < 50 {
        let nu = rng.gen_range(-0.5..0.99);
        let theta = random_spd(&mut rng, -0.5, 0.4);
        let u = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let m = MacroFields::from_parts(rng.gen_range(0.5..2.0), u, theta);
        let Ok(tensor) = TemperatureTensor::new(&m, nu) else { continue };
        // admissible: resolved by the node spacing and clear of the cutoff
        if tensor.lambda_min() < 0.4 || tensor.lambda_max() > 1.6 {
            continue;
        }
        accepted += 1;
        let back = compute_moments(&grid, &evaluate_gaussian(&m, &tensor, &grid)).unwrap();
        let scale = tensor.lambda_max().sqrt();
        worst = worst
            .max((back.rho - m.rho).abs() / m.rho)
            .max((0..3).map(|i| (back.u[i] - m.u[i]).abs() / scale).fold(0.0, f64::max))
            .max(frobenius(&back.theta, &tensor.matrix) / frobenius(&tensor.matrix, &[[0.0; 3]; 3]));
    }
    outcome(worst <= 1e-6, format!("50 tuples, worst relative error {worst:.2e} (limit 1e-6)"))
}

fn equivalence_estimate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let nus: Vec<f64> = (1..30).map(|k| -0.5 + 1.5 * k as f64 / 30.0).chain([-0.4999999, 0.9999999]).collect();
    let (mut worst, mut count) = (f64::INFINITY, 0);
    for _ in 0..200 {
        let m = MacroFields::from_parts(1.0, [0.0; 3], random_spd(&mut rng, -2.0, 2.0));
        for &nu in &nus {
            let e = reference_eigenvalues(&tensor_matrix(&m, nu));
            let t = m.temperature;
            let slack = (e[0] - equivalence_lower(nu) * t).min(equivalence_upper(nu) * t - e[2]) / t;
            worst = worst.min(slack);
            count += 1;
        }
    }
    outcome(worst >= -1e-12, format!("{count} (Θ, ν) pairs, smallest relative slack {worst:.2e} (limit -1e-12)"))
}

fn critical_identity() -> Outcome {
    let grid = VelocityGrid::new(6.0, [12, 10, 10], QuadratureRule::GaussLegendre).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let centers: Vec<[f64; 3]> =
            (0..3).map(|_| [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]).collect();
        let f: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|v| {
                let bumps: f64 = centers
                    .iter()
                    .map(|c| (-((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2) + (v[2] - c[2]).powi(2)) / 1.5).exp())
                    .sum();
                bumps * (1.0 + 0.3 * rng.gen::<f64>())
            })
            .collect();
        let t = to_na(&tensor_matrix(&compute_moments(&grid, &f).unwrap(), -0.5));
        let w = grid.weights();
        let rho: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
        let mut u = Vector3::zeros();
        for ((v, a), b) in grid.nodes().iter().zip(&f).zip(w) {
            u += Vector3::new(v[0], v[1], v[2]) * (a * b / rho);
        }
        for _ in 0..20 {
            let k = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0)).normalize();
            let lhs = (t * k).dot(&k);
            let rhs: f64 = grid
                .nodes()
                .iter()
                .zip(&f)
                .zip(w)
                .map(|((v, a), b)| {
                    let c = Vector3::new(v[0], v[1], v[2]) - u;
                    a * b * (c.norm_squared() - c.dot(&k).powi(2))
                })
                .sum::<f64>()
                / (2.0 * rho);
            worst = worst.max((lhs - rhs).abs() / rhs.abs());
        }
    }
    outcome(worst <= 1e-8, format!("20 fields x 20 directions, worst relative error {worst:.2e} (limit 1e-8)"))
}

fn profile_spread(profile: &[ProfileRow]) -> f64 {
    let columns = |r: &ProfileRow| {
        let m = &r.fields;
        let mut c = vec![m.rho, m.temperature, r.flux];
        c.extend(m.u);
        c.extend(m.theta.iter().flatten());
        c.extend(r.eigenvalues);
        c
    };
    let first = columns(&profile[0]);
    profile
        .iter()
        .flat_map(|r| columns(r).into_iter().zip(first.clone()).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn equilibrium(runs: &mut Runs) -> Outcome {
    let grid = PhaseGrid::new(
        VelocityGrid::new(8.0, [24, 24, 24], QuadratureRule::Midpoint).unwrap(),
        SpatialGrid::uniform(32).unwrap(),
    );
    let m = InflowData::Maxwellian { density: 1.0, drift: [0.0; 3], temperature: 1.0, flux: None };
    let spec =
        BoundarySpec::from_inflow(&grid.velocity, [1.0, 0.0, 0.0], [1.0, 1.0], &m, &m, Regime::InflowDominant).unwrap();
    let config = SolverConfig { nu: -0.5, kappa: 100.0 / 1.5, tol: 1e-11, ..Default::default() };
    let s = solve(&Problem { grid, spec, config }).unwrap();
    runs.record("equilibrium", &s);
    let (it, res, spread) = (s.report.iterations(), s.report.residual.unwrap_or(f64::INFINITY), profile_spread(&s.profile));
    outcome(
        s.report.converged() && it == 1 && res <= 1e-9 && spread <= 1e-9,
        format!("{it} iteration(s), residual {res:.2e}, profile spread {spread:.2e} (limits 1, 1e-9, 1e-9)"),
    )
}

fn contraction(runs: &mut Runs) -> Outcome {
    let mut rates = Vec::new();
    let mut geometric = true;
    for tau in [30.0, 100.0, 300.0] {
        let s = solve(&two_temperature(32, -0.5, tau, 1.2, 1e-13, InitialGuess::WallBlend)).unwrap();
        runs.record(&format!("contraction tau {tau}"), &s);
        let c = &s.report.contraction;
        geometric &= s.report.converged() && !c.indeterminate && !c.non_monotone;
        rates.push(c.fitted_rate.unwrap_or(f64::INFINITY));
    }
    let no_growth = rates.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    outcome(
        geometric && rates[2] <= 0.25 && no_growth,
        format!("fitted rates {:.4} / {:.4} / {:.4} at tau 30 / 100 / 300 (limit 0.25 at 300)", rates[0], rates[1], rates[2]),
    )
}

fn kernel_estimate() -> Outcome {
    let c = lemma_check(&[10.0, 1e2, 1e3, 1e4], 1.0).unwrap();
    outcome(c.pass, format!("normalized probe spread {:.3} (limit 3)", c.spread))
}

fn random_draw(rng: &mut impl Rng, regime: Regime) -> Problem {
    let t_w = [rng.gen_range(0.8..1.3), rng.gen_range(0.8..1.3)];
    let (t_l, t_r) = (rng.gen_range(0.8..1.5), rng.gen_range(0.8..1.5));
    let small = rng.gen_range(0.0..0.1);
    let split = rng.gen_range(0.0..1.0);
    let delta = match regime {
        Regime::InflowDominant => [1.0 - small, small * split, small * (1.0 - split)],
        Regime::DiffusiveDominant => [small, (1.0 - small) * (0.5 + 0.5 * split), (1.0 - small) * 0.5 * (1.0 - split)],
    };
    let (left, right) = (maxwellian(t_l, rng.gen_range(0.3..0.7)), maxwellian(t_r, rng.gen_range(0.3..0.7)));
    let t_max = t_w.iter().copied().chain([t_l, t_r]).fold(1.0, f64::max);
    let grid = phase_grid(t_max, [24, 16, 16], 16);
    let spec = BoundarySpec::from_inflow(&grid.velocity, delta, t_w, &left, &right, regime).unwrap();
    let nu = if rng.gen_bool(0.5) { -0.5 } else { rng.gen_range(-0.5..0.9) };
    let tau = rng.gen_range(100.0..1000.0);
    let config = SolverConfig { nu, kappa: tau / (1.0 - nu), tol: 1e-10, ..Default::default() };
    Problem { grid, spec, config }
}

fn omega_persistence(runs: &mut Runs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let mut draws = 0;
    for regime in [Regime::InflowDominant, Regime::DiffusiveDominant] {
        for k in 0..6 {
            let p = random_draw(&mut rng, regime);
            let s = solve(&p).unwrap();
            runs.record(&format!("{regime:?} draw {k}"), &s);
            draws += 1;
            let r = &s.report;
            if r.first_all_pass().is_none() {
                let last = r.final_omega().map(|o| o.failures().join(",")).unwrap_or_default();
                failures.push(format!("{regime:?} draw {k}: never all-pass ({last})"));
            } else if let Some(i) = r.pass_to_fail_transition() {
                failures.push(format!("{regime:?} draw {k}: pass-to-fail at iteration {i}"));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{draws} draws, all reach and keep all-pass")
    } else {
        format!("{draws} draws; {}", failures.join("; "))
    };
    outcome(failures.is_empty(), detail)
}

/// `(min λ1, C_tensor_lower margin)` of a converged run.
fn lambda_margin(s: &Solution) -> Option<(f64, f64)> {
    let c = s.report.final_omega()?.get("C_tensor_lower")?;
    Some((c.measured, c.margin))
}

fn critical_positivity(runs: &mut Runs) -> Outcome {
    let base = two_temperature(32, -0.5, 100.0, 1.2, 1e-10, InitialGuess::Fitted);
    // discrepancy F_L − F_R at fixed total flux; the left wall data is the colder
    let values = [0.0, 0.2, 0.4, 0.6, 0.8];
    let mut margins = Vec::new();
    let mut min_lambda = f64::NAN;
    let mut ok = true;
    for &d in &values {
        let s = solve(&variant(&base, Axis::Discrepancy, d).unwrap()).unwrap();
        runs.record(&format!("discrepancy {d}"), &s);
        ok &= s.report.converged();
        match lambda_margin(&s) {
            Some((lambda, margin)) => {
                if d == 0.0 {
                    min_lambda = lambda;
                }
                margins.push(margin);
            }
            None => ok = false,
        }
    }
    let positive = margins.first().is_some_and(|m| *m >= 0.0);
    let monotone = margins.len() == values.len() && margins.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = margins.iter().map(|m| format!("{m:.4}")).collect();
    outcome(
        ok && positive && monotone,
        format!("min lambda1 {min_lambda:.4} above its bound; margins over discrepancy 0..0.8: {}", shown.join(" > ")),
    )
}

fn flux_control(runs: &mut Runs) -> Outcome {
    let mut worst_flux = 0.0_f64;
    let mut worst_s = f64::INFINITY;
    let mut ok = true;
    let tol = 1e-10;
    for (k, d1) in [0.0, 0.02, 0.05].into_iter().enumerate() {
        let grid = phase_grid(1.2, [24, 16, 16], 16);
        let rest = 1.0 - d1;
        let spec = BoundarySpec::from_inflow(
            &grid.velocity,
            [d1, 0.9 * rest, 0.1 * rest],
            [1.0, 1.1],
            &maxwellian(1.0, 0.5),
            &maxwellian(1.2, 0.5),
            Regime::DiffusiveDominant,
        )
        .unwrap();
        let nu = [-0.5, 0.0, 0.5][k];
        let config = SolverConfig { nu, kappa: 100.0 / (1.0 - nu), tol, ..Default::default() };
        let s = solve(&Problem { grid, spec, config }).unwrap();
        runs.record(&format!("diffusive delta1 {d1}"), &s);
        ok &= s.report.converged();
        worst_flux = worst_flux.max((s.report.final_flux.total_outflux() - 1.0).abs());
        for rec in &s.report.records {
            match rec.diffusive {
                Some(w) => worst_s = worst_s.min(w.s_left.min(w.s_right)),
                None => ok = false,
            }
        }
    }
    outcome(
        ok && worst_flux <= 10.0 * tol && worst_s >= 1.0 / 3.0,
        format!("|outflux - 1| <= {worst_flux:.2e} (limit {:.0e}), smallest S {worst_s:.4} (limit 1/3)", 10.0 * tol),
    )
}

fn grid_convergence(runs: &mut Runs) -> Outcome {
    let sols: Vec<Solution> = [16, 32, 64]
        .iter()
        .map(|&n| solve(&two_temperature(n, -0.5, 5.0, 1.5, 1e-13, InitialGuess::Fitted)).unwrap())
        .collect();
    for (s, n) in sols.iter().zip([16, 32, 64]) {
        runs.record(&format!("grid {n}"), s);
    }
    let converged = sols.iter().all(|s| s.report.converged());
    // nested uniform grids: node i of the coarse grid is node 2i of the next
    let order = |col: fn(&ProfileRow) -> f64| {
        let (mut e1, mut e2) = (0.0_f64, 0.0_f64);
        for i in 0..sols[0].profile.len() {
            e1 = e1.max((col(&sols[0].profile[i]) - col(&sols[1].profile[2 * i])).abs());
            e2 = e2.max((col(&sols[1].profile[2 * i]) - col(&sols[2].profile[4 * i])).abs());
        }
        (e1 / e2).log2()
    };
    let (p_rho, p_t) = (order(|r| r.fields.rho), order(|r| r.fields.temperature));
    outcome(
        converged && p_rho >= 1.7 && p_t >= 1.7,
        format!("observed order rho {p_rho:.3}, T {p_t:.3} (limit 1.7)"),
    )
}

fn flux_constancy(runs: &Runs) -> Outcome {
    let worst = runs
        .converged
        .iter()
        .map(|(label, v, rho)| (label.as_str(), v / rho))
        .fold(("", 0.0_f64), |a, b| if b.1 > a.1 { b } else { a });
    outcome(
        !runs.converged.is_empty() && worst.1 <= 1e-6,
        format!("{} converged runs, worst flux variation {:.2e} rho ({}) (limit 1e-6)", runs.converged.len(), worst.1, worst.0),
    )
}

fn determinism() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let run = || -> Result<Vec<u8>, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let status = Command::new(env!("CARGO_BIN_EXE_esbgk"))
            .args(["solve", "--config"])
            .arg(&config)
            .arg("--out-dir")
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("solve exited with {:?}", status.status.code()));
        }
        std::fs::read(dir.path().join("profile.csv")).map_err(|e| e.to_string())
    };
    match (run(), run()) {
        (Ok(a), Ok(b)) => outcome(a == b, format!("two solves, {} bytes each, identical: {}", a.len(), a == b)),
        (Err(e), _) | (_, Err(e)) => outcome(false, e),
    }
}

fn main() {
    let mut runs = Runs::default();
    let results = [
        (1, gaussian_closure()),
        (2, equivalence_estimate()),
        (3, critical_identity()),
        (4, equilibrium(&mut runs)),
        (6, contraction(&mut runs)),
        (7, kernel_estimate()),
        (8, omega_persistence(&mut runs)),
        (9, critical_positivity(&mut runs)),
        (10, flux_control(&mut runs)),
        (11, grid_convergence(&mut runs)),
        (12, determinism()),
    ];
    let mut table: Vec<(u32, Outcome)> = results.into_iter().collect();
    table.push((5, flux_constancy(&runs)));
    table.sort_by_key(|(n, _)| *n);
    for (n, o) in &table {
        println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = table.iter().filter(|(_, o)| !o.pass).count();
    println!("{} of {} criteria pass", table.len() - failed, table.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
