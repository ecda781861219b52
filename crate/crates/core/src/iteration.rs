//! Fixed-point driver: closure, boundary update and sweep, with a per-iteration
//! ledger of difference norms and solution-space conditions.
//!
//! Inflow-dominant runs update the boundary traces first and then sweep from
//! them. Diffusive-dominant runs sweep from the previous iterate's traces and
//! then replace the inflow rows by the flux-controlled boundary update.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::boundary::{self, BoundarySpec, DiffusiveWeights, FluxLedger, InflowTraces, Regime};
use crate::error::{Error, Result};
use crate::grid::{
    self, BoundaryConstants, DistributionField, MomentWeight, PhaseGrid, TraceNorms,
};
use crate::linalg::{self, Vec3};
use crate::macros::{
    self, check_nu, compute_moments, equivalence_lower, equivalence_upper, MacroFields,
    NU_CRITICAL,
};
use crate::transport;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialGuess {
    /// Drift-free Maxwellian matching the mass and energy of the boundary data.
    #[default]
    Fitted,
    /// Average of the two wall Maxwellians extended to all of velocity space.
    WallBlend,
    /// A user-supplied field.
    Field(DistributionField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub nu: f64,
    /// Knudsen number.
    pub kappa: f64,
    /// Relative tolerance on the composite difference norm.
    pub tol: f64,
    pub max_iter: usize,
    pub initial_guess: InitialGuess,
    /// Abort when the temperature-tensor bounds fail.
    pub strict: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nu: 0.0,
            kappa: 100.0,
            tol: 1e-10,
            max_iter: 500,
            initial_guess: InitialGuess::Fitted,
            strict: false,
        }
    }
}

impl SolverConfig {
    /// `τ = κ (1 − ν)`
    pub fn tau(&self) -> f64 {
        self.kappa * (1.0 - self.nu)
    }

    pub fn is_critical(&self) -> bool {
        self.nu == NU_CRITICAL
    }

    pub fn validate(&self) -> Result<()> {
        check_nu(self.nu)?;
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::config(format!("Knudsen number must be positive, got {}", self.kappa)));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::config(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub grid: PhaseGrid,
    pub spec: BoundarySpec,
    pub config: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    HypothesisViolation(String),
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaCheck {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    /// `bound − measured` for upper bounds, `measured − bound` for lower ones.
    pub margin: f64,
    pub pass: bool,
    /// Recorded but not part of membership.
    pub informational: bool,
}

impl OmegaCheck {
    fn lower(name: &str, measured: f64, bound: f64) -> Self {
        OmegaCheck {
            name: name.into(),
            measured,
            bound,
            margin: measured - bound,
            pass: measured >= bound,
            informational: false,
        }
    }

    fn upper(name: &str, measured: f64, bound: f64) -> Self {
        OmegaCheck {
            name: name.into(),
            measured,
            bound,
            margin: bound - measured,
            pass: measured <= bound,
            informational: false,
        }
    }

    fn info(mut self) -> Self {
        self.informational = true;
        self
    }

    /// Condition letter: `A`, `B`, `C` or `D`.
    pub fn condition(&self) -> char {
        self.name.chars().next().unwrap_or('?')
    }
}

/// Solution-space conditions of one iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaEntry {
    pub checks: Vec<OmegaCheck>,
}

impl OmegaEntry {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().filter(|c| !c.informational).all(|c| c.pass)
    }

    pub fn condition_pass(&self, letter: char) -> bool {
        self.checks
            .iter()
            .filter(|c| !c.informational && c.condition() == letter)
            .all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&OmegaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.informational && !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Evaluates conditions A–D for `f` with the regime's bounds.
///
/// Lower density and tensor bounds carry the mixture weight that the
/// iteration actually propagates (`δ1` for inflow, `δ2` for diffusive data);
/// the unweighted density bound is recorded as informational.
pub fn omega_membership(
    grid: &PhaseGrid,
    f: &DistributionField,
    nu: f64,
    spec: &BoundarySpec,
    c: &BoundaryConstants,
) -> OmegaEntry {
    let vg = &grid.velocity;
    let [d1, d2, _] = spec.delta();
    let critical = nu == NU_CRITICAL;
    let (c1, c2) = (equivalence_lower(nu), equivalence_upper(nu));
    let safe_div = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::INFINITY };

    let mut min_rho = f64::INFINITY;
    let mut max_energy = 0.0_f64;
    let mut min_lambda = f64::INFINITY;
    let mut max_lambda = f64::NEG_INFINITY;
    for row in f.rows() {
        let rho = vg.integrate_slice(row);
        min_rho = min_rho.min(rho);
        max_energy = max_energy.max(vg.moment(row, MomentWeight::Energy));
        match compute_moments(vg, row) {
            Ok(m) => {
                let eig = linalg::sym_eigenvalues(&macros::tensor_matrix(&m, nu));
                min_lambda = min_lambda.min(eig[0]);
                max_lambda = max_lambda.max(eig[2]);
            }
            Err(_) => {
                min_lambda = f64::NAN;
                max_lambda = f64::NAN;
            }
        }
    }
    let norms = grid::field_trace_norms(vg, f);

    let (weight, a_l, c_lr, rho_bound_name) = match spec.regime() {
        Regime::InflowDominant => (d1, c.a_l1, c.c_lr1, "B_density"),
        Regime::DiffusiveDominant => (d2, c.a_l2, c.c_lr2, "B_density"),
    };
    let (c_lower, c_upper) = match (spec.regime(), critical) {
        (Regime::InflowDominant, false) => (
            c1 * d1 * d1 * safe_div(c.gamma_l1, 3.0 * c.c_lr1 * c.c_lr1),
            safe_div(2.0 * c2 * c.c_lr1, 3.0 * c.a_l1 * d1),
        ),
        (Regime::InflowDominant, true) => (
            d1 * safe_div(c.a_half_1, 2.0 * c.c_lr1),
            safe_div(3.0 * c.c_lr1, 2.0 * c.a_l1 * d1),
        ),
        (Regime::DiffusiveDominant, false) => (
            c1 * d2 * d2 * safe_div(c.gamma_l2, 27.0 * c.c_lr2 * c.c_lr2),
            safe_div(2.0 * c2 * (c.f_lr_energy_norm + c.m_w_energy_norm), 3.0 * c.a_l2 * d2),
        ),
        (Regime::DiffusiveDominant, true) => (
            d2 * safe_div(c.a_half_2, 4.0 * c.c_lr2),
            safe_div(3.0 * c.c_lr2, 2.0 * c.a_l2 * d2),
        ),
    };
    let (trace_flux_bound, trace_energy_bound) = match spec.regime() {
        Regime::InflowDominant => (2.0 * c.f_lr_flux_norm, 2.0 * c.c_lr1),
        Regime::DiffusiveDominant => (2.0 * (1.0 + c.f_lr_flux_norm), 2.0 * c.c_lr2),
    };

    let checks = vec![
        OmegaCheck::lower("A_nonnegative", f.min_value(), 0.0),
        OmegaCheck::lower(rho_bound_name, min_rho, weight * a_l),
        OmegaCheck::lower("B_density_unweighted", min_rho, a_l).info(),
        OmegaCheck::upper("B_energy", max_energy, 2.0 * c_lr),
        OmegaCheck::lower("C_tensor_lower", min_lambda, c_lower),
        OmegaCheck::upper("C_tensor_upper", max_lambda, c_upper),
        OmegaCheck::upper("D_flux_outward", norms.l1_v1_plus, trace_flux_bound),
        OmegaCheck::upper("D_flux_inward", norms.l1_v1_minus, trace_flux_bound),
        OmegaCheck::upper("D_energy_outward", norms.l1_vbr_plus, trace_energy_bound),
        OmegaCheck::upper("D_energy_inward", norms.l1_vbr_minus, trace_energy_bound),
    ];
    OmegaEntry { checks }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based: the record for `f^n − f^{n−1}` has `iteration = n`.
    pub iteration: usize,
    pub diff_sup_l12: f64,
    pub diff_trace_v1: f64,
    pub diff_trace_vbr: f64,
    /// Sum of the three difference norms.
    pub composite: f64,
    /// Composite norm of the previous iterate (termination scale).
    pub reference_norm: f64,
    /// `composite_n / composite_{n−1}` when the denominator is resolvable.
    pub ratio: Option<f64>,
    pub omega: OmegaEntry,
    pub flux: FluxLedger,
    pub diffusive: Option<DiffusiveWeights>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionSummary {
    pub points: usize,
    pub indeterminate: bool,
    /// Geometric rate from a least-squares fit of `ln composite_n`.
    pub fitted_rate: Option<f64>,
    /// `(ln τ + 1)/τ + δ2 + δ3`
    pub rate_estimate: f64,
    /// `fitted_rate / rate_estimate`
    pub fitted_constant: Option<f64>,
    /// Some tail ratio exceeded one.
    pub non_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityCheck {
    /// `max_x |∫ f v1 dv|`
    pub max_flux: f64,
    pub flux_bound: f64,
    pub flux_pass: bool,
    /// `max_x |∫ f v_i dv|`, `i = 2, 3`
    pub max_transverse: [f64; 2],
    /// `2 δ3 ‖f_LR‖_{L¹_{γ,⟨v⟩}} ‖M_w‖_{L¹_{γ,⟨v⟩}}`, before the `(ln τ + 1)/τ` remainder.
    pub transverse_base: f64,
    /// `(ln τ + 1)/τ`
    pub transverse_rate: f64,
    pub max_density: f64,
}

/// Bulk-flux bounds driven by the inflow flux discrepancy.
///
/// Inflow regime: `|∫ f v1| ≤ δ1·disc + 2(δ2 + δ3 + 2/τ) C_LR,1`;
/// diffusive regime: `|∫ f v1| ≤ δ1·disc + (2/τ)(‖f_LR‖_{⟨v⟩} + ‖M_w‖_{⟨v⟩})`.
pub fn velocity_discrepancy_check(
    grid: &PhaseGrid,
    f: &DistributionField,
    spec: &BoundarySpec,
    c: &BoundaryConstants,
    tau: f64,
) -> VelocityCheck {
    let vg = &grid.velocity;
    let [d1, d2, d3] = spec.delta();
    let disc = c.flux_discrepancy();
    let flux_bound = match spec.regime() {
        Regime::InflowDominant => d1 * disc + 2.0 * (d2 + d3 + 2.0 / tau) * c.c_lr1,
        Regime::DiffusiveDominant => {
            d1 * disc + 2.0 / tau * (c.f_lr_energy_norm + c.m_w_energy_norm)
        }
    };
    let mut max_flux = 0.0_f64;
    let mut max_transverse = [0.0_f64; 2];
    let mut max_density = 0.0_f64;
    for row in f.rows() {
        max_flux = max_flux.max(vg.moment(row, MomentWeight::Component(0)).abs());
        for i in 0..2 {
            max_transverse[i] =
                max_transverse[i].max(vg.moment(row, MomentWeight::Component(i + 1)).abs());
        }
        max_density = max_density.max(vg.integrate_slice(row));
    }
    VelocityCheck {
        max_flux,
        flux_bound,
        flux_pass: max_flux <= flux_bound,
        max_transverse,
        transverse_base: 2.0 * d3 * c.f_lr_energy_norm * c.m_w_energy_norm,
        transverse_rate: (tau.ln() + 1.0) / tau,
        max_density,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub nu: f64,
    pub kappa: f64,
    pub tau: f64,
    pub regime: Regime,
    pub delta: [f64; 3],
    pub constants: BoundaryConstants,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub warnings: Vec<String>,
    pub contraction: ContractionSummary,
    /// Mild-form defect of the returned iterate.
    pub residual: Option<f64>,
    /// `‖B(f) − f‖` on the inflow rows, in `L¹_{γ,⟨v⟩}`.
    pub boundary_defect: Option<f64>,
    pub final_flux: FluxLedger,
    pub velocity: VelocityCheck,
}

impl IterationReport {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// First iteration whose ledger passes every condition.
    pub fn first_all_pass(&self) -> Option<usize> {
        self.records.iter().find(|r| r.omega.all_pass()).map(|r| r.iteration)
    }

    /// First iteration after [`first_all_pass`](Self::first_all_pass) that fails.
    pub fn pass_to_fail_transition(&self) -> Option<usize> {
        let start = self.first_all_pass()?;
        self.records
            .iter()
            .filter(|r| r.iteration > start)
            .find(|r| !r.omega.all_pass())
            .map(|r| r.iteration)
    }

    pub fn final_omega(&self) -> Option<&OmegaEntry> {
        self.records.last().map(|r| &r.omega)
    }
}

/// Macroscopic data at one spatial node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    pub fields: MacroFields,
    /// Ascending eigenvalues of `T_ν`.
    pub eigenvalues: Vec3,
    /// `∫ f v1 dv`
    pub flux: f64,
}

pub fn profile(grid: &PhaseGrid, f: &DistributionField, nu: f64) -> Result<Vec<ProfileRow>> {
    let vg = &grid.velocity;
    grid.space
        .nodes()
        .iter()
        .zip(f.rows())
        .map(|(x, row)| {
            let fields = compute_moments(vg, row)?;
            Ok(ProfileRow {
                x: *x,
                fields,
                eigenvalues: linalg::sym_eigenvalues(&macros::tensor_matrix(&fields, nu)),
                flux: vg.moment(row, MomentWeight::Component(0)),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub field: DistributionField,
    pub profile: Vec<ProfileRow>,
    pub report: IterationReport,
}

/// `sup_x ‖f‖_{L¹₂} + ‖f‖_{L¹_{γ,|v1|}} + ‖f‖_{L¹_{γ,⟨v⟩}}`
pub fn composite_norm(grid: &PhaseGrid, f: &DistributionField) -> f64 {
    let t = grid::field_trace_norms(&grid.velocity, f);
    grid::sup_l1_2_norm(&grid.velocity, f) + t.l1_v1() + t.l1_vbr()
}

fn extend_to_full_space(grid: &PhaseGrid, half: &[f64]) -> Vec<f64> {
    let reflected = grid.velocity.reflected(half);
    half.iter().zip(&reflected).map(|(a, b)| a + b).collect()
}

/// Builds the starting field.
pub fn initial_field(grid: &PhaseGrid, spec: &BoundarySpec, guess: &InitialGuess) -> Result<DistributionField> {
    let vg = &grid.velocity;
    match guess {
        InitialGuess::Field(f) => {
            if f.n_x() != grid.space.len() || f.n_v() != vg.len() {
                return Err(Error::config("initial field does not match the grids"));
            }
            Ok(f.clone())
        }
        InitialGuess::WallBlend => {
            let l = extend_to_full_space(grid, spec.m_w_left());
            let r = extend_to_full_space(grid, spec.m_w_right());
            let s: Vec<f64> = l.iter().zip(&r).map(|(a, b)| 0.5 * (a + b)).collect();
            Ok(DistributionField::constant(grid, &s))
        }
        InitialGuess::Fitted => {
            let [d1, _, _] = spec.delta();
            // boundary-emitted state: data plus re-emission at the data's mean flux
            // (one half per wall in the flux-controlled regime)
            let level = match spec.regime() {
                Regime::InflowDominant => 0.5 * (spec.flux_left(vg) + spec.flux_right(vg)),
                Regime::DiffusiveDominant => 0.5,
            };
            let walls: Vec<f64> = spec
                .m_w_left()
                .iter()
                .zip(spec.m_w_right())
                .map(|(a, b)| a + b)
                .collect();
            let g: Vec<f64> = (0..vg.len())
                .map(|j| {
                    let data = spec.f_left()[j] + spec.f_right()[j];
                    d1 * data + (1.0 - d1) * level * walls[j]
                })
                .collect();
            let rho = vg.integrate_slice(&g);
            let energy = vg.moment(&g, MomentWeight::Energy) - rho;
            if !(rho > 0.0) || !(energy > 0.0) {
                return Err(Error::DegenerateData("boundary data carry no mass or energy".into()));
            }
            let t = energy / (3.0 * rho);
            let norm = rho / (2.0 * std::f64::consts::PI * t).powf(1.5);
            let s: Vec<f64> =
                vg.nodes().iter().map(|v| norm * (-linalg::norm_sq(v) / (2.0 * t)).exp()).collect();
            Ok(DistributionField::constant(grid, &s))
        }
    }
}

fn heuristic_warnings(config: &SolverConfig, spec: &BoundarySpec, c: &BoundaryConstants) -> Vec<String> {
    let mut out = Vec::new();
    let tau = config.tau();
    let [d1, d2, d3] = spec.delta();
    if tau < 20.0 {
        out.push(format!("tau = {tau} is below the heuristic threshold 20"));
    }
    match spec.regime() {
        Regime::InflowDominant => {
            if d2 + d3 > 0.3 {
                out.push(format!("delta2 + delta3 = {} exceeds 0.3 in the inflow-dominant regime", d2 + d3));
            }
            if config.is_critical() && c.flux_discrepancy() > 0.2 * c.a_half_1.sqrt() {
                out.push(format!(
                    "inflow flux discrepancy {} exceeds 0.2 sqrt(a_half_1) = {} in the critical case",
                    c.flux_discrepancy(),
                    0.2 * c.a_half_1.sqrt()
                ));
            }
        }
        Regime::DiffusiveDominant => {
            if d1 > 0.3 {
                out.push(format!("delta1 = {d1} exceeds 0.3 in the diffusive-dominant regime"));
            }
            let total = c.flux_left + c.flux_right;
            if d1 > 0.0 && (total - 1.0).abs() > 1e-8 {
                out.push(format!(
                    "inflow fluxes sum to {total}, not 1; the re-emitted outflux is normalized only for balanced data"
                ));
            }
        }
    }
    if c.inverse_flux_moment > 1e3 * c.f_lr_energy_norm {
        out.push(format!(
            "inflow data concentrate near v1 = 0: integral of f_LR/|v1| is {}",
            c.inverse_flux_moment
        ));
    }
    out
}

/// Geometric fit of the composite difference norms.
pub fn contraction_monitor(records: &[IterationRecord], tau: f64, delta: [f64; 3]) -> ContractionSummary {
    let rate_estimate = (tau.ln() + 1.0) / tau + delta[1] + delta[2];
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.composite > 1e3 * f64::EPSILON * (1.0 + r.reference_norm))
        .map(|r| (r.iteration as f64, r.composite.ln()))
        .collect();
    // the first difference reflects the initial guess rather than the map
    if pts.len() > 3 {
        pts.remove(0);
    }
    if pts.len() < 3 {
        return ContractionSummary {
            points: pts.len(),
            indeterminate: true,
            fitted_rate: None,
            rate_estimate,
            fitted_constant: None,
            non_monotone: false,
        };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let rate = (sxy / sxx).exp();
    let tail = &pts[pts.len() / 2..];
    let non_monotone = tail.windows(2).any(|w| w[1].1 > w[0].1);
    ContractionSummary {
        points: pts.len(),
        indeterminate: false,
        fitted_rate: Some(rate),
        rate_estimate,
        fitted_constant: Some(rate / rate_estimate),
        non_monotone,
    }
}

/// `‖B(f) − f‖_{L¹_{γ,⟨v⟩}}` on the inflow rows.
pub fn boundary_defect(
    grid: &PhaseGrid,
    f: &DistributionField,
    spec: &BoundarySpec,
    nu: f64,
    tau: f64,
) -> Result<f64> {
    let vg = &grid.velocity;
    let traces = match spec.regime() {
        Regime::InflowDominant => boundary::apply_boundary_inflow(vg, f, spec),
        Regime::DiffusiveDominant => {
            let gaussians = macros::gaussian_field(grid, f, nu).map_err(|e| e.error)?;
            boundary::apply_boundary_diffusive(grid, f, &gaussians, spec, tau)?.0
        }
    };
    let own = InflowTraces::of_field(vg, f);
    let dl: Vec<f64> = traces.left.iter().zip(&own.left).map(|(a, b)| a - b).collect();
    let dr: Vec<f64> = traces.right.iter().zip(&own.right).map(|(a, b)| a - b).collect();
    Ok(grid::trace_norms(vg, &dl, &dr).l1_vbr())
}

fn write_inflow_rows(grid: &PhaseGrid, f: &mut DistributionField, traces: &InflowTraces) {
    let vg = &grid.velocity;
    let last = grid.space.len() - 1;
    for j in 0..vg.len() {
        if vg.is_positive(j) {
            f.slice_mut(0)[j] = traces.left[j];
        } else {
            f.slice_mut(last)[j] = traces.right[j];
        }
    }
}

fn difference_norms(grid: &PhaseGrid, d: &DistributionField) -> (f64, TraceNorms) {
    (grid::sup_l1_2_norm(&grid.velocity, d), grid::field_trace_norms(&grid.velocity, d))
}

/// Runs the fixed-point iteration.
///
/// A degenerate temperature tensor or a non-positive re-emission weight ends
/// the run with [`Termination::HypothesisViolation`]; non-finite values are
/// an [`Error::Numerical`].
pub fn solve(problem: &Problem) -> Result<Solution> {
    let Problem { grid, spec, config } = problem;
    config.validate()?;
    let vg = &grid.velocity;
    if spec.f_left().len() != vg.len() {
        return Err(Error::config("boundary data were built for a different velocity grid"));
    }
    let tau = config.tau();
    let nu = config.nu;
    let constants = spec.constants(vg)?;
    let warnings = heuristic_warnings(config, spec, &constants);
    for w in &warnings {
        warn!("{w}");
    }

    let mut f = initial_field(grid, spec, &config.initial_guess)?;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut termination = Termination::MaxIter;

    for n in 1..=config.max_iter {
        let gaussians = match macros::gaussian_field(grid, &f, nu) {
            Ok(g) => g,
            Err(e) => {
                termination = Termination::HypothesisViolation(format!(
                    "iteration {n}, spatial node {} (x = {}): {}",
                    e.node,
                    grid.space.nodes()[e.node],
                    e.error
                ));
                break;
            }
        };
        let (next, diffusive) = match spec.regime() {
            Regime::InflowDominant => {
                let traces = boundary::apply_boundary_inflow(vg, &f, spec);
                (transport::sweep(grid, &traces, &gaussians, tau)?, None)
            }
            Regime::DiffusiveDominant => {
                let (traces, weights) =
                    match boundary::apply_boundary_diffusive(grid, &f, &gaussians, spec, tau) {
                        Ok(t) => t,
                        Err(Error::HypothesisViolation(msg)) => {
                            termination =
                                Termination::HypothesisViolation(format!("iteration {n}: {msg}"));
                            break;
                        }
                        Err(e) => return Err(e),
                    };
                let own = InflowTraces::of_field(vg, &f);
                let mut next = transport::sweep(grid, &own, &gaussians, tau)?;
                write_inflow_rows(grid, &mut next, &traces);
                (next, Some(weights))
            }
        };
        if !next.is_finite() {
            return Err(Error::Numerical(format!("non-finite values at iteration {n}")));
        }

        let (sup, traces) = difference_norms(grid, &next.difference(&f));
        let composite = sup + traces.l1_v1() + traces.l1_vbr();
        let reference_norm = composite_norm(grid, &f);
        let ratio = records
            .last()
            .filter(|r| r.composite > 100.0 * f64::EPSILON)
            .map(|r| composite / r.composite);
        let omega = omega_membership(grid, &next, nu, spec, &constants);
        let flux = boundary::flux_ledger(vg, &next, spec);
        debug!("iteration {n}: composite difference {composite:e}");
        let c_failed = !omega.condition_pass('C');
        records.push(IterationRecord {
            iteration: n,
            diff_sup_l12: sup,
            diff_trace_v1: traces.l1_v1(),
            diff_trace_vbr: traces.l1_vbr(),
            composite,
            reference_norm,
            ratio,
            omega,
            flux,
            diffusive,
        });
        f = next;

        if config.strict && c_failed {
            termination = Termination::HypothesisViolation(format!(
                "iteration {n}: temperature-tensor bounds failed"
            ));
            break;
        }
        if composite <= config.tol * (1.0 + reference_norm) {
            termination = Termination::Converged;
            break;
        }
    }

    let (residual, boundary_defect) = match macros::gaussian_field(grid, &f, nu) {
        Ok(g) => (
            Some(transport::residual(grid, &f, &g, tau)?),
            boundary_defect(grid, &f, spec, nu, tau).ok(),
        ),
        Err(_) => (None, None),
    };
    // empty when the last iterate has a vacuum node
    let profile = profile(grid, &f, nu).unwrap_or_default();
    let contraction = contraction_monitor(&records, tau, spec.delta());
    let report = IterationReport {
        nu,
        kappa: config.kappa,
        tau,
        regime: spec.regime(),
        delta: spec.delta(),
        constants,
        final_flux: boundary::flux_ledger(vg, &f, spec),
        velocity: velocity_discrepancy_check(grid, &f, spec, &constants, tau),
        records,
        termination,
        warnings,
        contraction,
        residual,
        boundary_defect,
    };
    Ok(Solution { field: f, profile, report })
}

/// `max_x |∫ f v1 dv (x) − ∫ f v1 dv (0)|`
pub fn flux_variation(profile: &[ProfileRow]) -> f64 {
    let first = profile.first().map_or(0.0, |r| r.flux);
    profile.iter().map(|r| (r.flux - first).abs()).fold(0.0, f64::max)
}
