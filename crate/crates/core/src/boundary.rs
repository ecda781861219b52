//! Wall Maxwellians, inflow data and the two boundary operators.
//!
//! Traces are stored as full-length velocity slices. The inflow trace at
//! `x = 0` lives on `v1 > 0` and the one at `x = 1` on `v1 < 0`; entries on the
//! opposite half-space are zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    self, BoundaryConstants, DistributionField, HalfSpace, MomentWeight, PhaseGrid, VelocityGrid,
};
use crate::linalg::{self, Vec3};

/// Tolerance on `δ1 + δ2 + δ3 = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Relative tolerance for the no-vertical-flow condition on inflow data.
pub const VERTICAL_FLOW_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    InflowDominant,
    DiffusiveDominant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    /// `x = 0`, emits into `v1 > 0`.
    Left,
    /// `x = 1`, emits into `v1 < 0`.
    Right,
}

impl Wall {
    pub fn inflow_half(self) -> HalfSpace {
        match self {
            Wall::Left => HalfSpace::Positive,
            Wall::Right => HalfSpace::Negative,
        }
    }
}

fn default_density() -> f64 {
    1.0
}

/// Prescribed inflow data for one wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InflowData {
    /// `ρ (2πT)^{-3/2} e^{-|v−u|²/(2T)}` restricted to the inflow half-space.
    /// When `flux` is set the slice is rescaled to that `|v1|`-flux instead.
    Maxwellian {
        #[serde(default = "default_density")]
        density: f64,
        #[serde(default)]
        drift: Vec3,
        temperature: f64,
        #[serde(default)]
        flux: Option<f64>,
    },
    /// Point values resampled onto the grid by nearest node. With `weights`
    /// the result is rescaled to the table's mass `Σ weights·values`.
    Table {
        nodes: Vec<Vec3>,
        values: Vec<f64>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

impl InflowData {
    /// Half-space slice for `wall`, zero elsewhere.
    pub fn sample(&self, grid: &VelocityGrid, wall: Wall) -> Result<Vec<f64>> {
        let half = wall.inflow_half();
        match self {
            InflowData::Maxwellian { density, drift, temperature, flux } => {
                if !(*temperature > 0.0) || !temperature.is_finite() {
                    return Err(Error::config(format!(
                        "inflow temperature must be positive, got {temperature}"
                    )));
                }
                if !(*density >= 0.0) || !density.is_finite() {
                    return Err(Error::config(format!(
                        "inflow density must be nonnegative, got {density}"
                    )));
                }
                let norm = density / (2.0 * std::f64::consts::PI * temperature).powf(1.5);
                let mut s: Vec<f64> = grid
                    .nodes()
                    .iter()
                    .map(|v| {
                        if !half.contains(v[0]) {
                            return 0.0;
                        }
                        let d = [v[0] - drift[0], v[1] - drift[1], v[2] - drift[2]];
                        norm * (-linalg::norm_sq(&d) / (2.0 * temperature)).exp()
                    })
                    .collect();
                if let Some(target) = flux {
                    if !(*target >= 0.0) || !target.is_finite() {
                        return Err(Error::config(format!(
                            "inflow flux must be nonnegative, got {target}"
                        )));
                    }
                    let current = grid.half_space_moment(&s, half, MomentWeight::AbsV1);
                    if !(current > 0.0) {
                        return Err(Error::DegenerateData(
                            "inflow Maxwellian has no flux on this grid".into(),
                        ));
                    }
                    let scale = target / current;
                    s.iter_mut().for_each(|x| *x *= scale);
                }
                Ok(s)
            }
            InflowData::Table { nodes, values, weights } => {
                if nodes.len() != values.len() || nodes.is_empty() {
                    return Err(Error::config(format!(
                        "table has {} nodes and {} values",
                        nodes.len(),
                        values.len()
                    )));
                }
                if values.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                    return Err(Error::DegenerateData(
                        "tabulated inflow values must be finite and nonnegative".into(),
                    ));
                }
                let candidates: Vec<usize> =
                    (0..nodes.len()).filter(|&k| half.contains(nodes[k][0])).collect();
                if candidates.is_empty() {
                    return Err(Error::DegenerateData(
                        "table has no nodes on the inflow half-space".into(),
                    ));
                }
                let mut s = vec![0.0; grid.len()];
                for (j, v) in grid.nodes().iter().enumerate() {
                    if !half.contains(v[0]) {
                        continue;
                    }
                    let mut best = candidates[0];
                    let mut best_d = f64::INFINITY;
                    for &k in &candidates {
                        let p = nodes[k];
                        let d = linalg::norm_sq(&[v[0] - p[0], v[1] - p[1], v[2] - p[2]]);
                        if d < best_d {
                            best_d = d;
                            best = k;
                        }
                    }
                    s[j] = values[best];
                }
                if let Some(w) = weights {
                    if w.len() != values.len() || w.iter().any(|x| !(*x > 0.0)) {
                        return Err(Error::config("table weights must be positive, one per value"));
                    }
                    let target: f64 = candidates.iter().map(|&k| w[k] * values[k]).sum();
                    let current = grid.half_space_moment(&s, half, MomentWeight::One);
                    if current > 0.0 {
                        let scale = target / current;
                        s.iter_mut().for_each(|x| *x *= scale);
                    }
                }
                Ok(s)
            }
        }
    }
}

/// `e^{-|v|²/(2T_w)}` on the wall's inflow half-space, scaled to unit `|v1|`-flux.
pub fn wall_maxwellian(grid: &VelocityGrid, t_w: f64, wall: Wall) -> Result<Vec<f64>> {
    if !(t_w > 0.0) || !t_w.is_finite() {
        return Err(Error::config(format!("wall temperature must be positive, got {t_w}")));
    }
    let half = wall.inflow_half();
    let mut s: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|v| if half.contains(v[0]) { (-linalg::norm_sq(v) / (2.0 * t_w)).exp() } else { 0.0 })
        .collect();
    let flux = grid.half_space_moment(&s, half, MomentWeight::AbsV1);
    if !(flux > 0.0) {
        return Err(Error::DegenerateData("wall Maxwellian has no flux on this grid".into()));
    }
    s.iter_mut().for_each(|x| *x /= flux);
    Ok(s)
}

/// Mixture weights, wall data, inflow data and regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    delta: [f64; 3],
    wall_temperature: [f64; 2],
    f_left: Vec<f64>,
    f_right: Vec<f64>,
    m_w_left: Vec<f64>,
    m_w_right: Vec<f64>,
    regime: Regime,
}

impl BoundarySpec {
    /// Validates and assembles a boundary specification.
    ///
    /// `f_left` and `f_right` are full-length slices; entries outside their
    /// inflow half-spaces are discarded.
    pub fn new(
        grid: &VelocityGrid,
        delta: [f64; 3],
        wall_temperature: [f64; 2],
        mut f_left: Vec<f64>,
        mut f_right: Vec<f64>,
        regime: Regime,
    ) -> Result<Self> {
        if delta.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::config(format!("mixture weights must be nonnegative, got {delta:?}")));
        }
        let sum: f64 = delta.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::config(format!(
                "mixture weights must satisfy the simplex constraint delta1 + delta2 + delta3 = 1, got sum {sum}"
            )));
        }
        if f_left.len() != grid.len() || f_right.len() != grid.len() {
            return Err(Error::config("inflow slices must match the velocity grid"));
        }
        for (j, v) in grid.nodes().iter().enumerate() {
            if v[0] < 0.0 {
                f_left[j] = 0.0;
            } else {
                f_right[j] = 0.0;
            }
        }
        for s in [&f_left, &f_right] {
            if s.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(Error::DegenerateData(
                    "inflow data must be finite and nonnegative".into(),
                ));
            }
        }
        let m_w_left = wall_maxwellian(grid, wall_temperature[0], Wall::Left)?;
        let m_w_right = wall_maxwellian(grid, wall_temperature[1], Wall::Right)?;

        let norms = grid::trace_norms(grid, &f_left, &f_right);
        let energy = norms.l1_vbr();
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::DegenerateData(
                "inflow data f_LR is identically zero or has infinite energy".into(),
            ));
        }

        if regime == Regime::InflowDominant {
            for (name, s, half) in
                [("f_L", &f_left, HalfSpace::Positive), ("f_R", &f_right, HalfSpace::Negative)]
            {
                let scale = grid.half_space_moment(s, half, MomentWeight::Energy);
                for i in [1, 2] {
                    let m = grid.half_space_moment(s, half, MomentWeight::Component(i));
                    if m.abs() > VERTICAL_FLOW_TOL * scale {
                        return Err(Error::HypothesisViolation(format!(
                            "inflow data {name} induces a vertical flow: velocity moment {} = {m:e}",
                            i + 1
                        )));
                    }
                }
            }
        }

        Ok(BoundarySpec { delta, wall_temperature, f_left, f_right, m_w_left, m_w_right, regime })
    }

    pub fn from_inflow(
        grid: &VelocityGrid,
        delta: [f64; 3],
        wall_temperature: [f64; 2],
        left: &InflowData,
        right: &InflowData,
        regime: Regime,
    ) -> Result<Self> {
        let f_left = left.sample(grid, Wall::Left)?;
        let f_right = right.sample(grid, Wall::Right)?;
        Self::new(grid, delta, wall_temperature, f_left, f_right, regime)
    }

    pub fn delta(&self) -> [f64; 3] {
        self.delta
    }

    pub fn wall_temperature(&self) -> [f64; 2] {
        self.wall_temperature
    }

    pub fn f_left(&self) -> &[f64] {
        &self.f_left
    }

    pub fn f_right(&self) -> &[f64] {
        &self.f_right
    }

    pub fn m_w_left(&self) -> &[f64] {
        &self.m_w_left
    }

    pub fn m_w_right(&self) -> &[f64] {
        &self.m_w_right
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `∫_{v1>0} f_L |v1| dv`
    pub fn flux_left(&self, grid: &VelocityGrid) -> f64 {
        grid.half_space_moment(&self.f_left, HalfSpace::Positive, MomentWeight::AbsV1)
    }

    /// `∫_{v1<0} f_R |v1| dv`
    pub fn flux_right(&self, grid: &VelocityGrid) -> f64 {
        grid.half_space_moment(&self.f_right, HalfSpace::Negative, MomentWeight::AbsV1)
    }

    pub fn constants(&self, grid: &VelocityGrid) -> Result<BoundaryConstants> {
        grid::boundary_constants(grid, &self.f_left, &self.f_right, &self.m_w_left, &self.m_w_right)
    }
}

/// New inflow traces: `left` on `v1 > 0`, `right` on `v1 < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InflowTraces {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl InflowTraces {
    /// The inflow rows of an existing field.
    pub fn of_field(grid: &VelocityGrid, f: &DistributionField) -> Self {
        let mut left = f.left_trace().to_vec();
        let mut right = f.right_trace().to_vec();
        for j in 0..grid.len() {
            if grid.is_positive(j) {
                right[j] = 0.0;
            } else {
                left[j] = 0.0;
            }
        }
        InflowTraces { left, right }
    }
}

/// `δ1 f + δ2 s M_w + δ3 f_prev(Rv)` on one wall's inflow half-space.
fn mix(
    grid: &VelocityGrid,
    spec: &BoundarySpec,
    wall: Wall,
    prev_trace: &[f64],
    diffuse_weight: f64,
) -> Vec<f64> {
    let [d1, d2, d3] = spec.delta;
    let (data, m_w) = match wall {
        Wall::Left => (&spec.f_left, &spec.m_w_left),
        Wall::Right => (&spec.f_right, &spec.m_w_right),
    };
    let half = wall.inflow_half();
    (0..grid.len())
        .map(|j| {
            if !half.contains(grid.node(j)[0]) {
                return 0.0;
            }
            d1 * data[j] + d2 * diffuse_weight * m_w[j] + d3 * prev_trace[grid.reflect(j)]
        })
        .collect()
}

/// Inflow-dominant update: the diffuse part re-emits the previous outflux.
pub fn apply_boundary_inflow(
    grid: &VelocityGrid,
    f_prev: &DistributionField,
    spec: &BoundarySpec,
) -> InflowTraces {
    let left_prev = f_prev.left_trace();
    let right_prev = f_prev.right_trace();
    let out_left = grid.half_space_moment(left_prev, HalfSpace::Negative, MomentWeight::AbsV1);
    let out_right = grid.half_space_moment(right_prev, HalfSpace::Positive, MomentWeight::AbsV1);
    InflowTraces {
        left: mix(grid, spec, Wall::Left, left_prev, out_left),
        right: mix(grid, spec, Wall::Right, right_prev, out_right),
    }
}

/// Flux-controlled re-emission weights of the diffusive-dominant update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusiveWeights {
    pub s_left: f64,
    pub s_right: f64,
    /// `(1/τ) ∫_{v1>0} ∫₀¹ (M_ν(f) − f) dy dv`
    pub r_plus: f64,
    /// `(1/τ) ∫_{v1<0} ∫₀¹ (M_ν(f) − f) dy dv`
    pub r_minus: f64,
}

/// `R±` by the trapezoid rule in `x` and the grid quadrature in `v`.
pub fn relaxation_fluxes(
    grid: &PhaseGrid,
    f: &DistributionField,
    gaussians: &DistributionField,
    tau: f64,
) -> (f64, f64) {
    let tw = grid.space.trapezoid_weights();
    let vg = &grid.velocity;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (i, w_x) in tw.iter().enumerate() {
        let (fi, mi) = (f.slice(i), gaussians.slice(i));
        let mut row_plus = 0.0;
        let mut row_minus = 0.0;
        for j in 0..vg.len() {
            let r = vg.weight(j) * (mi[j] - fi[j]);
            if vg.is_positive(j) {
                row_plus += r;
            } else {
                row_minus += r;
            }
        }
        plus += w_x * row_plus;
        minus += w_x * row_minus;
    }
    (plus / tau, minus / tau)
}

/// `S_L = (1 − δ1 F_L − R₊)/(2 − δ1)`, `S_R = (1 − δ1 F_R − R₋)/(2 − δ1)`.
///
/// These are the outfluxes at `x = 0` and `x = 1` implied by the flux
/// balance across the slab together with `outflux_L + outflux_R = 1`.
pub fn diffusive_weights(
    grid: &PhaseGrid,
    f: &DistributionField,
    gaussians: &DistributionField,
    spec: &BoundarySpec,
    tau: f64,
) -> DiffusiveWeights {
    let d1 = spec.delta[0];
    let (r_plus, r_minus) = relaxation_fluxes(grid, f, gaussians, tau);
    let f_l = spec.flux_left(&grid.velocity);
    let f_r = spec.flux_right(&grid.velocity);
    DiffusiveWeights {
        s_left: (1.0 - d1 * f_l - r_plus) / (2.0 - d1),
        s_right: (1.0 - d1 * f_r - r_minus) / (2.0 - d1),
        r_plus,
        r_minus,
    }
}

/// Diffusive-dominant update with flux-controlled re-emission.
///
/// Fails with a hypothesis violation if either re-emission weight is not
/// positive; such values are never clamped.
pub fn apply_boundary_diffusive(
    grid: &PhaseGrid,
    f_prev: &DistributionField,
    gaussians: &DistributionField,
    spec: &BoundarySpec,
    tau: f64,
) -> Result<(InflowTraces, DiffusiveWeights)> {
    let w = diffusive_weights(grid, f_prev, gaussians, spec, tau);
    if !(w.s_left > 0.0) || !(w.s_right > 0.0) {
        return Err(Error::HypothesisViolation(format!(
            "re-emission weights must be positive (S_L = {:e}, S_R = {:e}); delta1 or 1/tau too large",
            w.s_left, w.s_right
        )));
    }
    let vg = &grid.velocity;
    let traces = InflowTraces {
        left: mix(vg, spec, Wall::Left, f_prev.left_trace(), w.s_left),
        right: mix(vg, spec, Wall::Right, f_prev.right_trace(), w.s_right),
    };
    Ok((traces, w))
}

/// Half-space `|v1|`-fluxes through both walls.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FluxLedger {
    /// `∫_{v1>0} f(0,v)|v1| dv`
    pub influx_left: f64,
    /// `∫_{v1<0} f(1,v)|v1| dv`
    pub influx_right: f64,
    /// `∫_{v1<0} f(0,v)|v1| dv`
    pub outflux_left: f64,
    /// `∫_{v1>0} f(1,v)|v1| dv`
    pub outflux_right: f64,
    /// `|∫_{v1>0} f_L|v1| dv − ∫_{v1<0} f_R|v1| dv|`
    pub discrepancy: f64,
}

impl FluxLedger {
    pub fn total_outflux(&self) -> f64 {
        self.outflux_left + self.outflux_right
    }
}

pub fn flux_ledger(grid: &VelocityGrid, f: &DistributionField, spec: &BoundarySpec) -> FluxLedger {
    use HalfSpace::{Negative, Positive};
    let flux = |s: &[f64], side| grid.half_space_moment(s, side, MomentWeight::AbsV1);
    FluxLedger {
        influx_left: flux(f.left_trace(), Positive),
        influx_right: flux(f.right_trace(), Negative),
        outflux_left: flux(f.left_trace(), Negative),
        outflux_right: flux(f.right_trace(), Positive),
        discrepancy: (spec.flux_left(grid) - spec.flux_right(grid)).abs(),
    }
}
