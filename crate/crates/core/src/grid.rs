//! Velocity and spatial discretization, quadrature, norms and the constants
//! built from boundary data.
//!
//! Velocity space is truncated to the cube `[-V, V]^3` and discretized with a
//! tensor-product rule whose axis-1 node set never contains `v1 = 0` and is
//! closed under `v1 -> -v1`. All reductions run over nodes in index order so
//! that repeated evaluations are bit-identical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3, Vec3};

/// One-dimensional rule used along every velocity axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Equal-weight cell midpoints. Spectrally accurate for integrands that
    /// decay like Gaussians well inside the cutoff.
    #[default]
    Midpoint,
    /// Gauss–Legendre nodes on the full interval.
    GaussLegendre,
    /// Gauss–Legendre nodes on `[-V, 0]` and `[0, V]` separately. Half-space
    /// integrals (fluxes through a wall) converge spectrally; full-space
    /// Gaussian moments need more nodes than with `Midpoint`.
    SplitGaussLegendre,
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn axis_rule(rule: QuadratureRule, cutoff: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    match rule {
        QuadratureRule::Midpoint => {
            let h = 2.0 * cutoff / n as f64;
            let nodes = (0..n).map(|i| -cutoff + h * (i as f64 + 0.5)).collect();
            (nodes, vec![h; n])
        }
        QuadratureRule::GaussLegendre => {
            let (x, w) = gauss_legendre(n);
            (
                x.iter().map(|xi| xi * cutoff).collect(),
                w.iter().map(|wi| wi * cutoff).collect(),
            )
        }
        QuadratureRule::SplitGaussLegendre => {
            let (x, w) = gauss_legendre(n / 2);
            let half = 0.5 * cutoff;
            let right: Vec<f64> = x.iter().map(|xi| half * (xi + 1.0)).collect();
            let mut nodes: Vec<f64> = right.iter().rev().map(|x| -x).collect();
            nodes.extend(&right);
            let mut weights: Vec<f64> = w.iter().rev().map(|wi| wi * half).collect();
            weights.extend(w.iter().map(|wi| wi * half));
            (nodes, weights)
        }
    }
}

/// Half-space selector by the sign of `v1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfSpace {
    Positive,
    Negative,
}

impl HalfSpace {
    pub fn contains(self, v1: f64) -> bool {
        match self {
            HalfSpace::Positive => v1 > 0.0,
            HalfSpace::Negative => v1 < 0.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            HalfSpace::Positive => HalfSpace::Negative,
            HalfSpace::Negative => HalfSpace::Positive,
        }
    }
}

/// Velocity weights used in half-space moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentWeight {
    One,
    AbsV1,
    /// `1 + |v|^2`
    Energy,
    /// `v_i` for `i` in `0..3`
    Component(usize),
}

impl MomentWeight {
    pub fn eval(self, v: &Vec3) -> f64 {
        match self {
            MomentWeight::One => 1.0,
            MomentWeight::AbsV1 => v[0].abs(),
            MomentWeight::Energy => 1.0 + linalg::norm_sq(v),
            MomentWeight::Component(i) => v[i],
        }
    }
}

/// Truncated tensor-product velocity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    cutoff: f64,
    counts: [usize; 3],
    rule: QuadratureRule,
    reflect: Vec<usize>,
    axis1: Vec<f64>,
}

impl VelocityGrid {
    /// Builds the grid on `[-cutoff, cutoff]^3` with the given per-axis counts.
    ///
    /// Axis 1 needs an even count so that no node sits on `v1 = 0`.
    pub fn new(cutoff: f64, counts: [usize; 3], rule: QuadratureRule) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::config(format!("velocity cutoff must be positive, got {cutoff}")));
        }
        if counts.iter().any(|&n| n < 4) {
            return Err(Error::config(format!(
                "velocity node counts must be at least 4 per axis, got {counts:?}"
            )));
        }
        let odd = if rule == QuadratureRule::SplitGaussLegendre {
            counts.iter().any(|n| !n.is_multiple_of(2))
        } else {
            !counts[0].is_multiple_of(2)
        };
        if odd {
            return Err(Error::config(format!(
                "axis-1 node count must be even so that no node has v1 = 0 (split rules need even counts on every axis), got {counts:?}"
            )));
        }
        let axes: Vec<(Vec<f64>, Vec<f64>)> =
            counts.iter().map(|&n| axis_rule(rule, cutoff, n)).collect();
        let [n1, n2, n3] = counts;
        let total = n1 * n2 * n3;
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut reflect = Vec::with_capacity(total);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    nodes.push([axes[0].0[i1], axes[1].0[i2], axes[2].0[i3]]);
                    weights.push(axes[0].1[i1] * axes[1].1[i2] * axes[2].1[i3]);
                    reflect.push(((n1 - 1 - i1) * n2 + i2) * n3 + i3);
                }
            }
        }
        // Mirror nodes exactly so that reflection is an on-grid bijection.
        for i1 in 0..n1 / 2 {
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    let j = (i1 * n2 + i2) * n3 + i3;
                    let r = reflect[j];
                    nodes[r][0] = -nodes[j][0];
                    weights[r] = weights[j];
                }
            }
        }
        let grid = VelocityGrid {
            axis1: (0..n1).map(|i1| nodes[i1 * n2 * n3][0]).collect(),
            nodes,
            weights,
            cutoff,
            counts,
            rule,
            reflect,
        };
        if grid.nodes.iter().any(|v| v[0] == 0.0) || grid.weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::Internal("velocity grid invariants violated".into()));
        }
        Ok(grid)
    }

    /// Default cutoff `8 sqrt(T_max)` for data whose largest temperature is `max_temperature`.
    pub fn default_cutoff(max_temperature: f64) -> f64 {
        8.0 * max_temperature.max(f64::MIN_POSITIVE).sqrt()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, j: usize) -> &Vec3 {
        &self.nodes[j]
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// Distinct axis-1 node values, ascending.
    pub fn axis1(&self) -> &[f64] {
        &self.axis1
    }

    /// Index of the axis-1 coordinate of node `j`.
    pub fn axis1_index(&self, j: usize) -> usize {
        j / (self.counts[1] * self.counts[2])
    }

    /// Index of `R v_j = (-v1, v2, v3)`.
    pub fn reflect(&self, j: usize) -> usize {
        self.reflect[j]
    }

    pub fn is_positive(&self, j: usize) -> bool {
        self.nodes[j][0] > 0.0
    }

    /// `∫ g(v) dv` for a function of the node.
    pub fn integrate(&self, mut g: impl FnMut(usize, &Vec3) -> f64) -> f64 {
        let mut acc = 0.0;
        for (j, (v, w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            acc += w * g(j, v);
        }
        acc
    }

    /// `∫ slice(v) dv`
    pub fn integrate_slice(&self, slice: &[f64]) -> f64 {
        assert_eq!(slice.len(), self.len(), "slice length does not match velocity grid");
        let mut acc = 0.0;
        for (f, w) in slice.iter().zip(&self.weights) {
            acc += f * w;
        }
        acc
    }

    /// `∫_{sign(v1) = side} weight(v) slice(v) dv`
    pub fn half_space_moment(&self, slice: &[f64], side: HalfSpace, weight: MomentWeight) -> f64 {
        self.half_space_integral(slice, side, |v| weight.eval(v))
    }

    /// Half-space moment against an arbitrary velocity weight.
    pub fn half_space_integral(
        &self,
        slice: &[f64],
        side: HalfSpace,
        weight: impl Fn(&Vec3) -> f64,
    ) -> f64 {
        assert_eq!(slice.len(), self.len(), "slice length does not match velocity grid");
        let mut acc = 0.0;
        for ((v, w), f) in self.nodes.iter().zip(&self.weights).zip(slice) {
            if side.contains(v[0]) {
                acc += w * weight(v) * f;
            }
        }
        acc
    }

    /// Full-space moment, summed as positive half plus negative half.
    pub fn moment(&self, slice: &[f64], weight: MomentWeight) -> f64 {
        self.half_space_moment(slice, HalfSpace::Positive, weight)
            + self.half_space_moment(slice, HalfSpace::Negative, weight)
    }

    /// `∫ |f| (1 + |v|^2) dv` for a single slice.
    pub fn l1_2(&self, slice: &[f64]) -> f64 {
        self.l1_2_half(slice, HalfSpace::Positive) + self.l1_2_half(slice, HalfSpace::Negative)
    }

    fn l1_2_half(&self, slice: &[f64], side: HalfSpace) -> f64 {
        assert_eq!(slice.len(), self.len(), "slice length does not match velocity grid");
        let mut acc = 0.0;
        for ((v, w), f) in self.nodes.iter().zip(&self.weights).zip(slice) {
            if side.contains(v[0]) {
                acc += w * (1.0 + linalg::norm_sq(v)) * f.abs();
            }
        }
        acc
    }

    /// Applies `R` to a slice: `out[j] = slice[R j]`.
    pub fn reflected(&self, slice: &[f64]) -> Vec<f64> {
        assert_eq!(slice.len(), self.len(), "slice length does not match velocity grid");
        self.reflect.iter().map(|&r| slice[r]).collect()
    }
}

/// Nodes `0 = x_0 < x_1 < ... < x_M = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    nodes: Vec<f64>,
}

impl SpatialGrid {
    pub fn uniform(intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::config("spatial grid needs at least one interval"));
        }
        let h = 1.0 / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
        nodes[intervals] = 1.0;
        Ok(SpatialGrid { nodes })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::config("spatial nodes must start at 0 and end at 1"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("spatial nodes must be strictly increasing"));
        }
        Ok(SpatialGrid { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Trapezoid weights on the nodes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.len()];
        for (k, h) in self.spacing().iter().enumerate() {
            w[k] += 0.5 * h;
            w[k + 1] += 0.5 * h;
        }
        w
    }
}

/// The product grid a distribution lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub velocity: VelocityGrid,
    pub space: SpatialGrid,
}

impl PhaseGrid {
    pub fn new(velocity: VelocityGrid, space: SpatialGrid) -> Self {
        PhaseGrid { velocity, space }
    }
}

/// Values `f(x_i, v_j)`, stored row-major by spatial node.
///
/// Row 0 holds the trace at `x = 0` and the last row the trace at `x = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    values: Vec<f64>,
    n_x: usize,
    n_v: usize,
}

impl DistributionField {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        DistributionField {
            values: vec![0.0; grid.space.len() * grid.velocity.len()],
            n_x: grid.space.len(),
            n_v: grid.velocity.len(),
        }
    }

    pub fn from_fn(grid: &PhaseGrid, mut g: impl FnMut(f64, &Vec3) -> f64) -> Self {
        let mut field = Self::zeros(grid);
        for (i, &x) in grid.space.nodes().iter().enumerate() {
            for (j, v) in grid.velocity.nodes().iter().enumerate() {
                field.values[i * field.n_v + j] = g(x, v);
            }
        }
        field
    }

    /// Same slice at every spatial node.
    pub fn constant(grid: &PhaseGrid, slice: &[f64]) -> Self {
        assert_eq!(slice.len(), grid.velocity.len());
        let mut values = Vec::with_capacity(grid.space.len() * slice.len());
        for _ in 0..grid.space.len() {
            values.extend_from_slice(slice);
        }
        DistributionField { values, n_x: grid.space.len(), n_v: grid.velocity.len() }
    }

    pub fn from_values(grid: &PhaseGrid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.space.len() * grid.velocity.len();
        if values.len() != expected {
            return Err(Error::config(format!(
                "field has {} values, grid expects {expected}",
                values.len()
            )));
        }
        Ok(DistributionField { values, n_x: grid.space.len(), n_v: grid.velocity.len() })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_v..(i + 1) * self.n_v]
    }

    pub fn slice_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.n_v..(i + 1) * self.n_v]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, f64> {
        self.values.chunks(self.n_v)
    }

    pub fn left_trace(&self) -> &[f64] {
        self.slice(0)
    }

    pub fn right_trace(&self) -> &[f64] {
        self.slice(self.n_x - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_v + j]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `self - other`
    pub fn difference(&self, other: &DistributionField) -> DistributionField {
        assert_eq!(self.values.len(), other.values.len());
        DistributionField {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            n_x: self.n_x,
            n_v: self.n_v,
        }
    }

    pub fn scaled(&self, c: f64) -> DistributionField {
        DistributionField {
            values: self.values.iter().map(|a| c * a).collect(),
            n_x: self.n_x,
            n_v: self.n_v,
        }
    }
}

/// Outward (`plus`) and inward (`minus`) trace norms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceNorms {
    pub l1_v1_plus: f64,
    pub l1_v1_minus: f64,
    pub l1_vbr_plus: f64,
    pub l1_vbr_minus: f64,
}

impl TraceNorms {
    /// `‖f‖_{L¹_{γ,|v1|}}`
    pub fn l1_v1(&self) -> f64 {
        self.l1_v1_plus + self.l1_v1_minus
    }

    /// `‖f‖_{L¹_{γ,⟨v⟩}}`
    pub fn l1_vbr(&self) -> f64 {
        self.l1_vbr_plus + self.l1_vbr_minus
    }
}

/// Trace norms from the slices at `x = 0` and `x = 1`.
///
/// Outward: `v1 < 0` at `x = 0` plus `v1 > 0` at `x = 1`; inward is the complement.
pub fn trace_norms(grid: &VelocityGrid, left: &[f64], right: &[f64]) -> TraceNorms {
    use HalfSpace::{Negative, Positive};
    let abs_v1 = |v: &Vec3| v[0].abs();
    let energy = |v: &Vec3| 1.0 + linalg::norm_sq(v);
    let abs = |s: &[f64]| s.iter().map(|x| x.abs()).collect::<Vec<_>>();
    let (left, right) = (abs(left), abs(right));
    TraceNorms {
        l1_v1_plus: grid.half_space_integral(&left, Negative, abs_v1)
            + grid.half_space_integral(&right, Positive, abs_v1),
        l1_v1_minus: grid.half_space_integral(&left, Positive, abs_v1)
            + grid.half_space_integral(&right, Negative, abs_v1),
        l1_vbr_plus: grid.half_space_integral(&left, Negative, energy)
            + grid.half_space_integral(&right, Positive, energy),
        l1_vbr_minus: grid.half_space_integral(&left, Positive, energy)
            + grid.half_space_integral(&right, Negative, energy),
    }
}

/// Trace norms of a field's boundary rows.
pub fn field_trace_norms(grid: &VelocityGrid, f: &DistributionField) -> TraceNorms {
    trace_norms(grid, f.left_trace(), f.right_trace())
}

/// `sup_x ‖f‖_{L¹_{2,+}} + sup_x ‖f‖_{L¹_{2,-}}`
pub fn sup_l1_2_norm(grid: &VelocityGrid, f: &DistributionField) -> f64 {
    let mut sup_plus = 0.0_f64;
    let mut sup_minus = 0.0_f64;
    for row in f.rows() {
        sup_plus = sup_plus.max(grid.l1_2_half(row, HalfSpace::Positive));
        sup_minus = sup_minus.max(grid.l1_2_half(row, HalfSpace::Negative));
    }
    sup_plus + sup_minus
}

/// Constants built from inflow data and wall Maxwellians that enter the
/// a-priori bounds on density, energy and the temperature tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConstants {
    /// `∫ e^{-1/|v1|} f_LR dv`
    pub a_l1: f64,
    /// `½ ∫ e^{-1/|v1|} M_w dv`
    pub a_l2: f64,
    /// Product of the two damped inflow fluxes of `f_L`, `f_R`.
    pub gamma_l1: f64,
    /// Product of the two damped wall-Maxwellian fluxes.
    pub gamma_l2: f64,
    /// `inf_{|k|=1} ∫ e^{-1/|v1|} f_LR (|v|² − (v·k)²) dv`
    pub a_half_1: f64,
    /// Same infimum for the wall Maxwellians.
    pub a_half_2: f64,
    /// `‖f_LR‖_{L¹_{γ,⟨v⟩}} ‖M_w‖_{L¹_{γ,⟨v⟩}}`
    pub c_lr1: f64,
    /// `‖f_LR‖_{L¹_{γ,|v1|}} + ‖M_w‖_{L¹_{γ,⟨v⟩}}`
    pub c_lr2: f64,
    /// `‖f_LR‖_{L¹_{γ,|v1|}}`
    pub f_lr_flux_norm: f64,
    /// `‖f_LR‖_{L¹_{γ,⟨v⟩}}`
    pub f_lr_energy_norm: f64,
    /// `‖M_w‖_{L¹_{γ,⟨v⟩}}`
    pub m_w_energy_norm: f64,
    /// `∫_{v1>0} f_L |v1| dv`
    pub flux_left: f64,
    /// `∫_{v1<0} f_R |v1| dv`
    pub flux_right: f64,
    /// `∫ f_LR / |v1| dv`; large values flag concentration near `v1 = 0`.
    pub inverse_flux_moment: f64,
}

impl BoundaryConstants {
    /// `|∫_{v1>0} f_L |v1| dv − ∫_{v1<0} f_R |v1| dv|`
    pub fn flux_discrepancy(&self) -> f64 {
        (self.flux_left - self.flux_right).abs()
    }
}

/// `tr(A) − λ_max(A)` with `A = ∫ e^{-1/|v1|} w(v) v⊗v dv`.
///
/// Equals `inf_{|k|=1} ∫ e^{-1/|v1|} w (|v|² − (v·k)²) dv` because the
/// integrand is `tr(A) − kᵀAk` and the infimum of `−kᵀAk` is `−λ_max(A)`.
pub fn damped_transverse_energy(grid: &VelocityGrid, w: &[f64]) -> f64 {
    let a = damped_second_moment(grid, w);
    let eig = linalg::sym_eigenvalues(&a);
    linalg::trace(&a) - eig[2]
}

/// `∫ e^{-1/|v1|} w(v) v⊗v dv`
pub fn damped_second_moment(grid: &VelocityGrid, w: &[f64]) -> Mat3 {
    assert_eq!(w.len(), grid.len());
    let mut a = [[0.0; 3]; 3];
    for ((v, q), f) in grid.nodes().iter().zip(grid.weights()).zip(w) {
        let damp = (-1.0 / v[0].abs()).exp() * q * f;
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += damp * v[r] * v[c];
            }
        }
    }
    linalg::symmetrize(&a)
}

/// Computes every boundary constant.
///
/// `f_left` is supported on `v1 > 0`, `f_right` on `v1 < 0`; `m_w_left` and
/// `m_w_right` are the wall Maxwellians at `x = 0` and `x = 1` on the same
/// half-spaces. Values on the opposite half-space are ignored.
pub fn boundary_constants(
    grid: &VelocityGrid,
    f_left: &[f64],
    f_right: &[f64],
    m_w_left: &[f64],
    m_w_right: &[f64],
) -> Result<BoundaryConstants> {
    use HalfSpace::{Negative, Positive};
    for s in [f_left, f_right, m_w_left, m_w_right] {
        assert_eq!(s.len(), grid.len(), "slice length does not match velocity grid");
    }
    let combine = |pos: &[f64], neg: &[f64]| -> Vec<f64> {
        (0..grid.len()).map(|j| if grid.is_positive(j) { pos[j] } else { neg[j] }).collect()
    };
    let f_lr = combine(f_left, f_right);
    let m_w = combine(m_w_left, m_w_right);
    if f_lr.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::DegenerateData("inflow data must be finite and nonnegative".into()));
    }
    if f_lr.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateData("inflow data f_LR is identically zero".into()));
    }

    let damp = |v: &Vec3| (-1.0 / v[0].abs()).exp();
    let damped_flux = |s: &[f64], side| grid.half_space_integral(s, side, |v| damp(v) * v[0].abs());
    let damped_mass = |s: &[f64]| {
        grid.half_space_integral(s, Positive, damp) + grid.half_space_integral(s, Negative, damp)
    };

    let f_lr_norms = trace_norms(grid, &f_lr, &vec![0.0; grid.len()]);
    let m_w_norms = trace_norms(grid, &m_w, &vec![0.0; grid.len()]);
    // f_LR lives on the inward half at x = 0 (v1 > 0) and at x = 1 (v1 < 0);
    // placing it in the x = 0 slot puts its v1 < 0 part on the outward side,
    // but the totals below do not depend on that split.
    let f_lr_flux_norm = f_lr_norms.l1_v1();
    let f_lr_energy_norm = f_lr_norms.l1_vbr();
    let m_w_energy_norm = m_w_norms.l1_vbr();

    let inverse_flux_moment = grid.half_space_integral(&f_lr, Positive, |v| 1.0 / v[0].abs())
        + grid.half_space_integral(&f_lr, Negative, |v| 1.0 / v[0].abs());

    Ok(BoundaryConstants {
        a_l1: damped_mass(&f_lr),
        a_l2: 0.5 * damped_mass(&m_w),
        gamma_l1: damped_flux(&f_lr, Positive) * damped_flux(&f_lr, Negative),
        gamma_l2: damped_flux(&m_w, Positive) * damped_flux(&m_w, Negative),
        a_half_1: damped_transverse_energy(grid, &f_lr),
        a_half_2: damped_transverse_energy(grid, &m_w),
        c_lr1: f_lr_energy_norm * m_w_energy_norm,
        c_lr2: f_lr_flux_norm + m_w_energy_norm,
        f_lr_flux_norm,
        f_lr_energy_norm,
        m_w_energy_norm,
        flux_left: grid.half_space_moment(&f_lr, Positive, MomentWeight::AbsV1),
        flux_right: grid.half_space_moment(&f_lr, Negative, MomentWeight::AbsV1),
        inverse_flux_moment,
    })
}
