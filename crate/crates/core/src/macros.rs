//! Macroscopic fields, the temperature tensor `T_ν = (1 − ν) T I + ν Θ`, and
//! the ellipsoidal Gaussian closure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DistributionField, PhaseGrid, VelocityGrid};
use crate::linalg::{self, Mat3, Vec3};

/// Smallest admissible Prandtl parameter.
pub const NU_CRITICAL: f64 = -0.5;

/// Density, bulk velocity, temperature and stress tensor of one velocity slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroFields {
    pub rho: f64,
    pub u: Vec3,
    pub temperature: f64,
    pub theta: Mat3,
}

impl MacroFields {
    /// Builds fields from `(ρ, U, Θ)` with `T = tr Θ / 3`.
    pub fn from_parts(rho: f64, u: Vec3, theta: Mat3) -> Self {
        let theta = linalg::symmetrize(&theta);
        MacroFields { rho, u, temperature: linalg::trace(&theta) / 3.0, theta }
    }
}

/// Moments of a nonnegative slice.
///
/// `Θ` is the second raw moment minus `ρ U⊗U`, divided by `ρ` and symmetrized.
pub fn compute_moments(grid: &VelocityGrid, slice: &[f64]) -> Result<MacroFields> {
    assert_eq!(slice.len(), grid.len(), "slice length does not match velocity grid");
    let mut rho = 0.0;
    let mut m1 = [0.0; 3];
    let mut m2 = [[0.0; 3]; 3];
    for ((v, w), f) in grid.nodes().iter().zip(grid.weights()).zip(slice) {
        let wf = w * f;
        rho += wf;
        for r in 0..3 {
            m1[r] += wf * v[r];
            for c in r..3 {
                m2[r][c] += wf * v[r] * v[c];
            }
        }
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::DegenerateSlice { rho });
    }
    let u = [m1[0] / rho, m1[1] / rho, m1[2] / rho];
    let mut theta = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in r..3 {
            let central = (m2[r][c] - rho * u[r] * u[c]) / rho;
            theta[r][c] = central;
            theta[c][r] = central;
        }
    }
    Ok(MacroFields::from_parts(rho, u, theta))
}

/// `min{1 − ν, 1 + 2ν}`
pub fn equivalence_lower(nu: f64) -> f64 {
    (1.0 - nu).min(1.0 + 2.0 * nu)
}

/// `max{1 − ν, 1 + 2ν}`
pub fn equivalence_upper(nu: f64) -> f64 {
    (1.0 - nu).max(1.0 + 2.0 * nu)
}

pub fn check_nu(nu: f64) -> Result<()> {
    if !(NU_CRITICAL..1.0).contains(&nu) {
        return Err(Error::config(format!("Prandtl parameter nu must lie in [-1/2, 1), got {nu}")));
    }
    Ok(())
}

/// `(1 − ν) T I + ν Θ`
pub fn tensor_matrix(m: &MacroFields, nu: f64) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = nu * m.theta[r][c];
        }
        out[r][r] += (1.0 - nu) * m.temperature;
    }
    out
}

/// Positivity floor on the smallest eigenvalue of `T_ν`.
pub fn positivity_floor(temperature: f64) -> f64 {
    1e-10 * temperature.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureTensor {
    pub nu: f64,
    pub matrix: Mat3,
    /// Ascending.
    pub eigenvalues: Vec3,
    pub determinant: f64,
    pub inverse: Mat3,
}

impl TemperatureTensor {
    pub fn new(m: &MacroFields, nu: f64) -> Result<Self> {
        check_nu(nu)?;
        let matrix = tensor_matrix(m, nu);
        let eigenvalues = linalg::sym_eigenvalues(&matrix);
        let floor = positivity_floor(m.temperature);
        if !(eigenvalues[0] > floor) {
            return Err(Error::TensorDegeneracy { lambda_min: eigenvalues[0], floor });
        }
        let inverse = linalg::inverse(&matrix)
            .ok_or(Error::TensorDegeneracy { lambda_min: eigenvalues[0], floor })?;
        Ok(TemperatureTensor {
            nu,
            matrix,
            eigenvalues,
            determinant: linalg::det(&matrix),
            inverse,
        })
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[2]
    }
}

/// Writes `ρ det(2π T_ν)^{-1/2} exp(−½ (v−U)ᵀ T_ν⁻¹ (v−U))` at every node.
pub fn evaluate_gaussian_into(
    m: &MacroFields,
    tensor: &TemperatureTensor,
    grid: &VelocityGrid,
    out: &mut [f64],
) {
    assert_eq!(out.len(), grid.len());
    let two_pi = 2.0 * std::f64::consts::PI;
    let norm = m.rho / (two_pi.powi(3) * tensor.determinant).sqrt();
    let inv = &tensor.inverse;
    for (o, v) in out.iter_mut().zip(grid.nodes()) {
        let d = [v[0] - m.u[0], v[1] - m.u[1], v[2] - m.u[2]];
        let q = inv[0][0] * d[0] * d[0]
            + inv[1][1] * d[1] * d[1]
            + inv[2][2] * d[2] * d[2]
            + 2.0 * (inv[0][1] * d[0] * d[1] + inv[0][2] * d[0] * d[2] + inv[1][2] * d[1] * d[2]);
        *o = norm * (-0.5 * q).exp();
    }
}

pub fn evaluate_gaussian(m: &MacroFields, tensor: &TemperatureTensor, grid: &VelocityGrid) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    evaluate_gaussian_into(m, tensor, grid, &mut out);
    out
}

/// Rescales `out` so that its discrete mass is `rho`.
///
/// The quadrature integrates a Gaussian only up to aliasing; without this the
/// relaxation term would create or destroy mass and the `v1`-flux would drift
/// along `x` at that level.
fn conserve_mass(grid: &VelocityGrid, rho: f64, out: &mut [f64]) {
    let mass = grid.integrate_slice(out);
    if mass > 0.0 {
        let k = rho / mass;
        out.iter_mut().for_each(|x| *x *= k);
    }
}

/// `M_ν(slice)` on the same grid, carrying the slice's discrete mass exactly.
pub fn closure(grid: &VelocityGrid, slice: &[f64], nu: f64) -> Result<Vec<f64>> {
    let m = compute_moments(grid, slice)?;
    let t = TemperatureTensor::new(&m, nu)?;
    let mut out = evaluate_gaussian(&m, &t, grid);
    conserve_mass(grid, m.rho, &mut out);
    Ok(out)
}

/// A closure failure at a given spatial node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeError {
    pub node: usize,
    pub error: Error,
}

/// `M_ν(f)` at every spatial node, evaluated in parallel over nodes and
/// rescaled to the node's discrete mass.
///
/// On failure reports the lowest failing node.
pub fn gaussian_field(
    grid: &PhaseGrid,
    f: &DistributionField,
    nu: f64,
) -> std::result::Result<DistributionField, NodeError> {
    let mut out = DistributionField::zeros(grid);
    let n_v = grid.velocity.len();
    let results: Vec<Result<()>> = out
        .values_mut()
        .par_chunks_mut(n_v)
        .zip(f.values().par_chunks(n_v))
        .map(|(dst, src)| {
            let m = compute_moments(&grid.velocity, src)?;
            let t = TemperatureTensor::new(&m, nu)?;
            evaluate_gaussian_into(&m, &t, &grid.velocity, dst);
            conserve_mass(&grid.velocity, m.rho, dst);
            Ok(())
        })
        .collect();
    if let Some((node, Err(error))) = results.into_iter().enumerate().find(|(_, r)| r.is_err()) {
        return Err(NodeError { node, error });
    }
    Ok(out)
}

/// Constants with `M_ν(v) ≤ amplitude · e^{−decay |v|²}` at every node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    pub amplitude: f64,
    pub decay: f64,
    /// Largest observed `M_ν(v) / (amplitude e^{−decay|v|²})` over the grid.
    pub max_ratio: f64,
}

/// Explicit Gaussian envelope of `M_ν`, verified node by node.
///
/// Uses `(v−U)ᵀ T⁻¹ (v−U) ≥ |v−U|²/λ₃` and, for `U ≠ 0`,
/// `|v−U|² ≥ ½|v|² − |U|²`, giving decay `1/(4λ₃)` and amplitude
/// `ρ det(2πT)^{-1/2} e^{|U|²/(2λ₃)}`. For `U = 0` the sharper decay
/// `1/(2λ₃)` applies.
pub fn gaussian_envelope_certificate(
    m: &MacroFields,
    tensor: &TemperatureTensor,
    grid: &VelocityGrid,
) -> Result<GaussianEnvelope> {
    let lambda_max = tensor.lambda_max();
    let u_sq = linalg::norm_sq(&m.u);
    let base = m.rho / ((2.0 * std::f64::consts::PI).powi(3) * tensor.determinant).sqrt();
    let (amplitude, decay) = if u_sq == 0.0 {
        (base, 0.5 / lambda_max)
    } else {
        (base * (u_sq / (2.0 * lambda_max)).exp(), 0.25 / lambda_max)
    };
    let values = evaluate_gaussian(m, tensor, grid);
    let mut max_ratio = 0.0_f64;
    for (value, v) in values.iter().zip(grid.nodes()) {
        let envelope = amplitude * (-decay * linalg::norm_sq(v)).exp();
        max_ratio = max_ratio.max(value / envelope);
    }
    if !(max_ratio <= 1.0 + 1e-12) {
        return Err(Error::Internal(format!(
            "Gaussian envelope violated: max ratio {max_ratio}"
        )));
    }
    Ok(GaussianEnvelope { amplitude, decay, max_ratio })
}

/// Weighted sup-distance between two closures against the slice distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzGap {
    /// `max_v |M_ν(f) − M_ν(g)| e^{decay |v|²}`
    pub gap_norm: f64,
    /// `‖f − g‖_{L¹₂}`
    pub diff_norm: f64,
    /// Shared decay rate (the smaller of the two certificates).
    pub decay: f64,
}

impl LipschitzGap {
    /// `gap_norm / diff_norm`, `None` when the slices coincide.
    pub fn ratio(&self) -> Option<f64> {
        (self.diff_norm > 0.0).then(|| self.gap_norm / self.diff_norm)
    }

    /// `c · ‖f − g‖_{L¹₂}` for a calibrated constant `c`.
    pub fn bound(&self, c: f64) -> f64 {
        c * self.diff_norm
    }
}

pub fn gaussian_lipschitz_gap(
    grid: &VelocityGrid,
    f: &[f64],
    g: &[f64],
    nu: f64,
) -> Result<LipschitzGap> {
    let mf = compute_moments(grid, f)?;
    let mg = compute_moments(grid, g)?;
    let tf = TemperatureTensor::new(&mf, nu)?;
    let tg = TemperatureTensor::new(&mg, nu)?;
    let ef = gaussian_envelope_certificate(&mf, &tf, grid)?;
    let eg = gaussian_envelope_certificate(&mg, &tg, grid)?;
    let decay = ef.decay.min(eg.decay);
    let gf = evaluate_gaussian(&mf, &tf, grid);
    let gg = evaluate_gaussian(&mg, &tg, grid);
    let mut gap_norm = 0.0_f64;
    for ((a, b), v) in gf.iter().zip(&gg).zip(grid.nodes()) {
        gap_norm = gap_norm.max((a - b).abs() * (decay * linalg::norm_sq(v)).exp());
    }
    let diff: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
    Ok(LipschitzGap { gap_norm, diff_norm: grid.l1_2(&diff), decay })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::QuadratureRule;
    use std::f64::consts::PI;

    fn grid(cutoff: f64, n: usize) -> VelocityGrid {
        VelocityGrid::new(cutoff, [n, n, n], QuadratureRule::Midpoint).unwrap()
    }

    fn maxwellian(g: &VelocityGrid, rho: f64, u: Vec3, t: f64) -> Vec<f64> {
        g.nodes()
            .iter()
            .map(|v| {
                let d = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
                rho * (-linalg::norm_sq(&d) / (2.0 * t)).exp() / (2.0 * PI * t).powf(1.5)
            })
            .collect()
    }

    #[test]
    fn moments_of_drifting_maxwellian() {
        let g = grid(8.0, 24);
        let m = compute_moments(&g, &maxwellian(&g, 2.0, [0.3, 0.0, 0.0], 1.5)).unwrap();
        assert!((m.rho - 2.0).abs() < 1e-7);
        assert!((m.u[0] - 0.3).abs() < 1e-7 && m.u[1].abs() < 1e-12 && m.u[2].abs() < 1e-12);
        assert!((m.temperature - 1.5).abs() < 1e-7);
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { 1.5 } else { 0.0 };
                assert!((m.theta[r][c] - expect).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn even_slice_has_zero_bulk_velocity() {
        let g = grid(6.0, 12);
        let s: Vec<f64> = g.nodes().iter().map(|v| 1.0 / (1.0 + linalg::norm_sq(v))).collect();
        let m = compute_moments(&g, &s).unwrap();
        assert!(m.u.iter().all(|u| u.abs() < 1e-15), "{:?}", m.u);
    }

    #[test]
    fn anisotropic_gaussian_moments() {
        let g = grid(10.0, 32);
        let s: Vec<f64> = g
            .nodes()
            .iter()
            .map(|v| (-(v[0] * v[0] / 2.0 + v[1] * v[1] / 4.0 + v[2] * v[2] / 6.0)).exp())
            .collect();
        let m = compute_moments(&g, &s).unwrap();
        assert!((m.theta[0][0] - 1.0).abs() < 1e-7);
        assert!((m.theta[1][1] - 2.0).abs() < 1e-7);
        assert!((m.theta[2][2] - 3.0).abs() < 1e-6);
        assert!((m.temperature - 2.0).abs() < 1e-6);
    }

    #[test]
    fn zero_slice_is_degenerate() {
        let g = grid(6.0, 8);
        assert!(matches!(
            compute_moments(&g, &vec![0.0; g.len()]),
            Err(Error::DegenerateSlice { .. })
        ));
    }

    fn diag_fields(d: Vec3) -> MacroFields {
        MacroFields::from_parts(1.0, [0.0; 3], [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    #[test]
    fn bgk_limit_is_isotropic() {
        let m = MacroFields::from_parts(
            1.0,
            [0.0; 3],
            [[1.0, 0.2, 0.1], [0.2, 2.0, -0.3], [0.1, -0.3, 3.0]],
        );
        let t = TemperatureTensor::new(&m, 0.0).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { m.temperature } else { 0.0 };
                assert_eq!(t.matrix[r][c], expect);
            }
        }
    }

    #[test]
    fn quarter_negative_nu_tensor() {
        let t = TemperatureTensor::new(&diag_fields([1.0, 2.0, 3.0]), -0.25).unwrap();
        assert!((t.eigenvalues[0] - 1.75).abs() < 1e-14);
        assert!((t.eigenvalues[1] - 2.0).abs() < 1e-14);
        assert!((t.eigenvalues[2] - 2.25).abs() < 1e-14);
        assert!(t.eigenvalues[0] >= equivalence_lower(-0.25) * 2.0);
    }

    #[test]
    fn critical_tensor() {
        let t = TemperatureTensor::new(&diag_fields([4.0, 1.0, 1.0]), -0.5).unwrap();
        assert!((t.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((t.eigenvalues[2] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn degenerate_critical_tensor_is_rejected() {
        // all energy along one axis: T_{-1/2} has a zero eigenvalue
        let err = TemperatureTensor::new(&diag_fields([3.0, 0.0, 0.0]), -0.5).unwrap_err();
        assert!(matches!(err, Error::TensorDegeneracy { .. }));
        assert!(TemperatureTensor::new(&diag_fields([1.0, 1.0, 1.0]), 1.0).is_err());
        assert!(TemperatureTensor::new(&diag_fields([1.0, 1.0, 1.0]), -0.6).is_err());
    }

    #[test]
    fn standard_normal_peak_value() {
        let g = VelocityGrid::new(3.0, [6, 5, 5], QuadratureRule::Midpoint).unwrap();
        let m = diag_fields([1.0, 1.0, 1.0]);
        let t = TemperatureTensor::new(&m, 0.3).unwrap();
        let values = evaluate_gaussian(&m, &t, &g);
        // node (±0.5, 0, 0)
        let j = g.nodes().iter().position(|v| v[0] == 0.5 && v[1] == 0.0 && v[2] == 0.0).unwrap();
        let expect = (2.0 * PI).powf(-1.5) * (-0.125f64).exp();
        assert!((values[j] - expect).abs() < 1e-15);
        assert!(((2.0 * PI).powf(-1.5) - 0.06349).abs() < 1e-5);
    }

    #[test]
    fn maxwellian_is_fixed_by_bgk_closure() {
        let g = grid(8.0, 24);
        let s = maxwellian(&g, 1.3, [0.2, -0.1, 0.0], 1.1);
        let out = closure(&g, &s, 0.0).unwrap();
        let err = s.iter().zip(&out).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn isotropic_envelope_constants() {
        let g = grid(6.0, 12);
        let m = diag_fields([1.0, 1.0, 1.0]);
        let t = TemperatureTensor::new(&m, 0.0).unwrap();
        let e = gaussian_envelope_certificate(&m, &t, &g).unwrap();
        assert!((e.decay - 0.5).abs() < 1e-15);
        assert!((e.amplitude - (2.0 * PI).powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn shifted_and_anisotropic_envelopes_hold() {
        let g = grid(8.0, 16);
        let mut m = diag_fields([1.0, 1.0, 1.0]);
        m.u = [1.0, 0.0, 0.0];
        let t = TemperatureTensor::new(&m, 0.0).unwrap();
        let e = gaussian_envelope_certificate(&m, &t, &g).unwrap();
        assert!(e.decay < 0.5 && e.max_ratio <= 1.0);

        let m = diag_fields([0.5, 1.0, 2.0]);
        let t = TemperatureTensor::new(&m, 1.0 - 1e-9).unwrap();
        let e = gaussian_envelope_certificate(&m, &t, &g).unwrap();
        assert!(e.decay <= 0.25 / t.lambda_max() * 2.0 + 1e-15);
    }

    #[test]
    fn lipschitz_gap_vanishes_for_identical_slices() {
        let g = grid(8.0, 16);
        let s = maxwellian(&g, 1.0, [0.1, 0.0, 0.0], 1.0);
        let gap = gaussian_lipschitz_gap(&g, &s, &s, -0.5).unwrap();
        assert_eq!(gap.gap_norm, 0.0);
        assert_eq!(gap.ratio(), None);
    }

    #[test]
    fn lipschitz_ratio_is_stable_under_small_scaling() {
        let g = grid(8.0, 16);
        let mut s = maxwellian(&g, 1.0, [0.2, 0.0, 0.0], 1.0);
        for (x, v) in s.iter_mut().zip(g.nodes()) {
            *x *= 1.0 + 0.3 * (v[0] > 0.0) as u8 as f64;
        }
        let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|eps| {
                let scaled: Vec<f64> = s.iter().map(|x| x * (1.0 + eps)).collect();
                gaussian_lipschitz_gap(&g, &s, &scaled, -0.5).unwrap().ratio().unwrap()
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(*r), hi.max(*r)));
        assert!(hi / lo < 2.0, "{ratios:?}");
    }
}
