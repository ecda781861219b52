use esbgk_core::boundary::{wall_maxwellian, Wall};
use esbgk_core::grid::{
    boundary_constants, damped_transverse_energy, sup_l1_2_norm, trace_norms, BoundaryConstants,
    DistributionField, HalfSpace, MomentWeight, PhaseGrid, QuadratureRule, SpatialGrid,
    VelocityGrid,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_grid() -> VelocityGrid {
    VelocityGrid::new(5.0, [8, 6, 6], QuadratureRule::GaussLegendre).unwrap()
}

fn random_slice(grid: &VelocityGrid, seed: u64, signed: bool) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grid.nodes()
        .iter()
        .map(|v| {
            let x: f64 = if signed { rng.gen_range(-1.0..1.0) } else { rng.gen() };
            x * (-0.3 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp()
        })
        .collect()
}

/// Zero on the wrong half for each wall.
fn restrict(grid: &VelocityGrid, s: &[f64], half: HalfSpace) -> Vec<f64> {
    grid.nodes().iter().zip(s).map(|(v, x)| if half.contains(v[0]) { *x } else { 0.0 }).collect()
}

fn constants_for(grid: &VelocityGrid, f_l: &[f64], f_r: &[f64]) -> BoundaryConstants {
    let m_l = wall_maxwellian(grid, 1.0, Wall::Left).unwrap();
    let m_r = wall_maxwellian(grid, 1.3, Wall::Right).unwrap();
    boundary_constants(grid, f_l, f_r, &m_l, &m_r).unwrap()
}

/// Fibonacci lattice on the sphere.
fn sphere_points(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn transverse(grid: &VelocityGrid, w: &[f64], k: &[f64; 3]) -> f64 {
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .zip(w)
        .map(|((v, q), f)| {
            let vk = v[0] * k[0] + v[1] * k[1] + v[2] * k[2];
            let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            (-1.0 / v[0].abs()).exp() * q * f * (v2 - vk * vk)
        })
        .sum()
}

/// Dense sampling of the unit sphere followed by shrinking local pattern search.
fn sphere_minimum(grid: &VelocityGrid, w: &[f64]) -> f64 {
    let mut best = [0.0, 0.0, 1.0];
    let mut best_val = f64::INFINITY;
    for k in sphere_points(10_000) {
        let val = transverse(grid, w, &k);
        if val < best_val {
            best_val = val;
            best = k;
        }
    }
    let mut step = 0.05;
    while step > 1e-7 {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut k = best;
                k[axis] += sign * step;
                let n = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
                let k = [k[0] / n, k[1] / n, k[2] / n];
                let val = transverse(grid, w, &k);
                if val < best_val {
                    best_val = val;
                    best = k;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best_val
}

#[test]
fn transverse_infimum_matches_sphere_search() {
    let grid = VelocityGrid::new(4.0, [8, 6, 6], QuadratureRule::GaussLegendre).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..20 {
        // anisotropic table: random positive values times a skewed envelope
        let stretch = [rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0)];
        let shear = rng.gen_range(-0.8..0.8);
        let w: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|v| {
                let a = v[0] / stretch[0];
                let b = (v[1] + shear * v[2]) / stretch[1];
                let c = v[2] / stretch[2];
                rng.gen_range(0.5..1.5) * (-0.5 * (a * a + b * b + c * c)).exp()
            })
            .collect();
        let closed = damped_transverse_energy(&grid, &w);
        let searched = sphere_minimum(&grid, &w);
        assert!(closed <= searched * (1.0 + 1e-12), "case {case}: {closed} above {searched}");
        assert!((searched - closed) <= 1e-6 * closed, "case {case}: {closed} vs {searched}");
    }
}

#[test]
fn odd_moments_of_even_functions_vanish() {
    for rule in [QuadratureRule::GaussLegendre, QuadratureRule::Midpoint, QuadratureRule::SplitGaussLegendre] {
        let grid = VelocityGrid::new(6.0, [10, 6, 8], rule).unwrap();
        let raw = random_slice(&grid, 17, false);
        // symmetrize in v1 through the reflection map
        let even: Vec<f64> = (0..grid.len()).map(|j| raw[j] + raw[grid.reflect(j)]).collect();
        let m = grid.moment(&even, MomentWeight::Component(0));
        let scale = grid.moment(&even, MomentWeight::AbsV1);
        assert!(m.abs() <= 1e-14 * scale, "{rule:?}: {m:e}");
    }
}

#[test]
fn constants_scale_with_data_amplitude() {
    let grid = small_grid();
    let base = random_slice(&grid, 23, false);
    let f_l = restrict(&grid, &base, HalfSpace::Positive);
    let f_r = restrict(&grid, &base, HalfSpace::Negative);
    let c1 = constants_for(&grid, &f_l, &f_r);
    let s = 3.7_f64;
    let scaled = |x: &[f64]| x.iter().map(|y| s * y).collect::<Vec<_>>();
    let c2 = constants_for(&grid, &scaled(&f_l), &scaled(&f_r));
    let exponent = |a: f64, b: f64| (b / a).ln() / s.ln();
    for (name, a, b) in [
        ("a_l1", c1.a_l1, c2.a_l1),
        ("a_half_1", c1.a_half_1, c2.a_half_1),
        ("c_lr1", c1.c_lr1, c2.c_lr1),
        ("f_lr_flux_norm", c1.f_lr_flux_norm, c2.f_lr_flux_norm),
        ("f_lr_energy_norm", c1.f_lr_energy_norm, c2.f_lr_energy_norm),
    ] {
        assert!((exponent(a, b) - 1.0).abs() < 1e-12, "{name}: exponent {}", exponent(a, b));
    }
    assert!((exponent(c1.gamma_l1, c2.gamma_l1) - 2.0).abs() < 1e-12);
    // wall quantities do not see the data at all
    for (a, b) in [(c1.a_l2, c2.a_l2), (c1.gamma_l2, c2.gamma_l2), (c1.a_half_2, c2.a_half_2)] {
        assert_eq!(a, b);
    }
    // C_LR,2 is a sum of a data norm and a wall norm: affine, not linear
    let expect = s * c1.f_lr_flux_norm + c1.m_w_energy_norm;
    assert!((c2.c_lr2 - expect).abs() < 1e-12 * expect);
}

#[test]
fn trace_norms_of_a_table_match_resummation() {
    let grid = small_grid();
    let left = random_slice(&grid, 41, true);
    let right = random_slice(&grid, 43, true);
    let n = trace_norms(&grid, &left, &right);
    let (mut out_v1, mut in_v1, mut out_br, mut in_br) = (0.0, 0.0, 0.0, 0.0);
    // reverse order on purpose
    for j in (0..grid.len()).rev() {
        let v = grid.node(j);
        let w = grid.weight(j);
        let br = 1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if v[0] < 0.0 {
            out_v1 += w * left[j].abs() * v[0].abs();
            out_br += w * left[j].abs() * br;
            in_v1 += w * right[j].abs() * v[0].abs();
            in_br += w * right[j].abs() * br;
        } else {
            in_v1 += w * left[j].abs() * v[0].abs();
            in_br += w * left[j].abs() * br;
            out_v1 += w * right[j].abs() * v[0].abs();
            out_br += w * right[j].abs() * br;
        }
    }
    for (a, b) in [
        (n.l1_v1_plus, out_v1),
        (n.l1_v1_minus, in_v1),
        (n.l1_vbr_plus, out_br),
        (n.l1_vbr_minus, in_br),
    ] {
        assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
    }
}

#[test]
fn sup_norm_of_linear_ramp_is_attained_at_the_right_wall() {
    let vg = VelocityGrid::new(8.0, [24, 24, 24], QuadratureRule::Midpoint).unwrap();
    let grid = PhaseGrid::new(vg, SpatialGrid::uniform(8).unwrap());
    let f = DistributionField::from_fn(&grid, |x, v| x * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp());
    let want = std::f64::consts::PI.powf(1.5) * 2.5;
    let got = sup_l1_2_norm(&grid.velocity, &f);
    assert!((got - want).abs() <= 1e-7 * want, "{got} vs {want}");
}

fn field_strategy() -> impl Strategy<Value = (u64, u64, f64)> {
    (any::<u64>(), any::<u64>(), -5.0f64..5.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_homogeneous_and_subadditive((s1, s2, c) in field_strategy()) {
        let vg = small_grid();
        let grid = PhaseGrid::new(vg.clone(), SpatialGrid::uniform(3).unwrap());
        let n = grid.space.len() * vg.len();
        let values = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>()
        };
        let f = DistributionField::from_values(&grid, values(s1)).unwrap();
        let g = DistributionField::from_values(&grid, values(s2)).unwrap();
        let sum = DistributionField::from_values(
            &grid,
            f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect(),
        )
        .unwrap();

        let sup = |h: &DistributionField| sup_l1_2_norm(&vg, h);
        let tn = |h: &DistributionField| {
            let t = trace_norms(&vg, h.left_trace(), h.right_trace());
            [t.l1_v1_plus, t.l1_v1_minus, t.l1_vbr_plus, t.l1_vbr_minus]
        };

        let tol = 1e-12;
        prop_assert!((sup(&f.scaled(c)) - c.abs() * sup(&f)).abs() <= tol * (1.0 + sup(&f) * c.abs()));
        prop_assert!(sup(&sum) <= sup(&f) + sup(&g) + tol);
        let (tf, tg, ts, tc) = (tn(&f), tn(&g), tn(&sum), tn(&f.scaled(c)));
        for k in 0..4 {
            prop_assert!((tc[k] - c.abs() * tf[k]).abs() <= tol * (1.0 + tf[k] * c.abs()));
            prop_assert!(ts[k] <= tf[k] + tg[k] + tol);
            prop_assert!(tf[k] >= 0.0);
        }
    }
}
