//! Dense 3×3 helpers for symmetric matrices.

use std::f64::consts::PI;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm_sq(a: &Vec3) -> f64 {
    dot(a, a)
}

pub fn trace(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse via the adjugate. Returns `None` for an exactly singular matrix.
pub fn inverse(m: &Mat3) -> Option<Mat3> {
    let d = det(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let inv_d = 1.0 / d;
    let mut out = [[0.0; 3]; 3];
    out[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_d;
    out[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_d;
    out[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_d;
    out[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_d;
    out[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_d;
    out[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_d;
    out[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_d;
    out[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_d;
    out[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_d;
    Some(out)
}

pub fn quadratic_form(m: &Mat3, x: &Vec3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += x[i] * m[i][j] * x[j];
        }
    }
    acc
}

/// Averages `m` with its transpose.
pub fn symmetrize(m: &Mat3) -> Mat3 {
    let mut out = *m;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let avg = 0.5 * (m[i][j] + m[j][i]);
            out[i][j] = avg;
            out[j][i] = avg;
        }
    }
    out
}

fn char_poly(m: &Mat3) -> (f64, f64, f64) {
    let c2 = trace(m);
    let c1 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let c0 = det(m);
    (c2, c1, c0)
}

/// Eigenvalues of a symmetric 3×3 matrix in ascending order.
///
/// Closed-form trigonometric solution of the characteristic cubic followed by
/// one guarded Newton step per root. Both work on the trace-free shift
/// `m − (tr m / 3) I`, whose polynomial coefficients carry no cancellation
/// from the mean eigenvalue.
pub fn sym_eigenvalues(m: &Mat3) -> Vec3 {
    let q = trace(m) / 3.0;
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        let mut eig = [m[0][0], m[1][1], m[2][2]];
        eig.sort_by(|a, b| a.total_cmp(b));
        return eig;
    }
    let mut b = *m;
    for (i, row) in b.iter_mut().enumerate() {
        row[i] -= q;
    }
    let p2 = b[0][0].powi(2) + b[1][1].powi(2) + b[2][2].powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut scaled = b;
    for row in scaled.iter_mut() {
        for entry in row.iter_mut() {
            *entry /= p;
        }
    }
    let r = (det(&scaled) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = 2.0 * p * phi.cos();
    let smallest = 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let mut mu = [smallest, -largest - smallest, largest];

    let (c2, c1, c0) = char_poly(&b);
    let scale = mu.iter().fold(0.0_f64, |acc, e| acc.max(e.abs())).max(f64::MIN_POSITIVE);
    for lambda in mu.iter_mut() {
        let l = *lambda;
        let value = ((l - c2) * l + c1) * l - c0;
        let slope = (3.0 * l - 2.0 * c2) * l + c1;
        if slope.abs() <= 1e-8 * scale * scale {
            continue;
        }
        let candidate = l - value / slope;
        let cand_value = ((candidate - c2) * candidate + c1) * candidate - c0;
        if cand_value.abs() < value.abs() {
            *lambda = candidate;
        }
    }
    let mut eig = [mu[0] + q, mu[1] + q, mu[2] + q];
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}
