use nalgebra::DMatrix;
use serde::Serialize;

use crate::elements::gauss_legendre;
use crate::mesh::Point;

use super::VerifyError;

/// Published value of the edge-patch first moment.
pub const PROBE_TARGET: f64 = 0.1715;

/// Outcome of the edge-patch construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeReport {
    /// `int_e [v_e] s ds` with `s` the arc length from the lower end of `e`.
    pub value: f64,
    pub target: f64,
    /// Patch scale factor.
    pub scale: f64,
    /// Dimension of the constraint kernel.
    pub nullity: usize,
    /// Largest constraint violation of the normalized `v_e`.
    pub constraint_residual: f64,
    /// `int_e [v_e] ds`, zero for members of the discrete space.
    pub jump_mean: f64,
    /// Largest part of either one-sided trace on `e` that is odd about the
    /// edge midpoint, relative to the largest value of `v_e`.
    pub trace_odd_part: f64,
}

impl ProbeReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        (self.value - self.target).abs() <= tolerance
    }
}

/// Quadratic monomials `1, x, y, x^2, xy, y^2` in patch-scaled coordinates.
fn monomials(p: Point, scale: f64) -> [f64; 6] {
    let (x, y) = (p[0] / scale, p[1] / scale);
    [1.0, x, y, x * x, x * y, y * y]
}

fn eval(coeffs: &[f64], p: Point, scale: f64) -> f64 {
    monomials(p, scale).iter().zip(coeffs).map(|(m, c)| m * c).sum()
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
}

/// Builds the piecewise quadratic `v_e` on the two-triangle patch
/// `T+ = (0,0),(t,0),(0,t)`, `T- = (0,0),(0,t),(-t,0)` around the edge
/// `e = (0,0)-(0,t)`. `v_e` vanishes at the two Gauss points of each of the
/// four outer edges and at `(+-t/4, t/4)`, has zero mean jump on `e` (so
/// it lies in the P2 nonconforming space) and is scaled to maximum
/// modulus 1 on the patch.
pub fn consistency_probe(scale: f64) -> Result<ProbeReport, VerifyError> {
    let t = scale;
    let o = [0.0, 0.0];
    let top = [0.0, t];
    let right = [t, 0.0];
    let left = [-t, 0.0];
    let g = (1.0 - 1.0 / 3f64.sqrt()) / 2.0;
    let gauss = [g, 1.0 - g];

    // unknowns: 6 coefficients on T+, then 6 on T-
    let mut rows: Vec<[f64; 12]> = Vec::new();
    let mut push = |side: usize, p: Point| {
        let mut r = [0.0; 12];
        r[6 * side..6 * side + 6].copy_from_slice(&monomials(p, t));
        rows.push(r);
    };
    for &s in &gauss {
        push(0, lerp(o, right, s));
        push(0, lerp(right, top, s));
        push(1, lerp(o, left, s));
        push(1, lerp(left, top, s));
    }
    push(0, [t / 4.0, t / 4.0]);
    push(1, [-t / 4.0, t / 4.0]);
    let (nodes, weights) = gauss_legendre(6);
    let edge_rule: Vec<(Point, f64)> =
        nodes.iter().zip(&weights).map(|(&x, &w)| ([0.0, t * (x + 1.0) / 2.0], w * t / 2.0)).collect();
    let mut jump_row = [0.0; 12];
    for &(p, w) in &edge_rule {
        let m = monomials(p, t);
        for i in 0..6 {
            jump_row[i] += w * m[i];
            jump_row[6 + i] -= w * m[i];
        }
    }
    rows.push(jump_row);

    // square the system with zero rows so the SVD exposes the full kernel
    let a = DMatrix::from_fn(12, 12, |i, j| rows.get(i).map_or(0.0, |r| r[j]));
    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma_max = svd.singular_values.max();
    let kernel: Vec<usize> = (0..12).filter(|&i| svd.singular_values[i] <= 1e-10 * sigma_max).collect();
    if kernel.len() != 1 {
        return Err(VerifyError::ProbeDegenerate(kernel.len()));
    }
    let mut v: Vec<f64> = v_t.row(kernel[0]).iter().copied().collect();

    // scale to maximum modulus 1 on a lattice of both triangles, largest value positive
    let mut peak: f64 = 0.0;
    let samples = 40;
    for (side, (b, c)) in [(right, top), (left, top)].into_iter().enumerate() {
        for i in 0..=samples {
            for j in 0..=samples - i {
                let (u, w) = (i as f64 / samples as f64, j as f64 / samples as f64);
                let p = [u * b[0] + w * c[0], u * b[1] + w * c[1]];
                let val = eval(&v[6 * side..6 * side + 6], p, t);
                if val.abs() > peak.abs() {
                    peak = val;
                }
            }
        }
    }
    v.iter_mut().for_each(|c| *c /= peak);

    let constraint_residual = rows
        .iter()
        .map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let jump = |p: Point| eval(&v[..6], p, t) - eval(&v[6..], p, t);
    let value = edge_rule.iter().map(|&(p, w)| w * jump(p) * p[1]).sum();
    let jump_mean = edge_rule.iter().map(|&(p, w)| w * jump(p)).sum();
    let mut trace_odd_part: f64 = 0.0;
    for side in 0..2 {
        let c = &v[6 * side..6 * side + 6];
        for &(p, _) in &edge_rule {
            let mirrored = [0.0, t - p[1]];
            trace_odd_part = trace_odd_part.max(0.5 * (eval(c, p, t) - eval(c, mirrored, t)).abs());
        }
    }
    Ok(ProbeReport {
        value,
        target: PROBE_TARGET,
        scale,
        nullity: kernel.len(),
        constraint_residual,
        jump_mean,
        trace_odd_part,
    })
}
