use crate::mesh::{CellKind, Point};

use super::ElementError;

/// Highest exactness degree offered by [`quadrature`].
pub const MAX_QUADRATURE_DEGREE: usize = 10;

/// Quadrature on a reference cell: the unit right triangle `(0,0),(1,0),(0,1)`
/// or the square `[-1,1]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: CellKind,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Total degree for triangles, per-variable degree for rectangles.
    pub degree: usize,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let prev = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (x * p - prev) / (x * x - 1.0);
    (p, d)
}

/// Rule on the reference cell exact for polynomials up to `degree`.
pub fn quadrature(kind: CellKind, degree: usize) -> Result<QuadratureRule, ElementError> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(ElementError::UnsupportedDegree(degree));
    }
    let (points, weights) = match kind {
        CellKind::Triangle => match degree {
            0 | 1 => (vec![[1.0 / 3.0, 1.0 / 3.0]], vec![0.5]),
            2 => (
                vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
                vec![1.0 / 6.0; 3],
            ),
            d => collapsed_triangle((d + 2).div_ceil(2)),
        },
        CellKind::Rectangle => {
            let n = (degree + 1).div_ceil(2).max(1);
            let (x, w) = gauss_legendre(n);
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    points.push([x[i], x[j]]);
                    weights.push(w[i] * w[j]);
                }
            }
            (points, weights)
        }
    };
    Ok(QuadratureRule { kind, points, weights, degree })
}

/// Tensor Gauss rule on `[0,1]^2` pulled onto the triangle by
/// `(u, v) -> (u, v (1 - u))`.
fn collapsed_triangle(n: usize) -> (Vec<Point>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = 0.5 * (x[i] + 1.0);
        for j in 0..n {
            let v = 0.5 * (x[j] + 1.0);
            points.push([u, v * (1.0 - u)]);
            weights.push(0.25 * w[i] * w[j] * (1.0 - u));
        }
    }
    (points, weights)
}
