use nalgebra::{DMatrix, SymmetricEigen};

use super::EigenError;

/// Dense reduction of `A x = lambda M x` to `C y = lambda y` with
/// `C = L^-1 A L^-T`, `M = L L^T`.
pub(crate) struct Reduced {
    l: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl Reduced {
    pub fn new(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Self, EigenError> {
        let chol = m.clone().cholesky().ok_or(EigenError::NotPositiveDefinite)?;
        let l = chol.l();
        // W = L^-1 A, C = W L^-T = (L^-1 W^T)^T
        let w = l.solve_lower_triangular(a).ok_or(EigenError::NotPositiveDefinite)?;
        let c = l.solve_lower_triangular(&w.transpose()).ok_or(EigenError::NotPositiveDefinite)?;
        let c = (&c + c.transpose()) * 0.5;
        Ok(Self { l, c })
    }

    /// Maps eigenvectors `y` of `C` back to `x = L^-T y`.
    pub fn back_transform(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.l.transpose().solve_upper_triangular(y).expect("Cholesky factor is nonsingular")
    }
}

/// All eigenpairs of a dense symmetric matrix, ascending.
pub(crate) fn symmetric_eigen(c: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(c.clone());
    sort_pairs(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Cyclic Jacobi rotations; slower than the tridiagonal QL path but
/// accurate to high relative precision.
pub(crate) fn jacobi_eigen(c: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), EigenError> {
    let n = c.nrows();
    let mut a = c.clone();
    let mut v = DMatrix::identity(n, n);
    let scale = c.norm().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            let d = (0..n).map(|i| a[(i, i)]).collect();
            return Ok(sort_pairs(d, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    Err(EigenError::NoConvergence)
}

fn sort_pairs(values: Vec<f64>, vectors: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let v = DMatrix::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
    (sorted, v)
}

/// The `k` smallest pairs of `A x = lambda M x` by dense reduction.
pub(crate) fn solve_dense(
    a: &DMatrix<f64>,
    m: &DMatrix<f64>,
    k: usize,
    jacobi: bool,
) -> Result<(Vec<f64>, DMatrix<f64>), EigenError> {
    let red = Reduced::new(a, m)?;
    let (vals, vecs) = if jacobi { jacobi_eigen(&red.c)? } else { symmetric_eigen(&red.c) };
    let y = vecs.columns(0, k).into_owned();
    Ok((vals[..k].to_vec(), red.back_transform(&y)))
}
