//! Generalized symmetric eigenproblem `A x = lambda M x` for the smallest
//! eigenpairs.
//!
//! Small problems are reduced densely (Cholesky of `M`, then the standard
//! symmetric problem for `L^-1 A L^-T`). Large ones use shift-and-invert
//! subspace iteration with an envelope Cholesky factor and dense
//! Rayleigh-Ritz steps.

mod dense;
mod sparse;

use thiserror::Error;

use crate::assembly::SymmetricSparseMatrix;

/// Largest dimension handled by the dense path under [`Method::Auto`].
pub const DENSE_LIMIT: usize = 600;

/// Relative gap below which neighbouring eigenvalues are marked as a cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EigenError {
    #[error("NotPositiveDefinite: mass matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("TooManyRequested: asked for {k} eigenpairs of a {n}-dimensional problem")]
    TooManyRequested { k: usize, n: usize },
    #[error("InvalidCount: at least one eigenpair must be requested")]
    InvalidCount,
    #[error("DimensionMismatch: matrix or vector dimensions differ")]
    DimensionMismatch,
    #[error("ZeroVector: Rayleigh quotient of the zero vector")]
    ZeroVector,
    #[error("NoConvergence: eigensolver did not converge")]
    NoConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Dense below [`DENSE_LIMIT`], subspace iteration above.
    #[default]
    Auto,
    /// Dense reduction with tridiagonal QL.
    Dense,
    /// Dense reduction with cyclic Jacobi rotations.
    Jacobi,
    /// Shift-and-invert subspace iteration.
    Subspace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `||A x - lambda M x|| / ||A x||` per pair (absolute when `A x = 0`).
    pub residuals: Vec<f64>,
    /// Equal ids mark eigenvalues within [`CLUSTER_TOLERANCE`] of a neighbour.
    pub cluster_ids: Vec<usize>,
    /// Set by [`normalize_sign`] where the reference gave no sign information.
    pub sign_ambiguous: Vec<bool>,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Whether eigenvalue `i` shares its cluster with another one.
    pub fn in_cluster(&self, i: usize) -> bool {
        let id = self.cluster_ids[i];
        self.cluster_ids.iter().filter(|&&c| c == id).count() > 1
    }
}

pub fn solve_generalized(
    a: &SymmetricSparseMatrix,
    m: &SymmetricSparseMatrix,
    k: usize,
) -> Result<EigenResult, EigenError> {
    solve_generalized_with(a, m, k, Method::Auto)
}

pub fn solve_generalized_with(
    a: &SymmetricSparseMatrix,
    m: &SymmetricSparseMatrix,
    k: usize,
    method: Method,
) -> Result<EigenResult, EigenError> {
    let n = a.dim();
    if m.dim() != n {
        return Err(EigenError::DimensionMismatch);
    }
    if k == 0 {
        return Err(EigenError::InvalidCount);
    }
    if k > n {
        return Err(EigenError::TooManyRequested { k, n });
    }
    let method = match method {
        Method::Auto if n <= DENSE_LIMIT || 4 * k > n => Method::Dense,
        Method::Auto => Method::Subspace,
        other => other,
    };
    let (values, vectors) = match method {
        Method::Subspace => sparse::solve_subspace(a, m, k, 1e-11)?,
        _ => {
            let (vals, x) = dense::solve_dense(&a.to_dense(), &m.to_dense(), k, method == Method::Jacobi)?;
            let vecs = (0..k).map(|j| x.column(j).iter().copied().collect()).collect();
            (vals, vecs)
        }
    };
    Ok(finish(a, m, values, vectors))
}

/// Fixes a deterministic sign (largest-magnitude entry positive), computes
/// residuals and cluster ids.
fn finish(a: &SymmetricSparseMatrix, m: &SymmetricSparseMatrix, values: Vec<f64>, vectors: Vec<Vec<f64>>) -> EigenResult {
    let mut vectors = vectors;
    for v in &mut vectors {
        let norm = m.quadratic_form(v).sqrt();
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let s = if pivot < 0.0 { -1.0 / norm } else { 1.0 / norm };
        v.iter_mut().for_each(|x| *x *= s);
    }
    let residuals = values.iter().zip(&vectors).map(|(&l, v)| residual(a, m, l, v)).collect();
    let mut cluster_ids = Vec::with_capacity(values.len());
    let mut id = 0;
    for i in 0..values.len() {
        if i > 0 {
            let (x, y) = (values[i - 1], values[i]);
            if (y - x).abs() > CLUSTER_TOLERANCE * x.abs().max(y.abs()) {
                id += 1;
            }
        }
        cluster_ids.push(id);
    }
    let k = values.len();
    EigenResult { eigenvalues: values, eigenvectors: vectors, residuals, cluster_ids, sign_ambiguous: vec![false; k] }
}

/// `||A x - lambda M x|| / ||A x||`, absolute when `A x = 0`.
pub fn residual(a: &SymmetricSparseMatrix, m: &SymmetricSparseMatrix, lambda: f64, x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let mx = m.mul_vec(x);
    let r = ax.iter().zip(&mx).map(|(u, v)| (u - lambda * v).powi(2)).sum::<f64>().sqrt();
    let n = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        r / n
    } else {
        r
    }
}

/// `x^T A x / x^T M x`.
pub fn rayleigh_quotient(a: &SymmetricSparseMatrix, m: &SymmetricSparseMatrix, x: &[f64]) -> Result<f64, EigenError> {
    if a.dim() != x.len() || m.dim() != x.len() {
        return Err(EigenError::DimensionMismatch);
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(EigenError::ZeroVector);
    }
    Ok(a.quadratic_form(x) / m.quadratic_form(x))
}

/// Flips each eigenvector so that its M-inner product with `reference` is
/// nonnegative. A zero inner product leaves the vector as computed and
/// sets its `sign_ambiguous` flag.
pub fn normalize_sign(
    result: &EigenResult,
    m: &SymmetricSparseMatrix,
    reference: &[f64],
) -> Result<EigenResult, EigenError> {
    if reference.len() != m.dim() {
        return Err(EigenError::DimensionMismatch);
    }
    let mr = m.mul_vec(reference);
    let mut out = result.clone();
    for (v, flag) in out.eigenvectors.iter_mut().zip(&mut out.sign_ambiguous) {
        let ip: f64 = v.iter().zip(&mr).map(|(a, b)| a * b).sum();
        if ip < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
            *flag = false;
        } else {
            *flag = ip == 0.0;
        }
    }
    Ok(out)
}

/// Solves `A x = b` for a symmetric positive definite `A` by an envelope
/// Cholesky factorization in reverse Cuthill-McKee order.
pub fn solve_spd(a: &SymmetricSparseMatrix, b: &[f64]) -> Result<Vec<f64>, EigenError> {
    if b.len() != a.dim() {
        return Err(EigenError::DimensionMismatch);
    }
    let perm = sparse::reverse_cuthill_mckee(a);
    let factor = sparse::EnvelopeCholesky::new(a, &perm)?;
    let mut x = b.to_vec();
    factor.solve(&mut x);
    Ok(x)
}

/// Dense view used by callers that need the whole reduced spectrum.
pub fn dense_spectrum(a: &SymmetricSparseMatrix, m: &SymmetricSparseMatrix) -> Result<Vec<f64>, EigenError> {
    let red = dense::Reduced::new(&a.to_dense(), &m.to_dense())?;
    Ok(dense::symmetric_eigen(&red.c).0)
}
