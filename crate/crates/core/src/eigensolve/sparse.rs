//! Shift-and-invert block subspace iteration for the lowest eigenpairs of
//! large sparse pencils.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::SymmetricSparseMatrix;

use super::dense::solve_dense;
use super::EigenError;

const SEED: u64 = 0x6e63_6665_6d5f_7631;
const MAX_ITERATIONS: usize = 500;

/// Reverse Cuthill-McKee ordering of the sparsity graph. `perm[new] = old`.
pub(crate) fn reverse_cuthill_mckee(a: &SymmetricSparseMatrix) -> Vec<usize> {
    let n = a.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if j != i {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    for nb in &mut adj {
        nb.sort_by_key(|&j| (degree[j], j));
    }

    let bfs_levels = |start: usize, seen: &[bool]| -> (usize, usize) {
        let mut level = vec![usize::MAX; n];
        level[start] = 0;
        let mut q = VecDeque::from([start]);
        let mut last = start;
        while let Some(v) = q.pop_front() {
            last = v;
            for &w in &adj[v] {
                if level[w] == usize::MAX && !seen[w] {
                    level[w] = level[v] + 1;
                    q.push_back(w);
                }
            }
        }
        (level[last], last)
    };

    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    while order.len() < n {
        let mut start = (0..n).filter(|&i| !seen[i]).min_by_key(|&i| (degree[i], i)).unwrap();
        // pseudo-peripheral start node
        let (mut ecc, mut far) = bfs_levels(start, &seen);
        for _ in 0..8 {
            let (e, f) = bfs_levels(far, &seen);
            if e <= ecc {
                break;
            }
            start = far;
            ecc = e;
            far = f;
        }
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (profile) Cholesky factor of a permuted symmetric matrix.
pub(crate) struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn new(a: &SymmetricSparseMatrix, perm: &[usize]) -> Result<Self, EigenError> {
        let n = a.dim();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(a.nnz());
        for i in 0..n {
            for (j, v) in a.row(i) {
                let (r, c) = (inv[i].max(inv[j]), inv[i].min(inv[j]));
                first[r] = first[r].min(c);
                entries.push((r, c, v));
            }
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut values = vec![0.0; start[n]];
        for (r, c, v) in entries {
            values[start[r] + (c - first[r])] += v;
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let ri = &values[start[i] + (lo - fi)..start[i] + (j - fi)];
                let rj = &values[start[j] + (lo - fj)..start[j] + (j - fj)];
                let dot: f64 = ri.iter().zip(rj).map(|(x, y)| x * y).sum();
                let djj = values[start[j] + (j - fj)];
                let idx = start[i] + (j - fi);
                values[idx] = (values[idx] - dot) / djj;
            }
            let row = &values[start[i]..start[i] + (i - fi)];
            let d = values[start[i] + (i - fi)] - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(EigenError::NotPositiveDefinite);
            }
            values[start[i] + (i - fi)] = d.sqrt();
        }
        Ok(Self { perm: perm.to_vec(), first, start, values })
    }

    /// Solves `A x = b` in place (original numbering).
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.first.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (l, v) in row[..i - fi].iter().zip(&mut y[fi..i]) {
                *v -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// The `k` smallest pairs by subspace iteration on `(A + tau M)^-1 M`.
pub(crate) fn solve_subspace(
    a: &SymmetricSparseMatrix,
    m: &SymmetricSparseMatrix,
    k: usize,
    tol: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
    let n = a.dim();
    let perm = reverse_cuthill_mckee(&a.add_scaled(1.0, m).map_err(|_| EigenError::DimensionMismatch)?);
    // M must itself be positive definite
    EnvelopeCholesky::new(m, &perm)?;
    let tau = a
        .diagonal()
        .iter()
        .zip(m.diagonal())
        .map(|(x, y)| x / y)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
        * 1e-3;
    let tau = if tau > 0.0 { tau } else { 1e-8 };
    let shifted = a.add_scaled(tau, m).map_err(|_| EigenError::DimensionMismatch)?;
    let factor = EnvelopeCholesky::new(&shifted, &perm)?;

    let p = n.min((2 * k).max(k + 10));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut x: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();

    let mut best: Option<(f64, Vec<f64>, Vec<Vec<f64>>)> = None;
    for _ in 0..MAX_ITERATIONS {
        // Y = K^-1 M X, columns scaled to unit M-norm
        let y: Vec<Vec<f64>> = x
            .iter()
            .map(|xi| {
                let mut v = m.mul_vec(xi);
                factor.solve(&mut v);
                let s = m.quadratic_form(&v).sqrt();
                v.iter_mut().for_each(|e| *e /= s);
                v
            })
            .collect();
        let ay: Vec<Vec<f64>> = y.iter().map(|v| a.mul_vec(v)).collect();
        let my: Vec<Vec<f64>> = y.iter().map(|v| m.mul_vec(v)).collect();
        let ar = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])));
        let mr = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i])));
        let (theta, q) = solve_dense(&ar, &mr, p, false)?;

        let combine = |basis: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (r, b) in basis.iter().enumerate() {
                let c = q[(r, col)];
                out.iter_mut().zip(b).for_each(|(o, v)| *o += c * v);
            }
            out
        };
        x = (0..p).map(|c| combine(&y, c)).collect();

        let mut worst: f64 = 0.0;
        for i in 0..k {
            let ax = combine(&ay, i);
            let mx = combine(&my, i);
            let r: f64 = ax.iter().zip(&mx).map(|(u, v)| (u - theta[i] * v).powi(2)).sum::<f64>().sqrt();
            let norm = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max(if norm > 0.0 { r / norm } else { r });
        }
        if best.as_ref().is_none_or(|b| worst < b.0) {
            best = Some((worst, theta[..k].to_vec(), x[..k].to_vec()));
        }
        if worst <= tol {
            break;
        }
    }
    let (worst, vals, vecs) = best.expect("at least one iteration");
    if worst > 1e-9 {
        return Err(EigenError::NoConvergence);
    }
    Ok((vals, vecs))
}
