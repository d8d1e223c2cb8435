use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::AssemblyError;

/// Symmetric matrix stored as its lower triangle in compressed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricSparseMatrix {
    /// Builds from `(row, col, value)` triples; entries above the diagonal
    /// are mirrored. Duplicates are summed in sorted order, so the result
    /// does not depend on the order of the input.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        for t in &mut triplets {
            if t.1 > t.0 {
                *t = (t.1, t.0, t.2);
            }
            assert!(t.0 < n, "triplet index out of range");
        }
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, values }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..=i {
                if m[(i, j)] != 0.0 || i == j {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), t)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self::from_triplets(d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored (lower-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored lower-triangle entries of row `i`: `(col, value)` with `col <= i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for (j, v) in self.row(i) {
                acc += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
            y[i] += acc;
        }
        y
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let y = self.mul_vec(x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// `x^T A y`.
    pub fn bilinear_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// `self + sigma * other`.
    pub fn add_scaled(&self, sigma: f64, other: &Self) -> Result<Self, AssemblyError> {
        if self.n != other.n {
            return Err(AssemblyError::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, sigma * v)));
        }
        Ok(Self::from_triplets(self.n, t))
    }

    /// Coordinate text: one `row col value` line per stored entry, 0-based,
    /// lower triangle.
    pub fn to_coo_text(&self) -> String {
        let mut out = String::with_capacity(self.nnz() * 24);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                writeln!(out, "{i} {j} {v:e}").unwrap();
            }
        }
        out
    }
}

impl From<&SymmetricSparseMatrix> for DMatrix<f64> {
    fn from(m: &SymmetricSparseMatrix) -> Self {
        m.to_dense()
    }
}

/// `sqrt(x^T A x)`.
pub fn energy_norm(a: &SymmetricSparseMatrix, x: &[f64]) -> Result<f64, AssemblyError> {
    if x.len() != a.dim() {
        return Err(AssemblyError::DimensionMismatch { expected: a.dim(), found: x.len() });
    }
    Ok(a.quadratic_form(x).max(0.0).sqrt())
}

/// `sqrt(x^T M x)`.
pub fn l2_rho_norm(m: &SymmetricSparseMatrix, x: &[f64]) -> Result<f64, AssemblyError> {
    energy_norm(m, x)
}
