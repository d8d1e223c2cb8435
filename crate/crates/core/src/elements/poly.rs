//! Bivariate polynomials with per-variable degree at most 3.

use std::ops::{Add, Mul, Sub};

pub const MAX_DEGREE: usize = 3;
const N: usize = MAX_DEGREE + 1;

/// `sum c[i][j] s^i t^j` in local cell coordinates `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Poly {
    c: [[f64; N]; N],
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The monomial `coef * s^i t^j`.
    pub fn monomial(i: usize, j: usize, coef: f64) -> Self {
        assert!(i <= MAX_DEGREE && j <= MAX_DEGREE, "monomial degree out of range");
        let mut p = Self::zero();
        p.c[i][j] = coef;
        p
    }

    pub fn constant(v: f64) -> Self {
        Self::monomial(0, 0, v)
    }

    pub fn s() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    pub fn t() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.c[i][j]
    }

    /// Exact derivative `d^a/ds^a d^b/dt^b`.
    pub fn derivative(&self, a: usize, b: usize) -> Self {
        let mut out = Self::zero();
        for i in a..N {
            for j in b..N {
                out.c[i - a][j - b] = self.c[i][j] * falling(i, a) * falling(j, b);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().flatten().all(|&v| v == 0.0)
    }

    /// Total degree of the highest nonzero monomial.
    pub fn total_degree(&self) -> usize {
        let mut d = 0;
        for i in 0..N {
            for j in 0..N {
                if self.c[i][j] != 0.0 {
                    d = d.max(i + j);
                }
            }
        }
        d
    }

    /// Value of `d^a/ds^a d^b/dt^b p` at `(s, t)`.
    pub fn eval_derivative(&self, a: usize, b: usize, s: f64, t: f64) -> f64 {
        let mut sp = [0.0; N];
        let mut tp = [0.0; N];
        sp[0] = 1.0;
        tp[0] = 1.0;
        for k in 1..N {
            sp[k] = sp[k - 1] * s;
            tp[k] = tp[k - 1] * t;
        }
        let mut sum = 0.0;
        for i in a..N {
            for j in b..N {
                let c = self.c[i][j];
                if c != 0.0 {
                    sum += c * falling(i, a) * falling(j, b) * sp[i - a] * tp[j - b];
                }
            }
        }
        sum
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.eval_derivative(0, 0, s, t)
    }
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for i in 0..N {
            for j in 0..N {
                self.c[i][j] += rhs.c[i][j];
            }
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + rhs * -1.0
    }
}

impl Mul<f64> for Poly {
    type Output = Poly;
    fn mul(mut self, rhs: f64) -> Poly {
        for row in &mut self.c {
            for v in row {
                *v *= rhs;
            }
        }
        self
    }
}

impl Mul for Poly {
    type Output = Poly;
    /// Panics if the product exceeds the per-variable degree bound.
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::zero();
        for i in 0..N {
            for j in 0..N {
                if self.c[i][j] == 0.0 {
                    continue;
                }
                for k in 0..N {
                    for l in 0..N {
                        if rhs.c[k][l] != 0.0 {
                            assert!(i + k < N && j + l < N, "polynomial product exceeds degree bound");
                            out.c[i + k][j + l] += self.c[i][j] * rhs.c[k][l];
                        }
                    }
                }
            }
        }
        out
    }
}
