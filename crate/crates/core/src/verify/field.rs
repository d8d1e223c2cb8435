use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::assembly::DofMap;
use crate::elements::{CellGeometry, Jet, LocalBasis};
use crate::mesh::{BoundaryTag, Mesh, Point};

use super::VerifyError;

/// Sobolev regularity of a field: smooth, or in `H^{1+s}` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Smooth,
    Singular { s: f64 },
}

/// A function that can be sampled with its first and second derivatives.
pub trait ScalarField {
    /// Jet at `x`. `cell` names the mesh cell containing `x` when known;
    /// piecewise fields use it to pick the branch on cell boundaries.
    fn jet(&self, x: Point, cell: Option<usize>) -> Jet;

    fn regularity(&self) -> Regularity {
        Regularity::Smooth
    }
}

/// `a sin(omega x + phase)` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode1d {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl Mode1d {
    /// The `p`-th L2-normalized Laplacian eigenfunction on `[0, 1]` with
    /// the given end conditions (`p` counts from 0).
    pub fn for_sides(lo: BoundaryTag, hi: BoundaryTag, p: usize) -> Mode1d {
        let p = p as f64;
        let dirichlet = |t| t == BoundaryTag::Dirichlet;
        match (dirichlet(lo), dirichlet(hi)) {
            (true, true) => Mode1d { amplitude: SQRT_2, omega: (p + 1.0) * PI, phase: 0.0 },
            (false, false) => {
                Mode1d { amplitude: if p == 0.0 { 1.0 } else { SQRT_2 }, omega: p * PI, phase: FRAC_PI_2 }
            }
            (true, false) => Mode1d { amplitude: SQRT_2, omega: (p + 0.5) * PI, phase: 0.0 },
            (false, true) => Mode1d { amplitude: SQRT_2, omega: (p + 0.5) * PI, phase: FRAC_PI_2 },
        }
    }

    /// Value and first two derivatives.
    fn eval(&self, x: f64) -> [f64; 3] {
        let (s, c) = (self.omega * x + self.phase).sin_cos();
        let a = self.amplitude;
        [a * s, a * self.omega * c, -a * self.omega * self.omega * s]
    }
}

/// Product eigenfunction `f(x) g(y)` of the Laplacian on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareMode {
    pub x: Mode1d,
    pub y: Mode1d,
}

impl SquareMode {
    /// `2 sin(p pi x) sin(q pi y)` with `p, q >= 1`.
    pub fn dirichlet(p: usize, q: usize) -> SquareMode {
        assert!(p >= 1 && q >= 1, "Dirichlet modes start at 1");
        let d = BoundaryTag::Dirichlet;
        SquareMode { x: Mode1d::for_sides(d, d, p - 1), y: Mode1d::for_sides(d, d, q - 1) }
    }

    pub fn eigenvalue(&self) -> f64 {
        self.x.omega * self.x.omega + self.y.omega * self.y.omega
    }
}

impl ScalarField for SquareMode {
    fn jet(&self, x: Point, _cell: Option<usize>) -> Jet {
        let [f, fx, fxx] = self.x.eval(x[0]);
        let [g, gy, gyy] = self.y.eval(x[1]);
        Jet { value: f * g, grad: [fx * g, f * gy], hess: [[fxx * g, fx * gy], [fx * gy, f * gyy]] }
    }
}

/// Linear combination of square modes, used for vectors in degenerate
/// eigenspaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCombination {
    pub terms: Vec<(f64, SquareMode)>,
}

impl ScalarField for ModeCombination {
    fn jet(&self, x: Point, cell: Option<usize>) -> Jet {
        let mut out = Jet::default();
        for (c, m) in &self.terms {
            out.add_scaled(*c, &m.jet(x, cell));
        }
        out
    }
}

/// Field given by a closure.
pub struct FnField<F> {
    f: F,
    regularity: Regularity,
}

impl<F: Fn(Point) -> Jet> FnField<F> {
    pub fn smooth(f: F) -> Self {
        Self { f, regularity: Regularity::Smooth }
    }

    pub fn with_regularity(f: F, regularity: Regularity) -> Self {
        Self { f, regularity }
    }
}

impl<F: Fn(Point) -> Jet> ScalarField for FnField<F> {
    fn jet(&self, x: Point, _cell: Option<usize>) -> Jet {
        (self.f)(x)
    }

    fn regularity(&self) -> Regularity {
        self.regularity
    }
}

/// A finite element function, evaluated cell by cell.
pub struct DiscreteField {
    bases: Vec<LocalBasis>,
    coefficients: Vec<Vec<f64>>,
}

impl DiscreteField {
    /// From a vector on the free DOFs (constrained DOFs are zero).
    pub fn new(mesh: &Mesh, dofmap: &DofMap, free: &[f64]) -> Result<Self, VerifyError> {
        if free.len() != dofmap.n_dofs() {
            return Err(VerifyError::DimensionMismatch { expected: dofmap.n_dofs(), found: free.len() });
        }
        Self::from_all(mesh, dofmap, &dofmap.extend(free))
    }

    /// From a vector in the full numbering.
    pub fn from_all(mesh: &Mesh, dofmap: &DofMap, all: &[f64]) -> Result<Self, VerifyError> {
        if all.len() != dofmap.n_all() {
            return Err(VerifyError::DimensionMismatch { expected: dofmap.n_all(), found: all.len() });
        }
        let mut bases = Vec::with_capacity(mesh.num_cells());
        let mut coefficients = Vec::with_capacity(mesh.num_cells());
        for c in 0..mesh.num_cells() {
            bases.push(LocalBasis::new(dofmap.family(), CellGeometry::of_cell(mesh, c)?)?);
            coefficients.push(dofmap.local_coefficients_all(c, all));
        }
        Ok(Self { bases, coefficients })
    }

    /// Jet on a given cell, extending that cell's polynomial.
    pub fn jet_on(&self, cell: usize, x: Point) -> Jet {
        self.bases[cell].combine(&self.coefficients[cell], x)
    }
}

impl ScalarField for DiscreteField {
    fn jet(&self, x: Point, cell: Option<usize>) -> Jet {
        let cell = cell.or_else(|| self.bases.iter().position(|b| b.geometry().contains(x, 1e-12)));
        match cell {
            Some(c) => self.jet_on(c, x),
            None => Jet { value: f64::NAN, ..Jet::default() },
        }
    }
}
