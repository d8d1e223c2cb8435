//! Element families: shape spaces, degrees of freedom, quadrature and local
//! matrices.

mod basis;
mod family;
mod geometry;
pub mod poly;
mod quadrature;

use thiserror::Error;

pub use basis::{
    dof_functionals, local_mass, local_stiffness, mixed_derivative_vanishes, poly_jet, reference_basis, Jet,
    LocalBasis, LocalMatrix, EDGE_POINTS,
};
pub use family::{DofKind, ElementFamily, LocalEntity, ALL_FAMILIES};
pub use geometry::CellGeometry;
pub use quadrature::{gauss_legendre, quadrature, QuadratureRule, MAX_QUADRATURE_DEGREE};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ElementError {
    #[error("UnsupportedDerivative: derivative not available for this family")]
    UnsupportedDerivative,
    #[error("UnsupportedDegree: no quadrature rule of degree {0}")]
    UnsupportedDegree(usize),
    #[error("DegenerateCell: cell has zero or negative area")]
    DegenerateCell,
    #[error("NonPositiveDensity: density must be positive")]
    NonPositiveDensity,
    #[error("NonPositiveCoefficient: stiffness coefficient must be positive")]
    NonPositiveCoefficient,
    #[error("EvaluationError: {0}")]
    Evaluation(String),
    #[error("IncompatibleCell: family and cell kind differ")]
    IncompatibleCell,
    #[error("NotUnisolvent: degree-of-freedom matrix of {0} is singular")]
    NotUnisolvent(ElementFamily),
}
