//! Global degrees of freedom and assembly of stiffness and mass matrices.

mod assemble;
mod dofmap;
mod sparse;

use thiserror::Error;

use crate::elements::{ElementError, ElementFamily};
use crate::mesh::CellKind;

pub use assemble::assemble;
pub use dofmap::{build_dofmap, DofMap, Entity};
pub use sparse::{energy_norm, l2_rho_norm, SymmetricSparseMatrix};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AssemblyError {
    #[error("IncompatibleMesh: {family} needs {} cells, mesh has {}", .family.cell_kind().name(), .kind.name())]
    IncompatibleMesh { family: ElementFamily, kind: CellKind },
    #[error("NonPositiveDensity: density must be positive on every cell")]
    NonPositiveDensity,
    #[error("UnsupportedBoundary: {0}")]
    UnsupportedBoundary(String),
    #[error("DimensionMismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Element(#[from] ElementError),
}
