//! Verification machinery: reference spectra, canonical interpolation,
//! the orthogonality and error-identity checks, the saturation report,
//! the edge-patch consistency probe and refinement studies.

mod field;
mod h5;
mod identity;
mod interpolate;
mod probe;
mod reference;
mod report;
mod study;

use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::eigensolve::EigenError;
use crate::elements::{ElementError, ElementFamily};
use crate::mesh::MeshError;

pub use field::{DiscreteField, FnField, Mode1d, ModeCombination, Regularity, ScalarField, SquareMode};
pub use h5::{h5_saturation_check, H5Entry, H5Report};
pub use identity::{eigen_identity_residual, IdentityReport};
pub use interpolate::{
    broken_energy_distance, check_h4_orthogonality, interpolate_canonical, l2_rho_distance, Interpolant,
    FIELD_QUADRATURE_DEGREE,
};
pub use probe::{consistency_probe, ProbeReport, PROBE_TARGET};
pub use reference::{
    exact_square_spectrum, extrapolated_reference, richardson, square_spectrum, Provenance, ReferenceSpectrum,
};
pub use report::{ReportHeader, REPORT_SCHEMA};
pub use study::{domain_mesh, fit_rate, run_study, BoundFlag, Domain, LevelRow, StudyConfig, StudyReport};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("ExtrapolationUnreliable: {0}")]
    ExtrapolationUnreliable(String),
    #[error("OrthogonalityNotClaimed: {0} has no orthogonal interpolation")]
    OrthogonalityNotClaimed(ElementFamily),
    #[error("NotNormalized: weighted L2 norm squared is {0}, expected 1")]
    NotNormalized(f64),
    #[error("ProbeDegenerate: constraint system has a {0}-dimensional kernel, expected 1")]
    ProbeDegenerate(usize),
    #[error("RateUndefined: {0}")]
    RateUndefined(String),
    #[error("InsufficientReference: {needed} eigenvalues needed, {available} available")]
    InsufficientReference { needed: usize, available: usize },
    #[error("UnsupportedDomain: {family} cannot be used on the {domain} domain")]
    UnsupportedDomain { family: ElementFamily, domain: Domain },
    #[error("NotNested: levels must double, got {0:?}")]
    NotNested(Vec<usize>),
    #[error("DimensionMismatch: expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
