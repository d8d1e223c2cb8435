use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, build_dofmap};
use crate::eigensolve::solve_generalized;
use crate::elements::{CellGeometry, ElementFamily};
use crate::mesh::{lshape_tri, unit_square_quad, unit_square_tri, BoundarySpec, CellKind, Mesh, MeshError};

use super::field::{DiscreteField, ModeCombination, ScalarField, SquareMode};
use super::interpolate::{broken_energy_distance, l2_rho_distance, FIELD_QUADRATURE_DEGREE};
use super::reference::{Provenance, ReferenceSpectrum};
use super::VerifyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// `[0, 1]^2`.
    Square,
    /// `[-1, 1]^2` without the quadrant `[0, 1] x [-1, 0]`.
    LShape,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::LShape => "lshape",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(Domain::Square),
            "lshape" | "l-shape" => Ok(Domain::LShape),
            other => Err(format!("unknown domain '{other}' (expected square or lshape)")),
        }
    }
}

/// Uniform mesh of `domain` with `n` cells per unit length, of the cell
/// kind `family` needs.
pub fn domain_mesh(domain: Domain, family: ElementFamily, n: usize, bc: BoundarySpec) -> Result<Mesh, VerifyError> {
    match (domain, family.cell_kind()) {
        (Domain::Square, CellKind::Triangle) => Ok(unit_square_tri(n, bc)?),
        (Domain::Square, CellKind::Rectangle) => Ok(unit_square_quad(n, bc)?),
        (Domain::LShape, CellKind::Triangle) => {
            if !bc.is_all_dirichlet() {
                return Err(MeshError::InvalidBoundarySpec("the L-shaped domain is all Dirichlet".into()).into());
            }
            Ok(lshape_tri(n)?)
        }
        (Domain::LShape, CellKind::Rectangle) => Err(VerifyError::UnsupportedDomain { family, domain }),
    }
}

/// Position of a discrete eigenvalue relative to its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundFlag {
    Below,
    Above,
    /// Within the reference uncertainty (or rounding, for analytic values).
    Inconclusive,
}

impl BoundFlag {
    pub fn name(self) -> &'static str {
        match self {
            BoundFlag::Below => "below",
            BoundFlag::Above => "above",
            BoundFlag::Inconclusive => "inconclusive",
        }
    }

    fn classify(lambda_h: f64, reference: f64, uncertainty: f64) -> BoundFlag {
        let band = uncertainty.max(1e-12 * reference.abs());
        if lambda_h < reference - band {
            BoundFlag::Below
        } else if lambda_h > reference + band {
            BoundFlag::Above
        } else {
            BoundFlag::Inconclusive
        }
    }
}

impl fmt::Display for BoundFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything that determines a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub domain: Domain,
    pub family: ElementFamily,
    /// Subdivisions per unit length, each twice the previous.
    pub levels: Vec<usize>,
    pub k: usize,
    pub boundary: BoundarySpec,
    /// Constant density.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub n: usize,
    pub h_max: f64,
    pub n_dofs: usize,
    pub eigenvalues: Vec<f64>,
    pub flags: Vec<BoundFlag>,
    /// `||u - u_h||_h` against the projection onto the reference eigenspace.
    pub energy_errors: Vec<Option<f64>>,
    pub l2_errors: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub reference: ReferenceSpectrum,
    pub levels: Vec<LevelRow>,
    /// Least-squares slope of `log |lambda_h - lambda|` against `log h`,
    /// per eigenvalue; only with at least three levels.
    pub rates: Vec<Option<f64>>,
    /// Coarsest level from which every finer level lies on the family's
    /// expected side (below for nonconforming, above for conforming).
    pub bound_onset: Vec<Option<usize>>,
}

impl StudyReport {
    /// The side of the reference the family is expected to approach from.
    pub fn expected_flag(&self) -> BoundFlag {
        if self.config.family.is_conforming() {
            BoundFlag::Above
        } else {
            BoundFlag::Below
        }
    }

    pub fn all_flags(&self, flag: BoundFlag) -> bool {
        self.levels.iter().all(|l| l.flags.iter().all(|&f| f == flag))
    }
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_rate(hs: &[f64], errors: &[f64]) -> Result<f64, VerifyError> {
    if hs.len() != errors.len() || hs.len() < 2 {
        return Err(VerifyError::RateUndefined(format!("{} sizes for {} errors", hs.len(), errors.len())));
    }
    if let Some(e) = hs.iter().chain(errors).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(VerifyError::RateUndefined(format!("non-positive entry {e}")));
    }
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(VerifyError::RateUndefined("all mesh sizes are equal".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Solves on every level, flags each eigenvalue against the reference and
/// fits convergence rates.
pub fn run_study(config: &StudyConfig, reference: &ReferenceSpectrum) -> Result<StudyReport, VerifyError> {
    let k = config.k;
    if reference.len() < k {
        return Err(VerifyError::InsufficientReference { needed: k, available: reference.len() });
    }
    if config.levels.is_empty() || config.levels.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(VerifyError::NotNested(config.levels.clone()));
    }
    let family = config.family;
    let mut rows = Vec::with_capacity(config.levels.len());
    for &n in &config.levels {
        let mesh = domain_mesh(config.domain, family, n, config.boundary)?;
        let dofmap = build_dofmap(&mesh, family)?;
        let rho = vec![config.rho; mesh.num_cells()];
        let (a, m) = assemble(&mesh, &dofmap, &rho)?;
        let result = solve_generalized(&a, &m, k)?;
        let flags = (0..k)
            .map(|j| BoundFlag::classify(result.eigenvalues[j], reference.values[j], reference.uncertainty[j]))
            .collect();
        let mut energy_errors = vec![None; k];
        let mut l2_errors = vec![None; k];
        for j in 0..k {
            let space = reference.eigenspace(j);
            if space.is_empty() {
                continue;
            }
            let uh = DiscreteField::new(&mesh, &dofmap, &result.eigenvectors[j])?;
            let target = project_onto(&mesh, &rho, &uh, &space)?;
            energy_errors[j] = Some(broken_energy_distance(&mesh, family, &target, &uh)?);
            l2_errors[j] = Some(l2_rho_distance(&mesh, &rho, &target, &uh)?);
        }
        rows.push(LevelRow {
            n,
            h_max: mesh.h_max(),
            n_dofs: dofmap.n_dofs(),
            eigenvalues: result.eigenvalues,
            flags,
            energy_errors,
            l2_errors,
        });
    }

    let rates = (0..k)
        .map(|j| {
            if rows.len() < 3 {
                return None;
            }
            let hs: Vec<f64> = rows.iter().map(|r| r.h_max).collect();
            let errs: Vec<f64> = rows.iter().map(|r| (r.eigenvalues[j] - reference.values[j]).abs()).collect();
            fit_rate(&hs, &errs).ok()
        })
        .collect();
    let expected = if family.is_conforming() { BoundFlag::Above } else { BoundFlag::Below };
    let bound_onset = (0..k)
        .map(|j| {
            let tail = rows.iter().rev().take_while(|r| r.flags[j] == expected).count();
            (tail > 0).then(|| rows[rows.len() - tail].n)
        })
        .collect();
    Ok(StudyReport { config: config.clone(), reference: reference.clone(), levels: rows, rates, bound_onset })
}

/// Weighted L2 projection of `uh` onto the span of orthonormal modes,
/// rescaled to unit norm.
fn project_onto(
    mesh: &Mesh,
    rho: &[f64],
    uh: &DiscreteField,
    space: &[SquareMode],
) -> Result<ModeCombination, VerifyError> {
    let mut c = vec![0.0; space.len()];
    for (cell, &r) in rho.iter().enumerate() {
        for (x, w) in CellGeometry::of_cell(mesh, cell)?.quadrature(FIELD_QUADRATURE_DEGREE)? {
            let v = uh.jet_on(cell, x).value;
            for (ci, mode) in c.iter_mut().zip(space) {
                *ci += w * r * v * mode.jet(x, Some(cell)).value;
            }
        }
    }
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    Ok(ModeCombination { terms: c.iter().zip(space).map(|(ci, m)| (ci * scale, *m)).collect() })
}

impl ReferenceSpectrum {
    /// The same spectrum for the constant density `rho`: eigenvalues and
    /// uncertainties divide by `rho`, modes are renormalized.
    pub fn for_density(&self, rho: f64) -> ReferenceSpectrum {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v /= rho);
        out.uncertainty.iter_mut().for_each(|v| *v /= rho);
        for (l, m) in &mut out.modes {
            *l /= rho;
            m.x.amplitude /= rho.sqrt();
        }
        out
    }

    pub fn is_analytic(&self) -> bool {
        self.provenance == Provenance::Analytic
    }
}
