use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, build_dofmap};
use crate::eigensolve::solve_generalized;
use crate::elements::ElementFamily;
use crate::mesh::BoundarySpec;

use super::field::{Mode1d, SquareMode};
use super::study::{domain_mesh, Domain};
use super::VerifyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Extrapolated,
}

/// Reference eigenvalues, ascending, with their origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpectrum {
    pub values: Vec<f64>,
    pub provenance: Provenance,
    /// Zero for analytic values.
    pub uncertainty: Vec<f64>,
    /// Eigenpairs where known in closed form. Covers every eigenvalue equal
    /// to one of `values`, so degenerate eigenspaces are complete.
    pub modes: Vec<(f64, SquareMode)>,
}

impl ReferenceSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Closed-form eigenfunctions spanning the eigenspace of `values[j]`.
    pub fn eigenspace(&self, j: usize) -> Vec<SquareMode> {
        let l = self.values[j];
        self.modes.iter().filter(|m| (m.0 - l).abs() <= 1e-12 * l.abs().max(1.0)).map(|m| m.1).collect()
    }
}

/// First `k` Dirichlet Laplacian eigenvalues of the unit square,
/// `pi^2 (p^2 + q^2)` with `p, q >= 1`, repeated by multiplicity.
pub fn exact_square_spectrum(k: usize) -> ReferenceSpectrum {
    square_spectrum(k, BoundarySpec::default())
}

/// First `k` Laplacian eigenvalues of the unit square with the given
/// condition on each side.
pub fn square_spectrum(k: usize, bc: BoundarySpec) -> ReferenceSpectrum {
    // enough 1D modes per direction for the k smallest products
    let per = k + 1;
    let mut modes: Vec<(usize, usize, SquareMode)> = Vec::with_capacity(per * per);
    for p in 0..per {
        for q in 0..per {
            let x = Mode1d::for_sides(bc.left, bc.right, p);
            let y = Mode1d::for_sides(bc.bottom, bc.top, q);
            modes.push((p, q, SquareMode { x, y }));
        }
    }
    modes.sort_by(|a, b| a.2.eigenvalue().total_cmp(&b.2.eigenvalue()).then((a.0, a.1).cmp(&(b.0, b.1))));
    let values: Vec<f64> = modes.iter().take(k).map(|m| m.2.eigenvalue()).collect();
    let last = values.last().copied().unwrap_or(0.0);
    let kept: Vec<(f64, SquareMode)> = modes
        .iter()
        .map(|m| (m.2.eigenvalue(), m.2))
        .filter(|m| m.0 <= last + 1e-12 * last.abs().max(1.0))
        .collect();
    ReferenceSpectrum { uncertainty: vec![0.0; values.len()], values, provenance: Provenance::Analytic, modes: kept }
}

/// Three-level Richardson extrapolation of a monotone sequence with
/// geometric error decay. Returns the limit estimate and the uncertainty
/// `|last - limit|`.
pub fn richardson(sequence: &[f64]) -> Result<(f64, f64), VerifyError> {
    if sequence.len() < 3 {
        return Err(VerifyError::ExtrapolationUnreliable(format!(
            "{} levels given, at least 3 needed",
            sequence.len()
        )));
    }
    let diffs: Vec<f64> = sequence.windows(2).map(|w| w[0] - w[1]).collect();
    if diffs.iter().all(|&d| d == 0.0) {
        return Ok((sequence[sequence.len() - 1], 0.0));
    }
    let increasing = diffs.iter().all(|&d| d < 0.0);
    let decreasing = diffs.iter().all(|&d| d > 0.0);
    if !(increasing || decreasing) {
        return Err(VerifyError::ExtrapolationUnreliable(format!("sequence {sequence:?} is not monotone")));
    }
    let n = diffs.len();
    let ratio = diffs[n - 1] / diffs[n - 2];
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(VerifyError::ExtrapolationUnreliable(format!("contraction ratio {ratio} outside (0, 1)")));
    }
    let last = sequence[sequence.len() - 1];
    let limit = last - diffs[n - 1] * ratio / (1.0 - ratio);
    Ok((limit, (last - limit).abs()))
}

/// Reference spectrum from a conforming family on nested levels,
/// eigenvalue by eigenvalue.
pub fn extrapolated_reference(
    domain: Domain,
    bc: BoundarySpec,
    family: ElementFamily,
    levels: &[usize],
    k: usize,
) -> Result<ReferenceSpectrum, VerifyError> {
    if !family.is_conforming() {
        return Err(VerifyError::ExtrapolationUnreliable(format!("{family} is not conforming")));
    }
    if levels.len() < 3 {
        return Err(VerifyError::ExtrapolationUnreliable(format!("{} levels given, at least 3 needed", levels.len())));
    }
    let mut per_level = Vec::with_capacity(levels.len());
    for &n in levels {
        let mesh = domain_mesh(domain, family, n, bc)?;
        let dofmap = build_dofmap(&mesh, family)?;
        let (a, m) = assemble(&mesh, &dofmap, &vec![1.0; mesh.num_cells()])?;
        per_level.push(solve_generalized(&a, &m, k)?.eigenvalues);
    }
    let mut pairs = Vec::with_capacity(k);
    for j in 0..k {
        let seq: Vec<f64> = per_level.iter().map(|v| v[j]).collect();
        pairs.push(richardson(&seq)?);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ReferenceSpectrum {
        values: pairs.iter().map(|p| p.0).collect(),
        provenance: Provenance::Extrapolated,
        uncertainty: pairs.iter().map(|p| p.1).collect(),
        modes: Vec::new(),
    })
}
