use serde::Serialize;

use crate::assembly::DofMap;
use crate::elements::{CellGeometry, LocalBasis};
use crate::mesh::Mesh;

use super::interpolate::{difference, energy_density, interpolate_canonical, FIELD_QUADRATURE_DEGREE};
use super::{ScalarField, VerifyError};

/// Normalization tolerance on `||rho^{1/2} u||^2 = 1`.
const NORMALIZATION_TOLERANCE: f64 = 1e-8;

/// Terms of the expansion
/// `lambda - lambda_h = ||u - u_h||_h^2 - lambda_h ||rho^{1/2}(P u - u_h)||^2
///   + lambda_h (||rho^{1/2} P u||^2 - ||rho^{1/2} u||^2)`
/// with `P` the canonical interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `||u - u_h||_h^2`.
    pub energy_error: f64,
    /// `lambda_h ||rho^{1/2}(P u - u_h)||^2`.
    pub interpolation_gap: f64,
    /// `lambda_h (||rho^{1/2} P u||^2 - ||rho^{1/2} u||^2)`.
    pub norm_defect: f64,
    /// `energy_error - interpolation_gap + norm_defect`.
    pub rhs: f64,
    /// `lambda - lambda_h`.
    pub lhs: f64,
    /// `|lhs - rhs|`.
    pub residual: f64,
}

impl IdentityReport {
    /// The energy error outweighs the other two terms together.
    pub fn energy_dominates(&self) -> bool {
        self.energy_error >= self.interpolation_gap + self.norm_defect.abs()
    }
}

/// Evaluates every term by cell quadrature of the highest degree. `u_h` is
/// a free-DOF vector; both `u_ref` and `u_h` must have unit weighted L2
/// norm and be sign-aligned.
#[allow(clippy::too_many_arguments)]
pub fn eigen_identity_residual(
    mesh: &Mesh,
    dofmap: &DofMap,
    rho_per_cell: &[f64],
    lambda_ref: f64,
    u_ref: &dyn ScalarField,
    lambda_h: f64,
    u_h: &[f64],
) -> Result<IdentityReport, VerifyError> {
    if rho_per_cell.len() != mesh.num_cells() {
        return Err(VerifyError::DimensionMismatch { expected: mesh.num_cells(), found: rho_per_cell.len() });
    }
    if u_h.len() != dofmap.n_dofs() {
        return Err(VerifyError::DimensionMismatch { expected: dofmap.n_dofs(), found: u_h.len() });
    }
    let family = dofmap.family();
    let m = family.operator_order();
    let pi_u = interpolate_canonical(mesh, dofmap, u_ref)?.all;
    let u_h_all = dofmap.extend(u_h);

    let (mut energy, mut gap, mut pi_norm, mut u_norm, mut uh_norm) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (c, &rho) in rho_per_cell.iter().enumerate() {
        let basis = LocalBasis::new(family, CellGeometry::of_cell(mesh, c)?)?;
        let ch = dofmap.local_coefficients_all(c, &u_h_all);
        let cp = dofmap.local_coefficients_all(c, &pi_u);
        for (x, w) in basis.geometry().quadrature(FIELD_QUADRATURE_DEGREE)? {
            let ju = u_ref.jet(x, Some(c));
            let jh = basis.combine(&ch, x);
            let p = basis.combine(&cp, x).value;
            let d = difference(&ju, &jh);
            energy += w * energy_density(m, &d, &d);
            gap += w * rho * (p - jh.value).powi(2);
            pi_norm += w * rho * p * p;
            u_norm += w * rho * ju.value * ju.value;
            uh_norm += w * rho * jh.value * jh.value;
        }
    }
    for norm in [u_norm, uh_norm] {
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(VerifyError::NotNormalized(norm));
        }
    }
    let interpolation_gap = lambda_h * gap;
    let norm_defect = lambda_h * (pi_norm - u_norm);
    let rhs = energy - interpolation_gap + norm_defect;
    let lhs = lambda_ref - lambda_h;
    Ok(IdentityReport { energy_error: energy, interpolation_gap, norm_defect, rhs, lhs, residual: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_dofmap};
    use crate::eigensolve::{normalize_sign, solve_generalized};
    use crate::elements::ElementFamily;
    use crate::mesh::{unit_square_tri, BoundarySpec};
    use crate::verify::{DiscreteField, SquareMode};

    #[test]
    fn identity_balances_for_crouzeix_raviart() {
        let mesh = unit_square_tri(8, BoundarySpec::default()).unwrap();
        let d = build_dofmap(&mesh, ElementFamily::Cr).unwrap();
        let rho = vec![1.0; mesh.num_cells()];
        let (a, m) = assemble(&mesh, &d, &rho).unwrap();
        let u = SquareMode::dirichlet(1, 1);
        let pi = interpolate_canonical(&mesh, &d, &u).unwrap();
        let r = normalize_sign(&solve_generalized(&a, &m, 1).unwrap(), &m, &pi.free).unwrap();
        let rep = eigen_identity_residual(&mesh, &d, &rho, u.eigenvalue(), &u, r.eigenvalues[0], &r.eigenvectors[0])
            .unwrap();
        assert!(rep.residual <= 1e-6 * u.eigenvalue(), "{rep:?}");
        assert!(rep.lhs > 0.0);
        assert!(rep.energy_dominates());

        let f = DiscreteField::new(&mesh, &d, &r.eigenvectors[0]).unwrap();
        let own = eigen_identity_residual(&mesh, &d, &rho, r.eigenvalues[0], &f, r.eigenvalues[0], &r.eigenvectors[0])
            .unwrap();
        assert!(own.residual <= 1e-12 && own.energy_error.abs() <= 1e-12, "{own:?}");
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let mesh = unit_square_tri(2, BoundarySpec::default()).unwrap();
        let d = build_dofmap(&mesh, ElementFamily::Cr).unwrap();
        let rho = vec![1.0; mesh.num_cells()];
        let u = SquareMode::dirichlet(1, 1);
        let e = eigen_identity_residual(&mesh, &d, &rho, 1.0, &u, 1.0, &vec![0.0; d.n_dofs()]);
        assert!(matches!(e, Err(VerifyError::NotNormalized(_))));
    }
}
