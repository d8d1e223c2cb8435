use crate::assembly::{DofMap, SymmetricSparseMatrix};
use crate::eigensolve::solve_spd;
use crate::elements::{dof_functionals, CellGeometry, ElementFamily, Jet, LocalBasis, MAX_QUADRATURE_DEGREE};
use crate::mesh::Mesh;

use super::{ScalarField, VerifyError};

/// Cell quadrature degree for every integral involving a non-polynomial field.
pub const FIELD_QUADRATURE_DEGREE: usize = MAX_QUADRATURE_DEGREE;

/// Canonical interpolant in the full DOF numbering and on the free DOFs.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    pub all: Vec<f64>,
    pub free: Vec<f64>,
}

/// Energy density of order `m`: gradients dotted for `m = 1`, Hessians
/// contracted for `m = 2`.
pub(crate) fn energy_density(m: usize, a: &Jet, b: &Jet) -> f64 {
    if m == 1 {
        a.grad[0] * b.grad[0] + a.grad[1] * b.grad[1]
    } else {
        (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| a.hess[i][j] * b.hess[i][j]).sum()
    }
}

pub(crate) fn difference(a: &Jet, b: &Jet) -> Jet {
    let mut d = *a;
    d.add_scaled(-1.0, b);
    d
}

/// Sets every DOF to the family's functional applied to `u`. Shared DOFs
/// take the value computed on the first cell that sees them.
pub fn interpolate_canonical(mesh: &Mesh, dofmap: &DofMap, u: &dyn ScalarField) -> Result<Interpolant, VerifyError> {
    let family = dofmap.family();
    let mut all = vec![0.0; dofmap.n_all()];
    let mut set = vec![false; dofmap.n_all()];
    for c in 0..mesh.num_cells() {
        let geom = CellGeometry::of_cell(mesh, c)?;
        let values = dof_functionals(family, &geom, &|x| u.jet(x, Some(c)))?;
        for (&(a, s), v) in dofmap.cell_dofs(c).iter().zip(values) {
            if !set[a] {
                all[a] = s * v;
                set[a] = true;
            }
        }
    }
    let free = dofmap.restrict(&all);
    Ok(Interpolant { all, free })
}

/// Broken energy norm `||u - v||_h` of the family's operator order.
pub fn broken_energy_distance(
    mesh: &Mesh,
    family: ElementFamily,
    u: &dyn ScalarField,
    v: &dyn ScalarField,
) -> Result<f64, VerifyError> {
    let m = family.operator_order();
    let mut sum = 0.0;
    for c in 0..mesh.num_cells() {
        for (x, w) in CellGeometry::of_cell(mesh, c)?.quadrature(FIELD_QUADRATURE_DEGREE)? {
            let d = difference(&u.jet(x, Some(c)), &v.jet(x, Some(c)));
            sum += w * energy_density(m, &d, &d);
        }
    }
    Ok(sum.max(0.0).sqrt())
}

/// `||rho^{1/2} (u - v)||_{L2}` with `rho` constant per cell.
pub fn l2_rho_distance(
    mesh: &Mesh,
    rho_per_cell: &[f64],
    u: &dyn ScalarField,
    v: &dyn ScalarField,
) -> Result<f64, VerifyError> {
    if rho_per_cell.len() != mesh.num_cells() {
        return Err(VerifyError::DimensionMismatch { expected: mesh.num_cells(), found: rho_per_cell.len() });
    }
    let mut sum = 0.0;
    for (c, rho) in rho_per_cell.iter().enumerate() {
        for (x, w) in CellGeometry::of_cell(mesh, c)?.quadrature(FIELD_QUADRATURE_DEGREE)? {
            let d = u.jet(x, Some(c)).value - v.jet(x, Some(c)).value;
            sum += w * rho * d * d;
        }
    }
    Ok(sum.sqrt())
}

/// Families whose canonical interpolation is claimed to be
/// `a_h`-orthogonal to the discrete space.
fn interpolation_is_orthogonal(family: ElementFamily) -> bool {
    matches!(
        family,
        ElementFamily::Cr | ElementFamily::EnrichedCr | ElementFamily::EnrichedRotatedQ1 | ElementFamily::Morley
    )
}

/// `max_j |a_h(u - P u, phi_j)| / (||u||_h ||phi_j||_h)` over the free basis
/// functions, where `P` is the canonical interpolation, or for P2NC the
/// Galerkin projection onto the free space.
pub fn check_h4_orthogonality(mesh: &Mesh, dofmap: &DofMap, u: &dyn ScalarField) -> Result<f64, VerifyError> {
    let family = dofmap.family();
    let m = family.operator_order();
    let n = dofmap.n_dofs();
    let bases: Vec<LocalBasis> = (0..mesh.num_cells())
        .map(|c| Ok(LocalBasis::new(family, CellGeometry::of_cell(mesh, c)?)?))
        .collect::<Result<_, VerifyError>>()?;
    let rules: Vec<_> = bases
        .iter()
        .map(|b| b.geometry().quadrature(FIELD_QUADRATURE_DEGREE))
        .collect::<Result<_, _>>()?;

    // a_h(u, phi_j) and ||u||_h
    let mut load = vec![0.0; n];
    let mut u_norm2 = 0.0;
    for (c, (basis, rule)) in bases.iter().zip(&rules).enumerate() {
        for &(x, w) in rule {
            let ju = u.jet(x, Some(c));
            u_norm2 += w * energy_density(m, &ju, &ju);
            for (phi, &(a, s)) in basis.jets(x).iter().zip(dofmap.cell_dofs(c)) {
                if let Some(f) = dofmap.free_index(a) {
                    load[f] += s * w * energy_density(m, &ju, phi);
                }
            }
        }
    }

    let a_matrix = discrete_stiffness(&bases, &rules, dofmap, m);
    let projected_all = if interpolation_is_orthogonal(family) {
        interpolate_canonical(mesh, dofmap, u)?.all
    } else if family == ElementFamily::P2nc {
        dofmap.extend(&solve_spd(&a_matrix, &load)?)
    } else {
        return Err(VerifyError::OrthogonalityNotClaimed(family));
    };

    // a_h(P u, phi_j)
    let mut residual = load;
    for (c, (basis, rule)) in bases.iter().zip(&rules).enumerate() {
        let coeffs = dofmap.local_coefficients_all(c, &projected_all);
        for &(x, w) in rule {
            let jp = basis.combine(&coeffs, x);
            for (phi, &(a, s)) in basis.jets(x).iter().zip(dofmap.cell_dofs(c)) {
                if let Some(f) = dofmap.free_index(a) {
                    residual[f] -= s * w * energy_density(m, &jp, phi);
                }
            }
        }
    }
    let u_norm = u_norm2.sqrt();
    if u_norm == 0.0 {
        return Ok(0.0);
    }
    Ok((0..n)
        .map(|j| residual[j].abs() / (u_norm * a_matrix.get(j, j).sqrt()))
        .fold(0.0, f64::max))
}

/// Stiffness matrix on the free DOFs from the same quadrature as the loads.
fn discrete_stiffness(
    bases: &[LocalBasis],
    rules: &[Vec<([f64; 2], f64)>],
    dofmap: &DofMap,
    m: usize,
) -> SymmetricSparseMatrix {
    let mut t = Vec::new();
    for (c, (basis, rule)) in bases.iter().zip(rules).enumerate() {
        let map: Vec<Option<(usize, f64)>> =
            dofmap.cell_dofs(c).iter().map(|&(a, s)| dofmap.free_index(a).map(|f| (f, s))).collect();
        let nl = basis.dim();
        let mut local = vec![0.0; nl * nl];
        for &(x, w) in rule {
            let jets = basis.jets(x);
            for i in 0..nl {
                for j in 0..=i {
                    local[i * nl + j] += w * energy_density(m, &jets[i], &jets[j]);
                }
            }
        }
        for i in 0..nl {
            let Some((gi, si)) = map[i] else { continue };
            for j in 0..nl {
                let Some((gj, sj)) = map[j] else { continue };
                if gj <= gi {
                    let v = if j <= i { local[i * nl + j] } else { local[j * nl + i] };
                    t.push((gi, gj, si * sj * v));
                }
            }
        }
    }
    SymmetricSparseMatrix::from_triplets(dofmap.n_dofs(), t)
}
