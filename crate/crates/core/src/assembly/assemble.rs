use crate::elements::{CellGeometry, LocalBasis};
use crate::mesh::Mesh;

use super::{AssemblyError, DofMap, SymmetricSparseMatrix};

/// Assembles the stiffness matrix `A` and the weighted mass matrix `M` on
/// the free DOFs, with `rho` constant on each cell.
pub fn assemble(
    mesh: &Mesh,
    dofmap: &DofMap,
    rho_per_cell: &[f64],
) -> Result<(SymmetricSparseMatrix, SymmetricSparseMatrix), AssemblyError> {
    let family = dofmap.family();
    if mesh.kind() != family.cell_kind() || dofmap.num_cells() != mesh.num_cells() {
        return Err(AssemblyError::IncompatibleMesh { family, kind: mesh.kind() });
    }
    if rho_per_cell.len() != mesh.num_cells() {
        return Err(AssemblyError::DimensionMismatch { expected: mesh.num_cells(), found: rho_per_cell.len() });
    }
    if rho_per_cell.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(AssemblyError::NonPositiveDensity);
    }

    let n = dofmap.n_dofs();
    let nl = family.local_dim();
    let mut ta = Vec::with_capacity(mesh.num_cells() * nl * (nl + 1) / 2);
    let mut tm = Vec::with_capacity(ta.capacity());
    for c in 0..mesh.num_cells() {
        let basis = LocalBasis::new(family, CellGeometry::of_cell(mesh, c)?)?;
        let k = basis.stiffness(1.0)?;
        let m = basis.mass(rho_per_cell[c])?;
        let map: Vec<Option<(usize, f64)>> =
            dofmap.cell_dofs(c).iter().map(|&(a, s)| dofmap.free_index(a).map(|f| (f, s))).collect();
        for i in 0..nl {
            let Some((gi, si)) = map[i] else { continue };
            for j in 0..nl {
                let Some((gj, sj)) = map[j] else { continue };
                if gj > gi {
                    continue;
                }
                let s = si * sj;
                ta.push((gi, gj, s * k.get(i, j)));
                tm.push((gi, gj, s * m.get(i, j)));
            }
        }
    }
    Ok((SymmetricSparseMatrix::from_triplets(n, ta), SymmetricSparseMatrix::from_triplets(n, tm)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::build_dofmap;
    use crate::elements::{local_stiffness, ElementFamily, ALL_FAMILIES};
    use crate::mesh::{
        refine_uniform, unit_square_quad, unit_square_tri, BoundarySpec, BoundaryTag, CellKind, EdgeOrientation,
    };

    fn neumann() -> BoundarySpec {
        BoundarySpec::all(BoundaryTag::Neumann)
    }

    fn mesh_for(f: ElementFamily, n: usize, bc: BoundarySpec) -> Mesh {
        match f.cell_kind() {
            CellKind::Triangle => unit_square_tri(n, bc).unwrap(),
            CellKind::Rectangle => unit_square_quad(n, bc).unwrap(),
        }
    }

    fn ones(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    #[test]
    fn dof_counts() {
        let m = unit_square_tri(2, BoundarySpec::default()).unwrap();
        assert_eq!(build_dofmap(&m, ElementFamily::Cr).unwrap().n_dofs(), 8);
        assert_eq!(build_dofmap(&m, ElementFamily::EnrichedCr).unwrap().n_dofs(), 16);
        assert_eq!(build_dofmap(&m, ElementFamily::P1Conforming).unwrap().n_dofs(), 1);
        assert_eq!(build_dofmap(&m, ElementFamily::P2nc).unwrap().n_dofs(), 8 + 24);
        assert_eq!(build_dofmap(&m, ElementFamily::Morley).unwrap().n_dofs(), 1 + 8);
        let q = unit_square_quad(2, BoundarySpec::default()).unwrap();
        assert_eq!(build_dofmap(&q, ElementFamily::Wilson).unwrap().n_dofs(), 1 + 8);
        assert_eq!(build_dofmap(&q, ElementFamily::BognerFoxSchmit).unwrap().n_dofs(), 4);
        assert!(matches!(build_dofmap(&q, ElementFamily::Cr), Err(AssemblyError::IncompatibleMesh { .. })));
        let mixed = unit_square_tri(2, "left=neumann".parse().unwrap()).unwrap();
        assert!(matches!(build_dofmap(&mixed, ElementFamily::Morley), Err(AssemblyError::UnsupportedBoundary(_))));
    }

    #[test]
    fn single_cell_matches_local_matrix() {
        let m = unit_square_quad(1, neumann()).unwrap();
        let d = build_dofmap(&m, ElementFamily::RotatedQ1).unwrap();
        let (a, _) = assemble(&m, &d, &[1.0]).unwrap();
        let k = local_stiffness(ElementFamily::RotatedQ1, &CellGeometry::of_cell(&m, 0).unwrap(), 1.0).unwrap();
        let g: Vec<usize> = d.cell_dofs(0).iter().map(|&(a, _)| d.free_index(a).unwrap()).collect();
        for i in 0..4 {
            for j in 0..4 {
                assert!((a.get(g[i], g[j]) - k.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constants_for_neumann_second_order() {
        for f in ALL_FAMILIES.iter().copied().filter(|f| f.operator_order() == 1) {
            let m = mesh_for(f, 3, neumann());
            let d = build_dofmap(&m, f).unwrap();
            let (a, mm) = assemble(&m, &d, &vec![1.0; m.num_cells()]).unwrap();
            // the constant 1: value and mean DOFs are 1, second-derivative
            // means 0, barycentric moments 1/3
            let mut x = ones(d.n_dofs());
            for (i, xi) in x.iter_mut().enumerate() {
                if matches!(d.owner(d.all_index(i)).0, super::super::Entity::Cell(_)) {
                    match f {
                        ElementFamily::Wilson => *xi = 0.0,
                        ElementFamily::P2nc => *xi = 1.0 / 3.0,
                        _ => {}
                    }
                }
            }
            assert!(a.mul_vec(&x).iter().all(|v| v.abs() < 1e-12), "{f}");
            assert!((mm.quadratic_form(&x) - 1.0).abs() < 1e-12, "{f}");
        }
    }

    #[test]
    fn assembled_matrices_are_definite() {
        for f in ALL_FAMILIES {
            let m = mesh_for(f, 3, BoundarySpec::default());
            let d = build_dofmap(&m, f).unwrap();
            let (a, mm) = assemble(&m, &d, &vec![1.0; m.num_cells()]).unwrap();
            assert!(a.to_dense().cholesky().is_some(), "{f} A");
            assert!(mm.to_dense().cholesky().is_some(), "{f} M");
        }
    }

    #[test]
    fn refinement_grows_dofs() {
        let mut m = unit_square_tri(1, BoundarySpec::default()).unwrap();
        let mut last = build_dofmap(&m, ElementFamily::EnrichedCr).unwrap().n_dofs();
        for _ in 0..3 {
            m = refine_uniform(&m);
            let d = build_dofmap(&m, ElementFamily::EnrichedCr).unwrap();
            assert!(d.n_dofs() > last);
            last = d.n_dofs();
            let (_, mm) = assemble(&m, &d, &vec![1.0; m.num_cells()]).unwrap();
            assert!(mm.to_dense().cholesky().is_some());
        }
    }

    #[test]
    fn cell_permutation_gives_identical_matrices() {
        for f in [ElementFamily::Cr, ElementFamily::Morley, ElementFamily::Wilson] {
            let m = mesh_for(f, 3, BoundarySpec::default());
            let nc = m.num_cells();
            let perm: Vec<usize> = (0..nc).map(|i| (7 * i + 3) % nc).collect();
            let mut sorted = perm.clone();
            sorted.sort();
            assert_eq!(sorted, (0..nc).collect::<Vec<_>>());
            let p = m.permute_cells(&perm);
            let rho: Vec<f64> = (0..nc).map(|c| 1.0 + (c % 3) as f64).collect();
            let rho_p: Vec<f64> = perm.iter().map(|&c| rho[c]).collect();
            let (a, mm) = assemble(&m, &build_dofmap(&m, f).unwrap(), &rho).unwrap();
            let (ap, mp) = assemble(&p, &build_dofmap(&p, f).unwrap(), &rho_p).unwrap();
            if f == ElementFamily::Wilson {
                // cell DOFs follow the cells; compare spectra instead
                let ev = |x: &SymmetricSparseMatrix| {
                    let mut v: Vec<f64> = x.to_dense().symmetric_eigenvalues().iter().copied().collect();
                    v.sort_by(f64::total_cmp);
                    v
                };
                for (x, y) in ev(&a).iter().zip(ev(&ap)) {
                    assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
                }
            } else {
                assert_eq!(a, ap, "{f}");
                assert_eq!(mm, mp, "{f}");
            }
        }
    }

    #[test]
    fn morley_is_orientation_independent() {
        let m = unit_square_tri(4, BoundarySpec::default()).unwrap();
        let r = m.with_orientation(EdgeOrientation::Descending);
        let f = ElementFamily::Morley;
        let (a, mm) = assemble(&m, &build_dofmap(&m, f).unwrap(), &vec![1.0; m.num_cells()]).unwrap();
        let (ar, mr) = assemble(&r, &build_dofmap(&r, f).unwrap(), &vec![1.0; r.num_cells()]).unwrap();
        assert_ne!(a, ar);
        let spectrum = |a: &SymmetricSparseMatrix, m: &SymmetricSparseMatrix| {
            let l = m.to_dense().cholesky().unwrap();
            let li = l.l().try_inverse().unwrap();
            let c = &li * a.to_dense() * li.transpose();
            let mut v: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        };
        for (x, y) in spectrum(&a, &mm).iter().zip(spectrum(&ar, &mr)) {
            assert!((x - y).abs() <= 1e-10 * x.abs());
        }
    }

    #[test]
    fn density_validation() {
        let m = unit_square_tri(1, BoundarySpec::default()).unwrap();
        let d = build_dofmap(&m, ElementFamily::Cr).unwrap();
        assert!(matches!(assemble(&m, &d, &[1.0, 0.0]), Err(AssemblyError::NonPositiveDensity)));
        assert!(matches!(assemble(&m, &d, &[1.0]), Err(AssemblyError::DimensionMismatch { .. })));
    }
}
