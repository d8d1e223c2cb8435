use crate::elements::{DofKind, ElementFamily, LocalEntity};
use crate::mesh::{BoundaryTag, Mesh};

use super::AssemblyError;

/// Mesh entity owning a global degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entity {
    Vertex(usize),
    Edge(usize),
    Cell(usize),
}

/// Global numbering of degrees of freedom.
///
/// Every entity DOF gets an index in the full numbering (vertices, then
/// edges, then cells, each in index order); Dirichlet-constrained ones are
/// then dropped to form the free numbering used by the matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    family: ElementFamily,
    owners: Vec<(Entity, usize)>,
    all_to_free: Vec<Option<usize>>,
    free_to_all: Vec<usize>,
    cell_dofs: Vec<Vec<(usize, f64)>>,
}

fn per_entity_counts(dofs: &[DofKind]) -> (usize, usize, usize) {
    let count = |pred: fn(LocalEntity) -> bool| dofs.iter().filter(|d| pred(d.entity())).count();
    let nv = count(|e| e == LocalEntity::Vertex(0));
    let ne = count(|e| e == LocalEntity::Edge(0));
    let nc = count(|e| e == LocalEntity::Cell);
    (nv, ne, nc)
}

impl DofMap {
    pub fn new(mesh: &Mesh, family: ElementFamily) -> Result<Self, AssemblyError> {
        if mesh.kind() != family.cell_kind() {
            return Err(AssemblyError::IncompatibleMesh { family, kind: mesh.kind() });
        }
        let fourth_order = family.operator_order() == 2;
        if fourth_order && mesh.boundary_tags().contains(&BoundaryTag::Neumann) {
            return Err(AssemblyError::UnsupportedBoundary(format!(
                "{family} supports only the fully clamped boundary"
            )));
        }

        let dofs = family.dof_kinds();
        let (vd, ed, cd) = per_entity_counts(&dofs);
        let (nv, ne, nc) = (mesh.num_vertices(), mesh.num_edges(), mesh.num_cells());
        let edge_base = nv * vd;
        let cell_base = edge_base + ne * ed;
        let n_all = cell_base + nc * cd;

        let mut owners = Vec::with_capacity(n_all);
        owners.extend((0..nv).flat_map(|v| (0..vd).map(move |s| (Entity::Vertex(v), s))));
        owners.extend((0..ne).flat_map(|e| (0..ed).map(move |s| (Entity::Edge(e), s))));
        owners.extend((0..nc).flat_map(|c| (0..cd).map(move |s| (Entity::Cell(c), s))));

        // slot of each local DOF within its entity
        let mut slots = Vec::with_capacity(dofs.len());
        for (i, d) in dofs.iter().enumerate() {
            slots.push(dofs[..i].iter().filter(|x| x.entity() == d.entity()).count());
        }

        let dirichlet_vertex = mesh.vertices_with_tag(BoundaryTag::Dirichlet);
        let mut constrained = vec![false; n_all];
        let cell_dofs: Vec<Vec<(usize, f64)>> = (0..nc)
            .map(|c| {
                let cell = &mesh.cells()[c];
                let edges = &mesh.cell_edges()[c];
                dofs.iter()
                    .zip(&slots)
                    .map(|(&d, &slot)| {
                        let (index, sign, fixed) = match d.entity() {
                            LocalEntity::Vertex(lv) => {
                                let v = cell[lv];
                                (v * vd + slot, 1.0, dirichlet_vertex[v])
                            }
                            LocalEntity::Edge(le) => {
                                let (e, s) = edges[le];
                                let sign = if d.is_oriented() { f64::from(s) } else { 1.0 };
                                let fixed = mesh.boundary_tags()[e] == BoundaryTag::Dirichlet;
                                (edge_base + e * ed + slot, sign, fixed)
                            }
                            LocalEntity::Cell => (cell_base + c * cd + slot, 1.0, false),
                        };
                        if fixed {
                            constrained[index] = true;
                        }
                        (index, sign)
                    })
                    .collect()
            })
            .collect();

        let mut all_to_free = vec![None; n_all];
        let mut free_to_all = Vec::new();
        for (i, slot) in all_to_free.iter_mut().enumerate() {
            if !constrained[i] {
                *slot = Some(free_to_all.len());
                free_to_all.push(i);
            }
        }
        Ok(Self { family, owners, all_to_free, free_to_all, cell_dofs })
    }

    pub fn family(&self) -> ElementFamily {
        self.family
    }

    /// Number of free (unconstrained) degrees of freedom.
    pub fn n_dofs(&self) -> usize {
        self.free_to_all.len()
    }

    /// Number of degrees of freedom before eliminating Dirichlet constraints.
    pub fn n_all(&self) -> usize {
        self.all_to_free.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_dofs.len()
    }

    /// Per local DOF of `cell`: index in the full numbering and the sign
    /// relating the local functional to the global one.
    pub fn cell_dofs(&self, cell: usize) -> &[(usize, f64)] {
        &self.cell_dofs[cell]
    }

    pub fn free_index(&self, all: usize) -> Option<usize> {
        self.all_to_free[all]
    }

    pub fn all_index(&self, free: usize) -> usize {
        self.free_to_all[free]
    }

    /// Indices in the full numbering that are eliminated.
    pub fn constrained(&self) -> Vec<usize> {
        (0..self.n_all()).filter(|&i| self.all_to_free[i].is_none()).collect()
    }

    /// Owning entity and slot of a DOF in the full numbering.
    pub fn owner(&self, all: usize) -> (Entity, usize) {
        self.owners[all]
    }

    /// Local coefficient vector of `cell` from a free-DOF vector.
    pub fn local_coefficients(&self, cell: usize, free: &[f64]) -> Vec<f64> {
        self.cell_dofs[cell]
            .iter()
            .map(|&(a, s)| self.all_to_free[a].map_or(0.0, |f| s * free[f]))
            .collect()
    }

    /// Local coefficient vector of `cell` from a full-numbering vector.
    pub fn local_coefficients_all(&self, cell: usize, all: &[f64]) -> Vec<f64> {
        self.cell_dofs[cell].iter().map(|&(a, s)| s * all[a]).collect()
    }

    /// Restriction of a full-numbering vector to the free DOFs.
    pub fn restrict(&self, all: &[f64]) -> Vec<f64> {
        self.free_to_all.iter().map(|&a| all[a]).collect()
    }

    /// Extension of a free vector by zeros on constrained DOFs.
    pub fn extend(&self, free: &[f64]) -> Vec<f64> {
        self.all_to_free.iter().map(|f| f.map_or(0.0, |i| free[i])).collect()
    }
}

/// Builds the DOF map of `family` on `mesh`.
pub fn build_dofmap(mesh: &Mesh, family: ElementFamily) -> Result<DofMap, AssemblyError> {
    DofMap::new(mesh, family)
}
