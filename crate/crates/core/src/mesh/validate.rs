use std::fmt;

use super::{BoundaryTag, CellKind, Mesh};

/// One structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum MeshDiagnostic {
    VertexIndexOutOfRange { cell: usize, index: usize },
    NonPositiveArea { cell: usize, area: f64 },
    NotAxisAligned { cell: usize },
    NonManifoldEdge { edge: usize, cells: usize },
    UntaggedBoundaryEdge { edge: usize },
    TaggedInteriorEdge { edge: usize },
    EulerMismatch { vertices: usize, edges: usize, cells: usize },
}

impl fmt::Display for MeshDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::VertexIndexOutOfRange { cell, index } => {
                write!(f, "cell {cell}: vertex index {index} out of range")
            }
            Self::NonPositiveArea { cell, area } => write!(f, "cell {cell}: non-positive area {area}"),
            Self::NotAxisAligned { cell } => write!(f, "cell {cell}: rectangle is not axis-aligned"),
            Self::NonManifoldEdge { edge, cells } => write!(f, "edge {edge}: shared by {cells} cells"),
            Self::UntaggedBoundaryEdge { edge } => write!(f, "edge {edge}: boundary edge without a condition"),
            Self::TaggedInteriorEdge { edge } => write!(f, "edge {edge}: interior edge carries a boundary tag"),
            Self::EulerMismatch { vertices, edges, cells } => write!(
                f,
                "Euler characteristic V - E + F = {} - {} + {} is not 1",
                vertices, edges, cells
            ),
        }
    }
}

/// Checks cell orientation and shape, edge manifoldness, boundary tagging
/// and the Euler characteristic of a simply connected domain.
pub fn validate(mesh: &Mesh) -> Vec<MeshDiagnostic> {
    let mut out = Vec::new();
    let nv = mesh.num_vertices();
    let mut indices_ok = true;
    for (c, cell) in mesh.cells().iter().enumerate() {
        for &index in cell {
            if index >= nv {
                out.push(MeshDiagnostic::VertexIndexOutOfRange { cell: c, index });
                indices_ok = false;
            }
        }
    }
    if !indices_ok {
        return out;
    }

    for c in 0..mesh.num_cells() {
        let area = mesh.cell_area(c);
        if area <= 0.0 {
            out.push(MeshDiagnostic::NonPositiveArea { cell: c, area });
        }
        if mesh.kind() == CellKind::Rectangle {
            let p = mesh.cell_vertices(c);
            let aligned = p[0][1] == p[1][1] && p[1][0] == p[2][0] && p[2][1] == p[3][1] && p[3][0] == p[0][0];
            if !aligned {
                out.push(MeshDiagnostic::NotAxisAligned { cell: c });
            }
        }
    }

    for (e, adj) in mesh.edge_cells().iter().enumerate() {
        let tag = mesh.boundary_tags()[e];
        match adj.len() {
            1 if tag == BoundaryTag::Interior => out.push(MeshDiagnostic::UntaggedBoundaryEdge { edge: e }),
            2 if tag != BoundaryTag::Interior => out.push(MeshDiagnostic::TaggedInteriorEdge { edge: e }),
            1 | 2 => {}
            n => out.push(MeshDiagnostic::NonManifoldEdge { edge: e, cells: n }),
        }
    }

    let (v, e, f) = (nv, mesh.num_edges(), mesh.num_cells());
    if v + f != e + 1 {
        out.push(MeshDiagnostic::EulerMismatch { vertices: v, edges: e, cells: f });
    }
    out
}
