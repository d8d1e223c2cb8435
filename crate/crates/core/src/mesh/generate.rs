use std::collections::HashMap;

use super::{BoundarySpec, BoundaryTag, CellKind, Mesh, MeshError, Point};

fn side_tag(bc: &BoundarySpec, p: Point, q: Point) -> BoundaryTag {
    if p[0] == 0.0 && q[0] == 0.0 {
        bc.left
    } else if p[0] == 1.0 && q[0] == 1.0 {
        bc.right
    } else if p[1] == 0.0 && q[1] == 0.0 {
        bc.bottom
    } else if p[1] == 1.0 && q[1] == 1.0 {
        bc.top
    } else {
        BoundaryTag::Dirichlet
    }
}

fn square_grid(n: usize) -> Vec<Point> {
    let nf = n as f64;
    (0..=n).flat_map(|j| (0..=n).map(move |i| [i as f64 / nf, j as f64 / nf])).collect()
}

/// `n x n` squares on `[0,1]^2`, each split by its lower-left to upper-right
/// diagonal.
pub fn unit_square_tri(n: usize, bc: BoundarySpec) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidSubdivision);
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.push(vec![a, b, c]);
            cells.push(vec![a, c, d]);
        }
    }
    Ok(Mesh::from_cells(square_grid(n), cells, CellKind::Triangle, Default::default(), |p, q| {
        side_tag(&bc, p, q)
    }))
}

/// `n x n` axis-aligned squares on `[0,1]^2`.
pub fn unit_square_quad(n: usize, bc: BoundarySpec) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidSubdivision);
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let cells = (0..n)
        .flat_map(|j| (0..n).map(move |i| vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]))
        .collect();
    Ok(Mesh::from_cells(square_grid(n), cells, CellKind::Rectangle, Default::default(), |p, q| {
        side_tag(&bc, p, q)
    }))
}

/// L-shaped domain `[-1,1]^2 \ [0,1]x[-1,0]` with grid spacing `1/n`,
/// all boundary Dirichlet.
pub fn lshape_tri(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidSubdivision);
    }
    let m = 2 * n;
    let nf = n as f64;
    let coord = |i: usize| (i as f64 - nf) / nf;
    let removed_point = |i: usize, j: usize| i > n && j < n;
    let mut index = vec![usize::MAX; (m + 1) * (m + 1)];
    let mut vertices = Vec::new();
    for j in 0..=m {
        for i in 0..=m {
            if !removed_point(i, j) {
                index[j * (m + 1) + i] = vertices.len();
                vertices.push([coord(i), coord(j)]);
            }
        }
    }
    let id = |i: usize, j: usize| index[j * (m + 1) + i];
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..m {
        for i in 0..m {
            if i >= n && j < n {
                continue;
            }
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.push(vec![a, b, c]);
            cells.push(vec![a, c, d]);
        }
    }
    Ok(Mesh::from_cells(vertices, cells, CellKind::Triangle, Default::default(), |_, _| BoundaryTag::Dirichlet))
}

/// Splits every cell into four similar children through edge midpoints
/// (and cell centers for rectangles). Boundary tags are inherited.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let nv = mesh.num_vertices();
    let ne = mesh.num_edges();
    let mut vertices = mesh.vertices().to_vec();
    for &[a, b] in mesh.edges() {
        let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
        vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
    }
    let mid = |cell: usize, local: usize| nv + mesh.cell_edges()[cell][local].0;

    let mut cells = Vec::with_capacity(4 * mesh.num_cells());
    match mesh.kind() {
        CellKind::Triangle => {
            for (ci, c) in mesh.cells().iter().enumerate() {
                // local edge i is opposite vertex i
                let (m0, m1, m2) = (mid(ci, 0), mid(ci, 1), mid(ci, 2));
                cells.push(vec![c[0], m2, m1]);
                cells.push(vec![m2, c[1], m0]);
                cells.push(vec![m1, m0, c[2]]);
                cells.push(vec![m0, m1, m2]);
            }
        }
        CellKind::Rectangle => {
            for (ci, c) in mesh.cells().iter().enumerate() {
                let pts = mesh.cell_vertices(ci);
                let center = nv + ne + ci;
                vertices.push([
                    0.25 * pts.iter().map(|p| p[0]).sum::<f64>(),
                    0.25 * pts.iter().map(|p| p[1]).sum::<f64>(),
                ]);
                let (m0, m1, m2, m3) = (mid(ci, 0), mid(ci, 1), mid(ci, 2), mid(ci, 3));
                cells.push(vec![c[0], m0, center, m3]);
                cells.push(vec![m0, c[1], m1, center]);
                cells.push(vec![center, m1, c[2], m2]);
                cells.push(vec![m3, center, m2, c[3]]);
            }
        }
    }

    let mut inherited: HashMap<[usize; 2], BoundaryTag> = HashMap::new();
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let tag = mesh.boundary_tags()[e];
        if tag != BoundaryTag::Interior {
            let m = nv + e;
            inherited.insert([a.min(m), a.max(m)], tag);
            inherited.insert([b.min(m), b.max(m)], tag);
        }
    }
    let lookup: HashMap<[u64; 2], usize> =
        vertices.iter().enumerate().map(|(i, p)| ([p[0].to_bits(), p[1].to_bits()], i)).collect();
    Mesh::from_cells(vertices.clone(), cells, mesh.kind(), mesh.orientation(), |p, q| {
        let a = lookup[&[p[0].to_bits(), p[1].to_bits()]];
        let b = lookup[&[q[0].to_bits(), q[1].to_bits()]];
        inherited.get(&[a.min(b), a.max(b)]).copied().unwrap_or(BoundaryTag::Dirichlet)
    })
}
