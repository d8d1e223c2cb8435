//! Conforming 2D meshes of triangles or axis-aligned rectangles.
//!
//! Cells are stored counterclockwise. The edge table is derived from the
//! cell table alone (sorted by vertex pair), so two meshes with the same
//! cells always share edge numbering regardless of cell order.

mod generate;
mod io;
mod validate;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{lshape_tri, refine_uniform, unit_square_quad, unit_square_tri};
pub use io::{read_mesh, write_mesh};
pub use validate::{validate, MeshDiagnostic};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeshError {
    #[error("InvalidSubdivision: subdivision count must be at least 1")]
    InvalidSubdivision,
    #[error("MeshFormat: line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("InvalidBoundarySpec: {0}")]
    InvalidBoundarySpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Triangle,
    Rectangle,
}

impl CellKind {
    pub fn vertex_count(self) -> usize {
        match self {
            CellKind::Triangle => 3,
            CellKind::Rectangle => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Triangle => "triangle",
            CellKind::Rectangle => "rectangle",
        }
    }
}

impl FromStr for CellKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "triangle" => Ok(CellKind::Triangle),
            "rectangle" => Ok(CellKind::Rectangle),
            other => Err(format!("unknown cell kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

impl BoundaryTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Interior => "interior",
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::Neumann => "neumann",
        }
    }
}

/// Boundary condition per side of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub left: BoundaryTag,
    pub right: BoundaryTag,
    pub bottom: BoundaryTag,
    pub top: BoundaryTag,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self::all(BoundaryTag::Dirichlet)
    }
}

impl BoundarySpec {
    pub fn all(tag: BoundaryTag) -> Self {
        Self { left: tag, right: tag, bottom: tag, top: tag }
    }

    pub fn is_all_dirichlet(&self) -> bool {
        *self == Self::all(BoundaryTag::Dirichlet)
    }

    pub fn has_dirichlet(&self) -> bool {
        [self.left, self.right, self.bottom, self.top].contains(&BoundaryTag::Dirichlet)
    }
}

impl fmt::Display for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "left={},right={},bottom={},top={}",
            self.left.name(),
            self.right.name(),
            self.bottom.name(),
            self.top.name()
        )
    }
}

/// Accepts `dirichlet`, `neumann`, or a comma list such as
/// `left=neumann,top=neumann` (unnamed sides stay Dirichlet).
impl FromStr for BoundarySpec {
    type Err = MeshError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_tag = |t: &str| match t.trim() {
            "dirichlet" | "d" => Ok(BoundaryTag::Dirichlet),
            "neumann" | "n" => Ok(BoundaryTag::Neumann),
            other => Err(MeshError::InvalidBoundarySpec(format!("unknown condition '{other}'"))),
        };
        let s = s.trim();
        if !s.contains('=') {
            return Ok(Self::all(parse_tag(s)?));
        }
        let mut spec = Self::default();
        for part in s.split(',') {
            let (side, tag) = part
                .split_once('=')
                .ok_or_else(|| MeshError::InvalidBoundarySpec(format!("expected side=condition, got '{part}'")))?;
            let tag = parse_tag(tag)?;
            match side.trim() {
                "left" => spec.left = tag,
                "right" => spec.right = tag,
                "bottom" => spec.bottom = tag,
                "top" => spec.top = tag,
                other => return Err(MeshError::InvalidBoundarySpec(format!("unknown side '{other}'"))),
            }
        }
        Ok(spec)
    }
}

/// Rule fixing the canonical direction of every edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EdgeOrientation {
    /// From the smaller vertex index to the larger one.
    #[default]
    Ascending,
    /// Reverse rule, used to check orientation independence downstream.
    Descending,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    kind: CellKind,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<Vec<(usize, i8)>>,
    edge_cells: Vec<Vec<usize>>,
    boundary_tags: Vec<BoundaryTag>,
    h_max: f64,
    orientation: EdgeOrientation,
}

impl Mesh {
    /// Builds the edge tables from the cells. Edges touched by a single cell
    /// are tagged by `tag_boundary(start, end)`; the closure should return
    /// `Dirichlet` or `Neumann` for them.
    pub fn from_cells<F>(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        kind: CellKind,
        orientation: EdgeOrientation,
        mut tag_boundary: F,
    ) -> Self
    where
        F: FnMut(Point, Point) -> BoundaryTag,
    {
        let mut pairs: Vec<[usize; 2]> = cells
            .iter()
            .flat_map(|c| local_edges(kind, c).into_iter().map(|[a, b]| [a.min(b), a.max(b)]))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        let index: HashMap<[usize; 2], usize> = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();

        let edges: Vec<[usize; 2]> = pairs
            .iter()
            .map(|&[a, b]| match orientation {
                EdgeOrientation::Ascending => [a, b],
                EdgeOrientation::Descending => [b, a],
            })
            .collect();

        let mut edge_cells = vec![Vec::new(); edges.len()];
        let cell_edges: Vec<Vec<(usize, i8)>> = cells
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                local_edges(kind, c)
                    .into_iter()
                    .map(|[a, b]| {
                        let e = index[&[a.min(b), a.max(b)]];
                        edge_cells[e].push(ci);
                        let sign = if edges[e] == [a, b] { 1 } else { -1 };
                        (e, sign)
                    })
                    .collect()
            })
            .collect();

        let boundary_tags = edges
            .iter()
            .zip(&edge_cells)
            .map(|(&[a, b], adj)| {
                if adj.len() == 1 {
                    tag_boundary(vertices[a], vertices[b])
                } else {
                    BoundaryTag::Interior
                }
            })
            .collect();

        let h_max = cells.iter().map(|c| diameter(&vertices, c)).fold(0.0, f64::max);

        Self { vertices, cells, kind, edges, cell_edges, edge_cells, boundary_tags, h_max, orientation }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    /// Edges with their canonical direction `[start, end]`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Per cell, per local edge: global edge index and +1 when the local
    /// counterclockwise direction matches the canonical one.
    pub fn cell_edges(&self) -> &[Vec<(usize, i8)>] {
        &self.cell_edges
    }

    pub fn edge_cells(&self) -> &[Vec<usize>] {
        &self.edge_cells
    }

    pub fn boundary_tags(&self) -> &[BoundaryTag] {
        &self.boundary_tags
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn orientation(&self) -> EdgeOrientation {
        self.orientation
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_vertices(&self, cell: usize) -> Vec<Point> {
        self.cells[cell].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Signed area (positive for counterclockwise cells).
    pub fn cell_area(&self, cell: usize) -> f64 {
        signed_area(&self.cell_vertices(cell))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    /// Vertices lying on at least one edge with the given tag.
    pub fn vertices_with_tag(&self, tag: BoundaryTag) -> Vec<bool> {
        let mut out = vec![false; self.vertices.len()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            if self.boundary_tags[e] == tag {
                out[a] = true;
                out[b] = true;
            }
        }
        out
    }

    /// Copy of this mesh with edges re-oriented by `orientation`.
    pub fn with_orientation(&self, orientation: EdgeOrientation) -> Self {
        let tags: HashMap<[usize; 2], BoundaryTag> = self
            .edges
            .iter()
            .zip(&self.boundary_tags)
            .map(|(&[a, b], &t)| ([a.min(b), a.max(b)], t))
            .collect();
        let lookup = self.vertex_lookup();
        Self::from_cells(self.vertices.clone(), self.cells.clone(), self.kind, orientation, |p, q| {
            let (a, b) = (lookup[&key(p)], lookup[&key(q)]);
            tags[&[a.min(b), a.max(b)]]
        })
    }

    /// Copy with cells reordered: new cell `i` is old cell `perm[i]`.
    pub fn permute_cells(&self, perm: &[usize]) -> Self {
        let cells = perm.iter().map(|&i| self.cells[i].clone()).collect();
        let tags: HashMap<[usize; 2], BoundaryTag> = self
            .edges
            .iter()
            .zip(&self.boundary_tags)
            .map(|(&[a, b], &t)| ([a.min(b), a.max(b)], t))
            .collect();
        let lookup = self.vertex_lookup();
        Self::from_cells(self.vertices.clone(), cells, self.kind, self.orientation, |p, q| {
            let (a, b) = (lookup[&key(p)], lookup[&key(q)]);
            tags[&[a.min(b), a.max(b)]]
        })
    }

    fn vertex_lookup(&self) -> HashMap<[u64; 2], usize> {
        self.vertices.iter().enumerate().map(|(i, &p)| (key(p), i)).collect()
    }
}

fn key(p: Point) -> [u64; 2] {
    [p[0].to_bits(), p[1].to_bits()]
}

/// Local edges in counterclockwise direction. Triangle edge `i` is opposite
/// vertex `i`; rectangle edges run bottom, right, top, left.
pub fn local_edges(kind: CellKind, cell: &[usize]) -> Vec<[usize; 2]> {
    match kind {
        CellKind::Triangle => (0..3).map(|i| [cell[(i + 1) % 3], cell[(i + 2) % 3]]).collect(),
        CellKind::Rectangle => (0..4).map(|i| [cell[i], cell[(i + 1) % 4]]).collect(),
    }
}

/// Local vertex indices `[start, end]` of local edge `i` (counterclockwise).
pub fn local_edge_vertices(kind: CellKind, i: usize) -> [usize; 2] {
    match kind {
        CellKind::Triangle => [(i + 1) % 3, (i + 2) % 3],
        CellKind::Rectangle => [i, (i + 1) % 4],
    }
}

pub(crate) fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

fn diameter(vertices: &[Point], cell: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in cell.iter().enumerate() {
        for &b in &cell[i + 1..] {
            let (p, q) = (vertices[a], vertices[b]);
            d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_spec_parsing() {
        let s: BoundarySpec = "left=neumann,top=neumann".parse().unwrap();
        assert_eq!(s.left, BoundaryTag::Neumann);
        assert_eq!(s.right, BoundaryTag::Dirichlet);
        assert_eq!(s.top, BoundaryTag::Neumann);
        assert!("neumann".parse::<BoundarySpec>().unwrap() == BoundarySpec::all(BoundaryTag::Neumann));
        assert!("middle=neumann".parse::<BoundarySpec>().is_err());
        assert!("left=robin".parse::<BoundarySpec>().is_err());
        let round: BoundarySpec = s.to_string().parse().unwrap();
        assert_eq!(round, s);
    }

    #[test]
    fn orientation_flip_reverses_every_edge() {
        let m = unit_square_tri(2, BoundarySpec::default()).unwrap();
        let r = m.with_orientation(EdgeOrientation::Descending);
        assert_eq!(m.num_edges(), r.num_edges());
        for (e, f) in m.edges().iter().zip(r.edges()) {
            assert_eq!([e[1], e[0]], *f);
        }
        for (a, b) in m.cell_edges().iter().zip(r.cell_edges()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.0, y.0);
                assert_eq!(x.1, -y.1);
            }
        }
        assert_eq!(m.boundary_tags(), r.boundary_tags());
    }
}
