use crate::mesh::{local_edge_vertices, signed_area, CellKind, Mesh, Point};

use super::quadrature::{gauss_legendre, quadrature};
use super::ElementError;

/// Geometry of one cell: the map from the reference cell, and the local
/// scaled coordinates in which shape functions are written.
///
/// Triangles map from `(0,0),(1,0),(0,1)` by the affine map with columns
/// `p1 - p0`, `p2 - p0`; local coordinates are `(x - centroid) / h_K`.
/// Rectangles map from `[-1,1]^2` by `x_i = h_i xi_i + x_i^0`, and the local
/// coordinates are `xi` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub kind: CellKind,
    pub vertices: Vec<Point>,
    pub center: Point,
    /// Divisors taking physical offsets to local coordinates.
    pub scale: [f64; 2],
    /// Columns of the Jacobian of the reference map.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    pub area: f64,
    pub diameter: f64,
}

impl CellGeometry {
    pub fn new(kind: CellKind, vertices: Vec<Point>) -> Result<Self, ElementError> {
        if vertices.len() != kind.vertex_count() {
            return Err(ElementError::DegenerateCell);
        }
        let area = signed_area(&vertices);
        let mut diameter: f64 = 0.0;
        for (i, p) in vertices.iter().enumerate() {
            for q in &vertices[i + 1..] {
                diameter = diameter.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        if !(area > 1e-14 * diameter * diameter) {
            return Err(ElementError::DegenerateCell);
        }
        let (center, scale, jacobian) = match kind {
            CellKind::Triangle => {
                let c = [
                    (vertices[0][0] + vertices[1][0] + vertices[2][0]) / 3.0,
                    (vertices[0][1] + vertices[1][1] + vertices[2][1]) / 3.0,
                ];
                let j = [
                    [vertices[1][0] - vertices[0][0], vertices[1][1] - vertices[0][1]],
                    [vertices[2][0] - vertices[0][0], vertices[2][1] - vertices[0][1]],
                ];
                (c, [diameter, diameter], j)
            }
            CellKind::Rectangle => {
                let hx = 0.5 * (vertices[1][0] - vertices[0][0]);
                let hy = 0.5 * (vertices[3][1] - vertices[0][1]);
                if !(hx > 0.0 && hy > 0.0) {
                    return Err(ElementError::DegenerateCell);
                }
                let c = [vertices[0][0] + hx, vertices[0][1] + hy];
                (c, [hx, hy], [[hx, 0.0], [0.0, hy]])
            }
        };
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[1][0] * jacobian[0][1];
        Ok(Self { kind, vertices, center, scale, jacobian, det, area, diameter })
    }

    pub fn of_cell(mesh: &Mesh, cell: usize) -> Result<Self, ElementError> {
        Self::new(mesh.kind(), mesh.cell_vertices(cell))
    }

    /// The reference cell itself.
    pub fn reference(kind: CellKind) -> Self {
        let v = match kind {
            CellKind::Triangle => vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            CellKind::Rectangle => vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
        };
        Self::new(kind, v).expect("reference cell is valid")
    }

    /// Reference point to physical point.
    pub fn map(&self, r: Point) -> Point {
        let o = match self.kind {
            CellKind::Triangle => self.vertices[0],
            CellKind::Rectangle => self.center,
        };
        [
            o[0] + self.jacobian[0][0] * r[0] + self.jacobian[1][0] * r[1],
            o[1] + self.jacobian[0][1] * r[0] + self.jacobian[1][1] * r[1],
        ]
    }

    /// Physical point to local scaled coordinates.
    pub fn to_local(&self, p: Point) -> Point {
        [(p[0] - self.center[0]) / self.scale[0], (p[1] - self.center[1]) / self.scale[1]]
    }

    /// Physical quadrature points and weights exact to `degree`.
    pub fn quadrature(&self, degree: usize) -> Result<Vec<(Point, f64)>, ElementError> {
        let rule = quadrature(self.kind, degree)?;
        let det = self.det.abs();
        Ok(rule.points.iter().zip(&rule.weights).map(|(&r, &w)| (self.map(r), w * det)).collect())
    }

    pub fn num_edges(&self) -> usize {
        self.vertices.len()
    }

    /// Counterclockwise endpoints of local edge `i`.
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let [a, b] = local_edge_vertices(self.kind, i);
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    /// Outward unit normal of local edge `i`.
    pub fn outward_normal(&self, i: usize) -> Point {
        let (a, b) = self.edge(i);
        let len = self.edge_length(i);
        [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]
    }

    /// Gauss points on local edge `i` with weights summing to one.
    pub fn edge_mean_rule(&self, i: usize, n: usize) -> Vec<(Point, f64)> {
        let (a, b) = self.edge(i);
        let (x, w) = gauss_legendre(n);
        x.iter()
            .zip(&w)
            .map(|(&s, &w)| {
                let t = 0.5 * (s + 1.0);
                ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], 0.5 * w)
            })
            .collect()
    }

    /// Barycentric coordinates of `p` (triangles only).
    pub fn barycentric(&self, p: Point) -> [f64; 3] {
        let v = &self.vertices;
        let l1 = signed_area(&[v[0], p, v[2]]) / self.area;
        let l2 = signed_area(&[v[0], v[1], p]) / self.area;
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        match self.kind {
            CellKind::Triangle => self.barycentric(p).iter().all(|&l| l >= -tol),
            CellKind::Rectangle => {
                let l = self.to_local(p);
                l[0].abs() <= 1.0 + tol && l[1].abs() <= 1.0 + tol
            }
        }
    }
}
