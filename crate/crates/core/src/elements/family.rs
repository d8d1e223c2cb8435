use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::mesh::CellKind;

use super::poly::Poly;

/// Finite element families. Triangle families write their shapes in
/// `(x - centroid) / h_K`; rectangle families in the reference variables of
/// `[-1,1]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ElementFamily {
    /// P1 with edge-mean degrees of freedom.
    Cr,
    /// P1 + span{x^2 + y^2}; edge means and the cell mean.
    EnrichedCr,
    /// span{1, x, y, x^2 - y^2} on rectangles; edge means.
    RotatedQ1,
    /// P1 + span{x^2, y^2} on rectangles; edge means and the cell mean.
    EnrichedRotatedQ1,
    /// Q1 + span{x^2 - 1, y^2 - 1}; vertex values and cell means of the pure second derivatives.
    Wilson,
    /// P2; vertex values and edge means of the normal derivative. Fourth order.
    Morley,
    /// P2 with edge-mean continuity; edge means and three interior moments.
    P2nc,
    P1Conforming,
    Q1Conforming,
    /// Bicubic Hermite rectangle (value, gradient and twist per vertex). Fourth order, conforming.
    BognerFoxSchmit,
}

/// One local degree of freedom. Local entity indices follow the cell's
/// vertex order; triangle edge `i` is opposite vertex `i`, rectangle edges
/// run bottom, right, top, left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DofKind {
    VertexValue(usize),
    /// Physical partial derivative `d^a/dx^a d^b/dy^b` at a vertex.
    VertexDerivative { vertex: usize, order: [usize; 2] },
    EdgeMean(usize),
    /// Mean over the edge of the derivative along the local outward normal.
    EdgeNormalDerivativeMean(usize),
    CellMean,
    /// `(1/|K|) int_K v lambda_i` with the barycentric coordinate of vertex `i`.
    CellMoment(usize),
    /// `(1/|K|) int_K d^2 v / dx_i^2`.
    CellSecondDerivativeMean(usize),
}

/// Mesh entity carrying a degree of freedom, in local numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalEntity {
    Vertex(usize),
    Edge(usize),
    Cell,
}

impl DofKind {
    pub fn entity(self) -> LocalEntity {
        match self {
            DofKind::VertexValue(v) | DofKind::VertexDerivative { vertex: v, .. } => LocalEntity::Vertex(v),
            DofKind::EdgeMean(e) | DofKind::EdgeNormalDerivativeMean(e) => LocalEntity::Edge(e),
            DofKind::CellMean | DofKind::CellMoment(_) | DofKind::CellSecondDerivativeMean(_) => LocalEntity::Cell,
        }
    }

    /// Whether the value depends on the orientation of the edge normal.
    pub fn is_oriented(self) -> bool {
        matches!(self, DofKind::EdgeNormalDerivativeMean(_))
    }
}

pub const ALL_FAMILIES: [ElementFamily; 10] = [
    ElementFamily::Cr,
    ElementFamily::EnrichedCr,
    ElementFamily::RotatedQ1,
    ElementFamily::EnrichedRotatedQ1,
    ElementFamily::Wilson,
    ElementFamily::Morley,
    ElementFamily::P2nc,
    ElementFamily::P1Conforming,
    ElementFamily::Q1Conforming,
    ElementFamily::BognerFoxSchmit,
];

impl ElementFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cr => "CR",
            Self::EnrichedCr => "EnrichedCR",
            Self::RotatedQ1 => "RotatedQ1",
            Self::EnrichedRotatedQ1 => "EnrichedRotatedQ1",
            Self::Wilson => "Wilson",
            Self::Morley => "Morley",
            Self::P2nc => "P2NC",
            Self::P1Conforming => "P1Conforming",
            Self::Q1Conforming => "Q1Conforming",
            Self::BognerFoxSchmit => "BognerFoxSchmit",
        }
    }

    /// Short name accepted on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            Self::Cr => "cr",
            Self::EnrichedCr => "ecr",
            Self::RotatedQ1 => "rq1",
            Self::EnrichedRotatedQ1 => "erq1",
            Self::Wilson => "wilson",
            Self::Morley => "morley",
            Self::P2nc => "p2nc",
            Self::P1Conforming => "p1",
            Self::Q1Conforming => "q1",
            Self::BognerFoxSchmit => "bfs",
        }
    }

    /// 1 for second-order problems, 2 for the plate families.
    pub fn operator_order(self) -> usize {
        match self {
            Self::Morley | Self::BognerFoxSchmit => 2,
            _ => 1,
        }
    }

    pub fn cell_kind(self) -> CellKind {
        match self {
            Self::Cr | Self::EnrichedCr | Self::Morley | Self::P2nc | Self::P1Conforming => CellKind::Triangle,
            _ => CellKind::Rectangle,
        }
    }

    pub fn is_conforming(self) -> bool {
        matches!(self, Self::P1Conforming | Self::Q1Conforming | Self::BognerFoxSchmit)
    }

    /// Total degree on triangles, per-variable degree on rectangles.
    pub fn polynomial_degree(self) -> usize {
        match self {
            Self::Cr | Self::P1Conforming | Self::Q1Conforming => 1,
            Self::BognerFoxSchmit => 3,
            _ => 2,
        }
    }

    /// Quadrature degree that integrates products of two shape functions exactly.
    pub fn matrix_quadrature_degree(self) -> usize {
        2 * self.polynomial_degree()
    }

    pub fn space_description(self) -> &'static str {
        match self {
            Self::Cr | Self::P1Conforming => "P1",
            Self::EnrichedCr => "P1 + span{x^2+y^2}",
            Self::RotatedQ1 => "span{1, x, y, x^2-y^2}",
            Self::EnrichedRotatedQ1 => "P1 + span{x^2, y^2}",
            Self::Wilson => "Q1 + span{x^2-1, y^2-1}",
            Self::Morley | Self::P2nc => "P2",
            Self::Q1Conforming => "Q1",
            Self::BognerFoxSchmit => "Q3",
        }
    }

    /// Polynomials spanning the local space, in local coordinates.
    pub fn generators(self) -> Vec<Poly> {
        let one = Poly::constant(1.0);
        let (s, t) = (Poly::s(), Poly::t());
        let s2 = Poly::monomial(2, 0, 1.0);
        let t2 = Poly::monomial(0, 2, 1.0);
        match self {
            Self::Cr | Self::P1Conforming => vec![one, s, t],
            Self::EnrichedCr => vec![one, s, t, s2 + t2],
            Self::RotatedQ1 => vec![one, s, t, s2 - t2],
            Self::EnrichedRotatedQ1 => vec![one, s, t, s2, t2],
            Self::Wilson => vec![one, s, t, s * t, s2 - one, t2 - one],
            Self::Morley | Self::P2nc => vec![one, s, t, s2, s * t, t2],
            Self::Q1Conforming => vec![one, s, t, s * t],
            Self::BognerFoxSchmit => {
                (0..4).flat_map(|j| (0..4).map(move |i| Poly::monomial(i, j, 1.0))).collect()
            }
        }
    }

    /// Local degrees of freedom in local order.
    pub fn dof_kinds(self) -> Vec<DofKind> {
        use DofKind::*;
        let nv = self.cell_kind().vertex_count();
        let vertices = (0..nv).map(VertexValue);
        let edge_means = (0..nv).map(EdgeMean);
        match self {
            Self::Cr | Self::RotatedQ1 => edge_means.collect(),
            Self::EnrichedCr | Self::EnrichedRotatedQ1 => edge_means.chain([CellMean]).collect(),
            Self::P2nc => edge_means.chain((0..3).map(CellMoment)).collect(),
            Self::Wilson => vertices.chain((0..2).map(CellSecondDerivativeMean)).collect(),
            Self::Morley => vertices.chain((0..3).map(EdgeNormalDerivativeMean)).collect(),
            Self::P1Conforming | Self::Q1Conforming => vertices.collect(),
            Self::BognerFoxSchmit => (0..4)
                .flat_map(|v| {
                    [
                        VertexValue(v),
                        VertexDerivative { vertex: v, order: [1, 0] },
                        VertexDerivative { vertex: v, order: [0, 1] },
                        VertexDerivative { vertex: v, order: [1, 1] },
                    ]
                })
                .collect(),
        }
    }

    pub fn local_dim(self) -> usize {
        self.dof_kinds().len()
    }
}

impl fmt::Display for ElementFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<ElementFamily> for String {
    fn from(f: ElementFamily) -> String {
        f.name().to_string()
    }
}

impl TryFrom<String> for ElementFamily {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for ElementFamily {
    type Err = String;
    /// Accepts the short name or the full name, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        ALL_FAMILIES
            .iter()
            .copied()
            .find(|f| f.short_name() == lower || f.name().to_ascii_lowercase() == lower)
            .ok_or_else(|| {
                let names: Vec<&str> = ALL_FAMILIES.iter().map(|f| f.short_name()).collect();
                format!("unknown element '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in ALL_FAMILIES {
            assert_eq!(f.short_name().parse::<ElementFamily>().unwrap(), f);
            assert_eq!(f.name().parse::<ElementFamily>().unwrap(), f);
        }
        assert!("bogus".parse::<ElementFamily>().is_err());
    }

    #[test]
    fn dimensions_match() {
        for f in ALL_FAMILIES {
            assert_eq!(f.generators().len(), f.local_dim(), "{f}");
        }
        assert_eq!(ElementFamily::Wilson.local_dim(), 6);
        assert_eq!(ElementFamily::BognerFoxSchmit.local_dim(), 16);
    }
}
