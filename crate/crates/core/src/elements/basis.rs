use nalgebra::DMatrix;

use crate::mesh::{CellKind, Point};

use super::family::{DofKind, ElementFamily};
use super::geometry::CellGeometry;
use super::poly::Poly;
use super::quadrature::MAX_QUADRATURE_DEGREE;
use super::ElementError;

/// Gauss points used for edge functionals (exact to degree 11).
pub const EDGE_POINTS: usize = 6;

/// Value, gradient and Hessian of a function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl Jet {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.hess.iter().flatten().all(|v| v.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Jet {
        Jet {
            value: a * self.value,
            grad: [a * self.grad[0], a * self.grad[1]],
            hess: [[a * self.hess[0][0], a * self.hess[0][1]], [a * self.hess[1][0], a * self.hess[1][1]]],
        }
    }

    pub fn add_scaled(&mut self, a: f64, other: &Jet) {
        self.value += a * other.value;
        for i in 0..2 {
            self.grad[i] += a * other.grad[i];
            for j in 0..2 {
                self.hess[i][j] += a * other.hess[i][j];
            }
        }
    }
}

/// Physical jet of a local-coordinate polynomial.
pub fn poly_jet(p: &Poly, geom: &CellGeometry, x: Point) -> Jet {
    let [s, t] = geom.to_local(x);
    let [sx, sy] = geom.scale;
    Jet {
        value: p.eval(s, t),
        grad: [p.eval_derivative(1, 0, s, t) / sx, p.eval_derivative(0, 1, s, t) / sy],
        hess: [
            [p.eval_derivative(2, 0, s, t) / (sx * sx), p.eval_derivative(1, 1, s, t) / (sx * sy)],
            [p.eval_derivative(1, 1, s, t) / (sx * sy), p.eval_derivative(0, 2, s, t) / (sy * sy)],
        ],
    }
}

/// Applies one functional to `f`; cell integrals use a rule of `cell_degree`.
fn apply_dof<F>(dof: DofKind, geom: &CellGeometry, f: &F, cell_degree: usize) -> Result<f64, ElementError>
where
    F: Fn(Point) -> Jet + ?Sized,
{
    let cell_mean = |g: &dyn Fn(Point, &Jet) -> f64| -> Result<f64, ElementError> {
        let mut sum = 0.0;
        for (p, w) in geom.quadrature(cell_degree)? {
            sum += w * g(p, &f(p));
        }
        Ok(sum / geom.area)
    };
    let v = match dof {
        DofKind::VertexValue(i) => f(geom.vertices[i]).value,
        DofKind::VertexDerivative { vertex, order } => {
            let j = f(geom.vertices[vertex]);
            match order {
                [0, 0] => j.value,
                [1, 0] => j.grad[0],
                [0, 1] => j.grad[1],
                [2, 0] => j.hess[0][0],
                [1, 1] => j.hess[0][1],
                [0, 2] => j.hess[1][1],
                _ => return Err(ElementError::UnsupportedDerivative),
            }
        }
        DofKind::EdgeMean(e) => geom.edge_mean_rule(e, EDGE_POINTS).iter().map(|&(p, w)| w * f(p).value).sum(),
        DofKind::EdgeNormalDerivativeMean(e) => {
            let n = geom.outward_normal(e);
            geom.edge_mean_rule(e, EDGE_POINTS)
                .iter()
                .map(|&(p, w)| {
                    let g = f(p).grad;
                    w * (g[0] * n[0] + g[1] * n[1])
                })
                .sum()
        }
        DofKind::CellMean => cell_mean(&|_, j| j.value)?,
        DofKind::CellMoment(i) => cell_mean(&|p, j| j.value * geom.barycentric(p)[i])?,
        DofKind::CellSecondDerivativeMean(i) => cell_mean(&|_, j| j.hess[i][i])?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ElementError::Evaluation(format!("non-finite value for {dof:?}")))
    }
}

/// Degrees of freedom of `f` on one cell, in the family's local order.
/// Cell integrals use the highest available quadrature degree.
pub fn dof_functionals<F>(family: ElementFamily, geom: &CellGeometry, f: &F) -> Result<Vec<f64>, ElementError>
where
    F: Fn(Point) -> Jet + ?Sized,
{
    if geom.kind != family.cell_kind() {
        return Err(ElementError::IncompatibleCell);
    }
    family.dof_kinds().into_iter().map(|d| apply_dof(d, geom, f, MAX_QUADRATURE_DEGREE)).collect()
}

/// Dense square matrix of a cellwise bilinear form in local DOF order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMatrix(pub DMatrix<f64>);

impl LocalMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Symmetric to `tol` relative to the largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.0.amax().max(f64::MIN_POSITIVE);
        (&self.0 - self.0.transpose()).amax() <= tol * scale
    }
}

/// Nodal basis of a family on one cell: the shape functions dual to the
/// degrees of freedom.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    family: ElementFamily,
    geom: CellGeometry,
    generators: Vec<Poly>,
    /// Column `k` holds the generator coefficients of basis function `k`.
    coeffs: DMatrix<f64>,
}

impl LocalBasis {
    pub fn new(family: ElementFamily, geom: CellGeometry) -> Result<Self, ElementError> {
        if geom.kind != family.cell_kind() {
            return Err(ElementError::IncompatibleCell);
        }
        let generators = family.generators();
        let dofs = family.dof_kinds();
        let n = dofs.len();
        // exact for generator degree plus a barycentric weight
        let cell_degree = match geom.kind {
            CellKind::Triangle => family.polynomial_degree() + 1,
            CellKind::Rectangle => 2 * family.polynomial_degree() + 1,
        };
        let mut d = DMatrix::zeros(n, n);
        for (j, g) in generators.iter().enumerate() {
            let f = |x: Point| poly_jet(g, &geom, x);
            for (i, &dof) in dofs.iter().enumerate() {
                d[(i, j)] = apply_dof(dof, &geom, &f, cell_degree)?;
            }
        }
        let coeffs = d.try_inverse().ok_or(ElementError::NotUnisolvent(family))?;
        Ok(Self { family, geom, generators, coeffs })
    }

    pub fn family(&self) -> ElementFamily {
        self.family
    }

    pub fn geometry(&self) -> &CellGeometry {
        &self.geom
    }

    pub fn dim(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Basis function `k` as a polynomial in local coordinates.
    pub fn basis_poly(&self, k: usize) -> Poly {
        self.generators.iter().enumerate().fold(Poly::zero(), |acc, (j, g)| acc + *g * self.coeffs[(j, k)])
    }

    /// Physical jets of all basis functions at `x`.
    pub fn jets(&self, x: Point) -> Vec<Jet> {
        let gen: Vec<Jet> = self.generators.iter().map(|g| poly_jet(g, &self.geom, x)).collect();
        (0..self.dim())
            .map(|k| {
                let mut j = Jet::default();
                for (i, gj) in gen.iter().enumerate() {
                    j.add_scaled(self.coeffs[(i, k)], gj);
                }
                j
            })
            .collect()
    }

    pub fn values(&self, x: Point) -> Vec<f64> {
        self.jets(x).iter().map(|j| j.value).collect()
    }

    pub fn gradients(&self, x: Point) -> Vec<[f64; 2]> {
        self.jets(x).iter().map(|j| j.grad).collect()
    }

    /// Hessians, available for fourth-order families only.
    pub fn hessians(&self, x: Point) -> Result<Vec<[[f64; 2]; 2]>, ElementError> {
        if self.family.operator_order() < 2 {
            return Err(ElementError::UnsupportedDerivative);
        }
        Ok(self.jets(x).iter().map(|j| j.hess).collect())
    }

    /// Jet of `sum_k c_k phi_k` at `x`.
    pub fn combine(&self, coefficients: &[f64], x: Point) -> Jet {
        let mut out = Jet::default();
        for (c, j) in coefficients.iter().zip(self.jets(x)) {
            out.add_scaled(*c, &j);
        }
        out
    }

    /// Functionals (rows) applied to basis functions (columns).
    pub fn dof_matrix(&self) -> Result<DMatrix<f64>, ElementError> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            let p = self.basis_poly(k);
            let f = |x: Point| poly_jet(&p, &self.geom, x);
            let col = dof_functionals(self.family, &self.geom, &f)?;
            for (i, v) in col.into_iter().enumerate() {
                m[(i, k)] = v;
            }
        }
        Ok(m)
    }

    /// `int_K coef * (grad phi_i . grad phi_j)` for second-order families,
    /// `int_K coef * (D^2 phi_i : D^2 phi_j)` for fourth-order ones.
    pub fn stiffness_with_degree(&self, coefficient: f64, degree: usize) -> Result<LocalMatrix, ElementError> {
        if !(coefficient > 0.0) {
            return Err(ElementError::NonPositiveCoefficient);
        }
        let n = self.dim();
        let order = self.family.operator_order();
        let mut k = DMatrix::zeros(n, n);
        for (x, w) in self.geom.quadrature(degree)? {
            let jets = self.jets(x);
            for i in 0..n {
                for j in 0..=i {
                    let v = if order == 1 {
                        jets[i].grad[0] * jets[j].grad[0] + jets[i].grad[1] * jets[j].grad[1]
                    } else {
                        let (a, b) = (&jets[i].hess, &jets[j].hess);
                        a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
                    };
                    k[(i, j)] += w * coefficient * v;
                }
            }
        }
        Ok(LocalMatrix(symmetrize(k)))
    }

    pub fn stiffness(&self, coefficient: f64) -> Result<LocalMatrix, ElementError> {
        self.stiffness_with_degree(coefficient, self.family.matrix_quadrature_degree())
    }

    /// `int_K rho * phi_i phi_j`.
    pub fn mass_with_degree(&self, rho: f64, degree: usize) -> Result<LocalMatrix, ElementError> {
        if !(rho > 0.0) {
            return Err(ElementError::NonPositiveDensity);
        }
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (x, w) in self.geom.quadrature(degree)? {
            let v = self.values(x);
            for i in 0..n {
                for j in 0..=i {
                    m[(i, j)] += w * rho * v[i] * v[j];
                }
            }
        }
        Ok(LocalMatrix(symmetrize(m)))
    }

    pub fn mass(&self, rho: f64) -> Result<LocalMatrix, ElementError> {
        self.mass_with_degree(rho, self.family.matrix_quadrature_degree())
    }
}

fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            m[(j, i)] = m[(i, j)];
        }
    }
    m
}

/// Basis on the reference cell (unit right triangle or `[-1,1]^2`).
pub fn reference_basis(family: ElementFamily) -> LocalBasis {
    LocalBasis::new(family, CellGeometry::reference(family.cell_kind())).expect("families are unisolvent")
}

pub fn local_stiffness(family: ElementFamily, geom: &CellGeometry, coefficient: f64) -> Result<LocalMatrix, ElementError> {
    LocalBasis::new(family, geom.clone())?.stiffness(coefficient)
}

pub fn local_mass(family: ElementFamily, geom: &CellGeometry, rho: f64) -> Result<LocalMatrix, ElementError> {
    if !(rho > 0.0) {
        return Err(ElementError::NonPositiveDensity);
    }
    LocalBasis::new(family, geom.clone())?.mass(rho)
}

/// True iff `d^a/dx^a d^b/dy^b`, with `which = [a, b]`, annihilates every
/// shape function of the family. Decided exactly on the monomial
/// coefficients of the spanning polynomials.
pub fn mixed_derivative_vanishes(family: ElementFamily, which: [usize; 2]) -> bool {
    family.generators().iter().all(|g| g.derivative(which[0], which[1]).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::ALL_FAMILIES;

    fn identity_error(m: &DMatrix<f64>) -> f64 {
        (m - DMatrix::identity(m.nrows(), m.ncols())).amax()
    }

    fn unit_triangle() -> CellGeometry {
        CellGeometry::reference(CellKind::Triangle)
    }

    #[test]
    fn unisolvence_on_reference_and_physical_cells() {
        let tri = CellGeometry::new(CellKind::Triangle, vec![[0.3, 0.1], [0.9, 0.4], [0.2, 0.8]]).unwrap();
        let rect = CellGeometry::new(CellKind::Rectangle, vec![[0.5, 0.0], [0.75, 0.0], [0.75, 0.5], [0.5, 0.5]]).unwrap();
        for f in ALL_FAMILIES {
            let b = reference_basis(f);
            assert!(identity_error(&b.dof_matrix().unwrap()) < 1e-12, "{f} reference");
            let g = if f.cell_kind() == CellKind::Triangle { tri.clone() } else { rect.clone() };
            let b = LocalBasis::new(f, g).unwrap();
            assert!(identity_error(&b.dof_matrix().unwrap()) < 1e-12, "{f} physical");
        }
    }

    #[test]
    fn cr_basis_is_dual_to_edge_midpoints() {
        let b = reference_basis(ElementFamily::Cr);
        let g = b.geometry();
        for j in 0..3 {
            let (p, q) = g.edge(j);
            let v = b.values([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            for (i, vi) in v.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((vi - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn wilson_bubble_at_center() {
        let bubble = ElementFamily::Wilson.generators()[4];
        assert_eq!(bubble.eval(0.0, 0.0), -1.0);
        let g = CellGeometry::reference(CellKind::Rectangle);
        assert_eq!(poly_jet(&bubble, &g, [0.0, 0.0]).value, -1.0);
    }

    #[test]
    fn hessians_only_for_fourth_order() {
        let b = reference_basis(ElementFamily::Cr);
        assert!(matches!(b.hessians([0.2, 0.2]), Err(ElementError::UnsupportedDerivative)));
        assert!(reference_basis(ElementFamily::Morley).hessians([0.2, 0.2]).is_ok());
    }

    #[test]
    fn documented_functionals() {
        let one = |_: Point| Jet { value: 1.0, ..Default::default() };
        let v = dof_functionals(ElementFamily::EnrichedCr, &unit_triangle(), &one).unwrap();
        assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-14));

        let x1 = |p: Point| Jet { value: p[0], grad: [1.0, 0.0], ..Default::default() };
        let v = dof_functionals(ElementFamily::Wilson, &CellGeometry::reference(CellKind::Rectangle), &x1).unwrap();
        assert_eq!(&v[..4], &[-1.0, 1.0, 1.0, -1.0]);
        assert_eq!(&v[4..], &[0.0, 0.0]);

        let r2 = |p: Point| Jet {
            value: p[0] * p[0] + p[1] * p[1],
            grad: [2.0 * p[0], 2.0 * p[1]],
            hess: [[2.0, 0.0], [0.0, 2.0]],
        };
        let v = dof_functionals(ElementFamily::Morley, &unit_triangle(), &r2).unwrap();
        assert!((v[3] - 2f64.sqrt()).abs() < 1e-14);

        let bad = |_: Point| Jet { value: f64::NAN, ..Default::default() };
        assert!(matches!(dof_functionals(ElementFamily::Cr, &unit_triangle(), &bad), Err(ElementError::Evaluation(_))));
    }

    #[test]
    fn cr_and_p1_stiffness_on_unit_triangle() {
        let k = local_stiffness(ElementFamily::Cr, &unit_triangle(), 1.0).unwrap();
        let expected = [[4.0, -2.0, -2.0], [-2.0, 2.0, 0.0], [-2.0, 0.0, 2.0]];
        let p = local_stiffness(ElementFamily::P1Conforming, &unit_triangle(), 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.get(i, j) - expected[i][j]).abs() < 1e-13);
                assert!((p.get(i, j) - expected[i][j] / 4.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cr_mass_is_diagonal() {
        let g = CellGeometry::new(CellKind::Triangle, vec![[0.0, 0.0], [2.0, 0.5], [0.5, 1.5]]).unwrap();
        let m = local_mass(ElementFamily::Cr, &g, 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { g.area / 3.0 } else { 0.0 };
                assert!((m.get(i, j) - expected).abs() < 1e-14);
            }
        }
        let m2 = local_mass(ElementFamily::Cr, &g, 2.0).unwrap();
        assert!((m2.0.clone() - m.0.clone() * 2.0).amax() < 1e-15);
        assert!(matches!(local_mass(ElementFamily::Cr, &g, 0.0), Err(ElementError::NonPositiveDensity)));
    }

    #[test]
    fn q1_mass_on_reference_square() {
        let m = local_mass(ElementFamily::Q1Conforming, &CellGeometry::reference(CellKind::Rectangle), 1.0).unwrap();
        for i in 0..4 {
            assert!((m.get(i, i) - 4.0 / 9.0).abs() < 1e-14);
        }
        assert!((m.0.sum() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn constants_and_linears_in_kernel() {
        for f in ALL_FAMILIES {
            let b = reference_basis(f);
            let k = b.stiffness(1.0).unwrap();
            assert!(k.is_symmetric(1e-13));
            let kernel_fns: Vec<Box<dyn Fn(Point) -> Jet>> = if f.operator_order() == 1 {
                vec![Box::new(|_| Jet { value: 1.0, ..Default::default() })]
            } else {
                vec![
                    Box::new(|_| Jet { value: 1.0, ..Default::default() }),
                    Box::new(|p: Point| Jet { value: p[0], grad: [1.0, 0.0], ..Default::default() }),
                    Box::new(|p: Point| Jet { value: p[1], grad: [0.0, 1.0], ..Default::default() }),
                ]
            };
            for g in kernel_fns {
                let c = dof_functionals(f, b.geometry(), &*g).unwrap();
                let r = &k.0 * nalgebra::DVector::from_vec(c);
                assert!(r.amax() < 1e-12, "{f}");
            }
        }
    }

    #[test]
    fn matrices_are_exact_at_their_degree() {
        let tri = CellGeometry::new(CellKind::Triangle, vec![[0.1, 0.2], [0.7, 0.3], [0.4, 0.9]]).unwrap();
        let rect = CellGeometry::new(CellKind::Rectangle, vec![[0.0, 0.0], [0.5, 0.0], [0.5, 0.25], [0.0, 0.25]]).unwrap();
        for f in ALL_FAMILIES {
            let g = if f.cell_kind() == CellKind::Triangle { tri.clone() } else { rect.clone() };
            let b = LocalBasis::new(f, g).unwrap();
            let (k, k_hi) = (b.stiffness(1.0).unwrap(), b.stiffness_with_degree(1.0, 10).unwrap());
            let (m, m_hi) = (b.mass(1.0).unwrap(), b.mass_with_degree(1.0, 10).unwrap());
            assert!((&k.0 - &k_hi.0).amax() <= 1e-12 * k_hi.0.amax(), "{f} stiffness");
            assert!((&m.0 - &m_hi.0).amax() <= 1e-12 * m_hi.0.amax(), "{f} mass");
            assert!(m.0.clone().cholesky().is_some(), "{f} mass not SPD");
            let min_eig = k.0.clone().symmetric_eigenvalues().min();
            assert!(min_eig > -1e-12 * k.0.amax(), "{f} stiffness not PSD");
        }
    }

    #[test]
    fn triangle_matrices_are_affine_covariant() {
        let base = vec![[0.1, 0.2], [0.7, 0.3], [0.4, 0.9]];
        let shifted: Vec<Point> = base.iter().map(|p| [p[0] + 3.0, p[1] - 1.0]).collect();
        let dilated: Vec<Point> = base.iter().map(|p| [2.5 * p[0], 2.5 * p[1]]).collect();
        for f in [ElementFamily::Cr, ElementFamily::EnrichedCr, ElementFamily::P2nc, ElementFamily::P1Conforming] {
            let g0 = CellGeometry::new(CellKind::Triangle, base.clone()).unwrap();
            let k0 = local_stiffness(f, &g0, 1.0).unwrap();
            let m0 = local_mass(f, &g0, 1.0).unwrap();
            let k1 = local_stiffness(f, &CellGeometry::new(CellKind::Triangle, shifted.clone()).unwrap(), 1.0).unwrap();
            assert!((&k0.0 - &k1.0).amax() < 1e-11 * k0.0.amax(), "{f}");
            let g2 = CellGeometry::new(CellKind::Triangle, dilated.clone()).unwrap();
            let k2 = local_stiffness(f, &g2, 1.0).unwrap();
            let m2 = local_mass(f, &g2, 1.0).unwrap();
            assert!((&k0.0 - &k2.0).amax() < 1e-11 * k0.0.amax(), "{f}");
            assert!((&m0.0 * 6.25 - &m2.0).amax() < 1e-12 * m2.0.amax(), "{f}");
        }
    }

    #[test]
    fn wilson_interpolation_identity() {
        // u = x^2 y, v = y on [-1,1]^2
        let g = CellGeometry::reference(CellKind::Rectangle);
        let u = |p: Point| Jet {
            value: p[0] * p[0] * p[1],
            grad: [2.0 * p[0] * p[1], p[0] * p[0]],
            hess: [[2.0 * p[1], 2.0 * p[0]], [2.0 * p[0], 0.0]],
        };
        let b = LocalBasis::new(ElementFamily::Wilson, g.clone()).unwrap();
        let c = dof_functionals(ElementFamily::Wilson, &g, &u).unwrap();
        let lhs: f64 = g
            .quadrature(6)
            .unwrap()
            .iter()
            .map(|&(p, w)| {
                let iu = b.combine(&c, p);
                w * (u(p).grad[1] - iu.grad[1])
            })
            .sum();
        // -(h_x^2 / 3) int_K d^3u/dx^2dy * dv/dy with h_x = 1
        let rhs = -(1.0 / 3.0) * 2.0 * 4.0;
        assert!((lhs + 8.0 / 3.0).abs() < 1e-12);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn derivative_vanishing() {
        use ElementFamily::*;
        assert!(mixed_derivative_vanishes(Cr, [1, 1]));
        assert!(mixed_derivative_vanishes(EnrichedCr, [1, 1]));
        assert!(mixed_derivative_vanishes(EnrichedRotatedQ1, [1, 1]));
        assert!(!mixed_derivative_vanishes(Q1Conforming, [1, 1]));
        assert!(!mixed_derivative_vanishes(RotatedQ1, [2, 0]));
        for a in 0..=3 {
            assert!(mixed_derivative_vanishes(Morley, [a, 3 - a]));
        }
        assert!(!mixed_derivative_vanishes(Morley, [1, 1]));
    }
}
