//! Python bindings: meshes, assembly, the eigensolver, refinement studies
//! and the verification suite.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ncfem::assembly::{assemble as assemble_pair, build_dofmap, SymmetricSparseMatrix};
use ncfem::cli::{run_suite, study_reference, Suite};
use ncfem::eigensolve::solve_generalized;
use ncfem::elements::{ElementFamily, ALL_FAMILIES};
use ncfem::mesh::{self as m, BoundarySpec, CellKind};
use ncfem::verify::{
    consistency_probe as probe, h5_saturation_check, run_study, square_spectrum, Domain, ReportHeader, StudyConfig,
};

fn numerical<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn family(name: &str) -> PyResult<ElementFamily> {
    name.parse().map_err(usage)
}

fn boundary(spec: &str) -> PyResult<BoundarySpec> {
    spec.parse().map_err(usage)
}

/// Triangle or rectangle mesh of the unit square or the L-shaped domain.
#[pyclass(name = "Mesh", module = "ncfem", frozen)]
pub struct PyMesh {
    inner: m::Mesh,
}

#[pymethods]
impl PyMesh {
    /// `cell` is "triangle" or "rectangle"; `boundary` is "dirichlet",
    /// "neumann" or a per-side list such as "left=neumann".
    #[staticmethod]
    #[pyo3(signature = (n, cell = "triangle", boundary = "dirichlet"))]
    fn unit_square(n: usize, cell: &str, boundary: &str) -> PyResult<Self> {
        let bc = self::boundary(boundary)?;
        let inner = match cell.parse::<CellKind>().map_err(usage)? {
            CellKind::Triangle => m::unit_square_tri(n, bc),
            CellKind::Rectangle => m::unit_square_quad(n, bc),
        }
        .map_err(usage)?;
        Ok(PyMesh { inner })
    }

    #[staticmethod]
    fn lshape(n: usize) -> PyResult<Self> {
        Ok(PyMesh { inner: m::lshape_tri(n).map_err(usage)? })
    }

    /// Parses the text mesh format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyMesh { inner: m::read_mesh(text).map_err(usage)? })
    }

    fn to_text(&self) -> String {
        m::write_mesh(&self.inner)
    }

    fn refine(&self) -> Self {
        PyMesh { inner: m::refine_uniform(&self.inner) }
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_cells(&self) -> usize {
        self.inner.num_cells()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn h_max(&self) -> f64 {
        self.inner.h_max()
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices().iter().map(|p| (p[0], p[1])).collect()
    }

    fn cells(&self) -> Vec<Vec<usize>> {
        self.inner.cells().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(kind={}, vertices={}, cells={})",
            self.inner.kind().name(),
            self.inner.num_vertices(),
            self.inner.num_cells()
        )
    }
}

/// Symmetric sparse matrix over the free degrees of freedom.
#[pyclass(name = "SparseMatrix", module = "ncfem", frozen)]
pub struct PySparseMatrix {
    inner: SymmetricSparseMatrix,
}

#[pymethods]
impl PySparseMatrix {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.dim();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!("index ({i}, {j}) outside a {n}x{n} matrix")));
        }
        Ok(self.inner.get(i, j))
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("vector of length {} for dimension {}", x.len(), self.inner.dim())));
        }
        Ok(self.inner.mul_vec(&x))
    }

    /// Row-major dense copy.
    fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.inner.to_dense();
        (0..d.nrows()).map(|i| d.row(i).iter().copied().collect()).collect()
    }

    /// `(row, col, value)` triplets of the lower triangle.
    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.inner.dim()).flat_map(|i| self.inner.row(i).map(move |(j, v)| (i, j, v))).collect()
    }
}

/// Eigenpairs in ascending order with their relative residuals.
#[pyclass(name = "EigenResult", module = "ncfem", frozen, get_all)]
pub struct PyEigenResult {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    n_dofs: usize,
}

#[pymethods]
impl PyEigenResult {
    fn __repr__(&self) -> String {
        format!("EigenResult(n_dofs={}, eigenvalues={:?})", self.n_dofs, self.eigenvalues)
    }
}

/// Stiffness and mass matrices for `element` on `mesh` with constant density.
#[pyfunction]
#[pyo3(signature = (mesh, element, rho = 1.0))]
fn assemble(mesh: &PyMesh, element: &str, rho: f64) -> PyResult<(PySparseMatrix, PySparseMatrix)> {
    let d = build_dofmap(&mesh.inner, family(element)?).map_err(usage)?;
    let (a, mm) = assemble_pair(&mesh.inner, &d, &vec![rho; mesh.inner.num_cells()]).map_err(numerical)?;
    Ok((PySparseMatrix { inner: a }, PySparseMatrix { inner: mm }))
}

/// The `k` smallest eigenpairs of the generalized problem.
#[pyfunction]
#[pyo3(signature = (mesh, element, k, rho = 1.0))]
fn solve(mesh: &PyMesh, element: &str, k: usize, rho: f64) -> PyResult<PyEigenResult> {
    let d = build_dofmap(&mesh.inner, family(element)?).map_err(usage)?;
    let (a, mm) = assemble_pair(&mesh.inner, &d, &vec![rho; mesh.inner.num_cells()]).map_err(numerical)?;
    let r = solve_generalized(&a, &mm, k).map_err(numerical)?;
    Ok(PyEigenResult { eigenvalues: r.eigenvalues, eigenvectors: r.eigenvectors, residuals: r.residuals, n_dofs: d.n_dofs() })
}

/// Refinement study; returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (domain, element, levels, k, boundary = "dirichlet", rho = 1.0))]
fn study(domain: &str, element: &str, levels: Vec<usize>, k: usize, boundary: &str, rho: f64) -> PyResult<String> {
    let config = StudyConfig {
        domain: domain.parse::<Domain>().map_err(usage)?,
        family: family(element)?,
        levels,
        k,
        boundary: self::boundary(boundary)?,
        rho,
    };
    let reference = study_reference(&config).map_err(numerical)?;
    let report = run_study(&config, &reference).map_err(numerical)?;
    Ok(report.to_json(&ReportHeader::for_config(&config)))
}

/// Closed-form Laplacian eigenvalues of the unit square.
#[pyfunction]
#[pyo3(signature = (k, boundary = "dirichlet"))]
fn square_eigenvalues(k: usize, boundary: &str) -> PyResult<Vec<f64>> {
    Ok(square_spectrum(k, self::boundary(boundary)?).values)
}

/// Runs a verification suite ("h4", "h5", "identity", "probe" or "all");
/// returns `(name, value, bound, passed)` tuples.
#[pyfunction]
#[pyo3(signature = (suite = "all"))]
fn verify(suite: &str) -> PyResult<Vec<(String, String, String, bool)>> {
    let suite = match suite {
        "h4" => Suite::H4,
        "h5" => Suite::H5,
        "identity" => Suite::Identity,
        "probe" => Suite::Probe,
        "all" => Suite::All,
        other => return Err(PyValueError::new_err(format!("unknown suite '{other}'"))),
    };
    Ok(run_suite(suite).map_err(numerical)?.into_iter().map(|l| (l.name, l.value, l.bound, l.pass)).collect())
}

/// First moment of the jump of the edge-patch function.
#[pyfunction]
#[pyo3(signature = (scale = 1.0))]
fn consistency_probe(scale: f64) -> PyResult<f64> {
    Ok(probe(scale).map_err(numerical)?.value)
}

/// Human-readable listing of the derivative components that vanish on the
/// element's local space.
#[pyfunction]
fn h5_report(element: &str) -> PyResult<String> {
    Ok(h5_saturation_check(family(element)?).to_string())
}

/// Short names of every element family.
#[pyfunction]
fn families() -> Vec<&'static str> {
    ALL_FAMILIES.iter().map(|f| f.short_name()).collect()
}

#[pymodule]
#[pyo3(name = "ncfem")]
fn ncfem_module(module: &Bound<'_, PyModule>) -> PyResult<()> {
    module.add_class::<PyMesh>()?;
    module.add_class::<PySparseMatrix>()?;
    module.add_class::<PyEigenResult>()?;
    module.add_function(wrap_pyfunction!(assemble, module)?)?;
    module.add_function(wrap_pyfunction!(solve, module)?)?;
    module.add_function(wrap_pyfunction!(study, module)?)?;
    module.add_function(wrap_pyfunction!(square_eigenvalues, module)?)?;
    module.add_function(wrap_pyfunction!(verify, module)?)?;
    module.add_function(wrap_pyfunction!(consistency_probe, module)?)?;
    module.add_function(wrap_pyfunction!(h5_report, module)?)?;
    module.add_function(wrap_pyfunction!(families, module)?)?;
    Ok(())
}
