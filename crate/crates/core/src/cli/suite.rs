use std::fmt;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, build_dofmap};
use crate::eigensolve::{normalize_sign, solve_generalized};
use crate::elements::{ElementFamily, Jet, ALL_FAMILIES};
use crate::mesh::{unit_square_quad, unit_square_tri, BoundarySpec, CellKind, Mesh, Point};
use crate::verify::{
    check_h4_orthogonality, consistency_probe, eigen_identity_residual, h5_saturation_check, interpolate_canonical,
    DiscreteField, FnField, ScalarField, SquareMode, VerifyError, PROBE_TARGET,
};

/// Groups of checks run by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    H4,
    H5,
    Identity,
    Probe,
    All,
}

/// One line of the verification summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    /// Measured quantity.
    pub value: String,
    /// What the value is compared against.
    pub bound: String,
    pub pass: bool,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({}, {})", self.name, self.value, self.bound, if self.pass { "pass" } else { "fail" })
    }
}

/// Largest allowed deviation of the probe value from its target.
pub const PROBE_TOLERANCE: f64 = 5e-4;
/// H4 residual bound for the second-order families.
pub const H4_TOLERANCE: f64 = 1e-8;
/// H4 residual bound for the plate family.
pub const H4_PLATE_TOLERANCE: f64 = 1e-10;

fn square_mesh(family: ElementFamily, n: usize) -> Result<Mesh, VerifyError> {
    Ok(match family.cell_kind() {
        CellKind::Triangle => unit_square_tri(n, BoundarySpec::default())?,
        CellKind::Rectangle => unit_square_quad(n, BoundarySpec::default())?,
    })
}

fn x1x2_squared(p: Point) -> Jet {
    let (x, y) = (p[0], p[1]);
    Jet {
        value: x * x * y * y,
        grad: [2.0 * x * y * y, 2.0 * x * x * y],
        hess: [[2.0 * y * y, 4.0 * x * y], [4.0 * x * y, 2.0 * x * x]],
    }
}

fn h4_checks() -> Result<Vec<CheckLine>, VerifyError> {
    let mut lines = Vec::new();
    let mut check = |family: ElementFamily, u: &dyn ScalarField, tol: f64| -> Result<(), VerifyError> {
        let mesh = square_mesh(family, 8)?;
        let dofmap = build_dofmap(&mesh, family)?;
        let r = check_h4_orthogonality(&mesh, &dofmap, u)?;
        lines.push(CheckLine {
            name: format!("h4 {family}"),
            value: format!("residual {r:.3e}"),
            bound: format!("tol {tol:.0e}"),
            pass: r <= tol,
        });
        Ok(())
    };
    let mode = SquareMode::dirichlet(1, 1);
    for family in [ElementFamily::Cr, ElementFamily::EnrichedCr, ElementFamily::EnrichedRotatedQ1, ElementFamily::P2nc] {
        check(family, &mode, H4_TOLERANCE)?;
    }
    check(ElementFamily::Morley, &FnField::smooth(x1x2_squared), H4_PLATE_TOLERANCE)?;
    Ok(lines)
}

fn h5_checks() -> Vec<CheckLine> {
    ALL_FAMILIES
        .iter()
        .filter(|f| !f.is_conforming())
        .map(|&f| {
            let r = h5_saturation_check(f);
            let value = r
                .entries
                .iter()
                .map(|e| {
                    let names: Vec<String> = e.components.iter().map(|[a, b]| format!("d{a}{b}")).collect();
                    format!("k={} [{}]", e.k, names.join(" "))
                })
                .collect::<Vec<_>>()
                .join(" ");
            CheckLine { name: format!("h5 {f}"), value, bound: "some component vanishes".into(), pass: r.satisfiable() }
        })
        .collect()
}

fn identity_checks() -> Result<Vec<CheckLine>, VerifyError> {
    let family = ElementFamily::Cr;
    let mesh = unit_square_tri(16, BoundarySpec::default())?;
    let dofmap = build_dofmap(&mesh, family)?;
    let rho = vec![1.0; mesh.num_cells()];
    let (a, m) = assemble(&mesh, &dofmap, &rho)?;
    let u = SquareMode::dirichlet(1, 1);
    let lambda = u.eigenvalue();
    let pi = interpolate_canonical(&mesh, &dofmap, &u)?;
    let r = normalize_sign(&solve_generalized(&a, &m, 1)?, &m, &pi.free)?;
    let (lh, uh) = (r.eigenvalues[0], &r.eigenvectors[0]);
    let analytic = eigen_identity_residual(&mesh, &dofmap, &rho, lambda, &u, lh, uh)?;
    let field = DiscreteField::new(&mesh, &dofmap, uh)?;
    let own = eigen_identity_residual(&mesh, &dofmap, &rho, lh, &field, lh, uh)?;
    let tol = 1e-6 * lambda;
    Ok(vec![
        CheckLine {
            name: "identity CR n=16".into(),
            value: format!("residual {:.3e}", analytic.residual),
            bound: format!("tol {tol:.3e}"),
            pass: analytic.residual <= tol,
        },
        CheckLine {
            name: "identity self-consistency".into(),
            value: format!("residual {:.3e}", own.residual),
            bound: "tol 1e-12".into(),
            pass: own.residual <= 1e-12,
        },
    ])
}

fn probe_check() -> Result<CheckLine, VerifyError> {
    let r = consistency_probe(1.0)?;
    // keep a rounding-level negative value from printing as -0.0000
    let shown = if r.value.abs() < 5e-5 { 0.0 } else { r.value };
    Ok(CheckLine {
        name: "probe".into(),
        value: format!("{shown:.4}"),
        bound: format!("target {PROBE_TARGET:.4}"),
        pass: r.passes(PROBE_TOLERANCE),
    })
}

/// Runs the selected checks. Errors are numerical failures of the
/// machinery itself; a check that runs but misses its tolerance is
/// reported through `CheckLine::pass`.
pub fn run_suite(suite: Suite) -> Result<Vec<CheckLine>, VerifyError> {
    let mut lines = Vec::new();
    if matches!(suite, Suite::H4 | Suite::All) {
        lines.extend(h4_checks()?);
    }
    if matches!(suite, Suite::H5 | Suite::All) {
        lines.extend(h5_checks());
    }
    if matches!(suite, Suite::Identity | Suite::All) {
        lines.extend(identity_checks()?);
    }
    if matches!(suite, Suite::Probe | Suite::All) {
        lines.push(probe_check()?);
    }
    Ok(lines)
}
