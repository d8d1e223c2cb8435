//! Command-line driver: meshing, single solves, refinement studies and the
//! verification suite.
//!
//! Exit codes: 0 success, 1 numerical failure (or a failed verification
//! check), 2 usage error.

mod suite;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{assemble, build_dofmap, AssemblyError};
use crate::eigensolve::{solve_generalized, EigenError};
use crate::elements::ElementFamily;
use crate::mesh::{lshape_tri, unit_square_quad, unit_square_tri, write_mesh, BoundarySpec, CellKind, MeshError};
use crate::verify::{
    domain_mesh, extrapolated_reference, run_study, square_spectrum, Domain, ReferenceSpectrum, ReportHeader,
    StudyConfig, VerifyError,
};

pub use suite::{run_suite, CheckLine, Suite};

/// Conforming levels behind the L-shape reference.
pub const LSHAPE_REFERENCE_LEVELS: [usize; 4] = [8, 16, 32, 64];
/// Conforming levels behind the clamped-plate reference.
pub const PLATE_REFERENCE_LEVELS: [usize; 3] = [8, 16, 32];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("IoError: {0}")]
    Io(#[from] io::Error),
    #[error("UnsupportedMesh: {0}")]
    UnsupportedMesh(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "ncfem", version, about = "Nonconforming finite element eigenvalue bounds")]
struct Cli {
    #[command(subcommand)]
    command: RunConfig,
}

/// A validated run, one variant per subcommand. Serializes with a
/// `command` tag and rejects unknown keys.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    /// Write a uniform mesh in the text mesh format.
    Mesh(MeshArgs),
    /// Solve one eigenproblem and write eigenvalues and eigenvectors.
    Solve(SolveArgs),
    /// Solve on nested levels and write a study report.
    Study(StudyArgs),
    /// Run verification checks and print a pass/fail summary.
    Verify(VerifyArgs),
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_density(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("density must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshArgs {
    #[arg(long)]
    pub domain: Domain,
    /// Cell shape; the L-shape supports triangles only.
    #[arg(long, default_value = "triangle")]
    pub cell: CellKind,
    /// Cells per unit length.
    #[arg(long, value_parser = parse_positive)]
    pub n: usize,
    #[arg(long, default_value = "dirichlet")]
    pub boundary: BoundarySpec,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveArgs {
    #[arg(long)]
    pub domain: Domain,
    #[arg(long)]
    pub element: ElementFamily,
    #[arg(long, value_parser = parse_positive)]
    pub n: usize,
    #[arg(long, value_parser = parse_positive)]
    pub k: usize,
    #[arg(long, default_value = "dirichlet")]
    pub boundary: BoundarySpec,
    #[arg(long, default_value = "1", value_parser = parse_density)]
    pub rho: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; taken from the extension of `--out` when absent.
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
    /// Also write `PREFIX.A.coo` and `PREFIX.M.coo`.
    #[arg(long)]
    pub export_matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyArgs {
    #[arg(long)]
    pub domain: Domain,
    #[arg(long)]
    pub element: ElementFamily,
    /// Comma-separated subdivisions, each twice the previous.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_positive)]
    pub levels: Vec<usize>,
    #[arg(long, value_parser = parse_positive)]
    pub k: usize,
    #[arg(long, default_value = "dirichlet")]
    pub boundary: BoundarySpec,
    #[arg(long, default_value = "1", value_parser = parse_density)]
    pub rho: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Also write the summary here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl StudyArgs {
    pub fn study_config(&self) -> StudyConfig {
        StudyConfig {
            domain: self.domain,
            family: self.element,
            levels: self.levels.clone(),
            k: self.k,
            boundary: self.boundary,
            rho: self.rho,
        }
    }
}

/// Parses a full argument vector (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv).map(|c| c.command)
}

/// Overall result of a run that did not hit an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ChecksFailed,
}

fn format_for(format: Option<ReportFormat>, out: Option<&Path>) -> ReportFormat {
    format.unwrap_or_else(|| match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => ReportFormat::Json,
        _ => ReportFormat::Csv,
    })
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

fn emit(out: Option<&Path>, contents: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, contents)?,
        None => stdout.write_all(contents.as_bytes())?,
    }
    Ok(())
}

/// Reference spectrum used by `study`: closed form on the square for
/// second-order problems, Richardson extrapolation of a conforming family
/// otherwise.
pub fn study_reference(config: &StudyConfig) -> Result<ReferenceSpectrum, VerifyError> {
    let fourth_order = config.family.operator_order() == 2;
    let reference = match (config.domain, fourth_order) {
        (Domain::Square, false) => square_spectrum(config.k, config.boundary),
        (Domain::Square, true) => extrapolated_reference(
            Domain::Square,
            config.boundary,
            ElementFamily::BognerFoxSchmit,
            &PLATE_REFERENCE_LEVELS,
            config.k,
        )?,
        (Domain::LShape, false) => extrapolated_reference(
            Domain::LShape,
            config.boundary,
            ElementFamily::P1Conforming,
            &LSHAPE_REFERENCE_LEVELS,
            config.k,
        )?,
        (Domain::LShape, true) => {
            return Err(VerifyError::UnsupportedDomain { family: config.family, domain: Domain::LShape })
        }
    };
    Ok(reference.for_density(config.rho))
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    #[serde(flatten)]
    header: &'a ReportHeader,
    config: &'a SolveArgs,
    n_dofs: usize,
    eigenvalues: &'a [f64],
    residuals: &'a [f64],
    eigenvectors: &'a [Vec<f64>],
}

/// Executes a parsed configuration.
pub fn run(config: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    match config {
        RunConfig::Mesh(a) => {
            let mesh = match (a.domain, a.cell) {
                (Domain::Square, CellKind::Triangle) => unit_square_tri(a.n, a.boundary)?,
                (Domain::Square, CellKind::Rectangle) => unit_square_quad(a.n, a.boundary)?,
                (Domain::LShape, CellKind::Triangle) => lshape_tri(a.n)?,
                (Domain::LShape, CellKind::Rectangle) => {
                    return Err(CliError::UnsupportedMesh("the L-shaped domain is meshed with triangles".into()))
                }
            };
            emit(a.out.as_deref(), &write_mesh(&mesh), stdout)?;
        }
        RunConfig::Solve(a) => {
            let mesh = domain_mesh(a.domain, a.element, a.n, a.boundary)?;
            let dofmap = build_dofmap(&mesh, a.element)?;
            let (am, mm) = assemble(&mesh, &dofmap, &vec![a.rho; mesh.num_cells()])?;
            if let Some(prefix) = &a.export_matrix {
                let with = |suffix: &str| {
                    let mut p = prefix.as_os_str().to_owned();
                    p.push(suffix);
                    PathBuf::from(p)
                };
                write_atomic(&with(".A.coo"), &am.to_coo_text())?;
                write_atomic(&with(".M.coo"), &mm.to_coo_text())?;
            }
            let r = solve_generalized(&am, &mm, a.k)?;
            let header = ReportHeader::for_config(a);
            let text = match format_for(a.format, a.out.as_deref()) {
                ReportFormat::Json => {
                    let doc = SolveOutput {
                        header: &header,
                        config: a,
                        n_dofs: dofmap.n_dofs(),
                        eigenvalues: &r.eigenvalues,
                        residuals: &r.residuals,
                        eigenvectors: &r.eigenvectors,
                    };
                    let mut s = serde_json::to_string_pretty(&doc).expect("solve output serializes");
                    s.push('\n');
                    s
                }
                ReportFormat::Csv => {
                    let mut s = format!("{}\nk,lambda_h,residual,ndofs\n", header.comment_line());
                    for (j, (l, res)) in r.eigenvalues.iter().zip(&r.residuals).enumerate() {
                        writeln!(s, "{},{},{},{}", j + 1, l, res, dofmap.n_dofs()).unwrap();
                    }
                    s
                }
            };
            emit(a.out.as_deref(), &text, stdout)?;
        }
        RunConfig::Study(a) => {
            let study = a.study_config();
            let reference = study_reference(&study)?;
            let report = run_study(&study, &reference)?;
            let header = ReportHeader::for_config(&study);
            let text = match format_for(a.format, a.out.as_deref()) {
                ReportFormat::Json => report.to_json(&header),
                ReportFormat::Csv => report.to_csv(&header),
            };
            emit(a.out.as_deref(), &text, stdout)?;
        }
        RunConfig::Verify(a) => {
            let lines = run_suite(a.suite)?;
            let mut text = String::new();
            for l in &lines {
                writeln!(text, "{l}").unwrap();
            }
            stdout.write_all(text.as_bytes())?;
            if let Some(p) = &a.out {
                write_atomic(p, &text)?;
            }
            if lines.iter().any(|l| !l.pass) {
                return Ok(Outcome::ChecksFailed);
            }
        }
    }
    Ok(Outcome::Success)
}

/// Parses, runs and maps the result to a process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(&config, &mut lock) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::ChecksFailed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn study_arguments_parse() {
        let c = parse_args([
            "ncfem", "study", "--domain", "square", "--element", "cr", "--levels", "4,8,16,32", "--k", "3", "--out",
            "report.csv",
        ])
        .unwrap();
        let RunConfig::Study(s) = &c else { panic!("expected study") };
        assert_eq!(s.levels, vec![4, 8, 16, 32]);
        assert_eq!(s.element, ElementFamily::Cr);
        assert_eq!(s.boundary, BoundarySpec::default());
        assert_eq!(s.rho, 1.0);
        assert_eq!(format_for(s.format, s.out.as_deref()), ReportFormat::Csv);
    }

    #[test]
    fn usage_errors_exit_with_two() {
        for argv in [
            vec!["ncfem", "study", "--domain", "square", "--element", "bogus", "--levels", "4", "--k", "1"],
            vec!["ncfem", "study", "--domain", "square", "--element", "cr", "--levels", "4", "--k", "0"],
            vec!["ncfem", "solve", "--domain", "square", "--element", "cr", "--n", "4", "--k", "1", "--rho", "-1"],
            vec!["ncfem", "mesh", "--domain", "square", "--n", "2", "--bogus"],
        ] {
            assert_eq!(parse_args(argv).unwrap_err().exit_code(), 2);
        }
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_keys() {
        let c = parse_args(["ncfem", "solve", "--domain", "lshape", "--element", "ecr", "--n", "4", "--k", "2"]).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"command\":\"solve\""));
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
        let bad = json.replacen("{", "{\"extra\":1,", 1);
        assert!(serde_json::from_str::<RunConfig>(&bad).is_err());
    }

    #[test]
    fn format_follows_extension() {
        assert_eq!(format_for(None, Some(Path::new("r.json"))), ReportFormat::Json);
        assert_eq!(format_for(Some(ReportFormat::Csv), Some(Path::new("r.json"))), ReportFormat::Csv);
        assert_eq!(format_for(None, None), ReportFormat::Csv);
    }
}
