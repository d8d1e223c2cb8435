use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::StudyReport;

/// Schema tag of every serialized report.
pub const REPORT_SCHEMA: &str = "ncfem-report v1";

/// Provenance line written at the top of every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportHeader {
    pub schema: String,
    pub version: String,
    /// Hex SHA-256 of the canonical JSON of the run configuration.
    pub config_hash: String,
}

impl ReportHeader {
    pub fn for_config<C: Serialize>(config: &C) -> ReportHeader {
        let json = serde_json::to_string(config).expect("configuration serializes");
        let digest = Sha256::digest(json.as_bytes());
        let config_hash = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        });
        ReportHeader { schema: REPORT_SCHEMA.into(), version: env!("CARGO_PKG_VERSION").into(), config_hash }
    }

    pub fn comment_line(&self) -> String {
        format!("# {} version={} config={}", self.schema, self.version, self.config_hash)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

impl StudyReport {
    /// One row per level and eigenvalue:
    /// `level,h,ndofs,k,lambda_h,lambda_ref,flag,rate`.
    pub fn to_csv(&self, header: &ReportHeader) -> String {
        let mut out = String::new();
        writeln!(out, "{}", header.comment_line()).unwrap();
        writeln!(
            out,
            "# family={} domain={} boundary={} rho={} reference={}",
            self.config.family,
            self.config.domain,
            self.config.boundary,
            self.config.rho,
            if self.reference.is_analytic() { "analytic" } else { "extrapolated" }
        )
        .unwrap();
        writeln!(out, "level,h,ndofs,k,lambda_h,lambda_ref,flag,rate").unwrap();
        for row in &self.levels {
            for j in 0..self.config.k {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    row.n,
                    row.h_max,
                    row.n_dofs,
                    j + 1,
                    row.eigenvalues[j],
                    self.reference.values[j],
                    row.flags[j],
                    opt(self.rates[j])
                )
                .unwrap();
            }
        }
        out
    }

    pub fn to_json(&self, header: &ReportHeader) -> String {
        #[derive(Serialize)]
        struct Document<'a> {
            #[serde(flatten)]
            header: &'a ReportHeader,
            report: &'a StudyReport,
        }
        let mut s = serde_json::to_string_pretty(&Document { header, report: self }).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::ElementFamily;
    use crate::mesh::BoundarySpec;
    use crate::verify::{exact_square_spectrum, run_study, Domain, StudyConfig};

    fn report() -> StudyReport {
        let c = StudyConfig {
            domain: Domain::Square,
            family: ElementFamily::Cr,
            levels: vec![2, 4, 8],
            k: 2,
            boundary: BoundarySpec::default(),
            rho: 1.0,
        };
        run_study(&c, &exact_square_spectrum(2)).unwrap()
    }

    #[test]
    fn csv_layout() {
        let r = report();
        let h = ReportHeader::for_config(&r.config);
        let csv = r.to_csv(&h);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# ncfem-report v1 version="));
        assert_eq!(lines[2], "level,h,ndofs,k,lambda_h,lambda_ref,flag,rate");
        assert_eq!(lines.len(), 3 + 3 * 2);
        assert!(lines[3].starts_with("2,") && lines[3].contains(",below,"));
        assert_eq!(h.config_hash.len(), 64);
    }

    #[test]
    fn json_is_versioned_and_deterministic() {
        let r = report();
        let h = ReportHeader::for_config(&r.config);
        let a = r.to_json(&h);
        assert_eq!(a, report().to_json(&h));
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["schema"], "ncfem-report v1");
        assert_eq!(v["report"]["config"]["family"], "CR");
        let back: StudyReport = serde_json::from_value(v["report"].clone()).unwrap();
        assert_eq!(back.config, r.config);
    }
}
