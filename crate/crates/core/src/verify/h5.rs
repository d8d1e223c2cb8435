use std::fmt;

use serde::Serialize;

use crate::elements::{mixed_derivative_vanishes, ElementFamily};

/// Derivative components `[a, b]` of total order `m + k` that vanish on
/// every shape function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct H5Entry {
    pub k: usize,
    pub components: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct H5Report {
    pub family: ElementFamily,
    pub operator_order: usize,
    /// One entry per `k = 1, 2`.
    pub entries: Vec<H5Entry>,
}

impl H5Report {
    /// Some fixed derivative component vanishes identically on the space.
    pub fn satisfiable(&self) -> bool {
        self.entries.iter().any(|e| !e.components.is_empty())
    }

    pub fn vanishes(&self, component: [usize; 2]) -> bool {
        self.entries.iter().any(|e| e.components.contains(&component))
    }
}

impl fmt::Display for H5Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.family)?;
        for e in &self.entries {
            let names: Vec<String> = e.components.iter().map(|[a, b]| format!("d{a}{b}")).collect();
            write!(f, " k={} [{}]", e.k, names.join(" "))?;
        }
        write!(f, " ({})", if self.satisfiable() { "satisfiable" } else { "not satisfiable" })
    }
}

/// Lists, for `k = 1, 2`, the derivatives `d^a/dx^a d^b/dy^b` with
/// `a + b = m + k` that annihilate the family's local space.
pub fn h5_saturation_check(family: ElementFamily) -> H5Report {
    let m = family.operator_order();
    let entries = (1..=2)
        .map(|k| {
            let order = m + k;
            let components = (0..=order).rev().map(|a| [a, order - a]).filter(|&c| mixed_derivative_vanishes(family, c)).collect();
            H5Entry { k, components }
        })
        .collect();
    H5Report { family, operator_order: m, entries }
}
