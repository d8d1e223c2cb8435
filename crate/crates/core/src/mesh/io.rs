use std::collections::HashMap;
use std::fmt::Write as _;

use super::{BoundaryTag, CellKind, Mesh, MeshError};

const MAGIC: &str = "ncfem-mesh";
const VERSION: &str = "v1";

/// Serializes a mesh as plain text:
///
/// ```text
/// ncfem-mesh v1 triangle
/// V <count>
/// <x> <y>
/// C <count>
/// <i> <j> <k>
/// B <count>
/// <edge index> <dirichlet|neumann>
/// ```
///
/// Coordinates use the shortest representation that parses back exactly.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} {VERSION} {}", mesh.kind().name()).unwrap();
    writeln!(out, "V {}", mesh.num_vertices()).unwrap();
    for p in mesh.vertices() {
        writeln!(out, "{} {}", p[0], p[1]).unwrap();
    }
    writeln!(out, "C {}", mesh.num_cells()).unwrap();
    for c in mesh.cells() {
        let line: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    let boundary: Vec<(usize, BoundaryTag)> = mesh
        .boundary_tags()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t != BoundaryTag::Interior)
        .map(|(e, &t)| (e, t))
        .collect();
    writeln!(out, "B {}", boundary.len()).unwrap();
    for (e, t) in boundary {
        writeln!(out, "{e} {}", t.name()).unwrap();
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str), MeshError> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                self.last = i + 1;
                return Ok((i + 1, line));
            }
        }
        Err(MeshError::Format { line: self.last + 1, message: "unexpected end of input".into() })
    }

    fn section(&mut self, name: &str) -> Result<usize, MeshError> {
        let (line, text) = self.next()?;
        let mut parts = text.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(count), None) if n == name => count
                .parse()
                .map_err(|_| MeshError::Format { line, message: format!("invalid count '{count}'") }),
            _ => Err(MeshError::Format { line, message: format!("expected '{name} <count>'") }),
        }
    }
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str, expected: usize) -> Result<Vec<T>, MeshError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != expected {
        return Err(MeshError::Format { line, message: format!("expected {expected} fields, found {}", fields.len()) });
    }
    fields
        .iter()
        .map(|f| f.parse().map_err(|_| MeshError::Format { line, message: format!("cannot parse '{f}'") }))
        .collect()
}

/// Parses the format produced by [`write_mesh`].
pub fn read_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };

    let (line, header) = lines.next()?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != MAGIC || parts[1] != VERSION {
        return Err(MeshError::Format { line, message: format!("expected '{MAGIC} {VERSION} <kind>' header") });
    }
    let kind: CellKind = parts[2].parse().map_err(|message| MeshError::Format { line, message })?;

    let nv = lines.section("V")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, text) = lines.next()?;
        let xy: Vec<f64> = parse_fields(line, text, 2)?;
        if !xy.iter().all(|v| v.is_finite()) {
            return Err(MeshError::Format { line, message: "non-finite coordinate".into() });
        }
        vertices.push([xy[0], xy[1]]);
    }

    let nc = lines.section("C")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line, text) = lines.next()?;
        let cell: Vec<usize> = parse_fields(line, text, kind.vertex_count())?;
        if let Some(&bad) = cell.iter().find(|&&v| v >= nv) {
            return Err(MeshError::Format { line, message: format!("vertex index {bad} out of range") });
        }
        cells.push(cell);
    }

    let nb = lines.section("B")?;
    let mut tags: HashMap<usize, (usize, BoundaryTag)> = HashMap::new();
    for _ in 0..nb {
        let (line, text) = lines.next()?;
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(MeshError::Format { line, message: "expected '<edge> <tag>'".into() });
        }
        let e: usize = fields[0]
            .parse()
            .map_err(|_| MeshError::Format { line, message: format!("cannot parse '{}'", fields[0]) })?;
        let tag = match fields[1] {
            "dirichlet" => BoundaryTag::Dirichlet,
            "neumann" => BoundaryTag::Neumann,
            other => return Err(MeshError::Format { line, message: format!("unknown tag '{other}'") }),
        };
        tags.insert(e, (line, tag));
    }
    if let Ok((line, _)) = lines.next() {
        return Err(MeshError::Format { line, message: "trailing content".into() });
    }

    // First pass fixes edge numbering; tags are then attached by index.
    let probe = Mesh::from_cells(vertices.clone(), cells.clone(), kind, Default::default(), |_, _| {
        BoundaryTag::Dirichlet
    });
    for (&e, &(line, _)) in &tags {
        if e >= probe.num_edges() || probe.edge_cells()[e].len() != 1 {
            return Err(MeshError::Format { line, message: format!("edge {e} is not a boundary edge") });
        }
    }
    let mut by_pair: HashMap<[usize; 2], BoundaryTag> = HashMap::new();
    for (e, &[a, b]) in probe.edges().iter().enumerate() {
        if probe.edge_cells()[e].len() == 1 {
            let tag = tags.get(&e).map(|&(_, t)| t).ok_or_else(|| MeshError::Format {
                line: lines.last,
                message: format!("boundary edge {e} has no tag"),
            })?;
            by_pair.insert([a.min(b), a.max(b)], tag);
        }
    }
    let lookup: HashMap<[u64; 2], usize> =
        vertices.iter().enumerate().map(|(i, p)| ([p[0].to_bits(), p[1].to_bits()], i)).collect();
    if lookup.len() != vertices.len() {
        return Err(MeshError::Format { line: 0, message: "duplicate vertex coordinates".into() });
    }
    Ok(Mesh::from_cells(vertices.clone(), cells, kind, Default::default(), |p, q| {
        let a = lookup[&[p[0].to_bits(), p[1].to_bits()]];
        let b = lookup[&[q[0].to_bits(), q[1].to_bits()]];
        by_pair[&[a.min(b), a.max(b)]]
    }))
}
