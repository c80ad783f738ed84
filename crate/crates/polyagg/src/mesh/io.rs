//! Text mesh format, line-oriented:
//!
//! ```text
//! polyagg-mesh v1
//! V <num_vertices>
//! <x> <y>            (one per vertex, full precision)
//! C <num_cells>
//! <k> <i1> ... <ik>  (one per cell, CCW vertex indices, 0-based)
//! ```
//!
//! Saving then loading reproduces vertices and cells exactly; canonical files
//! round-trip byte-identically. Meshes with hanging nodes (a geometric edge
//! split on one side only) load fine but their connectivity graph will not
//! see the split edge as shared; generators never produce them.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::PolyMesh;
use std::fmt::Write as _;
use std::path::Path;

pub const MESH_MAGIC: &str = "polyagg-mesh v1";

/// Serializes the mesh in the canonical text format. The write is atomic:
/// the file appears complete or not at all.
pub fn save_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(MESH_MAGIC);
    out.push('\n');
    let _ = writeln!(out, "V {}", mesh.vertex_count());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {}", p.x, p.y);
    }
    let _ = writeln!(out, "C {}", mesh.cell_count());
    for cell in mesh.cells() {
        let _ = write!(out, "{}", cell.len());
        for &i in cell {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    crate::write_atomic(path, out.as_bytes())
}

/// Parses a mesh file, reporting the offending line on malformed input, and
/// validates all mesh invariants (orientation, index ranges, loop sanity).
pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let path_str = path.display().to_string();
    let fail = |line: usize, message: String| Error::Parse {
        path: path_str.clone(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    let mut next_line = |expect: &str| {
        lines
            .next()
            .ok_or_else(|| fail(0, format!("unexpected end of file, expected {expect}")))
    };

    let (ln, header) = next_line("header")?;
    if header.trim_end() != MESH_MAGIC {
        return Err(fail(ln + 1, format!("bad header {header:?}, expected {MESH_MAGIC:?}")));
    }

    let (ln, vline) = next_line("vertex count")?;
    let nv = parse_count(vline, 'V').map_err(|m| fail(ln + 1, m))?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, line) = next_line("vertex coordinates")?;
        let mut it = line.split_whitespace();
        let x = it
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| fail(ln + 1, "expected x coordinate".into()))?;
        let y = it
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| fail(ln + 1, "expected y coordinate".into()))?;
        if it.next().is_some() {
            return Err(fail(ln + 1, "trailing tokens after vertex".into()));
        }
        vertices.push(Point::new(x, y));
    }

    let (ln, cline) = next_line("cell count")?;
    let nc = parse_count(cline, 'C').map_err(|m| fail(ln + 1, m))?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, line) = next_line("cell record")?;
        let mut it = line.split_whitespace();
        let k = it
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| fail(ln + 1, "expected vertex count".into()))?;
        let idx: Vec<usize> = it
            .by_ref()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| fail(ln + 1, format!("bad vertex index {t:?}")))
            })
            .collect::<Result<_>>()?;
        if idx.len() != k {
            return Err(fail(
                ln + 1,
                format!("cell declares {k} vertices but lists {}", idx.len()),
            ));
        }
        cells.push(idx);
    }
    if let Some((ln, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(fail(ln + 1, format!("unexpected trailing content {extra:?}")));
    }

    PolyMesh::new(vertices, cells)
}

fn parse_count(line: &str, tag: char) -> std::result::Result<usize, String> {
    let mut it = line.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(t), Some(num), None) if t.len() == 1 && t.starts_with(tag) => num
            .parse::<usize>()
            .map_err(|_| format!("bad count {num:?} after {tag}")),
        _ => Err(format!("expected `{tag} <count>`, got {line:?}")),
    }
}
