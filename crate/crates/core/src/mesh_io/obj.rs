use std::path::Path;

use nalgebra::Point3;

use super::{content_lines, parse_f64, TriangleMesh};
use crate::error::{Error, Result};

pub(super) fn parse(text: &str, path: &Path) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (l, line) in content_lines(text) {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let c: Vec<&str> = toks.collect();
                // optional w or vertex colors may follow
                if c.len() < 3 {
                    return Err(Error::parse(path, l, "vertex record needs 3 coordinates"));
                }
                vertices.push(Point3::new(
                    parse_f64(c[0], path, l)?,
                    parse_f64(c[1], path, l)?,
                    parse_f64(c[2], path, l)?,
                ));
            }
            Some("f") => {
                let refs: Vec<&str> = toks.collect();
                if refs.len() != 3 {
                    return Err(Error::parse(
                        path,
                        l,
                        format!("only triangles are supported, found a {}-gon", refs.len()),
                    ));
                }
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(&refs) {
                    *slot = resolve_index(r, vertices.len(), path, l)?;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Resolves `i`, `i/t`, `i//n` or `i/t/n` (1-based, negative = relative).
fn resolve_index(r: &str, seen: usize, path: &Path, l: usize) -> Result<usize> {
    let head = r.split('/').next().unwrap_or("");
    let i: i64 = head
        .parse()
        .map_err(|_| Error::parse(path, l, format!("bad vertex reference '{r}'")))?;
    match i {
        0 => Err(Error::parse(path, l, "vertex references are 1-based, found 0")),
        i if i > 0 => Ok(i as usize - 1),
        i => {
            let back = i.unsigned_abs() as usize;
            if back > seen {
                return Err(Error::Validation(format!(
                    "line {l}: relative reference {i} precedes the first vertex"
                )));
            }
            Ok(seen - back)
        }
    }
}
