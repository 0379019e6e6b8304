use std::path::Path;

use nalgebra::Point3;

use super::{content_lines, parse_f64, parse_usize, TriangleMesh};
use crate::error::{Error, Result};

pub(super) fn parse(text: &str, path: &Path) -> Result<TriangleMesh> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file, expected 'OFF' header"))?;
    let mut header_toks = header.split_whitespace();
    if header_toks.next() != Some("OFF") {
        return Err(Error::parse(path, hline, format!("expected 'OFF' header, found '{header}'")));
    }
    // counts may share the header line
    let rest: Vec<&str> = header_toks.collect();
    let (cline, counts) = if rest.is_empty() {
        lines
            .next()
            .map(|(l, s)| (l, s.split_whitespace().collect::<Vec<_>>()))
            .ok_or_else(|| Error::parse(path, hline + 1, "missing counts line"))?
    } else {
        (hline, rest)
    };
    if counts.len() < 2 {
        return Err(Error::parse(path, cline, "counts line must be 'N F E'"));
    }
    let nv = parse_usize(counts[0], path, cline)?;
    let nf = parse_usize(counts[1], path, cline)?;

    let mut vertices = Vec::with_capacity(nv);
    let mut width = None;
    let mut last = cline;
    for k in 0..nv {
        let (l, s) = lines.next().ok_or_else(|| {
            Error::parse(path, last + 1, format!("vertex block ended after {k} of {nv} vertices"))
        })?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        // every vertex row has the same layout as the first one
        let w = *width.get_or_insert(toks.len());
        if toks.len() < 3 || toks.len() != w {
            return Err(Error::parse(
                path,
                l,
                format!("vertex {k}: expected {} values, found {}", w.max(3), toks.len()),
            ));
        }
        vertices.push(Point3::new(
            parse_f64(toks[0], path, l)?,
            parse_f64(toks[1], path, l)?,
            parse_f64(toks[2], path, l)?,
        ));
        last = l;
    }

    let mut faces = Vec::with_capacity(nf);
    for k in 0..nf {
        let (l, s) = lines.next().ok_or_else(|| {
            Error::parse(path, last + 1, format!("face block ended after {k} of {nf} faces"))
        })?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        let arity = parse_usize(toks[0], path, l)?;
        if arity != 3 {
            return Err(Error::parse(path, l, format!("only triangles are supported, found a {arity}-gon")));
        }
        if toks.len() < 4 {
            return Err(Error::parse(path, l, "face line must be '3 i j k'"));
        }
        faces.push([
            parse_usize(toks[1], path, l)?,
            parse_usize(toks[2], path, l)?,
            parse_usize(toks[3], path, l)?,
        ]);
        last = l;
    }
    TriangleMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2";

    #[test]
    fn minimal_file() {
        let mesh = parse(MINIMAL, Path::new("t.off")).unwrap();
        assert_eq!(mesh.num_vertices(), 3);
        assert_eq!(mesh.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn vertex_count_mismatch_fails_in_vertex_block() {
        let text = MINIMAL.replace("3 1 0", "4 1 0");
        match parse(&text, Path::new("t.off")).unwrap_err() {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 6);
                assert!(msg.contains("vertex"), "{msg}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn header_and_counts_on_one_line_with_comments() {
        let text = "# comment\nOFF 3 1 0\n0 0 0 # origin\n\n1 0 0\n0 1 0\n3 2 1 0\n";
        let mesh = parse(text, Path::new("t.off")).unwrap();
        assert_eq!(mesh.faces(), &[[2, 1, 0]]);
    }

    #[test]
    fn quads_and_bad_header_rejected() {
        let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(parse(quad, Path::new("q")), Err(Error::Parse { line: 7, .. })));
        assert!(matches!(parse("PLY\n", Path::new("q")), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("", Path::new("q")), Err(Error::Parse { .. })));
    }

    #[test]
    fn bad_index_is_validation_error() {
        let text = MINIMAL.replace("3 0 1 2", "3 0 1 7");
        assert!(matches!(parse(&text, Path::new("t")), Err(Error::Validation(_))));
    }
}
