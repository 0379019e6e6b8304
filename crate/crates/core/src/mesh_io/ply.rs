use std::path::Path;

use nalgebra::Point3;

use super::{content_lines, parse_f64, parse_usize, TriangleMesh};
use crate::error::{Error, Result};

#[derive(Debug)]
enum Property {
    Scalar(String),
    List(String),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

pub(super) fn parse(text: &str, path: &Path) -> Result<TriangleMesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(Error::parse(path, 1, "expected 'ply' magic line")),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut end_line = None;
    for (l, line) in lines.by_ref() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => {}
            ["format", kind, ..] => {
                return Err(Error::parse(
                    path,
                    l,
                    format!("unsupported PLY format '{kind}': only ASCII PLY is supported"),
                ))
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: parse_usize(count, path, l)?,
                props: Vec::new(),
            }),
            ["property", "list", _, _, name] => current(&mut elements, path, l)?
                .props
                .push(Property::List(name.to_string())),
            ["property", _, name] => current(&mut elements, path, l)?
                .props
                .push(Property::Scalar(name.to_string())),
            ["end_header"] => {
                end_line = Some(l);
                break;
            }
            _ => return Err(Error::parse(path, l, format!("unrecognized header line '{line}'"))),
        }
    }
    let Some(end_line) = end_line else {
        return Err(Error::parse(path, text.lines().count(), "missing 'end_header'"));
    };

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut body = content_lines(text).skip_while(|&(l, _)| l <= end_line);
    let mut last = end_line;
    for el in &elements {
        let xyz = ["x", "y", "z"].map(|axis| {
            el.props
                .iter()
                .position(|p| matches!(p, Property::Scalar(n) if n == axis))
        });
        let face_list = el
            .props
            .iter()
            .position(|p| matches!(p, Property::List(n) if n == "vertex_indices" || n == "vertex_index"));
        for k in 0..el.count {
            let (l, line) = body.next().ok_or_else(|| {
                Error::parse(
                    path,
                    last + 1,
                    format!("element '{}' ended after {k} of {} rows", el.name, el.count),
                )
            })?;
            last = l;
            let fields = split_fields(line, &el.props, path, l)?;
            match el.name.as_str() {
                "vertex" => {
                    let mut c = [0.0; 3];
                    for (axis, slot) in xyz.iter().enumerate() {
                        let idx = slot.ok_or_else(|| {
                            Error::parse(path, end_line, "vertex element lacks x/y/z properties")
                        })?;
                        c[axis] = parse_f64(fields[idx][0], path, l)?;
                    }
                    vertices.push(Point3::new(c[0], c[1], c[2]));
                }
                "face" => {
                    let idx = face_list.ok_or_else(|| {
                        Error::parse(path, end_line, "face element lacks a vertex_indices list")
                    })?;
                    let ids = &fields[idx];
                    if ids.len() != 3 {
                        return Err(Error::parse(
                            path,
                            l,
                            format!("only triangles are supported, found a {}-gon", ids.len()),
                        ));
                    }
                    faces.push([
                        parse_usize(ids[0], path, l)?,
                        parse_usize(ids[1], path, l)?,
                        parse_usize(ids[2], path, l)?,
                    ]);
                }
                _ => {}
            }
        }
    }
    TriangleMesh::new(vertices, faces)
}

fn current<'a>(elements: &'a mut [Element], path: &Path, line: usize) -> Result<&'a mut Element> {
    elements
        .last_mut()
        .ok_or_else(|| Error::parse(path, line, "property declared before any element"))
}

/// Splits a data row into one token group per property.
fn split_fields<'a>(
    line: &'a str,
    props: &[Property],
    path: &Path,
    l: usize,
) -> Result<Vec<Vec<&'a str>>> {
    let mut toks = line.split_whitespace();
    let mut short = || Error::parse(path, l, "row has fewer values than declared properties");
    let mut out = Vec::with_capacity(props.len());
    for p in props {
        match p {
            Property::Scalar(_) => out.push(vec![toks.next().ok_or_else(&mut short)?]),
            Property::List(_) => {
                let n = parse_usize(toks.next().ok_or_else(&mut short)?, path, l)?;
                let items: Vec<&str> = toks.by_ref().take(n).collect();
                if items.len() != n {
                    return Err(short());
                }
                out.push(items);
            }
        }
    }
    if toks.next().is_some() {
        return Err(Error::parse(path, l, "row has more values than declared properties"));
    }
    Ok(out)
}
