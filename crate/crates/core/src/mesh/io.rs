//! Plain-text triangulation format.
//!
//! ```text
//! NODES 4
//! 0.0 0.0 wall
//! 1.0 0.0 wall
//! 1.0 1.0 outflow
//! 0.0 1.0 wall
//! TRIANGLES 2
//! 0 1 2
//! 0 2 3
//! ```
//!
//! Markers are `interior`, `wall`, `inflow`, `outflow` or the digits 0-3.
//! Blank lines and lines starting with `#` are ignored. Indices are 0-based.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point;

use super::triangulation::{NodeMarker, Triangulation};

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Triangulation> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text)
}

pub fn write_mesh(path: impl AsRef<Path>, tri: &Triangulation) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_mesh(tri)).map_err(|e| Error::io(path, e))
}

pub fn format_mesh(tri: &Triangulation) -> String {
    let mut out = String::new();
    writeln!(out, "NODES {}", tri.nodes.len()).unwrap();
    for (p, m) in tri.nodes.iter().zip(&tri.markers) {
        writeln!(out, "{:?} {:?} {m}", p.x, p.y).unwrap();
    }
    writeln!(out, "TRIANGLES {}", tri.triangles.len()).unwrap();
    for t in &tri.triangles {
        writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    out
}

pub fn parse_mesh(text: &str) -> Result<Triangulation> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let err = |line: usize, message: String| Error::MeshParse { line, message };
    let header = |name: &str, lines: &mut dyn Iterator<Item = (usize, &str)>| -> Result<(usize, usize)> {
        let (ln, l) = lines.next().ok_or_else(|| err(0, format!("missing `{name}` header")))?;
        let mut it = l.split_whitespace();
        if it.next() != Some(name) {
            return Err(err(ln, format!("expected `{name} <count>`")));
        }
        let n = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(ln, format!("bad {name} count")))?;
        Ok((ln, n))
    };

    let (_, n_nodes) = header("NODES", &mut lines)?;
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut markers = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "unexpected end of node list".into()))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(ln, "expected `x y marker`".into()));
        }
        let x: f64 = f[0].parse().map_err(|_| err(ln, format!("bad coordinate `{}`", f[0])))?;
        let y: f64 = f[1].parse().map_err(|_| err(ln, format!("bad coordinate `{}`", f[1])))?;
        let m: NodeMarker = f[2].parse().map_err(|e| err(ln, e))?;
        nodes.push(Point::new(x, y));
        markers.push(m);
    }

    let (_, n_tris) = header("TRIANGLES", &mut lines)?;
    let mut triangles = Vec::with_capacity(n_tris);
    for _ in 0..n_tris {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "unexpected end of triangle list".into()))?;
        let f: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| err(ln, format!("bad node index `{s}`"))))
            .collect::<Result<_>>()?;
        if f.len() != 3 {
            return Err(err(ln, "expected `i0 i1 i2`".into()));
        }
        triangles.push([f[0], f[1], f[2]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after triangle list".into()));
    }
    Triangulation::new(nodes, triangles, markers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{right_diagonal, RectDomain};

    #[test]
    fn round_trip() {
        let tri = right_diagonal(RectDomain::new(0.0, 1.3, -0.2, 0.7), 3, 2);
        let back = parse_mesh(&format_mesh(&tri)).unwrap();
        assert_eq!(back, tri);
    }

    #[test]
    fn numeric_markers_and_comments() {
        let text = "# square\nNODES 3\n0 0 1\n1 0 3\n0 1 2\n\nTRIANGLES 1\n0 1 2\n";
        let tri = parse_mesh(text).unwrap();
        assert_eq!(tri.markers, vec![NodeMarker::Wall, NodeMarker::Outflow, NodeMarker::Inflow]);
    }

    #[test]
    fn bad_index_is_reported() {
        let text = "NODES 3\n0 0 wall\n1 0 wall\n0 1 wall\nTRIANGLES 1\n0 1 7\n";
        assert!(matches!(parse_mesh(text), Err(Error::NodeIndexOutOfRange { node: 7, .. })));
    }

    #[test]
    fn malformed_line_names_line_number() {
        let text = "NODES 2\n0 0 wall\n1 zero wall\n";
        match parse_mesh(text) {
            Err(Error::MeshParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
