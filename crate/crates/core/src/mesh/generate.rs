//! Structured triangulations of rectangles.

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

use super::triangulation::{NodeMarker, Triangulation};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectDomain {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl RectDomain {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        RectDomain { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridPattern {
    /// Staggered rows of nearly equilateral triangles.
    #[default]
    Equilateral,
    /// Squares split along the rising diagonal.
    RightDiagonal,
}

/// Triangulates `domain` so the mean dual-cell area is close to `target_cell_area`.
pub fn structured(domain: RectDomain, target_cell_area: f64, pattern: GridPattern) -> Triangulation {
    match pattern {
        GridPattern::Equilateral => equilateral(domain, target_cell_area),
        GridPattern::RightDiagonal => {
            let h = target_cell_area.sqrt();
            let nx = ((domain.width() / h).round() as usize).max(1);
            let ny = ((domain.height() / h).round() as usize).max(1);
            right_diagonal(domain, nx, ny)
        }
    }
}

/// `nx * ny` squares, each cut into two triangles by the diagonal through its
/// lower-left and upper-right corners.
pub fn right_diagonal(domain: RectDomain, nx: usize, ny: usize) -> Triangulation {
    let dx = domain.width() / nx as f64;
    let dy = domain.height() / ny as f64;
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut markers = Vec::with_capacity(nodes.capacity());
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { domain.x1 } else { domain.x0 + i as f64 * dx };
            let y = if j == ny { domain.y1 } else { domain.y0 + j as f64 * dy };
            nodes.push(Point::new(x, y));
            let on_boundary = i == 0 || j == 0 || i == nx || j == ny;
            markers.push(if on_boundary { NodeMarker::Wall } else { NodeMarker::Interior });
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Triangulation { nodes, triangles, markers }
}

/// Rows of nodes with every other row shifted by half a spacing, stitched
/// into triangles that are equilateral away from the left and right sides.
pub fn equilateral(domain: RectDomain, target_cell_area: f64) -> Triangulation {
    // dual cell of an equilateral grid with side s has area (sqrt(3)/2) s^2
    let s = (2.0 * target_cell_area / 3f64.sqrt()).sqrt();
    let ny = ((domain.height() / (s * 3f64.sqrt() / 2.0)).round() as usize).max(1);
    let nx = ((domain.width() / s).round() as usize).max(1);
    let dx = domain.width() / nx as f64;
    let dy = domain.height() / ny as f64;

    let mut nodes = Vec::new();
    let mut markers = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(ny + 1);
    for j in 0..=ny {
        let y = if j == ny { domain.y1 } else { domain.y0 + j as f64 * dy };
        let mut xs = Vec::with_capacity(nx + 2);
        if j % 2 == 0 {
            for i in 0..nx {
                xs.push(domain.x0 + i as f64 * dx);
            }
        } else {
            xs.push(domain.x0);
            for i in 0..nx {
                xs.push(domain.x0 + (i as f64 + 0.5) * dx);
            }
        }
        xs.push(domain.x1);
        let mut row = Vec::with_capacity(xs.len());
        let last = xs.len() - 1;
        for (i, &x) in xs.iter().enumerate() {
            row.push(nodes.len());
            nodes.push(Point::new(x, y));
            let on_boundary = j == 0 || j == ny || i == 0 || i == last;
            markers.push(if on_boundary { NodeMarker::Wall } else { NodeMarker::Interior });
        }
        rows.push(row);
    }

    let mut triangles = Vec::new();
    for j in 0..ny {
        let (a, b) = (&rows[j], &rows[j + 1]);
        let (mut i, mut k) = (0, 0);
        while i + 1 < a.len() || k + 1 < b.len() {
            let advance_lower = if i + 1 == a.len() {
                false
            } else if k + 1 == b.len() {
                true
            } else {
                nodes[a[i + 1]].x < nodes[b[k + 1]].x
            };
            if advance_lower {
                triangles.push([a[i], a[i + 1], b[k]]);
                i += 1;
            } else {
                triangles.push([a[i], b[k + 1], b[k]]);
                k += 1;
            }
        }
    }
    Triangulation { nodes, triangles, markers }
}
