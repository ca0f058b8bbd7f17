//! Area-weighted error norms.

use std::fmt::Write as _;

use crate::mesh::DualMesh;

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub field: String,
    pub time: f64,
    /// `sqrt(sum |D_j| e_j^2 / sum |D_j|)`.
    pub l2: f64,
    /// `sum |D_j| |e_j| / sum |D_j|`.
    pub l1: f64,
    pub max: f64,
    pub cells: usize,
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str = "field,t,l2,l1,max,cells";

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        write!(s, "{},{},{},{},{},{}", self.field, self.time, self.l2, self.l1, self.max, self.cells).unwrap();
        s
    }
}

/// Errors of `numeric` against `exact` over the cells selected by `mask`
/// (all cells when `None`), both sampled at the cell centers of mass.
pub fn error_norms(
    field: &str,
    time: f64,
    mesh: &DualMesh,
    numeric: &[f64],
    exact: &[f64],
    mask: Option<&[bool]>,
) -> ErrorReport {
    let (mut area, mut s1, mut s2, mut max, mut cells) = (0.0, 0.0, 0.0, 0.0f64, 0);
    for (j, cell) in mesh.cells.iter().enumerate() {
        if mask.is_some_and(|m| !m[j]) {
            continue;
        }
        let e = (numeric[j] - exact[j]).abs();
        area += cell.area;
        s1 += cell.area * e;
        s2 += cell.area * e * e;
        max = max.max(e);
        cells += 1;
    }
    ErrorReport {
        field: field.to_string(),
        time,
        l2: (s2 / area).sqrt(),
        l1: s1 / area,
        max,
        cells,
    }
}

/// The L2 error `E` over all cells.
pub fn l2_error(mesh: &DualMesh, numeric: &[f64], exact: &[f64]) -> f64 {
    error_norms("", 0.0, mesh, numeric, exact, None).l2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_dual;
    use crate::mesh::generate::{equilateral, RectDomain};

    #[test]
    fn exact_and_offset() {
        let mesh = build_dual(&equilateral(RectDomain::new(0.0, 1.0, 0.0, 1.0), 0.01)).unwrap();
        let exact: Vec<f64> = mesh.cells.iter().map(|c| c.centroid.x.sin()).collect();
        assert_eq!(l2_error(&mesh, &exact, &exact), 0.0);
        let shifted: Vec<f64> = exact.iter().map(|v| v + 0.25).collect();
        let r = error_norms("c", 1.0, &mesh, &shifted, &exact, None);
        assert!((r.l2 - 0.25).abs() < 1e-12);
        assert!((r.l1 - 0.25).abs() < 1e-12);
        assert!((r.max - 0.25).abs() < 1e-12);
    }
}
