//! Scalar summaries used by the benchmarks.

use crate::mesh::DualMesh;

/// Area of the cells whose concentration lies strictly between `lo` and `hi`,
/// divided by `perimeter`: a length measuring how smeared a front is.
pub fn front_width(mesh: &DualMesh, c: &[f64], lo: f64, hi: f64, perimeter: f64) -> f64 {
    let area: f64 = mesh.cells.iter().zip(c).filter(|(_, &c)| c > lo && c < hi).map(|(cell, _)| cell.area).sum();
    area / perimeter
}

/// Indices of the cells whose center of mass lies within `half_width` of the line `y = y_mid`.
pub fn centerline_band(mesh: &DualMesh, y_mid: f64, half_width: f64) -> Vec<usize> {
    (0..mesh.len()).filter(|&j| (mesh.cells[j].centroid.y - y_mid).abs() <= half_width).collect()
}

/// Area-weighted relative L1 difference over `cells`.
pub fn relative_l1(mesh: &DualMesh, cells: &[usize], numeric: &[f64], exact: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &j in cells {
        let a = mesh.cells[j].area;
        num += a * (numeric[j] - exact[j]).abs();
        den += a * exact[j].abs();
    }
    num / den.max(f64::MIN_POSITIVE)
}

/// Largest x among `cells` where `field` exceeds `threshold`.
pub fn front_position(mesh: &DualMesh, cells: &[usize], field: &[f64], threshold: f64) -> Option<f64> {
    cells.iter().filter(|&&j| field[j] > threshold).map(|&j| mesh.cells[j].centroid.x).reduce(f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_dual;
    use crate::mesh::generate::{right_diagonal, RectDomain};

    #[test]
    fn width_and_front() {
        let mesh = build_dual(&right_diagonal(RectDomain::new(0.0, 4.0, 0.0, 1.0), 4, 1)).unwrap();
        let c: Vec<f64> = mesh.cells.iter().map(|c| if c.centroid.x < 2.0 { 1.0 } else { 0.0 }).collect();
        assert_eq!(front_width(&mesh, &c, 0.05, 0.95, 1.0), 0.0);
        let all: Vec<usize> = (0..mesh.len()).collect();
        let x = front_position(&mesh, &all, &c, 0.5).unwrap();
        assert!(x < 2.0 && x > 1.0);
        assert_eq!(relative_l1(&mesh, &all, &c, &c), 0.0);
        assert_eq!(centerline_band(&mesh, 0.5, 10.0).len(), mesh.len());
    }
}
