use std::fmt;

use crate::timestepping::geometric_lambdas;

use super::dual::DualMesh;

#[derive(Clone, Debug, PartialEq)]
pub struct MeshQuality {
    pub cells: usize,
    pub triangles: usize,
    pub min_area: f64,
    pub max_area: f64,
    pub mean_area: f64,
    pub min_dist: f64,
    pub max_dist: f64,
    /// Longest over shortest dual edge.
    pub edge_length_ratio: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_tilde_min: f64,
    pub lambda_tilde_max: f64,
}

pub fn mesh_quality_report(mesh: &DualMesh) -> MeshQuality {
    let areas = mesh.cells.iter().map(|c| c.area);
    let min_area = areas.clone().fold(f64::INFINITY, f64::min);
    let max_area = areas.fold(0.0, f64::max);
    let (mut min_dist, mut max_dist) = (f64::INFINITY, 0.0f64);
    let (mut min_len, mut max_len) = (f64::INFINITY, 0.0f64);
    for f in &mesh.faces {
        min_dist = min_dist.min(f.dist);
        max_dist = max_dist.max(f.dist);
        min_len = min_len.min(f.length);
        max_len = max_len.max(f.length);
    }
    let lam = geometric_lambdas(mesh);
    let fmin = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    MeshQuality {
        cells: mesh.len(),
        triangles: mesh.triangulation.triangles.len(),
        min_area,
        max_area,
        mean_area: mesh.mean_cell_area(),
        min_dist,
        max_dist,
        edge_length_ratio: max_len / min_len,
        lambda_min: fmin(&lam.lambda),
        lambda_max: lam.lambda_max,
        lambda_tilde_min: fmin(&lam.lambda_tilde),
        lambda_tilde_max: lam.lambda_tilde_max,
    }
}

impl fmt::Display for MeshQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cells          {}", self.cells)?;
        writeln!(f, "triangles      {}", self.triangles)?;
        writeln!(f, "area           min {:.4e}  max {:.4e}  mean {:.4e}", self.min_area, self.max_area, self.mean_area)?;
        writeln!(f, "center-edge    min {:.4e}  max {:.4e}", self.min_dist, self.max_dist)?;
        writeln!(f, "edge ratio     {:.3}", self.edge_length_ratio)?;
        writeln!(f, "lambda         min {:.4e}  max {:.4e}", self.lambda_min, self.lambda_max)?;
        write!(f, "lambda tilde   min {:.4e}  max {:.4e}", self.lambda_tilde_min, self.lambda_tilde_max)
    }
}
