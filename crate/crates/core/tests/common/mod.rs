#![allow(dead_code)]

use cvflow::mesh::generate::{equilateral, right_diagonal, RectDomain};
use cvflow::mesh::{build_dual, DualMesh, NodeMarker, Triangulation};
use cvflow::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Right-diagonal grid on the unit square with interior nodes moved by up to
/// `amp` grid spacings in each direction.
pub fn perturbed_mesh(seed: u64, n: usize, amp: f64) -> DualMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tri = right_diagonal(RectDomain::new(0.0, 1.0, 0.0, 1.0), n, n);
    let h = 1.0 / n as f64;
    for (p, m) in tri.nodes.iter_mut().zip(&tri.markers) {
        if *m == NodeMarker::Interior {
            p.x += amp * h * rng.gen_range(-1.0..1.0);
            p.y += amp * h * rng.gen_range(-1.0..1.0);
        }
    }
    build_dual(&tri).expect("perturbed mesh stays valid")
}

pub fn unit_equilateral(area: f64) -> DualMesh {
    build_dual(&equilateral(RectDomain::new(0.0, 1.0, 0.0, 1.0), area)).unwrap()
}

pub fn retag(tri: &Triangulation, marker: NodeMarker) -> Triangulation {
    let markers = tri.markers.iter().map(|m| if *m == NodeMarker::Interior { *m } else { marker }).collect();
    Triangulation::new(tri.nodes.clone(), tri.triangles.clone(), markers).unwrap()
}

/// Smooth bed with a hump reaching above `0.5` in the middle of the unit square.
pub fn hump(p: Point) -> f64 {
    0.8 * (-((p.x - 0.5).powi(2) + (p.y - 0.5).powi(2)) / 0.05).exp()
}
