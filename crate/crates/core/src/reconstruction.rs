//! Piecewise-linear reconstruction of the bed, the water surface, the
//! discharges and the solute at dual-edge midpoints.
//!
//! Gradients come from an unweighted least-squares fit over edge neighbors,
//! scaled by a Barth-Jespersen factor so that the reconstruction stays within
//! the stencil extrema at every cell vertex.
//!
//! Each cell is reconstructed in one of two modes:
//!
//! - *linear*: the cell is wet (`h > xi`) and its average surface lies above
//!   the bed at every cell vertex. The surface gradient is scaled by the
//!   largest `alpha` in `[0, 1]` that keeps the surface above the bed at
//!   every vertex, so midpoint depths are non-negative.
//! - *level*: every other cell. The surface is flat at the level `eta` whose
//!   wetted volume over the cell's midpoint beds equals the cell volume. A
//!   lake at rest with a shoreline crossing the cell is then reproduced
//!   exactly, and the depth is non-negative by construction.
//!
//! The solute is reconstructed as `c h + beta h_bar grad(c) . X`; `beta` is
//! the largest value in `[0, 1]` keeping the solute non-negative at the cell
//! vertices and the midpoint concentrations between the two adjacent cell
//! averages.

use crate::geometry::Point;
use crate::mesh::DualMesh;
use crate::par::*;
use crate::state::{desingularize, FieldState};

/// Piecewise-linear bed sampled at dual vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Topography {
    /// Bed at each dual vertex.
    pub vertex: Vec<f64>,
    /// Bed at each face midpoint, the mean of its two vertex values.
    pub face: Vec<f64>,
    /// Cell bed `B_j = sum_k mu_k B_jk`.
    pub cell: Vec<f64>,
    pub cell_max_vertex: Vec<f64>,
    pub cell_max_face: Vec<f64>,
}

impl Topography {
    pub fn flat(mesh: &DualMesh) -> Self {
        Self::from_vertex_values(mesh, vec![0.0; mesh.vertices.len()])
    }

    pub fn from_fn(mesh: &DualMesh, bed: impl Fn(Point) -> f64) -> Self {
        Self::from_vertex_values(mesh, mesh.vertices.iter().map(|&p| bed(p)).collect())
    }

    pub fn from_vertex_values(mesh: &DualMesh, vertex: Vec<f64>) -> Self {
        assert_eq!(vertex.len(), mesh.vertices.len());
        let face: Vec<f64> = mesh
            .faces
            .iter()
            .map(|f| 0.5 * (vertex[f.vertices[0]] + vertex[f.vertices[1]]))
            .collect();
        let mut cell = Vec::with_capacity(mesh.len());
        let mut cell_max_vertex = Vec::with_capacity(mesh.len());
        let mut cell_max_face = Vec::with_capacity(mesh.len());
        for c in &mesh.cells {
            let mut b = 0.0;
            let mut mv = f64::NEG_INFINITY;
            let mut mf = f64::NEG_INFINITY;
            for k in c.faces() {
                let f = &mesh.faces[k];
                b += f.mu * face[k];
                mv = mv.max(vertex[f.vertices[0]]);
                mf = mf.max(face[k]);
            }
            cell.push(b);
            cell_max_vertex.push(mv);
            cell_max_face.push(mf);
        }
        Topography { vertex, face, cell, cell_max_vertex, cell_max_face }
    }
}

/// Surface level `eta` with `sum_k mu_k max(0, eta - B_k) = h_bar`.
///
/// `faces` yields `(mu_k, B_k)`; the weights must sum to one.
pub fn surface_level(h_bar: f64, faces: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut fb: Vec<(f64, f64)> = faces.collect();
    fb.sort_by(|a, b| a.1.total_cmp(&b.1));
    if h_bar <= 0.0 {
        return fb[0].1;
    }
    // f(eta) is piecewise linear with slope = wetted weight
    let mut wet = 0.0;
    let mut wet_bed = 0.0;
    for i in 0..fb.len() {
        wet += fb[i].0;
        wet_bed += fb[i].0 * fb[i].1;
        let next = if i + 1 < fb.len() { fb[i + 1].1 } else { f64::INFINITY };
        // volume when the level reaches the next bed value
        let vol_next = wet * next - wet_bed;
        if vol_next >= h_bar {
            return (h_bar + wet_bed) / wet;
        }
    }
    unreachable!("weights sum to one so the last segment is unbounded")
}

/// Least-squares gradient from `(offset, difference)` pairs; zero when the
/// offsets do not span the plane.
pub fn lsq_gradient(samples: impl Iterator<Item = (Point, f64)>) -> [f64; 2] {
    let (mut sxx, mut sxy, mut syy, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (d, v) in samples {
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
        bx += d.x * v;
        by += d.y * v;
    }
    let det = sxx * syy - sxy * sxy;
    if !(det > crate::mesh::LSQ_DEGENERATE * sxx * syy) {
        return [0.0, 0.0];
    }
    [(syy * bx - sxy * by) / det, (sxx * by - sxy * bx) / det]
}

/// Barth-Jespersen factor in `[0, 1]` keeping `center + phi * slope_v`
/// within `[lo, hi]` for every vertex slope.
pub fn barth_jespersen(center: f64, lo: f64, hi: f64, slopes: impl Iterator<Item = f64>) -> f64 {
    let mut phi: f64 = 1.0;
    for d in slopes {
        if d > 0.0 {
            phi = phi.min((hi - center) / d);
        } else if d < 0.0 {
            phi = phi.min((lo - center) / d);
        }
    }
    phi.max(0.0)
}

/// Largest `alpha` in `[0, 1]` with `w_bar + alpha * slope_v >= B_v` at all
/// vertices, given as `(slope_v, B_v)`. Assumes `w_bar >= B_v` everywhere so
/// that `alpha = 0` is admissible.
pub fn alpha_limit(w_bar: f64, vertices: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut alpha: f64 = 1.0;
    for (slope, bed) in vertices {
        if slope < 0.0 {
            alpha = alpha.min((w_bar - bed) / -slope);
        }
    }
    alpha.max(0.0)
}

/// Largest `beta` in `[0, 1]` such that
///
/// - `c_bar h_v + beta h_bar g_v >= 0` for every vertex `(h_v, g_v)`, and
/// - `lo h_f <= c_bar h_f + beta h_bar g_f <= hi h_f` for every midpoint `(h_f, g_f, lo, hi)`,
///
/// where `g` is the concentration gradient dotted with the offset from the center of mass.
pub fn beta_limit(
    c_bar: f64,
    h_bar: f64,
    vertices: impl Iterator<Item = (f64, f64)>,
    midpoints: impl Iterator<Item = (f64, f64, f64, f64)>,
) -> f64 {
    let mut beta: f64 = 1.0;
    for (h_v, g_v) in vertices {
        if g_v < 0.0 {
            beta = beta.min(c_bar * h_v / (h_bar * -g_v));
        }
    }
    for (h_f, g_f, lo, hi) in midpoints {
        if g_f > 0.0 {
            beta = beta.min((hi - c_bar) * h_f / (h_bar * g_f));
        } else if g_f < 0.0 {
            beta = beta.min((c_bar - lo) * h_f / (h_bar * -g_f));
        }
    }
    beta.max(0.0)
}

/// Limited cell gradients and the surface levels they were built from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradientField {
    pub w: Vec<[f64; 2]>,
    pub p: Vec<[f64; 2]>,
    pub q: Vec<[f64; 2]>,
    pub c: Vec<[f64; 2]>,
    /// Flat-surface level of every cell (equal to the average surface when
    /// the cell is flooded above all its midpoint beds).
    pub eta: Vec<f64>,
}

impl GradientField {
    pub fn new(n: usize) -> Self {
        GradientField {
            w: vec![[0.0; 2]; n],
            p: vec![[0.0; 2]; n],
            q: vec![[0.0; 2]; n],
            c: vec![[0.0; 2]; n],
            eta: vec![0.0; n],
        }
    }
}

#[inline]
fn dot(g: [f64; 2], x: Point) -> f64 {
    g[0] * x.x + g[1] * x.y
}

/// Computes the limited gradients of `w`, `p`, `q` and `c`.
///
/// The surface gradient uses only wet neighbors (`h > xi`) and their flat
/// surface levels, so dry land next to a lake never tilts its surface.
/// Cells with `h <= xi` get zero gradients.
pub fn gradients(mesh: &DualMesh, topo: &Topography, state: &FieldState, xi: f64, out: &mut GradientField) {
    out.eta.par_iter_mut().enumerate().for_each(|(j, eta)| {
        let w_bar = state.h[j] + topo.cell[j];
        *eta = if w_bar >= topo.cell_max_face[j] {
            w_bar
        } else {
            let faces = mesh.cells[j].faces().map(|k| (mesh.faces[k].mu, topo.face[k]));
            surface_level(state.h[j], faces)
        };
    });
    let eta = &out.eta;
    out.w
        .par_iter_mut()
        .zip(out.p.par_iter_mut())
        .zip(out.q.par_iter_mut())
        .zip(out.c.par_iter_mut())
        .enumerate()
        .for_each(|(j, (((gw, gp), gq), gc))| {
            let g = cell_gradients(mesh, state, eta, xi, j);
            *gw = g[0];
            *gp = g[1];
            *gq = g[2];
            *gc = g[3];
        });
}

/// Least-squares gradient over all edge neighbors from the precomputed weights.
#[inline]
fn weighted_gradient(faces: &[crate::mesh::Face], v: &[f64], j: usize) -> [f64; 2] {
    let mut g = [0.0; 2];
    for f in faces {
        if let Some(k) = f.neighbor {
            let d = v[k] - v[j];
            g[0] += f.lsq_weight.x * d;
            g[1] += f.lsq_weight.y * d;
        }
    }
    g
}

fn cell_gradients(mesh: &DualMesh, state: &FieldState, eta: &[f64], xi: f64, j: usize) -> [[f64; 2]; 4] {
    if state.h[j] <= xi {
        return [[0.0; 2]; 4];
    }
    let faces = mesh.cell_faces(j);
    let interior = || faces.iter().filter_map(|f| f.neighbor.map(|k| (f, k)));
    let wet = || interior().filter(|&(_, k)| state.h[k] > xi);

    let fields: [&[f64]; 3] = [&state.p, &state.q, &state.c];
    let mut out = [[0.0; 2]; 4];

    let all_wet = interior().all(|(_, k)| state.h[k] > xi);
    let gw = if all_wet {
        weighted_gradient(faces, eta, j)
    } else {
        lsq_gradient(wet().map(|(f, k)| (f.nb_offset, eta[k] - eta[j])))
    };
    let (lo, hi) = wet().fold((eta[j], eta[j]), |(lo, hi), (_, k)| (lo.min(eta[k]), hi.max(eta[k])));
    let phi = barth_jespersen(eta[j], lo, hi, faces.iter().map(|f| dot(gw, f.vert_offset)));
    out[0] = [phi * gw[0], phi * gw[1]];

    for (i, v) in fields.iter().enumerate() {
        let g = weighted_gradient(faces, v, j);
        let (lo, hi) = interior().fold((v[j], v[j]), |(lo, hi), (_, k)| (lo.min(v[k]), hi.max(v[k])));
        let phi = barth_jespersen(v[j], lo, hi, faces.iter().map(|f| dot(g, f.vert_offset)));
        out[i + 1] = [phi * g[0], phi * g[1]];
    }
    out
}

/// Reconstructed conserved values and velocities at one face midpoint, seen from its cell.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FaceState {
    pub h: f64,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub u: f64,
    pub v: f64,
}

/// Per-cell limiter outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CellLimiter {
    /// Surface-gradient scaling; zero for cells in level mode.
    pub alpha: f64,
    /// Solute-gradient scaling.
    pub beta: f64,
    /// Surface gradient actually used, `alpha * grad(w)`.
    pub grad_w: [f64; 2],
    /// Whether the cell was reconstructed with a flat surface.
    pub level: bool,
}

/// Midpoint values of every face plus the per-cell limiter data.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeReconstruction {
    pub faces: Vec<FaceState>,
    pub cells: Vec<CellLimiter>,
}

impl EdgeReconstruction {
    pub fn new(mesh: &DualMesh) -> Self {
        EdgeReconstruction {
            faces: vec![FaceState::default(); mesh.faces.len()],
            cells: vec![CellLimiter::default(); mesh.len()],
        }
    }
}

/// Reconstructs every cell at its face midpoints.
pub fn reconstruct(
    mesh: &DualMesh,
    topo: &Topography,
    state: &FieldState,
    grads: &GradientField,
    eps: f64,
    xi: f64,
    out: &mut EdgeReconstruction,
) {
    let chunks = crate::par::split_ragged_mut(&mut out.faces, &mesh.face_offsets);
    chunks
        .into_par_iter()
        .zip(out.cells.par_iter_mut())
        .enumerate()
        .for_each(|(j, (faces, lim))| {
            *lim = reconstruct_cell(mesh, topo, state, grads, eps, xi, j, faces);
        });
}

#[allow(clippy::too_many_arguments)]
fn reconstruct_cell(
    mesh: &DualMesh,
    topo: &Topography,
    state: &FieldState,
    grads: &GradientField,
    eps: f64,
    xi: f64,
    j: usize,
    out: &mut [FaceState],
) -> CellLimiter {
    let cell = &mesh.cells[j];
    let faces = mesh.cell_faces(j);
    let bed_f = &topo.face[cell.faces()];
    let bed_v = |f: &crate::mesh::Face| topo.vertex[f.vertices[0]];
    let (h_bar, p_bar, q_bar) = (state.h[j], state.p[j], state.q[j]);
    let b_j = topo.cell[j];
    let w_bar = h_bar + b_j;

    let level = !(h_bar > xi && w_bar >= topo.cell_max_vertex[j]);
    let mut lim = CellLimiter { level, ..Default::default() };

    // depth at each face vertex, needed for the solute positivity bound
    let mut vertex_depth = [0.0f64; 16];
    let mut vertex_depth_vec = Vec::new();
    let vdepth: &mut [f64] = if faces.len() <= 16 {
        &mut vertex_depth[..faces.len()]
    } else {
        vertex_depth_vec.resize(faces.len(), 0.0);
        &mut vertex_depth_vec
    };

    if level {
        let eta = grads.eta[j];
        let (u, v) = (desingularize(h_bar, p_bar, eps), desingularize(h_bar, q_bar, eps));
        for (i, f) in faces.iter().enumerate() {
            let h = (eta - bed_f[i]).max(0.0);
            out[i] = FaceState { h, p: h * u, q: h * v, s: 0.0, u, v };
            vdepth[i] = (eta - bed_v(f)).max(0.0);
        }
    } else {
        let gw = grads.w[j];
        let alpha = alpha_limit(w_bar, faces.iter().map(|f| (dot(gw, f.vert_offset), bed_v(f))));
        lim.alpha = alpha;
        lim.grad_w = [alpha * gw[0], alpha * gw[1]];
        let (gp, gq) = (grads.p[j], grads.q[j]);
        for (i, f) in faces.iter().enumerate() {
            let h = (h_bar + ((b_j - bed_f[i]) + dot(lim.grad_w, f.mid_offset))).max(0.0);
            let p = p_bar + dot(gp, f.mid_offset);
            let q = q_bar + dot(gq, f.mid_offset);
            let (u, v) = (desingularize(h, p, eps), desingularize(h, q, eps));
            out[i] = FaceState { h, p: h * u, q: h * v, s: 0.0, u, v };
            vdepth[i] = (h_bar + ((b_j - bed_v(f)) + dot(lim.grad_w, f.vert_offset))).max(0.0);
        }
    }

    if h_bar > xi {
        let c_bar = state.c[j];
        let gc = grads.c[j];
        // neighborhood extrema bound the boundary midpoints
        let (nlo, nhi) = faces
            .iter()
            .filter_map(|f| f.neighbor)
            .fold((c_bar, c_bar), |(lo, hi), k| (lo.min(state.c[k]), hi.max(state.c[k])));
        let bounds = |f: &crate::mesh::Face| match f.neighbor {
            Some(k) => (c_bar.min(state.c[k]), c_bar.max(state.c[k])),
            None => (nlo, nhi),
        };
        let beta = if gc == [0.0, 0.0] {
            0.0
        } else {
            beta_limit(
                c_bar,
                h_bar,
                faces.iter().zip(vdepth.iter()).map(|(f, &hv)| (hv, dot(gc, f.vert_offset))),
                faces.iter().zip(out.iter()).map(|(f, fs)| {
                    let (lo, hi) = bounds(f);
                    (fs.h, dot(gc, f.mid_offset), lo, hi)
                }),
            )
        };
        lim.beta = beta;
        let scale = beta * h_bar;
        for (f, fs) in faces.iter().zip(out.iter_mut()) {
            fs.s = c_bar * fs.h + scale * dot(gc, f.mid_offset);
        }
    } else if h_bar > 0.0 {
        let ratio = state.s[j] / h_bar;
        for fs in out.iter_mut() {
            fs.s = ratio * fs.h;
        }
    }
    lim
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_dual;
    use crate::mesh::generate::{equilateral, right_diagonal, RectDomain};

    #[test]
    fn surface_level_inverts_wetted_volume() {
        let faces: [(f64, f64); 4] = [(0.25, 0.0), (0.25, 1.0), (0.25, 2.0), (0.25, 3.0)];
        for eta in [0.3, 1.0, 1.7, 2.5, 4.0] {
            let h: f64 = faces.iter().map(|&(m, b)| m * (eta - b).max(0.0)).sum();
            let got = surface_level(h, faces.iter().copied());
            assert!((got - eta).abs() < 1e-14, "{got} vs {eta}");
        }
        assert_eq!(surface_level(0.0, faces.iter().copied()), 0.0);
    }

    #[test]
    fn flat_and_linear_beds() {
        let mesh = build_dual(&equilateral(RectDomain::new(0.0, 1.0, 0.0, 1.0), 0.005)).unwrap();
        let flat = Topography::flat(&mesh);
        assert!(flat.cell.iter().chain(&flat.face).all(|&b| b == 0.0));
        let lin = Topography::from_fn(&mesh, |p| p.x);
        for (j, c) in mesh.cells.iter().enumerate() {
            assert!((lin.cell[j] - c.centroid.x).abs() < 1e-13);
        }
    }

    #[test]
    fn shared_midpoint_bed_is_bit_exact() {
        let mesh = build_dual(&equilateral(RectDomain::new(0.0, 2.0, 0.0, 1.0), 0.01)).unwrap();
        let topo = Topography::from_fn(&mesh, |p| (3.0 * p.x).sin() * p.y);
        for (k, f) in mesh.faces.iter().enumerate() {
            if let Some(t) = f.twin {
                assert_eq!(topo.face[k].to_bits(), topo.face[t].to_bits());
            }
        }
    }

    fn wet_state(mesh: &DualMesh, w: impl Fn(Point) -> f64) -> FieldState {
        let mut st = FieldState::zeros(mesh.len());
        for (j, c) in mesh.cells.iter().enumerate() {
            st.h[j] = w(c.centroid);
        }
        st
    }

    #[test]
    fn linear_surface_is_reproduced_on_interior_cells() {
        let mesh = build_dual(&right_diagonal(RectDomain::new(0.0, 1.0, 0.0, 1.0), 10, 10)).unwrap();
        let topo = Topography::flat(&mesh);
        let st = wet_state(&mesh, |p| 10.0 + 2.0 * p.x + 3.0 * p.y);
        let mut g = GradientField::new(mesh.len());
        gradients(&mesh, &topo, &st, 1e-6, &mut g);
        for j in 0..mesh.len() {
            let interior_ring = mesh
                .cell_faces(j)
                .iter()
                .all(|f| f.neighbor.is_some_and(|k| !mesh.is_boundary_cell(k)));
            if interior_ring && !mesh.is_boundary_cell(j) {
                assert!((g.w[j][0] - 2.0).abs() < 1e-10 && (g.w[j][1] - 3.0).abs() < 1e-10, "{:?}", g.w[j]);
            }
        }
    }

    #[test]
    fn spike_is_limited_to_stencil_range() {
        let mesh = build_dual(&equilateral(RectDomain::new(0.0, 1.0, 0.0, 1.0), 0.01)).unwrap();
        let topo = Topography::flat(&mesh);
        let mut st = wet_state(&mesh, |_| 1.0);
        let spike = (0..mesh.len()).find(|&j| !mesh.is_boundary_cell(j)).unwrap();
        for j in 0..mesh.len() {
            st.c[j] = 0.0;
            st.s[j] = 0.0;
        }
        st.c[spike] = 1.0;
        st.s[spike] = 1.0;
        let mut g = GradientField::new(mesh.len());
        gradients(&mesh, &topo, &st, 1e-6, &mut g);
        for j in 0..mesh.len() {
            let faces = mesh.cell_faces(j);
            let mut lo = st.c[j];
            let mut hi = st.c[j];
            for f in faces {
                if let Some(k) = f.neighbor {
                    lo = lo.min(st.c[k]);
                    hi = hi.max(st.c[k]);
                }
            }
            for f in faces {
                let v = st.c[j] + dot(g.c[j], f.vert_offset);
                assert!(v >= lo - 1e-14 && v <= hi + 1e-14);
            }
        }
    }

    #[test]
    fn constant_concentration_reconstructs_constant() {
        let mesh = build_dual(&equilateral(RectDomain::new(0.0, 1.0, 0.0, 1.0), 0.01)).unwrap();
        let topo = Topography::from_fn(&mesh, |p| 0.2 * p.x * p.x);
        let mut st = wet_state(&mesh, |p| 1.0 + 0.3 * (5.0 * p.x).sin() * p.y);
        for j in 0..mesh.len() {
            st.p[j] = 0.1 * j as f64 / mesh.len() as f64;
            st.c[j] = 0.7;
            st.s[j] = 0.7 * st.h[j];
        }
        let mut g = GradientField::new(mesh.len());
        gradients(&mesh, &topo, &st, 1e-6, &mut g);
        let mut r = EdgeReconstruction::new(&mesh);
        reconstruct(&mesh, &topo, &st, &g, mesh.max_area_squared(), 1e-6, &mut r);
        for fs in &r.faces {
            assert_eq!(fs.s, 0.7 * fs.h);
        }
    }

    #[test]
    fn alpha_matches_example() {
        // only the vertex with bed 0.9 constrains: 0.5 - 0.5 alpha >= 0.9 is infeasible
        // for alpha >= 0 unless the slope there is positive
        let a = alpha_limit(1.0, [(-0.5, 0.9), (0.5, 0.0), (0.0, 0.0)].into_iter());
        assert!((a - 0.2).abs() < 1e-15);
        assert_eq!(alpha_limit(1.0, [(0.3, 0.0)].into_iter()), 1.0);
        assert_eq!(alpha_limit(0.0, [(-0.3, 0.0), (0.3, 0.0)].into_iter()), 0.0);
    }

    #[test]
    fn beta_matches_example() {
        let b = beta_limit(0.1, 1.0, [(1.0, -0.2)].into_iter(), std::iter::empty());
        assert!((b - 0.5).abs() < 1e-15);
    }
}
