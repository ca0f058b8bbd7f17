//! Central-upwind edge fluxes with the blended dissipation coefficient, and
//! assembly of the semi-discrete right-hand side.

use crate::boundary::{ghost_state, BoundaryPolicy};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::DualMesh;
use crate::par::*;
use crate::reconstruction::{EdgeReconstruction, FaceState, Topography};
use crate::sources;
use crate::state::FieldState;

/// Speeds below this sum mean both sides are dry and at rest.
const DRY_SPEED: f64 = 1e-12;

/// Normal flux `F n_x + G n_y` of a state `(h, u, v, c)`.
pub fn physical_flux(h: f64, u: f64, v: f64, c: f64, n: Point, g: f64) -> [f64; 4] {
    let un = u * n.x + v * n.y;
    let hydro = 0.5 * g * h * h;
    [h * un, h * u * un + hydro * n.x, h * v * un + hydro * n.y, h * c * un]
}

/// Flux of a reconstructed face state, using its consistent discharges and solute.
#[inline]
fn face_flux(f: &FaceState, n: Point, g: f64) -> [f64; 4] {
    let un = f.u * n.x + f.v * n.y;
    let hydro = 0.5 * g * f.h * f.h;
    [f.p * n.x + f.q * n.y, f.p * un + hydro * n.x, f.q * un + hydro * n.y, f.s * un]
}

/// One-sided local speeds `(a_in, a_out)` from the two normal velocities and depths.
#[inline]
pub fn local_speeds(h_l: f64, un_l: f64, h_r: f64, un_r: f64, g: f64) -> (f64, f64) {
    let (c_l, c_r) = ((g * h_l).sqrt(), (g * h_r).sqrt());
    let a_in = -(un_l - c_l).min(un_r - c_r).min(0.0);
    let a_out = (un_l + c_l).max(un_r + c_r).max(0.0);
    (a_in, a_out)
}

/// Minimal positivity-preserving dissipation `max(un_r a_in, -un_l a_out, 0)`.
#[inline]
pub fn delta_plus(a_in: f64, a_out: f64, un_l: f64, un_r: f64) -> f64 {
    (un_r * a_in).max(-un_l * a_out).max(0.0)
}

/// Blended dissipation `nu delta_plus + (1 - nu) a_in a_out`.
#[inline]
pub fn dissipation_delta(a_in: f64, a_out: f64, un_l: f64, un_r: f64, nu: f64) -> f64 {
    nu * delta_plus(a_in, a_out, un_l, un_r) + (1.0 - nu) * a_in * a_out
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeSpeeds {
    pub a_in: f64,
    pub a_out: f64,
    pub un_l: f64,
    pub un_r: f64,
    pub delta: f64,
    pub delta_plus: f64,
}

impl EdgeSpeeds {
    pub fn new(l: &FaceState, r: &FaceState, n: Point, g: f64, nu: f64) -> Self {
        let un_l = l.u * n.x + l.v * n.y;
        let un_r = r.u * n.x + r.v * n.y;
        let (a_in, a_out) = local_speeds(l.h, un_l, r.h, un_r, g);
        let dp = delta_plus(a_in, a_out, un_l, un_r);
        EdgeSpeeds { a_in, a_out, un_l, un_r, delta: nu * dp + (1.0 - nu) * a_in * a_out, delta_plus: dp }
    }
}

/// Central-upwind flux per unit edge length, oriented along `n` (from `l` to `r`).
///
/// The blended coefficient multiplies the depth and solute jumps; the
/// momentum jumps keep the classical `a_in a_out`.
pub fn numerical_flux(l: &FaceState, r: &FaceState, n: Point, g: f64, nu: f64) -> ([f64; 4], EdgeSpeeds) {
    let sp = EdgeSpeeds::new(l, r, n, g, nu);
    let sum = sp.a_in + sp.a_out;
    if sum < DRY_SPEED {
        return ([0.0; 4], sp);
    }
    debug_assert!(sp.delta >= sp.a_in * sp.un_r - 1e-12 * sum * sum);
    debug_assert!(sp.delta >= -sp.a_out * sp.un_l - 1e-12 * sum * sum);
    let fl = face_flux(l, n, g);
    let fr = face_flux(r, n, g);
    let inv = 1.0 / sum;
    let aa = sp.a_in * sp.a_out;
    let jump = [r.h - l.h, r.p - l.p, r.q - l.q, r.s - l.s];
    let coef = [sp.delta, aa, aa, sp.delta];
    let mut h = [0.0; 4];
    for i in 0..4 {
        // written as an increment on the left flux so equal states give it exactly
        h[i] = fl[i] + inv * (sp.a_in * (fr[i] - fl[i]) - coef[i] * jump[i]);
    }
    (h, sp)
}

/// Per-cell time derivatives of `(h, p, q, s)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SemiDiscreteRhs {
    pub cells: Vec<[f64; 4]>,
    /// Length-weighted flux minus solute diffusion through each edge, along the edge normal.
    pub edges: Vec<[f64; 4]>,
    /// Largest one-sided speed on each edge.
    pub edge_speed: Vec<f64>,
}

impl SemiDiscreteRhs {
    pub fn new(mesh: &DualMesh) -> Self {
        SemiDiscreteRhs {
            cells: vec![[0.0; 4]; mesh.len()],
            edges: vec![[0.0; 4]; mesh.edges.len()],
            edge_speed: vec![0.0; mesh.edges.len()],
        }
    }

    /// `max_{edges} max(a_in, a_out)`.
    pub fn max_speed(&self) -> f64 {
        self.edge_speed.iter().copied().fold(0.0, f64::max)
    }
}

/// Physical and numerical parameters needed by the flux assembly.
#[derive(Clone, Copy, Debug)]
pub struct FluxParams {
    pub g: f64,
    pub nu: f64,
    pub gamma: f64,
}

/// Evaluates edge fluxes, solute diffusion and bed-slope sources into `out`.
///
/// Friction is not included; it is applied semi-implicitly by the time stepper.
pub fn assemble_rhs(
    mesh: &DualMesh,
    topo: &Topography,
    state: &FieldState,
    recon: &EdgeReconstruction,
    policy: &BoundaryPolicy,
    params: FluxParams,
    out: &mut SemiDiscreteRhs,
) -> Result<()> {
    let FluxParams { g, nu, gamma } = params;
    mesh.edges
        .par_iter()
        .zip(out.edges.par_iter_mut())
        .zip(out.edge_speed.par_iter_mut())
        .enumerate()
        .for_each(|(e, ((edge, flux), speed))| {
            let lf = &mesh.faces[edge.left];
            let l = &recon.faces[edge.left];
            let (r, diffusive) = match edge.right {
                Some(rf) => (recon.faces[rf], true),
                None => {
                    let kind = policy.kinds[e].as_ref().expect("boundary edge without a policy");
                    (ghost_state(l, lf.normal, topo.face[edge.left], kind), false)
                }
            };
            let (h, sp) = numerical_flux(l, &r, lf.normal, g, nu);
            let mut f = [h[0] * lf.length, h[1] * lf.length, h[2] * lf.length, h[3] * lf.length];
            if diffusive && gamma > 0.0 {
                let k = lf.neighbor.unwrap();
                f[3] -= sources::diffusion_flux(lf.length, gamma, l.h, r.h, state.c[lf.cell], state.c[k], lf.proj_dist);
            }
            *flux = f;
            *speed = sp.a_in.max(sp.a_out);
        });

    let edges = &out.edges;
    out.cells.par_iter_mut().enumerate().for_each(|(j, rhs)| {
        let cell = &mesh.cells[j];
        let mut acc = [0.0; 4];
        for k in cell.faces() {
            let f = &mesh.faces[k];
            let e = &mesh.edges[f.edge];
            let fl = &edges[f.edge];
            let sign = if e.left == k { 1.0 } else { -1.0 };
            let (bx, by) = sources::bed_slope_face(f.length, recon.faces[k].h, f.normal, g);
            acc[0] -= sign * fl[0];
            acc[1] += bx - sign * fl[1];
            acc[2] += by - sign * fl[2];
            acc[3] -= sign * fl[3];
        }
        let inv = 1.0 / cell.area;
        let lim = &recon.cells[j];
        let (sx, sy) = sources::bed_slope_cell(lim.grad_w, state.h[j], g);
        *rhs = [acc[0] * inv, acc[1] * inv + sx, acc[2] * inv + sy, acc[3] * inv];
    });

    if let Some(j) = out.cells.iter().position(|r| !r.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFinite { what: "right-hand side", cell: j });
    }
    Ok(())
}
