//! Bed slope, Manning friction and solute diffusion.

use crate::geometry::Point;

/// Face part of the bed-slope source, `l (g/2) h^2 n`, to be divided by the cell area.
///
/// The arithmetic mirrors the hydrostatic part of the edge flux so that the
/// two cancel bit for bit over a lake at rest.
#[inline]
pub fn bed_slope_face(length: f64, h: f64, n: Point, g: f64) -> (f64, f64) {
    let hydro = 0.5 * g * h * h;
    (hydro * n.x * length, hydro * n.y * length)
}

/// Cell part of the bed-slope source, `-g grad(w) h_bar`, with the gradient
/// actually used by the reconstruction.
#[inline]
pub fn bed_slope_cell(grad_w: [f64; 2], h_bar: f64, g: f64) -> (f64, f64) {
    (-g * grad_w[0] * h_bar, -g * grad_w[1] * h_bar)
}

/// Full bed-slope source of one cell from its face depths.
pub fn bed_slope(
    area: f64,
    faces: impl Iterator<Item = (f64, f64, Point)>,
    grad_w: [f64; 2],
    h_bar: f64,
    g: f64,
) -> (f64, f64) {
    let (mut sx, mut sy) = (0.0, 0.0);
    for (length, h, n) in faces {
        let (x, y) = bed_slope_face(length, h, n, g);
        sx += x;
        sy += y;
    }
    let (cx, cy) = bed_slope_cell(grad_w, h_bar, g);
    (sx / area + cx, sy / area + cy)
}

/// Manning coefficient `kappa` with friction `-kappa (p, q)`:
/// `kappa = 2 g n_f^2 h^(5/3) |(p, q)| / (h^4 + max(h^4, eps))`.
#[inline]
pub fn friction_coefficient(h: f64, p: f64, q: f64, manning: f64, g: f64, eps: f64) -> f64 {
    if manning == 0.0 || h <= 0.0 {
        return 0.0;
    }
    let h4 = (h * h) * (h * h);
    2.0 * g * manning * manning * h.powf(5.0 / 3.0) * p.hypot(q) / (h4 + h4.max(eps))
}

/// Semi-implicit friction update of one discharge component:
/// solves `p_new = p_explicit - dt kappa (p_old + p_new) / 2`, where
/// `p_explicit = p_old + dt * rhs` and `kappa` is frozen at `p_old`.
#[inline]
pub fn friction_apply(p_old: f64, p_explicit: f64, kappa: f64, dt: f64) -> f64 {
    let half = 0.5 * dt * kappa;
    (p_explicit - half * p_old) / (1.0 + half)
}

/// Diffusive solute flux through an interior edge from the left cell to the right one,
/// `l gamma min(h_l, h_r) (c_r - c_l) / dbar`.
#[inline]
pub fn diffusion_flux(length: f64, gamma: f64, h_l: f64, h_r: f64, c_l: f64, c_r: f64, dbar: f64) -> f64 {
    length * gamma * h_l.min(h_r) * (c_r - c_l) / dbar
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friction_vanishes_without_roughness_or_motion() {
        assert_eq!(friction_coefficient(1.0, 1.0, 0.0, 0.0, 9.81, 1e-6), 0.0);
        assert_eq!(friction_coefficient(1.0, 0.0, 0.0, 0.018, 9.81, 1e-6), 0.0);
        assert_eq!(friction_apply(0.3, 0.31, 0.0, 0.1), 0.31);
    }

    #[test]
    fn friction_matches_scalar_ode() {
        // dp/dt = -g n^2 |p| p / h^(7/3) with h = 1, from p = 1
        let (g, n, h) = (9.81, 0.018, 1.0);
        let k0 = friction_coefficient(h, 1.0, 0.0, n, g, 1e-6);
        assert!((k0 - g * n * n).abs() < 1e-15);
        let rate = |p: f64| -g * n * n * p.abs() * p / h;
        for dt in [0.01, 0.005] {
            let semi = friction_apply(1.0, 1.0, k0, dt);
            // fine RK4 reference
            let steps = 1000;
            let tau = dt / steps as f64;
            let mut p = 1.0;
            for _ in 0..steps {
                let k1 = rate(p);
                let k2 = rate(p + 0.5 * tau * k1);
                let k3 = rate(p + 0.5 * tau * k2);
                let k4 = rate(p + tau * k3);
                p += tau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            assert!((semi - p).abs() < 2.0 * dt * dt, "dt {dt}: {semi} vs {p}");
        }
    }

    #[test]
    fn friction_never_increases_discharge() {
        for &(p, k, dt) in &[(1.0, 0.5, 0.1), (-2.0, 3.0, 0.01), (0.3, 100.0, 1.0)] {
            assert!(friction_apply(p, p, k, dt).abs() <= p.abs());
        }
    }

    #[test]
    fn two_cell_diffusion() {
        let f = diffusion_flux(1.0, 0.01, 1.0, 1.0, 0.0, 1.0, 1.0);
        // left cell gains, right cell loses
        assert_eq!((f, -f), (0.01, -0.01));
        assert_eq!(diffusion_flux(1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0), 0.0);
        assert_eq!(diffusion_flux(1.0, 0.01, 1.0, 1.0, 0.4, 0.4, 1.0), 0.0);
    }

    #[test]
    fn flat_surface_bed_slope_over_square() {
        // square cell, flat bed: closed polygon makes the face sum vanish
        let faces = [
            (1.0, 2.0, Point::new(1.0, 0.0)),
            (1.0, 2.0, Point::new(0.0, 1.0)),
            (1.0, 2.0, Point::new(-1.0, 0.0)),
            (1.0, 2.0, Point::new(0.0, -1.0)),
        ];
        assert_eq!(bed_slope(1.0, faces.into_iter(), [0.0, 0.0], 2.0, 9.81), (0.0, 0.0));
    }
}
