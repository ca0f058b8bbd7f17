//! Conserved fields, primitive recovery and global diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::DualMesh;

/// Physical and numerical parameters of the scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    /// Gravitational acceleration.
    pub g: f64,
    /// Solute diffusivity.
    pub gamma: f64,
    /// Manning roughness coefficient.
    pub manning: f64,
    /// Blend between the minimal positivity-preserving dissipation (1) and
    /// the classical central-upwind dissipation (0).
    pub nu: f64,
    /// Desingularization parameter; `None` means `max_j |D_j|^2`.
    pub epsilon: Option<f64>,
    /// Depth below which a cell is treated as dry for concentration purposes.
    pub xi: f64,
    pub cfl: f64,
    pub end_time: f64,
    /// Interval between field dumps; `None` writes only the final state.
    pub output_interval: Option<f64>,
    /// Steps between full invariant checks in release builds (every stage in debug builds).
    pub check_interval: usize,
    /// Check the discrete max-min principle for the concentration.
    pub check_max_min: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            g: 9.81,
            gamma: 0.0,
            manning: 0.0,
            nu: 0.5,
            epsilon: None,
            xi: 1e-6,
            cfl: 0.9,
            end_time: 1.0,
            output_interval: None,
            check_interval: 50,
            check_max_min: false,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.g > 0.0) {
            return bad("g must be positive");
        }
        if !(0.0..=1.0).contains(&self.nu) {
            return bad("nu must lie in [0, 1]");
        }
        if !(self.gamma >= 0.0) {
            return bad("gamma must be non-negative");
        }
        if !(self.manning >= 0.0) {
            return bad("manning coefficient must be non-negative");
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return bad("epsilon must be positive");
            }
        }
        if !(self.xi >= 0.0) {
            return bad("xi must be non-negative");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]");
        }
        if !(self.end_time >= 0.0) {
            return bad("end time must be non-negative");
        }
        if let Some(dt) = self.output_interval {
            if !(dt > 0.0) {
                return bad("output interval must be positive");
            }
        }
        Ok(())
    }

    /// The desingularization parameter to use on `mesh`.
    pub fn epsilon_for(&self, mesh: &DualMesh) -> f64 {
        self.epsilon.unwrap_or_else(|| mesh.max_area_squared())
    }
}

/// Desingularized quotient `phi / h`: `sqrt(2) h phi / sqrt(h^4 + max(h^4, eps))`.
#[inline]
pub fn desingularize(h: f64, phi: f64, eps: f64) -> f64 {
    let h4 = (h * h) * (h * h);
    std::f64::consts::SQRT_2 * h * phi / (h4 + h4.max(eps)).sqrt()
}

/// Velocities from depth and discharges.
#[inline]
pub fn velocities(h: f64, p: f64, q: f64, eps: f64) -> (f64, f64) {
    (desingularize(h, p, eps), desingularize(h, q, eps))
}

/// Cell-average concentration. Wet cells divide directly; near-dry cells
/// use the desingularized ratio clamped into `[c_min, c_max]`, the extrema of
/// the cell and its neighbors at the previous step.
#[inline]
pub fn cell_concentration(s: f64, h: f64, c_min: f64, c_max: f64, eps: f64, xi: f64) -> f64 {
    if h > xi {
        s / h
    } else {
        desingularize(h, s, eps).max(c_min).min(c_max)
    }
}

/// Cell averages of the conserved variables.
///
/// The depth `h` is stored rather than the surface level `w = h + B_j`, so
/// near-dry cells keep full relative precision; see [`FieldState::w`].
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub h: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub s: Vec<f64>,
    /// Cell concentrations, kept in sync with `s` and `h` by the time stepper.
    pub c: Vec<f64>,
}

impl FieldState {
    pub fn zeros(n: usize) -> Self {
        FieldState {
            t: 0.0,
            h: vec![0.0; n],
            p: vec![0.0; n],
            q: vec![0.0; n],
            s: vec![0.0; n],
            c: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Surface level of cell `j` over the cell-average bed `bed_j`.
    #[inline]
    pub fn w(&self, j: usize, bed_j: f64) -> f64 {
        self.h[j] + bed_j
    }

    pub fn velocity(&self, j: usize, eps: f64) -> (f64, f64) {
        velocities(self.h[j], self.p[j], self.q[j], eps)
    }

    /// Recomputes `c` from `s` and `h`, treating every cell as wet if it is above `xi`
    /// and clamping near-dry cells into the given per-cell bounds.
    pub fn update_concentration(&mut self, bounds: &[(f64, f64)], eps: f64, xi: f64) {
        for (j, &(lo, hi)) in bounds.iter().enumerate().take(self.h.len()) {
            self.c[j] = cell_concentration(self.s[j], self.h[j], lo, hi, eps, xi);
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub dt_h: f64,
    pub dt_c: f64,
    pub dt_s: f64,
    /// Total water volume.
    pub volume: f64,
    /// Total solute mass.
    pub solute_mass: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub min_c: f64,
    pub max_c: f64,
}

/// Sums and extrema over all cells, in cell order.
pub fn diagnostics(state: &FieldState, mesh: &DualMesh) -> StepDiagnostics {
    let mut d = StepDiagnostics {
        t: state.t,
        min_h: f64::INFINITY,
        max_h: f64::NEG_INFINITY,
        min_c: f64::INFINITY,
        max_c: f64::NEG_INFINITY,
        ..Default::default()
    };
    for (j, cell) in mesh.cells.iter().enumerate() {
        d.volume += cell.area * state.h[j];
        d.solute_mass += cell.area * state.s[j];
        d.min_h = d.min_h.min(state.h[j]);
        d.max_h = d.max_h.max(state.h[j]);
        d.min_c = d.min_c.min(state.c[j]);
        d.max_c = d.max_c.max(state.c[j]);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_dual;
    use crate::mesh::generate::{right_diagonal, RectDomain};

    #[test]
    fn velocity_examples() {
        assert_eq!(velocities(0.0, 1.0, 1.0, 1e-6), (0.0, 0.0));
        let (u, v) = velocities(1.0, 0.5, 0.0, 1e-6);
        assert!((u - 0.5).abs() < 1e-15);
        assert_eq!(v, 0.0);
        // sqrt(2) * 1e-5 / sqrt(1e-8 + 1e-6)
        let expected = 2f64.sqrt() * 1e-5 / (1.01e-6f64).sqrt();
        let (u, _) = velocities(1e-2, 1e-3, 0.0, 1e-6);
        assert!((u - expected).abs() < 1e-18);
        assert!((u - 1.4072e-2).abs() < 1e-6);
    }

    #[test]
    fn concentration_examples() {
        assert_eq!(cell_concentration(0.3, 1.0, 0.0, 1.0, 1e-6, 1e-6), 0.3);
        assert_eq!(cell_concentration(0.0, 0.0, 0.0, 1.0, 1e-6, 1e-6), 0.0);
        assert_eq!(cell_concentration(0.0, 0.0, 0.2, 1.0, 1e-6, 1e-6), 0.2);
        let c = cell_concentration(1e-8, 1e-7, 0.0, 1.0, 1e-6, 1e-6);
        let expected = 2f64.sqrt() * 1e-15 / (1e-28f64 + 1e-6).sqrt();
        assert!((c - expected).abs() < 1e-24);
        assert!((c - 1.4142e-12).abs() < 1e-16);
    }

    #[test]
    fn lake_volume() {
        let mesh = build_dual(&right_diagonal(RectDomain::new(0.0, 1.0, 0.0, 1.0), 5, 5)).unwrap();
        let mut st = FieldState::zeros(mesh.len());
        st.h.fill(1.0);
        let d = diagnostics(&st, &mesh);
        assert!((d.volume - 1.0).abs() < 1e-14);
        assert_eq!(d, diagnostics(&st, &mesh));
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::default().validate().is_ok());
        let cfg = SchemeConfig { nu: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = SchemeConfig { cfl: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
