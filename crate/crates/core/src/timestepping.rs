//! Time-step restrictions, the SSP-RK3 driver and the run loop.

use crate::boundary::BoundaryPolicy;
use crate::error::{Error, Result};
use crate::mesh::DualMesh;
use crate::par::*;
use crate::reconstruction::{gradients, reconstruct, CellLimiter, EdgeReconstruction, GradientField, Topography};
use crate::scheme::{assemble_rhs, FluxParams, SemiDiscreteRhs};
use crate::sources::{friction_apply, friction_coefficient};
use crate::state::{diagnostics, FieldState, SchemeConfig, StepDiagnostics};

/// Magnitude below which stage results are rounded to zero.
const CLIP: f64 = 1e-15;
/// Step retries before a positivity failure is reported.
const MAX_RETRIES: usize = 12;

/// Geometric factors of the diffusion restrictions.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricLambdas {
    /// `sum_k 1 / (d_jk dbar_jk)`.
    pub lambda: Vec<f64>,
    /// `sum_k 2 mu_k / (d_jk dbar_jk)`.
    pub lambda_tilde: Vec<f64>,
    pub lambda_max: f64,
    pub lambda_tilde_max: f64,
}

/// Sums over all faces of every cell; boundary faces use `dbar = 2 d`.
pub fn geometric_lambdas(mesh: &DualMesh) -> GeometricLambdas {
    let mut lambda = Vec::with_capacity(mesh.len());
    let mut lambda_tilde = Vec::with_capacity(mesh.len());
    for j in 0..mesh.len() {
        let (mut l, mut lt) = (0.0, 0.0);
        for f in mesh.cell_faces(j) {
            let inv = 1.0 / (f.dist * f.proj_dist);
            l += inv;
            lt += 2.0 * f.mu * inv;
        }
        lambda.push(l);
        lambda_tilde.push(lt);
    }
    let lambda_max = lambda.iter().copied().fold(0.0, f64::max);
    let lambda_tilde_max = lambda_tilde.iter().copied().fold(0.0, f64::max);
    GeometricLambdas { lambda, lambda_tilde, lambda_max, lambda_tilde_max }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TimestepBudget {
    /// Largest one-sided speed over all edges.
    pub a: f64,
    pub d_min: f64,
    pub lambda_max: f64,
    pub lambda_tilde_max: f64,
    /// Depth positivity bound `d / (2a)`.
    pub dt_h: f64,
    /// Solute positivity bound `d / (d lambda gamma + 2a)`.
    pub dt_c: f64,
    /// Advection-diffusion stability bound `d / (d lambda_tilde gamma + a)`.
    pub dt_s: f64,
    pub dt: f64,
}

impl TimestepBudget {
    /// The binding restriction before the safety factor.
    pub fn limit(&self) -> f64 {
        self.dt_h.min(self.dt_c).min(self.dt_s)
    }
}

/// Combines the three restrictions; with neither waves nor diffusion the step is `quiescent_dt`.
pub fn compute_dt(
    a: f64,
    d_min: f64,
    lambda_max: f64,
    lambda_tilde_max: f64,
    gamma: f64,
    cfl: f64,
    quiescent_dt: f64,
) -> Result<TimestepBudget> {
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "wave speed", cell: usize::MAX });
    }
    let ratio = |den: f64| if den > 0.0 { d_min / den } else { f64::INFINITY };
    let dt_h = ratio(2.0 * a);
    let dt_c = ratio(d_min * lambda_max * gamma + 2.0 * a);
    let dt_s = ratio(d_min * lambda_tilde_max * gamma + a);
    let mut b = TimestepBudget { a, d_min, lambda_max, lambda_tilde_max, dt_h, dt_c, dt_s, dt: 0.0 };
    b.dt = if a == 0.0 && gamma == 0.0 { quiescent_dt } else { cfl * b.limit() };
    Ok(b)
}

/// One Shu-Osher SSP-RK3 step for a generic ODE system `u' = f(u)`.
pub fn ssprk3_step(u: &mut [f64], dt: f64, mut f: impl FnMut(&[f64], &mut [f64])) {
    let n = u.len();
    let mut k = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    f(u, &mut k);
    for i in 0..n {
        u1[i] = u[i] + dt * k[i];
    }
    f(&u1, &mut k);
    let mut u2 = vec![0.0; n];
    for i in 0..n {
        u2[i] = 0.75 * u[i] + 0.25 * (u1[i] + dt * k[i]);
    }
    f(&u2, &mut k);
    for i in 0..n {
        u[i] = u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * k[i]);
    }
}

/// Receives progress from [`Solver::run`].
pub trait RunObserver {
    /// Called after every accepted step.
    fn on_step(&mut self, _diag: &StepDiagnostics, _state: &FieldState) -> Result<()> {
        Ok(())
    }
    /// Called at `t = 0`, at every output time and at the end time.
    fn on_output(&mut self, _state: &FieldState, _limiters: &[CellLimiter]) -> Result<()> {
        Ok(())
    }
}

impl RunObserver for () {}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub retries: usize,
    pub initial: StepDiagnostics,
    pub last: StepDiagnostics,
}

impl RunSummary {
    pub fn volume_drift(&self) -> f64 {
        (self.last.volume - self.initial.volume) / self.initial.volume.abs().max(f64::MIN_POSITIVE)
    }

    pub fn mass_drift(&self) -> f64 {
        (self.last.solute_mass - self.initial.solute_mass) / self.initial.solute_mass.abs().max(f64::MIN_POSITIVE)
    }
}

/// Outcome of one stage: either fine or the reason the step must be redone.
enum StageCheck {
    Ok,
    /// Step size exceeds what this stage's speeds allow.
    TooLarge(f64),
    /// A depth or solute average went negative.
    Negative { cell: usize, field: &'static str, value: f64 },
}

/// Finite-volume solver bound to one mesh, bed and boundary set.
pub struct Solver<'m> {
    pub mesh: &'m DualMesh,
    pub topo: Topography,
    pub policy: BoundaryPolicy,
    pub cfg: SchemeConfig,
    pub eps: f64,
    pub lambdas: GeometricLambdas,
    grads: GradientField,
    recon: EdgeReconstruction,
    rhs: [SemiDiscreteRhs; 3],
    stage: [FieldState; 2],
    bounds: Vec<(f64, f64)>,
    step_count: usize,
    retries: usize,
    check_interval: usize,
}

impl<'m> Solver<'m> {
    pub fn new(mesh: &'m DualMesh, topo: Topography, policy: BoundaryPolicy, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        policy.validate(mesh, &topo.face)?;
        let n = mesh.len();
        let check_interval = if cfg!(debug_assertions) { 1 } else { cfg.check_interval.max(1) };
        Ok(Solver {
            eps: cfg.epsilon_for(mesh),
            lambdas: geometric_lambdas(mesh),
            grads: GradientField::new(n),
            recon: EdgeReconstruction::new(mesh),
            rhs: [SemiDiscreteRhs::new(mesh), SemiDiscreteRhs::new(mesh), SemiDiscreteRhs::new(mesh)],
            stage: [FieldState::zeros(n), FieldState::zeros(n)],
            bounds: vec![(0.0, 0.0); n],
            step_count: 0,
            retries: 0,
            check_interval,
            mesh,
            topo,
            policy,
            cfg,
        })
    }

    pub fn steps(&self) -> usize {
        self.step_count
    }

    pub fn retries(&self) -> usize {
        self.retries
    }

    /// Limiter data of the most recent right-hand-side evaluation.
    pub fn limiters(&self) -> &[CellLimiter] {
        &self.recon.cells
    }

    /// Reconstruction of the most recent right-hand-side evaluation.
    pub fn reconstruction(&self) -> &EdgeReconstruction {
        &self.recon
    }

    fn neighborhood_bounds(mesh: &DualMesh, c: &[f64], out: &mut [(f64, f64)]) {
        out.par_iter_mut().enumerate().for_each(|(j, b)| {
            let mut lo = c[j];
            let mut hi = c[j];
            for f in mesh.cell_faces(j) {
                if let Some(k) = f.neighbor {
                    lo = lo.min(c[k]);
                    hi = hi.max(c[k]);
                }
            }
            *b = (lo, hi);
        });
    }

    /// Checks the stored state and fills in concentrations; initial extrema
    /// serve as the near-dry clamp for the first step.
    pub fn prepare(&mut self, state: &mut FieldState) -> Result<()> {
        let n = self.mesh.len();
        for (name, v) in [("h", &state.h), ("p", &state.p), ("q", &state.q), ("s", &state.s), ("c", &state.c)] {
            if v.len() != n {
                return Err(Error::Config(format!("field {name} has {} entries for {n} cells", v.len())));
            }
        }
        for j in 0..n {
            if state.h[j] < 0.0 {
                return Err(Error::NegativeDepth { cell: j, depth: state.h[j] });
            }
            if state.s[j] < 0.0 {
                return Err(Error::PositivityViolation { stage: 0, time: state.t, cell: j, field: "s", value: state.s[j] });
            }
            if !(state.h[j].is_finite() && state.p[j].is_finite() && state.q[j].is_finite() && state.s[j].is_finite()) {
                return Err(Error::NonFinite { what: "initial state", cell: j });
            }
        }
        Self::neighborhood_bounds(self.mesh, &state.c, &mut self.bounds);
        state.update_concentration(&self.bounds, self.eps, self.cfg.xi);
        Ok(())
    }

    /// Evaluates the right-hand side of `u` into `self.rhs[slot]`.
    fn evaluate(&mut self, u: &FieldState, slot: usize) -> Result<f64> {
        gradients(self.mesh, &self.topo, u, self.cfg.xi, &mut self.grads);
        reconstruct(self.mesh, &self.topo, u, &self.grads, self.eps, self.cfg.xi, &mut self.recon);
        let params = FluxParams { g: self.cfg.g, nu: self.cfg.nu, gamma: self.cfg.gamma };
        assemble_rhs(self.mesh, &self.topo, u, &self.recon, &self.policy, params, &mut self.rhs[slot])?;
        Ok(self.rhs[slot].max_speed())
    }

    /// Full right-hand side of `u` without friction, for inspection and tests.
    pub fn rhs(&mut self, u: &FieldState) -> Result<&[[f64; 4]]> {
        self.evaluate(u, 0)?;
        Ok(&self.rhs[0].cells)
    }

    fn budget(&self, a: f64, quiescent: f64) -> Result<TimestepBudget> {
        compute_dt(
            a,
            self.mesh.d_min,
            self.lambdas.lambda_max,
            self.lambdas.lambda_tilde_max,
            self.cfg.gamma,
            self.cfg.cfl,
            quiescent,
        )
    }

    /// Forward Euler from `u` with `rhs[slot]`, blended as `a u0 + b (u + dt L(u))`.
    #[allow(clippy::too_many_arguments)]
    fn forward_euler(
        u0: &FieldState,
        u: &FieldState,
        rhs: &SemiDiscreteRhs,
        dt: f64,
        a: f64,
        b: f64,
        cfg: &SchemeConfig,
        eps: f64,
        out: &mut FieldState,
    ) {
        let (g, n_f) = (cfg.g, cfg.manning);
        out.h
            .par_iter_mut()
            .zip(out.p.par_iter_mut())
            .zip(out.q.par_iter_mut())
            .zip(out.s.par_iter_mut())
            .enumerate()
            .for_each(|(j, (((h, p), q), s))| {
                let r = rhs.cells[j];
                let kappa = friction_coefficient(u.h[j], u.p[j], u.q[j], n_f, g, eps);
                let hn = u.h[j] + dt * r[0];
                let pn = friction_apply(u.p[j], u.p[j] + dt * r[1], kappa, dt);
                let qn = friction_apply(u.q[j], u.q[j] + dt * r[2], kappa, dt);
                let sn = u.s[j] + dt * r[3];
                if a == 0.0 {
                    (*h, *p, *q, *s) = (hn, pn, qn, sn);
                } else {
                    *h = a * u0.h[j] + b * hn;
                    *p = a * u0.p[j] + b * pn;
                    *q = a * u0.q[j] + b * qn;
                    *s = a * u0.s[j] + b * sn;
                }
            });
    }

    /// Clips round-off negatives, reports real ones, and refreshes concentrations.
    fn finish_stage(&self, u: &mut FieldState) -> StageCheck {
        for j in 0..u.h.len() {
            if u.h[j] < 0.0 {
                if u.h[j] > -CLIP {
                    u.h[j] = 0.0;
                } else {
                    return StageCheck::Negative { cell: j, field: "h", value: u.h[j] };
                }
            }
            if u.s[j] < 0.0 {
                if u.s[j] > -CLIP {
                    u.s[j] = 0.0;
                } else {
                    return StageCheck::Negative { cell: j, field: "s", value: u.s[j] };
                }
            }
            if u.h[j] == 0.0 {
                u.p[j] = 0.0;
                u.q[j] = 0.0;
            }
        }
        u.update_concentration(&self.bounds, self.eps, self.cfg.xi);
        StageCheck::Ok
    }

    /// Discrete max-min check of one forward-Euler stage: wet cells whose
    /// whole neighborhood is wet must stay within the input extrema.
    fn check_max_min(&self, input: &FieldState, output_fe: &FieldState) -> Result<()> {
        let xi = self.cfg.xi;
        for j in 0..self.mesh.len() {
            if !(input.h[j] > xi && output_fe.h[j] > xi) {
                continue;
            }
            let mut lo = input.c[j];
            let mut hi = input.c[j];
            let mut skip = false;
            for f in self.mesh.cell_faces(j) {
                match f.neighbor {
                    Some(k) => {
                        skip |= input.h[k] <= xi;
                        lo = lo.min(input.c[k]);
                        hi = hi.max(input.c[k]);
                    }
                    None => {
                        skip |= matches!(self.policy.kinds[f.edge], Some(crate::boundary::BoundaryKind::Inflow { .. }));
                    }
                }
            }
            if skip {
                continue;
            }
            let c = output_fe.s[j] / output_fe.h[j];
            let tol = 1e-12 * hi.abs().max(lo.abs()).max(1.0);
            if c < lo - tol || c > hi + tol {
                return Err(Error::MaxMinViolation { cell: j, value: c, min: lo, max: hi });
            }
        }
        Ok(())
    }

    /// Advances `state` by one SSP-RK3 step of at most `dt_max`.
    pub fn step(&mut self, state: &mut FieldState, dt_max: f64) -> Result<StepDiagnostics> {
        let t0 = state.t;
        Self::neighborhood_bounds(self.mesh, &state.c, &mut self.bounds);
        let a0 = self.evaluate(state, 0)?;
        let budget = self.budget(a0, dt_max)?;
        let mut dt = budget.dt.min(dt_max);
        let check_now = self.step_count.is_multiple_of(self.check_interval);
        let check_mm = self.cfg.check_max_min && self.cfg.gamma == 0.0 && check_now;

        let mut attempt = 0;
        loop {
            if dt < 1e-12 * self.cfg.end_time.max(f64::MIN_POSITIVE) || !(dt > 0.0) {
                return Err(Error::TimeStepUnderflow { dt, time: t0 });
            }
            match self.try_step(state, dt, check_mm)? {
                (StageCheck::Ok, _) => break,
                (StageCheck::TooLarge(limit), _) => dt = self.cfg.cfl * limit,
                (StageCheck::Negative { cell, field, value }, stage) => {
                    if attempt >= MAX_RETRIES {
                        return Err(Error::PositivityViolation { stage, time: t0, cell, field, value });
                    }
                    dt *= 0.5;
                }
            }
            attempt += 1;
            self.retries += 1;
        }

        let mut next = std::mem::replace(&mut self.stage[0], FieldState::zeros(0));
        std::mem::swap(state, &mut next);
        self.stage[0] = next;
        state.t = t0 + dt;
        self.step_count += 1;

        let mut d = diagnostics(state, self.mesh);
        d.step = self.step_count;
        d.dt = dt;
        d.dt_h = budget.dt_h;
        d.dt_c = budget.dt_c;
        d.dt_s = budget.dt_s;
        Ok(d)
    }

    /// Runs the three stages; on success the new state is left in `self.stage[0]`.
    fn try_step(&mut self, un: &FieldState, dt: f64, check_mm: bool) -> Result<(StageCheck, usize)> {
        let cfg = self.cfg.clone();
        let [mut s1, mut s2] = std::mem::replace(&mut self.stage, [FieldState::zeros(0), FieldState::zeros(0)]);
        let result = (|| -> Result<(StageCheck, usize)> {
            // stage 1
            Self::forward_euler(un, un, &self.rhs[0], dt, 0.0, 1.0, &cfg, self.eps, &mut s1);
            if check_mm {
                self.check_max_min(un, &s1)?;
            }
            if let c @ StageCheck::Negative { .. } = self.finish_stage(&mut s1) {
                return Ok((c, 1));
            }
            let a1 = self.evaluate(&s1, 1)?;
            let lim = self.budget(a1, dt)?.limit();
            if dt > lim {
                return Ok((StageCheck::TooLarge(lim), 1));
            }

            // stage 2
            Self::forward_euler(un, &s1, &self.rhs[1], dt, 0.0, 1.0, &cfg, self.eps, &mut s2);
            if check_mm {
                self.check_max_min(&s1, &s2)?;
            }
            blend(un, &mut s2, 0.75, 0.25);
            if let c @ StageCheck::Negative { .. } = self.finish_stage(&mut s2) {
                return Ok((c, 2));
            }
            let a2 = self.evaluate(&s2, 2)?;
            let lim = self.budget(a2, dt)?.limit();
            if dt > lim {
                return Ok((StageCheck::TooLarge(lim), 2));
            }

            // stage 3, reusing s1 for the result
            Self::forward_euler(un, &s2, &self.rhs[2], dt, 0.0, 1.0, &cfg, self.eps, &mut s1);
            if check_mm {
                self.check_max_min(&s2, &s1)?;
            }
            blend(un, &mut s1, 1.0 / 3.0, 2.0 / 3.0);
            if let c @ StageCheck::Negative { .. } = self.finish_stage(&mut s1) {
                return Ok((c, 3));
            }
            Ok((StageCheck::Ok, 3))
        })();
        self.stage = [s1, s2];
        result
    }

    /// Integrates to `cfg.end_time`, reporting every step and output time to `observer`.
    pub fn run(&mut self, state: &mut FieldState, observer: &mut dyn RunObserver) -> Result<RunSummary> {
        self.prepare(state)?;
        let end = self.cfg.end_time;
        let mut initial = diagnostics(state, self.mesh);
        initial.step = self.step_count;
        observer.on_output(state, &self.recon.cells)?;
        let interval = self.cfg.output_interval;
        let mut next_out = interval.map_or(end, |dt| (state.t + dt).min(end));
        let mut last = initial;
        while state.t < end {
            let target = next_out.min(end);
            let d = self.step(state, target - state.t)?;
            // snap to the target when the step was clamped to it
            if (state.t - target).abs() <= 1e-12 * end.max(1.0) {
                state.t = target;
            }
            observer.on_step(&d, state)?;
            last = d;
            last.t = state.t;
            if state.t >= target {
                observer.on_output(state, &self.recon.cells)?;
                next_out = interval.map_or(end, |dt| (target + dt).min(end));
            }
        }
        Ok(RunSummary { steps: self.step_count, retries: self.retries, initial, last })
    }
}

/// `out = a u0 + b out` in place.
fn blend(u0: &FieldState, out: &mut FieldState, a: f64, b: f64) {
    for (dst, src) in [(&mut out.h, &u0.h), (&mut out.p, &u0.p), (&mut out.q, &u0.q), (&mut out.s, &u0.s)] {
        dst.par_iter_mut().zip(src.par_iter()).for_each(|(d, &s)| *d = a * s + b * *d);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_examples() {
        let a = 9.81f64.sqrt();
        let b = compute_dt(a, 0.05, 10.0, 5.0, 0.0, 0.9, 1.0).unwrap();
        assert_eq!(b.dt_h, 0.05 / (2.0 * a));
        assert_eq!(b.dt_c, b.dt_h);
        assert_eq!(b.dt_s, 0.05 / a);
        assert!((b.dt - 0.9 * 0.05 / (2.0 * a)).abs() < 1e-14);
        assert!((b.dt / 0.9 - 7.982e-3).abs() < 1e-6);

        let b = compute_dt(0.0, 0.05, 800.0, 400.0, 0.01, 1.0, 1.0).unwrap();
        assert!((b.dt_s - 0.25).abs() < 1e-14);
        assert!((b.dt_c - 0.125).abs() < 1e-14);
        assert_eq!(b.dt_h, f64::INFINITY);

        let b = compute_dt(0.0, 0.05, 800.0, 400.0, 0.0, 0.9, 0.3).unwrap();
        assert_eq!(b.dt, 0.3);
    }

    #[test]
    fn ssprk3_is_third_order() {
        // u' = -u from 1 to t = 1
        let err = |n: usize| {
            let mut u = [1.0];
            let dt = 1.0 / n as f64;
            for _ in 0..n {
                ssprk3_step(&mut u, dt, |x, k| k[0] = -x[0]);
            }
            (u[0] - (-1.0f64).exp()).abs()
        };
        let order = (err(20) / err(40)).log2();
        assert!((order - 3.0).abs() < 0.1, "order {order}");
    }
}
