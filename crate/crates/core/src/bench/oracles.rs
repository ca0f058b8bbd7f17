//! Closed-form and semi-analytic reference solutions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// One-dimensional dam break over a flat frictionless bed: Ritter's
/// rarefaction when the downstream side is dry, Stoker's rarefaction-shock
/// pair when it is wet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DamBreak {
    pub h_left: f64,
    pub h_right: f64,
    pub x0: f64,
    pub g: f64,
    /// Depth between the rarefaction and the shock (zero for a dry bed).
    pub h_mid: f64,
    /// Velocity between the rarefaction and the shock.
    pub u_mid: f64,
    /// Shock speed, or the dry front speed `2 sqrt(g h_left)` for a dry bed.
    pub front_speed: f64,
}

impl DamBreak {
    pub fn new(h_left: f64, h_right: f64, x0: f64, g: f64) -> Result<Self> {
        if !(h_left > h_right && h_right >= 0.0) {
            return Err(Error::Oracle(format!("dam break needs h_left > h_right >= 0, got {h_left}, {h_right}")));
        }
        let c_l = (g * h_left).sqrt();
        if h_right == 0.0 {
            return Ok(DamBreak { h_left, h_right, x0, g, h_mid: 0.0, u_mid: 2.0 * c_l, front_speed: 2.0 * c_l });
        }
        let rare = |h: f64| 2.0 * (c_l - (g * h).sqrt());
        let shock = |h: f64| (h - h_right) * (g * (h + h_right) / (2.0 * h * h_right)).sqrt();
        let f = |h: f64| rare(h) - shock(h);
        // f > 0 at h_right and f < 0 at h_left
        let (mut lo, mut hi) = (h_right, h_left);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        if !(f(0.5 * (lo + hi)).abs() < 1e-12) {
            return Err(Error::Oracle("intermediate dam-break depth did not converge".into()));
        }
        let h_mid = 0.5 * (lo + hi);
        let u_mid = rare(h_mid);
        let front_speed = h_mid * u_mid / (h_mid - h_right);
        Ok(DamBreak { h_left, h_right, x0, g, h_mid, u_mid, front_speed })
    }

    /// Depth and velocity at `x`, time `t`.
    pub fn eval(&self, x: f64, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return if x <= self.x0 { (self.h_left, 0.0) } else { (self.h_right, 0.0) };
        }
        let c_l = (self.g * self.h_left).sqrt();
        let xi = (x - self.x0) / t;
        let fan_end = if self.h_right == 0.0 {
            2.0 * c_l
        } else {
            self.u_mid - (self.g * self.h_mid).sqrt()
        };
        if xi <= -c_l {
            (self.h_left, 0.0)
        } else if xi <= fan_end {
            let r = 2.0 * c_l - xi;
            (r * r / (9.0 * self.g), 2.0 / 3.0 * (xi + c_l))
        } else if self.h_right > 0.0 && xi <= self.front_speed {
            (self.h_mid, self.u_mid)
        } else {
            (self.h_right, 0.0)
        }
    }

    /// Position of the shock (wet bed) or dry front at time `t`.
    pub fn front(&self, t: f64) -> f64 {
        self.x0 + self.front_speed * t
    }
}

/// Gaussian hump diffusing in still water.
pub fn gaussian_diffusion(x: f64, y: f64, t: f64, sigma: f64, gamma: f64, x0: f64, y0: f64) -> f64 {
    let s = 4.0 * gamma * t + sigma * sigma;
    let r2 = (x - x0) * (x - x0) + (y - y0) * (y - y0);
    sigma * sigma / s * (-r2 / s).exp()
}

/// Instantaneous point release of mass `mass` advected by `(u, v)` in depth `h`.
pub fn advection_diffusion(p: Point, t: f64, a: &PointRelease) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Oracle(format!("point-release solution needs t > 0, got {t}")));
    }
    let dx = p.x - a.u * t - a.x0;
    let dy = p.y - a.v * t - a.y0;
    let s = 4.0 * a.gamma * t;
    Ok(a.mass / (PI * a.depth * s) * (-(dx * dx + dy * dy) / s).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRelease {
    pub mass: f64,
    pub depth: f64,
    pub gamma: f64,
    pub u: f64,
    pub v: f64,
    pub x0: f64,
    pub y0: f64,
}

impl PointRelease {
    pub fn peak(&self, t: f64) -> f64 {
        self.mass / (4.0 * PI * self.depth * self.gamma * t)
    }
}

/// Indicator of a disk of `radius` translated with constant velocity.
pub fn disk_advection(p: Point, t: f64, center: Point, radius: f64, u: f64, v: f64) -> f64 {
    let c = Point::new(center.x + u * t, center.y + v * t);
    if (p - c).norm() <= radius {
        1.0
    } else {
        0.0
    }
}
