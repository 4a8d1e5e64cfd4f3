//! Sectors, disks and the Borel/x-plane domains Omega and omega_k.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Domain parameters: ray direction `theta`, opening `alpha`, disk radius
/// `nu`, exponential weight rate `mu` and rank `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub theta: f64,
    pub alpha: f64,
    pub nu: f64,
    pub mu: f64,
    pub k: usize,
}

/// Angle wrapped into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut t = a % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Angular distance in [0, pi] between the argument of `c` and direction
/// `phi`. Zero maps to distance 0.
pub fn angular_distance(c: C64, phi: f64) -> f64 {
    if c.norm() == 0.0 {
        return 0.0;
    }
    wrap_angle(c.arg() - phi).abs()
}

/// Open sector S(theta, alpha) = {x != 0 : |Arg x - theta| < alpha/2}.
pub fn in_sector(x: C64, theta: f64, alpha: f64) -> bool {
    x.norm() > 0.0 && wrap_angle(x.arg() - theta).abs() < alpha / 2.0
}

/// Distance from `c` to the closed ray {s e^{i psi}, s >= 0}.
pub fn distance_to_ray(c: C64, psi: f64) -> f64 {
    let a = angular_distance(c, psi);
    if a >= PI / 2.0 {
        c.norm()
    } else {
        c.norm() * a.sin()
    }
}

impl SectorSpec {
    pub fn new(theta: f64, alpha: f64, nu: f64, mu: f64, k: usize) -> Self {
        SectorSpec { theta, alpha, nu, mu, k }
    }

    /// Check 0 < alpha < pi, k >= 1, mu > 0 and the radius condition
    /// nu < mu^{-1} sin(k alpha / 4)^{1/k}.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return invalid("rank k must be >= 1");
        }
        if !(self.alpha > 0.0 && self.alpha < PI) {
            return invalid(format!("opening alpha = {} must lie in (0, pi)", self.alpha));
        }
        if !(self.mu > 0.0) || !(self.nu > 0.0) {
            return invalid("mu and nu must be positive");
        }
        if self.nu >= self.nu_limit() {
            return invalid(format!(
                "radius nu = {} violates nu < sin(k alpha/4)^(1/k)/mu = {}",
                self.nu,
                self.nu_limit()
            ));
        }
        Ok(())
    }

    pub fn nu_limit(&self) -> f64 {
        let k = self.k as f64;
        (k * self.alpha / 4.0).sin().powf(1.0 / k) / self.mu
    }

    /// w in Omega = B(nu) union S(theta, alpha).
    pub fn in_omega_borel(&self, w: C64) -> bool {
        w.norm() < self.nu || in_sector(w, self.theta, self.alpha)
    }

    /// x in omega_k = B(nu) intersect S(theta, alpha + pi/k).
    pub fn in_omega_x(&self, x: C64) -> bool {
        x.norm() < self.nu && in_sector(x, self.theta, self.alpha + PI / self.k as f64)
    }

    /// Integration direction theta' inside (theta - alpha/2, theta + alpha/2),
    /// as close to Arg x as the sector allows. For x in omega_k this keeps
    /// |Arg x - theta'| < pi/(2k), so e^{-w^k/x^k} decays along the ray.
    pub fn ray_for(&self, x: C64) -> f64 {
        let off = wrap_angle(x.arg() - self.theta);
        let slack = self.alpha / 2.0 + PI / (2.0 * self.k as f64) - off.abs();
        let margin = 1e-3 * self.alpha.min(slack.max(0.0));
        let lim = self.alpha / 2.0 - margin;
        self.theta + off.clamp(-lim, lim)
    }
}
