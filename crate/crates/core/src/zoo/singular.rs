//! The radial singular functions `f(x) = rho(x) |x|^alpha (-ln|x|)^(-delta)` and their
//! membership table.

use serde::{Deserialize, Serialize};

use crate::bands::radial_cutoff;
use crate::error::{param, Result};
use crate::grid::{norm, Grid, Point, SampledFunction};

/// Midpoint samples per axis inside one cell.
const SUBSAMPLES: usize = 8;
/// Bisection depth for cells touching the origin.
const ORIGIN_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularFnConfig {
    pub alpha: f64,
    pub delta: f64,
    /// Cutoff scale: `rho = 1` on `B(0, theta)`, `rho = 0` outside `B(0, 2 theta)`.
    pub theta: f64,
}

impl Default for SingularFnConfig {
    fn default() -> Self {
        Self {
            alpha: -0.25,
            delta: 0.0,
            theta: 0.125,
        }
    }
}

impl SingularFnConfig {
    pub fn value(&self, r: f64) -> f64 {
        if r <= 0.0 || r >= 2.0 * self.theta {
            return 0.0;
        }
        let mut v = radial_cutoff(r, self.theta, 2.0 * self.theta) * r.powf(self.alpha);
        if self.delta != 0.0 {
            v *= (-r.ln()).powf(-self.delta);
        }
        v
    }
}

/// Explains why `|f|^p` fails to be locally integrable, if it does.
pub fn integrability_warning(cfg: &SingularFnConfig, d: usize, p: f64) -> Option<String> {
    let edge = -(d as f64) / p;
    let bad = cfg.alpha < edge || (cfg.alpha == edge && cfg.delta * p <= 1.0);
    bad.then(|| {
        format!(
            "alpha = {} with delta = {} is not p-integrable at the origin for d = {d}, p = {p}; samples are finite cell averages",
            cfg.alpha, cfg.delta
        )
    })
}

fn cell_average<F: Fn(&Point) -> f64>(g: &F, center: Point, h: f64, d: usize, depth: u32) -> f64 {
    let touches_origin = center[0].abs() <= h / 2.0 && (d == 1 || center[1].abs() <= h / 2.0);
    if touches_origin && depth > 0 {
        let q = h / 4.0;
        let mut s = 0.0;
        if d == 1 {
            for sx in [-q, q] {
                s += cell_average(g, [center[0] + sx, 0.0], h / 2.0, d, depth - 1);
            }
            return s / 2.0;
        }
        for sx in [-q, q] {
            for sy in [-q, q] {
                s += cell_average(g, [center[0] + sx, center[1] + sy], h / 2.0, d, depth - 1);
            }
        }
        return s / 4.0;
    }
    let m = SUBSAMPLES;
    let off = |i: usize| ((i as f64 + 0.5) / m as f64 - 0.5) * h;
    let mut s = 0.0;
    if d == 1 {
        for i in 0..m {
            s += g(&[center[0] + off(i), 0.0]);
        }
        s / m as f64
    } else {
        for i in 0..m {
            for j in 0..m {
                s += g(&[center[0] + off(i), center[1] + off(j)]);
            }
        }
        s / (m * m) as f64
    }
}

/// Cell averages of `f_{alpha,delta}` over each grid cell, so the singularity enters through
/// its integral rather than a point value.
pub fn make_f_alpha_delta(grid: &Grid, cfg: &SingularFnConfig) -> Result<SampledFunction> {
    if !(cfg.alpha < 0.0) {
        return Err(param("alpha must be negative"));
    }
    if !(cfg.delta >= 0.0) {
        return Err(param("delta must be nonnegative"));
    }
    if !(cfg.theta > 0.0 && cfg.theta <= grid.half_width() / 8.0) {
        return Err(param(format!(
            "theta must lie in (0, R/8], got {} for R = {}",
            cfg.theta,
            grid.half_width()
        )));
    }
    if cfg.delta > 0.0 && 2.0 * cfg.theta >= 1.0 {
        return Err(param("delta > 0 needs 2 theta < 1 so that -ln|x| > 0 on the support"));
    }
    let d = grid.dim();
    let h = grid.spacing();
    let support = 2.0 * cfg.theta;
    let eval = |x: &Point| cfg.value(norm(x, d));
    SampledFunction::from_real(*grid, support, |x| {
        if norm(x, d) > support {
            0.0
        } else {
            // radial, so average over the reflected cell; mirror cells then agree bit for bit
            cell_average(&eval, [x[0].abs(), x[1].abs()], h, d, ORIGIN_DEPTH)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Member,
    NotMember,
}

/// Membership of `f_{alpha,delta}` in the Besov-Morrey space with parameters `(s, u, p, q)`.
#[allow(clippy::too_many_arguments)]
pub fn membership_oracle(d: usize, s: f64, u: f64, p: f64, q: f64, alpha: f64, delta: f64) -> Result<Membership> {
    if !(s > 0.0) {
        return Err(param("the membership table needs s > 0"));
    }
    if !(1.0 <= p && p <= u && u.is_finite()) {
        return Err(param("the membership table needs 1 <= p <= u < inf"));
    }
    if !(q > 0.0) || !(alpha < 0.0) || !(delta >= 0.0) || !(d == 1 || d == 2) {
        return Err(param("the membership table needs q > 0, alpha < 0, delta >= 0"));
    }
    let edge = d as f64 / u + alpha;
    let member = if s < edge {
        true
    } else if s == edge {
        if delta == 0.0 {
            q.is_infinite()
        } else {
            delta * q > 1.0
        }
    } else {
        false
    };
    Ok(if member {
        Membership::Member
    } else {
        Membership::NotMember
    })
}
