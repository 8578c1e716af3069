//! The lacunary sum `f = sum_k a_k phi(2^(n_k) x - x_k)` with `n_k = r(k-1) + 2`,
//! `x_k = 32^(r-2) (1, ..., 1)` and `a_k = 2^(n_k (d/u - N))`.
//!
//! Only the first summand or so fits on a grid, so the difference-norm lower bound is evaluated
//! through the dilation identity
//! `‖ (int_{|h|<t} |Delta^N_h phi(2^n . - x0)|^v dh)^(1/v) ‖_p = 2^(-nd/v - nd/p) ‖G_{2^n t}‖_p`
//! with `G_tau(y) = (int_{|h|<tau} |Delta^N_h phi(y)|^v dh)^(1/v)` computed by quadrature from
//! the analytic profile.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid::{Grid, Point, SampledFunction};
use crate::morrey::BallFamily;
use crate::zoo::atoms::MomentProfile;
use crate::zoo::sequence::{level_morrey, CoefficientSequence};

/// Below this dilated radius `G_tau / tau^(N + d/v)` is replaced by its value at the floor; the
/// ratio has a finite limit as `tau -> 0` and direct quadrature loses digits to cancellation.
pub const TAU_FLOOR: f64 = 1e-3;

/// Fraction of the support on which `min_{|gamma| <= N} |D^gamma phi|` must exceed the
/// measured constant.
pub const D_SET_FRACTION: f64 = 0.55;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OswaldConfig {
    pub r: u32,
    pub order: usize,
    pub u: f64,
    pub k_max: usize,
    pub dim: usize,
    /// Moment order `L` of the profile (`-1`: none).
    pub moments: i32,
}

impl Default for OswaldConfig {
    fn default() -> Self {
        Self {
            r: 5,
            order: 1,
            u: 2.0,
            k_max: 1,
            dim: 1,
            moments: -1,
        }
    }
}

impl OswaldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r <= 4 {
            return Err(param("lacunarity r must exceed 4"));
        }
        if ((self.r + 1) as f64).exp2() < self.order as f64 + 4.0 {
            return Err(param("need 2^(r+1) >= N + 4"));
        }
        if self.order == 0 {
            return Err(param("difference order must be at least 1"));
        }
        if !(self.u > 0.0 && self.u.is_finite()) {
            return Err(param("u must be positive and finite"));
        }
        if self.k_max == 0 {
            return Err(param("need at least one summand"));
        }
        if !(1..=2).contains(&self.dim) {
            return Err(crate::error::Error::Dimension(self.dim));
        }
        Ok(())
    }

    pub fn level(&self, k: usize) -> u32 {
        self.r * (k as u32 - 1) + 2
    }

    /// Each coordinate of `x_k`.
    pub fn shift(&self) -> f64 {
        32f64.powi(self.r as i32 - 2)
    }

    pub fn amplitude(&self, k: usize) -> f64 {
        let d = self.dim as f64;
        (self.level(k) as f64 * (d / self.u - self.order as f64)).exp2()
    }

    /// Profile half-width so that the support sits inside `B(0,1) ∩ [0,1)^d`.
    pub fn half_width(&self) -> f64 {
        if self.dim == 1 {
            0.45
        } else {
            0.17
        }
    }

    pub fn profile(&self) -> Result<MomentProfile> {
        MomentProfile::new(self.dim, self.half_width(), self.moments)
    }

    /// Per-axis interval containing the support of summand `k`.
    pub fn summand_box(&self, k: usize) -> (f64, f64) {
        let sc = (-(self.level(k) as f64)).exp2();
        let w = self.half_width();
        (sc * (self.shift() + 0.5 - w), sc * (self.shift() + 0.5 + w))
    }

    /// Radius of a centered ball containing all summands up to `k_max`.
    pub fn support_radius(&self) -> f64 {
        (1..=self.k_max)
            .map(|k| self.summand_box(k).1 * (self.dim as f64).sqrt())
            .fold(0.0, f64::max)
    }

    /// Coefficients `lambda_{n_k, x_k} = a_k`.
    pub fn coefficients(&self) -> CoefficientSequence {
        let mut seq = CoefficientSequence::new(self.dim);
        let x = self.shift() as i64;
        for k in 1..=self.k_max {
            seq.insert(self.level(k), [x, if self.dim == 2 { x } else { 0 }], self.amplitude(k));
        }
        seq
    }
}

fn boxes_disjoint(a: (f64, f64), b: (f64, f64), pad: f64) -> bool {
    a.1 + pad < b.0 - pad || b.1 + pad < a.0 - pad
}

/// Pairwise disjointness of the summand supports for `k, t <= k_max`, `k != t`.  The supports
/// are products of the same interval in each axis, so one axis decides.
pub fn supports_disjoint(cfg: &OswaldConfig) -> bool {
    (1..=cfg.k_max).all(|k| (k + 1..=cfg.k_max).all(|t| boxes_disjoint(cfg.summand_box(k), cfg.summand_box(t), 0.0)))
}

/// Disjointness of the supports of `Delta^N_h` applied to summands `0 < k < t < l - 4`, for all
/// `|h| <= h_len`: each support lies in its box widened by `N |h|`.
pub fn shifted_supports_disjoint(cfg: &OswaldConfig, l: usize, h_len: f64) -> bool {
    let pad = cfg.order as f64 * h_len / 2.0;
    let top = l.saturating_sub(5);
    (1..=top).all(|k| (k + 1..=top).all(|t| boxes_disjoint(cfg.summand_box(k), cfg.summand_box(t), pad)))
}

/// `2^-(n_{l+1}) 2^-(r l)`, the difference scale at which the first `l - 6` summands separate.
pub fn witness_scale(cfg: &OswaldConfig, l: usize) -> f64 {
    (-(cfg.level(l + 1) as f64) - (cfg.r as f64) * l as f64).exp2()
}

/// Largest `k_max` whose finest summand has at least four samples per cube side.
pub fn resolvable_k_max(grid: &Grid, cfg: &OswaldConfig) -> usize {
    let mut k = 0;
    while (-(cfg.level(k + 1) as f64)).exp2() >= 4.0 * grid.spacing() * (1.0 - 1e-12) {
        k += 1;
    }
    k
}

/// Samples of the lacunary sum.
pub fn make_oswald(grid: &Grid, cfg: &OswaldConfig) -> Result<SampledFunction> {
    cfg.validate()?;
    if grid.dim() != cfg.dim {
        return Err(param("grid and configuration dimensions differ"));
    }
    if resolvable_k_max(grid, cfg) < cfg.k_max {
        return Err(param(format!(
            "level n_{} = {} is not resolved by spacing {}",
            cfg.k_max,
            cfg.level(cfg.k_max),
            grid.spacing()
        )));
    }
    let profile = cfg.profile()?;
    let x = cfg.shift();
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            let mut v = 0.0;
            for k in 1..=cfg.k_max {
                let sc = (cfg.level(k) as f64).exp2();
                let y = [p[0] * sc - x, if cfg.dim == 2 { p[1] * sc - x } else { 0.0 }];
                v += cfg.amplitude(k) * profile.eval(&y);
            }
            Complex64::new(v, 0.0)
        })
        .collect();
    SampledFunction::new(*grid, values, cfg.support_radius())
}

/// The measured constant `C` with `min_{|gamma| <= N} |D^gamma phi| > C` on a set `D` covering
/// [`D_SET_FRACTION`] of the support, and the covered fraction.
pub fn d_set_constant(profile: &MomentProfile, order: usize) -> (f64, f64) {
    let per_axis = if profile.dim == 1 { 4000 } else { 160 };
    let mut mins: Vec<f64> = profile.derivative_scan(order, per_axis).iter().map(|x| x.1).collect();
    mins.sort_by(f64::total_cmp);
    let cut = ((1.0 - D_SET_FRACTION) * mins.len() as f64).floor() as usize;
    let c = mins[cut.min(mins.len() - 1)];
    let covered = mins.iter().filter(|&&m| m > c).count() as f64 / mins.len() as f64;
    (c, covered)
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Composite 5-point Gauss-Legendre nodes and weights on `[a, b]`.
fn gauss(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let w = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * 5);
    for i in 0..panels {
        let c = a + (i as f64 + 0.5) * w;
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            out.push((c + x * w / 2.0, wt * w / 2.0));
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn difference_at(profile: &MomentProfile, order: usize, y: &Point, h: &Point) -> f64 {
    (0..=order)
        .map(|j| {
            let sign = if (order - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            let z = [y[0] + j as f64 * h[0], y[1] + j as f64 * h[1]];
            sign * binomial(order, j) * profile.eval(&z)
        })
        .sum()
}

/// `‖G_tau‖_p` for the analytic profile, `G_tau(y) = (int_{|h|<tau} |Delta^N_h phi(y)|^v dh)^(1/v)`.
pub fn g_norm(profile: &MomentProfile, order: usize, v: f64, p: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && v >= 1.0 && v.is_finite() && p > 0.0) {
        return Err(param("need tau > 0, 1 <= v < inf, p > 0"));
    }
    let d = profile.dim;
    let lo = 0.5 - profile.half_width - order as f64 * tau;
    let hi = 0.5 + profile.half_width + order as f64 * tau;
    let nodes: Vec<(Point, f64)> = if d == 1 {
        let mut h = gauss(-tau, 0.0, 16);
        h.extend(gauss(0.0, tau, 16));
        h.into_iter().map(|(x, w)| ([x, 0.0], w)).collect()
    } else {
        let radial = gauss(0.0, tau, 6);
        let m = 48;
        let mut out = Vec::with_capacity(radial.len() * m);
        for (rho, w) in radial {
            for a in 0..m {
                let th = 2.0 * std::f64::consts::PI * (a as f64 + 0.5) / m as f64;
                out.push((
                    [rho * th.cos(), rho * th.sin()],
                    w * rho * 2.0 * std::f64::consts::PI / m as f64,
                ));
            }
        }
        out
    };
    let per_axis = if d == 1 { 4000 } else { 160 };
    let dx = (hi - lo) / per_axis as f64;
    let coords: Vec<f64> = (0..per_axis).map(|i| lo + (i as f64 + 0.5) * dx).collect();
    let points: Vec<Point> = if d == 1 {
        coords.iter().map(|&a| [a, 0.0]).collect()
    } else {
        coords
            .iter()
            .flat_map(|&a| coords.iter().map(move |&b| [a, b]))
            .collect()
    };
    let cells: Vec<f64> = points
        .par_iter()
        .map(|y| {
            let inner: f64 = nodes
                .iter()
                .map(|(h, w)| w * difference_at(profile, order, y, h).abs().powf(v))
                .sum();
            inner.powf(p / v)
        })
        .collect();
    let total: f64 = cells.iter().sum();
    Ok((total * dx.powi(d as i32)).powf(1.0 / p))
}

/// `Psi(tau) = tau^-(N + d/v) ‖G_tau‖_p`, held at its value on [`TAU_FLOOR`] below the floor.
pub fn psi(profile: &MomentProfile, order: usize, v: f64, p: f64, tau: f64) -> Result<f64> {
    let t = tau.max(TAU_FLOOR);
    let d = profile.dim as f64;
    Ok(t.powf(-(order as f64 + d / v)) * g_norm(profile, order, v, p, t)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub l: usize,
    pub t: f64,
    /// `(t^-N ‖ball average at t | L_p‖)^p` restricted to the first `l - 6` summands.
    pub partial_p: f64,
    pub summands: usize,
    pub separated: bool,
}

/// Lower-bound witness for the difference norm with `s = N`, `p = u`: at `t = t(r,l)` the
/// summands `k <= l - 6` have disjoint difference supports, and each contributes
/// `a_k^p 2^(n_k (Np - d)) Psi(2^(n_k) t)^p`.
pub fn witness(cfg: &OswaldConfig, v: f64, p: f64, ls: &[usize]) -> Result<Vec<WitnessPoint>> {
    cfg.validate()?;
    if (p - cfg.u).abs() > 1e-12 {
        return Err(param("the witness needs p = u"));
    }
    let profile = cfg.profile()?;
    let d = cfg.dim as f64;
    let n = cfg.order as f64;
    let mut cache: Option<f64> = None;
    let mut out = Vec::with_capacity(ls.len());
    for &l in ls {
        if l < 7 {
            return Err(param("need l >= 7"));
        }
        let t = witness_scale(cfg, l);
        let mut sum = 0.0;
        for k in 1..=l - 6 {
            let nk = cfg.level(k) as f64;
            let tau = nk.exp2() * t;
            let ps = if tau <= TAU_FLOOR {
                *cache.get_or_insert(psi(&profile, cfg.order, v, p, TAU_FLOOR)?)
            } else {
                psi(&profile, cfg.order, v, p, tau)?
            };
            sum += cfg.amplitude(k).powf(p) * (nk * (n * p - d)).exp2() * ps.powf(p);
        }
        out.push(WitnessPoint {
            l,
            t,
            partial_p: sum,
            summands: l - 6,
            separated: shifted_supports_disjoint(cfg, l, t),
        });
    }
    Ok(out)
}

/// Atomic upper-bound blocks `2^(n_k (N - d/u)) a_k ‖chi^(u)_{n_k, x_k} | M^u_p‖`.
pub fn atomic_blocks(cfg: &OswaldConfig, p: f64, template: &BallFamily) -> Result<Vec<(usize, f64)>> {
    cfg.validate()?;
    let d = cfg.dim as f64;
    let x = cfg.shift() as i64;
    (1..=cfg.k_max)
        .map(|k| {
            let j = cfg.level(k);
            let mut seq = CoefficientSequence::new(cfg.dim);
            seq.insert(j, [x, if cfg.dim == 2 { x } else { 0 }], 1.0);
            let m = level_morrey(&seq, j, cfg.u, p, template)?;
            Ok((
                k,
                (j as f64 * (cfg.order as f64 - d / cfg.u)).exp2() * cfg.amplitude(k) * m,
            ))
        })
        .collect()
}

/// One summand `phi(2^j x - x0)` on `grid`, for checking the dilation identity.
pub fn dilated_summand(grid: &Grid, profile: &MomentProfile, j: u32, x0: f64) -> Result<SampledFunction> {
    let sc = (j as f64).exp2();
    let d = grid.dim();
    let reach = (x0 + 1.0) / sc * (d as f64).sqrt();
    SampledFunction::from_real(*grid, reach, |p| {
        profile.eval(&[p[0] * sc - x0, if d == 2 { p[1] * sc - x0 } else { 0.0 }])
    })
}
