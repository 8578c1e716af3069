//! Morrey quasi-norm estimates: `sup |B|^(1/u - 1/p) (int_B |f|^p)^(1/p)` over a finite family of
//! balls or cubes.  A finite family can only under-estimate the supremum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::{Grid, SampledFunction};

pub const DEFAULT_STRIDE: usize = 4;
pub const DEFAULT_LOG2_RATIO: f64 = 0.25;
pub const MAX_REFINEMENTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Ball,
    Cube,
}

/// Centers on the sublattice of grid points whose indices are multiples of `stride`, radii on the
/// ladder `r_min * 2^(j * log2_ratio)` up to `r_max`.  In cube mode the radii are side lengths
/// and the lattice indexes lower corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub shape: Shape,
    pub stride: usize,
    pub log2_ratio: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl BallFamily {
    pub fn new(grid: &Grid, shape: Shape) -> Self {
        Self {
            shape,
            stride: DEFAULT_STRIDE,
            log2_ratio: DEFAULT_LOG2_RATIO,
            r_min: grid.spacing(),
            r_max: 2.0 * grid.half_width(),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.stride == 0 || self.stride > grid.n() {
            return Err(param(format!("center stride {} out of range", self.stride)));
        }
        if !(self.log2_ratio > 0.0 && self.log2_ratio <= 1.0) {
            return Err(param("radius ratio must lie in (1, 2]"));
        }
        if !(self.r_min > 0.0 && self.r_min <= self.r_max && self.r_max <= 2.0 * grid.half_width() * (1.0 + 1e-12)) {
            return Err(param("radii must lie in (0, 2R]"));
        }
        Ok(())
    }

    /// Denser centers and a finer radius ladder; always a superset.
    pub fn refine(&self) -> Self {
        Self {
            stride: (self.stride / 2).max(1),
            log2_ratio: self.log2_ratio / 2.0,
            ..*self
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut j = 0u32;
        loop {
            let r = self.r_min * (j as f64 * self.log2_ratio).exp2();
            if r > self.r_max * (1.0 + 1e-12) {
                break;
            }
            out.push(r);
            j += 1;
        }
        out
    }

    pub fn center_count(&self, grid: &Grid) -> usize {
        grid.n().div_ceil(self.stride).pow(grid.dim() as u32)
    }
}

/// What a finite estimate was truncated to.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub family: Option<BallFamily>,
    pub k_max: Option<usize>,
    pub t_range: Option<(f64, f64)>,
    pub parameter: Option<f64>,
}

/// A quasi-norm value with its truncation record.  `partials` is the trajectory of partial values
/// against the truncation parameter; `terms` holds the individual contributions (per radius, per
/// band, per level) that the value is assembled from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub truncation: Truncation,
    pub partials: Vec<(f64, f64)>,
    pub terms: Vec<(f64, f64)>,
}

pub(crate) fn check_exponents(u: f64, p: f64) -> Result<()> {
    if !(p > 0.0 && p <= u && u.is_finite()) {
        return Err(param(format!(
            "Morrey exponents need 0 < p <= u < inf, got u={u}, p={p}"
        )));
    }
    Ok(())
}

/// Largest integer `k >= 0` with `k^2 + off^2 < rho^2`, ties excluded; `None` if even `k = 0`
/// fails.
fn half_chord(rho: f64, off: i64) -> Option<i64> {
    let lim = rho * rho * (1.0 - 1e-12);
    let o2 = (off * off) as f64;
    if o2 >= lim {
        return None;
    }
    let mut k = (lim - o2).sqrt().floor() as i64;
    while k > 0 && (k * k) as f64 + o2 >= lim {
        k -= 1;
    }
    while ((k + 1) * (k + 1)) as f64 + o2 < lim {
        k += 1;
    }
    Some(k)
}

enum Window {
    /// Half-chords for row offsets `0..=m` of a ball.
    Ball(Vec<i64>),
    /// Cube side in cells.
    Cube(usize),
}

/// A family laid out on a particular grid, reusable across functions.
pub struct MorreyEvaluator {
    grid: Grid,
    family: BallFamily,
    radii: Vec<f64>,
    windows: Vec<Window>,
    measures: Vec<f64>,
    centers: Vec<usize>,
}

impl MorreyEvaluator {
    pub fn new(grid: &Grid, family: &BallFamily) -> Result<Self> {
        family.validate(grid)?;
        let dx = grid.spacing();
        let d = grid.dim() as i32;
        let mut radii = Vec::new();
        let mut windows = Vec::new();
        let mut measures = Vec::new();
        match family.shape {
            Shape::Ball => {
                for r in family.radii() {
                    let rho = r / dx;
                    let Some(m) = half_chord(rho, 0) else { continue };
                    let chords = if d == 1 {
                        vec![m]
                    } else {
                        (0..=m).map(|o| half_chord(rho, o).unwrap_or(-1)).collect()
                    };
                    radii.push(r);
                    windows.push(Window::Ball(chords));
                    measures.push(if d == 1 { 2.0 * r } else { std::f64::consts::PI * r * r });
                }
            }
            Shape::Cube => {
                let mut last = 0usize;
                for r in family.radii() {
                    let m = ((r / dx).round() as usize).clamp(1, grid.n());
                    if m == last {
                        continue;
                    }
                    last = m;
                    let side = m as f64 * dx;
                    radii.push(side);
                    windows.push(Window::Cube(m));
                    measures.push(side.powi(d));
                }
            }
        }
        let axis: Vec<usize> = (0..grid.n()).step_by(family.stride).collect();
        let centers = if d == 1 {
            axis
        } else {
            axis.iter()
                .flat_map(|&i| axis.iter().map(move |&j| grid.ravel([i, j])))
                .collect()
        };
        Ok(Self {
            grid: *grid,
            family: *family,
            radii,
            windows,
            measures,
            centers,
        })
    }

    pub fn family(&self) -> &BallFamily {
        &self.family
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Morrey estimate of a nonnegative field given by its grid samples.
    pub fn eval(&self, magnitudes: &[f64], u: f64, p: f64) -> Result<NormEstimate> {
        check_exponents(u, p)?;
        if magnitudes.len() != self.grid.len() {
            return Err(param("field length does not match the grid"));
        }
        let n = self.grid.n();
        let dv = self.grid.cell_volume();
        let powered: Vec<f64> = magnitudes.iter().map(|m| m.powf(p)).collect();
        let table = match (self.grid.dim(), self.family.shape) {
            (1, _) => prefix_1d(&powered),
            (_, Shape::Ball) => row_prefix(&powered, n),
            (_, Shape::Cube) => summed_area(&powered, n),
        };
        let expo = 1.0 / u - 1.0 / p;
        let per_radius: Vec<f64> = (0..self.radii.len())
            .into_par_iter()
            .map(|k| {
                let best = self
                    .centers
                    .iter()
                    .map(|&c| self.mass(&table, c, &self.windows[k]))
                    .fold(0.0, f64::max);
                self.measures[k].powf(expo) * (best * dv).max(0.0).powf(1.0 / p)
            })
            .collect();
        let value = per_radius.iter().copied().fold(0.0, f64::max);
        let mut partials = Vec::with_capacity(per_radius.len());
        let mut run = 0.0f64;
        for k in (0..per_radius.len()).rev() {
            run = run.max(per_radius[k]);
            partials.push((1.0 / self.radii[k], run));
        }
        Ok(NormEstimate {
            value,
            truncation: Truncation {
                family: Some(self.family),
                ..Default::default()
            },
            partials,
            terms: self.radii.iter().copied().zip(per_radius).collect(),
        })
    }

    fn mass(&self, table: &[f64], center: usize, window: &Window) -> f64 {
        let n = self.grid.n() as i64;
        let [ci, cj] = self.grid.unravel(center);
        let (ci, cj) = (ci as i64, cj as i64);
        match (self.grid.dim(), window) {
            (1, Window::Ball(ch)) => {
                let lo = (ci - ch[0]).max(0) as usize;
                let hi = (ci + ch[0] + 1).min(n) as usize;
                table[hi] - table[lo]
            }
            (1, Window::Cube(m)) => {
                let hi = (ci + *m as i64).min(n) as usize;
                table[hi] - table[ci as usize]
            }
            (_, Window::Ball(ch)) => {
                let stride = (n + 1) as usize;
                let m = ch.len() as i64 - 1;
                let mut s = 0.0;
                for row in (ci - m).max(0)..=(ci + m).min(n - 1) {
                    let w = ch[(row - ci).unsigned_abs() as usize];
                    if w < 0 {
                        continue;
                    }
                    let lo = (cj - w).max(0) as usize;
                    let hi = (cj + w + 1).min(n) as usize;
                    let base = row as usize * stride;
                    s += table[base + hi] - table[base + lo];
                }
                s
            }
            (_, Window::Cube(m)) => {
                let stride = (n + 1) as usize;
                let i1 = (ci + *m as i64).min(n) as usize;
                let j1 = (cj + *m as i64).min(n) as usize;
                let (i0, j0) = (ci as usize, cj as usize);
                table[i1 * stride + j1] - table[i0 * stride + j1] - table[i1 * stride + j0] + table[i0 * stride + j0]
            }
        }
    }
}

fn prefix_1d(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let mut s = 0.0;
    out.push(0.0);
    for x in v {
        s += x;
        out.push(s);
    }
    out
}

fn row_prefix(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * (n + 1)];
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            s += v[i * n + j];
            out[i * (n + 1) + j + 1] = s;
        }
    }
    out
}

fn summed_area(v: &[f64], n: usize) -> Vec<f64> {
    let w = n + 1;
    let mut out = vec![0.0; w * w];
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += v[i * n + j];
            out[(i + 1) * w + j + 1] = out[i * w + j + 1] + row;
        }
    }
    out
}

/// `‖f | M^u_p‖` estimated over `family`.
pub fn morrey_norm(f: &SampledFunction, u: f64, p: f64, family: &BallFamily) -> Result<NormEstimate> {
    check_exponents(u, p)?;
    MorreyEvaluator::new(f.grid(), family)?.eval(&f.abs_values(), u, p)
}

/// Refines the family until the relative increase per step drops below `tol`.
///
/// Fails with [`Error::NotConverged`] when the cap is reached first, or when the maximizing
/// radius sits on the bottom rungs of the ladder with the profile still rising toward smaller
/// radii: refining centers cannot reach below the grid spacing, so such an estimate is pinned
/// by resolution rather than stable.
pub fn refine_until_stable(f: &SampledFunction, u: f64, p: f64, family: &BallFamily, tol: f64) -> Result<NormEstimate> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(param("tolerance must lie in (0, 0.5)"));
    }
    let mut fam = *family;
    let mut est = morrey_norm(f, u, p, &fam)?;
    let mut trajectory = vec![(0.0, est.value)];
    let mut converged = false;
    for step in 1..=MAX_REFINEMENTS {
        let prev = est.value;
        fam = fam.refine();
        est = morrey_norm(f, u, p, &fam)?;
        trajectory.push((step as f64, est.value));
        let rise = if prev > 0.0 {
            (est.value - prev) / prev
        } else if est.value > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if rise < tol {
            converged = true;
            break;
        }
    }
    let pinned = floor_pinned(&est.terms, tol);
    est.partials = trajectory;
    if !converged {
        return Err(Error::NotConverged {
            reason: format!("relative increase still above {tol} after {MAX_REFINEMENTS} refinements"),
            last: Box::new(est),
        });
    }
    if pinned {
        return Err(Error::NotConverged {
            reason: "supremum attained at the smallest resolvable radius".into(),
            last: Box::new(est),
        });
    }
    Ok(est)
}

fn floor_pinned(terms: &[(f64, f64)], tol: f64) -> bool {
    if terms.len() < 5 {
        return false;
    }
    let top = terms
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    top <= 1 && terms[top].1 > terms[4].1 * (1.0 + tol)
}
