//! Smooth profiles with vanishing moments, atom families on a grid, their validation, and the
//! atomic synthesis check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bands::{besov_morrey_norm, DyadicPartition};
use crate::error::{param, Result};
use crate::grid::{Grid, Point, SampledFunction};
use crate::morrey::BallFamily;
use crate::zoo::bumps::bump_profile;
use crate::zoo::sequence::{sequence_norm, CoefficientSequence};

/// Multi-indices `beta` with `|beta| <= order`, graded then lexicographic.
pub fn multi_indices(d: usize, order: i32) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    if order < 0 {
        return out;
    }
    for total in 0..=order as usize {
        if d == 1 {
            out.push([total, 0]);
        } else {
            for a in (0..=total).rev() {
                out.push([a, total - a]);
            }
        }
    }
    out
}

fn monomial(z: &Point, beta: &[usize; 2], d: usize) -> f64 {
    let mut v = z[0].powi(beta[0] as i32);
    if d == 2 {
        v *= z[1].powi(beta[1] as i32);
    }
    v
}

/// Gaussian elimination with partial pivoting; `a` is row-major `m x m`.
fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i * m + col].abs().total_cmp(&a[j * m + col].abs()))
            .unwrap();
        if a[piv * m + col].abs() < 1e-300 {
            return Err(param("singular moment system"));
        }
        if piv != col {
            for c in 0..m {
                a.swap(piv * m + c, col * m + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..m {
            let f = a[r * m + col] / a[col * m + col];
            for c in col..m {
                a[r * m + c] -= f * a[col * m + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let mut s = b[r];
        for c in r + 1..m {
            s -= a[r * m + c] * x[c];
        }
        x[r] = s / a[r * m + r];
    }
    Ok(x)
}

/// Correction coefficients `c` making `b (z_1^(L+1) - sum c_beta z^beta)` orthogonal to all
/// monomials of degree `<= L` under the weights `w` at the points `z`.
fn moment_coefficients(points: &[(Point, f64)], d: usize, l: i32) -> Result<Vec<([usize; 2], f64)>> {
    let idx = multi_indices(d, l);
    if idx.is_empty() {
        return Ok(Vec::new());
    }
    let m = idx.len();
    let lead = [l as usize + 1, 0];
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for (z, w) in points {
        let mons: Vec<f64> = idx.iter().map(|b| monomial(z, b, d)).collect();
        let top = monomial(z, &lead, d);
        for r in 0..m {
            rhs[r] += w * mons[r] * top;
            for c in 0..m {
                gram[r * m + c] += w * mons[r] * mons[c];
            }
        }
    }
    let c = solve(gram, rhs)?;
    Ok(idx.into_iter().zip(c).collect())
}

/// Tensor bump of half-width `w` centered at `(1/2, ..., 1/2)` times a polynomial that enforces
/// vanishing moments up to order `l` (`l = -1`: the plain bump).  Supported in the cube
/// `[1/2 - w, 1/2 + w]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub dim: usize,
    pub half_width: f64,
    pub moments: i32,
    coeffs: Vec<([usize; 2], f64)>,
}

/// Quadrature points per axis for the continuous moment system.
const PROFILE_QUAD: usize = 400;

impl MomentProfile {
    pub fn new(dim: usize, half_width: f64, moments: i32) -> Result<Self> {
        if !(half_width > 0.0 && half_width < 0.5) {
            return Err(param("profile half-width must lie in (0, 1/2)"));
        }
        if moments < -1 {
            return Err(param("moment order must be at least -1"));
        }
        let m = PROFILE_QUAD;
        let z1: Vec<f64> = (0..m)
            .map(|i| ((i as f64 + 0.5) / m as f64 * 2.0 - 1.0) * half_width)
            .collect();
        let mut pts = Vec::new();
        for &a in &z1 {
            if dim == 1 {
                pts.push(([a, 0.0], bump_profile(a / half_width)));
            } else {
                for &b in &z1 {
                    pts.push(([a, b], bump_profile(a / half_width) * bump_profile(b / half_width)));
                }
            }
        }
        let coeffs = moment_coefficients(&pts, dim, moments)?;
        Ok(Self {
            dim,
            half_width,
            moments,
            coeffs,
        })
    }

    fn envelope(&self, z: &Point) -> f64 {
        let mut b = bump_profile(z[0] / self.half_width);
        if self.dim == 2 {
            b *= bump_profile(z[1] / self.half_width);
        }
        b
    }

    fn polynomial(&self, z: &Point) -> f64 {
        if self.moments < 0 {
            return 1.0;
        }
        let lead = monomial(z, &[self.moments as usize + 1, 0], self.dim);
        lead - self
            .coeffs
            .iter()
            .map(|(b, c)| c * monomial(z, b, self.dim))
            .sum::<f64>()
    }

    /// Profile value at `y` (unit-cube coordinates).
    pub fn eval(&self, y: &Point) -> f64 {
        let z = [y[0] - 0.5, if self.dim == 2 { y[1] - 0.5 } else { 0.0 }];
        let b = self.envelope(&z);
        if b == 0.0 {
            0.0
        } else {
            b * self.polynomial(&z)
        }
    }

    /// Smallest origin-centered radius containing the support.
    pub fn support_reach(&self) -> f64 {
        (0.5 + self.half_width) * (self.dim as f64).sqrt()
    }

    /// `D^alpha` of the profile by central differences with step `step`.
    pub fn derivative(&self, y: &Point, alpha: &[usize; 2], step: f64) -> f64 {
        central_derivative(&|p: &Point| self.eval(p), y, alpha, step)
    }

    /// Samples `|D^alpha phi|` for `|alpha| <= order` on a uniform lattice of the support cube
    /// and returns the lattice points with the per-point minimum and maximum over `alpha`.
    pub fn derivative_scan(&self, order: usize, per_axis: usize) -> Vec<(Point, f64, f64)> {
        let lo = 0.5 - self.half_width;
        let w = 2.0 * self.half_width;
        let step = w / per_axis as f64 / 4.0;
        let idx = multi_indices(self.dim, order as i32);
        let coords: Vec<f64> = (0..per_axis)
            .map(|i| lo + (i as f64 + 0.5) / per_axis as f64 * w)
            .collect();
        let mut out = Vec::new();
        let mut push = |y: Point| {
            let vals: Vec<f64> = idx.iter().map(|a| self.derivative(&y, a, step).abs()).collect();
            let mn = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let mx = vals.iter().copied().fold(0.0, f64::max);
            out.push((y, mn, mx));
        };
        for &a in &coords {
            if self.dim == 1 {
                push([a, 0.0]);
            } else {
                for &b in &coords {
                    push([a, b]);
                }
            }
        }
        out
    }

    /// `max_{|alpha| <= order} ‖D^alpha phi‖_inf` over a fine lattice.
    pub fn derivative_bound(&self, order: usize) -> f64 {
        let per_axis = if self.dim == 1 { 4000 } else { 200 };
        self.derivative_scan(order, per_axis)
            .iter()
            .map(|x| x.2)
            .fold(0.0, f64::max)
    }
}

pub(crate) fn central_derivative<F: Fn(&Point) -> f64>(f: &F, y: &Point, alpha: &[usize; 2], h: f64) -> f64 {
    if alpha[0] > 0 {
        let mut a = *alpha;
        a[0] -= 1;
        let plus = central_derivative(f, &[y[0] + h, y[1]], &a, h);
        let minus = central_derivative(f, &[y[0] - h, y[1]], &a, h);
        return (plus - minus) / (2.0 * h);
    }
    if alpha[1] > 0 {
        let a = [0, alpha[1] - 1];
        let plus = central_derivative(f, &[y[0], y[1] + h], &a, h);
        let minus = central_derivative(f, &[y[0], y[1] - h], &a, h);
        return (plus - minus) / (2.0 * h);
    }
    f(y)
}

/// Lower cube corner `2^-j k` and side `2^-j`.
pub fn dyadic_cube(j: u32, k: [i64; 2]) -> ([f64; 2], f64) {
    let side = (-(j as f64)).exp2();
    ([k[0] as f64 * side, k[1] as f64 * side], side)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub level: u32,
    pub index: [i64; 2],
    pub samples: SampledFunction,
}

/// A family of sampled atoms with the constants they claim to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFamily {
    pub c1: f64,
    pub c2: f64,
    pub smoothness: usize,
    pub moments: i32,
    pub atoms: Vec<Atom>,
}

impl AtomFamily {
    /// Atoms `psi(2^j x - k)` built from a [`MomentProfile`] of half-width `half_width`; the
    /// moment correction is recomputed on the grid so the discrete moments vanish.  `c2` is the
    /// profile's derivative bound up to order `smoothness`.
    pub fn bump_atoms(
        grid: &Grid,
        entries: &[(u32, [i64; 2])],
        half_width: f64,
        smoothness: usize,
        moments: i32,
    ) -> Result<Self> {
        let d = grid.dim();
        let profile = MomentProfile::new(d, half_width, moments)?;
        let c2 = profile.derivative_bound(smoothness);
        let mut atoms = Vec::new();
        for &(j, k) in entries {
            let (corner, side) = dyadic_cube(j, k);
            let scale = (j as f64).exp2();
            let local = |x: &Point| -> Point {
                [
                    x[0] * scale - k[0] as f64,
                    if d == 2 { x[1] * scale - k[1] as f64 } else { 0.0 },
                ]
            };
            let mut pts = Vec::new();
            for i in 0..grid.len() {
                let x = grid.point(i);
                let y = local(&x);
                let z = [y[0] - 0.5, if d == 2 { y[1] - 0.5 } else { 0.0 }];
                let b = profile.envelope(&z);
                if b > 0.0 {
                    pts.push((i, z, b));
                }
            }
            if pts.is_empty() {
                return Err(param(format!("atom ({j}, {k:?}) is not resolved by the grid")));
            }
            let weighted: Vec<(Point, f64)> = pts.iter().map(|(_, z, b)| (*z, *b)).collect();
            let coeffs = moment_coefficients(&weighted, d, moments)?;
            let lead = [(moments + 1).max(0) as usize, 0];
            let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
            for (i, z, b) in &pts {
                let poly = if moments < 0 {
                    1.0
                } else {
                    monomial(z, &lead, d) - coeffs.iter().map(|(be, c)| c * monomial(z, be, d)).sum::<f64>()
                };
                values[*i] = Complex64::new(b * poly, 0.0);
            }
            let far = [corner[0] + side, corner[1] + side];
            let reach = if d == 1 {
                corner[0].abs().max(far[0].abs())
            } else {
                [corner[0], far[0]]
                    .iter()
                    .flat_map(|a| [corner[1], far[1]].map(|b| a.hypot(b)))
                    .fold(0.0, f64::max)
            };
            let samples = SampledFunction::new(*grid, values, reach)?;
            atoms.push(Atom {
                level: j,
                index: if d == 1 { [k[0], 0] } else { k },
                samples,
            });
        }
        Ok(Self {
            c1: 1.5,
            c2,
            smoothness,
            moments,
            atoms,
        })
    }

    pub fn find(&self, level: u32, index: [i64; 2]) -> Option<&Atom> {
        self.atoms.iter().find(|a| a.level == level && a.index == index)
    }

    /// `sum lambda_{j,k} a_{j,k}`; every coefficient needs a matching atom.
    pub fn synthesize(&self, lambda: &CoefficientSequence) -> Result<SampledFunction> {
        let first = self.atoms.first().ok_or_else(|| param("empty atom family"))?;
        let grid = *first.samples.grid();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut reach = 0.0f64;
        for (j, k, v) in lambda.iter() {
            let atom = self
                .find(j, k)
                .ok_or_else(|| param(format!("no atom for coefficient ({j}, {k:?})")))?;
            for (o, a) in values.iter_mut().zip(atom.samples.values()) {
                *o += a * v;
            }
            reach = reach.max(atom.samples.support_radius());
        }
        SampledFunction::new(grid, values, reach)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomCheck {
    pub level: u32,
    pub index: [i64; 2],
    pub support_ok: bool,
    /// Largest `‖D^alpha a‖_inf / (C2 2^(j|alpha|))` over `|alpha| <= K`.
    pub derivative_ratio: f64,
    pub derivative_ok: bool,
    /// Largest `|int x^beta a| / int |x^beta a|` over `|beta| <= L`.
    pub moment_residual: f64,
    pub moments_ok: bool,
}

impl AtomCheck {
    pub fn passed(&self) -> bool {
        self.support_ok && self.derivative_ok && self.moments_ok
    }
}

pub const DERIVATIVE_SLACK: f64 = 0.10;
pub const MOMENT_TOL: f64 = 1e-6;

/// Grid derivative `D^alpha` by iterated central differences, at interior points.
fn grid_derivative_max(f: &SampledFunction, alpha: &[usize; 2]) -> f64 {
    let g = f.grid();
    let n = g.n();
    let h = g.spacing();
    let mut cur: Vec<f64> = f.values().iter().map(|v| v.re).collect();
    let mut cur_im: Vec<f64> = f.values().iter().map(|v| v.im).collect();
    for axis in 0..2 {
        for _ in 0..alpha[axis] {
            let step = |v: &Vec<f64>| -> Vec<f64> {
                let mut out = vec![0.0; v.len()];
                for (idx, o) in out.iter_mut().enumerate() {
                    let ij = g.unravel(idx);
                    if ij[axis] == 0 || ij[axis] + 1 >= n {
                        continue;
                    }
                    let mut a = ij;
                    let mut b = ij;
                    a[axis] += 1;
                    b[axis] -= 1;
                    *o = (v[g.ravel(a)] - v[g.ravel(b)]) / (2.0 * h);
                }
                out
            };
            cur = step(&cur);
            cur_im = step(&cur_im);
        }
    }
    cur.iter().zip(&cur_im).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
}

/// Checks support in `C1 Q_{j,k}`, derivative bounds up to `K` (10% slack for grid estimates)
/// and vanishing moments up to `L` (relative tolerance `1e-6`).
pub fn validate_atoms(family: &AtomFamily) -> Vec<AtomCheck> {
    family
        .atoms
        .iter()
        .map(|atom| {
            let f = &atom.samples;
            let g = f.grid();
            let d = g.dim();
            let (corner, side) = dyadic_cube(atom.level, atom.index);
            let half = family.c1 * side / 2.0;
            let center = [corner[0] + side / 2.0, corner[1] + side / 2.0];
            let support_ok = f.values().iter().enumerate().all(|(i, v)| {
                if v.norm() == 0.0 {
                    return true;
                }
                let x = g.point(i);
                (0..d).all(|a| (x[a] - center[a]).abs() <= half)
            });
            let scale = (atom.level as f64).exp2();
            let derivative_ratio = multi_indices(d, family.smoothness as i32)
                .iter()
                .map(|a| {
                    let bound = family.c2 * scale.powi((a[0] + a[1]) as i32);
                    grid_derivative_max(f, a) / bound
                })
                .fold(0.0, f64::max);
            let dv = g.cell_volume();
            let moment_residual = multi_indices(d, family.moments)
                .iter()
                .map(|b| {
                    let mut signed = Complex64::new(0.0, 0.0);
                    let mut total = 0.0;
                    for (i, v) in f.values().iter().enumerate() {
                        let m = monomial(&g.point(i), b, d);
                        signed += v * m * dv;
                        total += (v * m).norm() * dv;
                    }
                    if total > 0.0 {
                        signed.norm() / total
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max);
            AtomCheck {
                level: atom.level,
                index: atom.index,
                support_ok,
                derivative_ratio,
                derivative_ok: derivative_ratio <= 1.0 + DERIVATIVE_SLACK,
                moment_residual,
                moments_ok: moment_residual <= MOMENT_TOL,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    /// Besov-Morrey norm of the synthesized function.
    pub left: f64,
    /// Sequence-space norm of the coefficients.
    pub right: f64,
    pub ratio: f64,
    pub refined_left: f64,
    pub refined_right: f64,
    pub refined_ratio: f64,
    /// Relative change of the ratio under one family refinement.
    pub ratio_change: f64,
    pub finite: bool,
}

/// Compares `‖sum lambda a | N^s_{u,p,q}‖` with `‖lambda | n^s_{u,p,q}‖` on the given family and
/// on its refinement.
#[allow(clippy::too_many_arguments)]
pub fn atomic_synthesis_check(
    family: &AtomFamily,
    lambda: &CoefficientSequence,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    partition: &DyadicPartition,
    balls: &BallFamily,
) -> Result<SynthesisReport> {
    let d = partition.grid().dim() as f64;
    let sigma_p = d * (1.0 / p - 1.0).max(0.0);
    if (family.smoothness as f64) < (s + 1.0).max(0.0) {
        return Err(param(format!(
            "smoothness K = {} below max(0, s + 1)",
            family.smoothness
        )));
    }
    if (family.moments as f64) < (sigma_p - s).max(-1.0) {
        return Err(param(format!(
            "moment order L = {} below max(-1, sigma_p - s)",
            family.moments
        )));
    }
    let f = if lambda.is_empty() {
        SampledFunction::zeros(*partition.grid())
    } else {
        family.synthesize(lambda)?
    };
    let eval = |fam: &BallFamily| -> Result<(f64, f64)> {
        let left = besov_morrey_norm(&f, partition, s, u, p, q, fam)?.value;
        let right = sequence_norm(lambda, s, u, p, q, fam)?.value;
        Ok((left, right))
    };
    let (left, right) = eval(balls)?;
    let (refined_left, refined_right) = eval(&balls.refine())?;
    let ratio_of = |l: f64, r: f64| {
        if r > 0.0 {
            l / r
        } else if l == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let ratio = ratio_of(left, right);
    let refined_ratio = ratio_of(refined_left, refined_right);
    let ratio_change = if ratio > 0.0 {
        (refined_ratio - ratio).abs() / ratio
    } else {
        0.0
    };
    Ok(SynthesisReport {
        left,
        right,
        ratio,
        refined_left,
        refined_right,
        refined_ratio,
        ratio_change,
        finite: ratio.is_finite() && refined_ratio.is_finite(),
    })
}
