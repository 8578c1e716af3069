//! Higher-order differences and the difference quasi-norms: the ball-average norm with
//! parameters `(v, a)`, the dyadic club/spade variants, and the modulus-of-smoothness norm.
//!
//! The `t`-integrals are discretized on the ladder `t_m = 2^(m * log2_ratio)` with weight
//! `log2_ratio * ln 2` per level.  The `h`-quadrature uses every grid offset in `B(0, t)` while
//! there are at most `h_cap` of them; beyond that the offsets, sorted by length, are grouped
//! into strata of growing size and one seeded representative per stratum carries the stratum's
//! measure.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::{norm, shift_values, Grid, Point, SampledFunction};
use crate::morrey::{check_exponents, BallFamily, MorreyEvaluator, NormEstimate, Truncation};

pub const DEFAULT_H_CAP: usize = 4096;
pub const DEFAULT_SEED: u64 = 0x5e_ed0f_d1ff;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffParams {
    pub order: usize,
    pub v: f64,
    pub a: f64,
    /// Ladder spacing in octaves; 1 gives dyadic levels.
    pub log2_ratio: f64,
    /// Smallest requested level; levels below `2 dx` are flagged and dropped.
    pub t_min: Option<f64>,
    /// Largest requested level, on top of the cap `a` and the box constraint.
    pub t_max: Option<f64>,
    pub h_cap: usize,
    pub seed: u64,
}

impl DiffParams {
    pub fn new(order: usize, v: f64, a: f64) -> Self {
        Self {
            order,
            v,
            a,
            log2_ratio: 1.0,
            t_min: None,
            t_max: None,
            h_cap: DEFAULT_H_CAP,
            seed: DEFAULT_SEED,
        }
    }

    /// Halves the ladder spacing; the refined ladder contains the old one.
    pub fn refine(&self) -> Self {
        Self {
            log2_ratio: self.log2_ratio / 2.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(param("difference order must be at least 1"));
        }
        if !(self.v > 0.0) {
            return Err(param("v must be positive"));
        }
        if !(self.a >= 1.0) {
            return Err(param("a must be at least 1"));
        }
        if !(self.log2_ratio > 0.0 && self.log2_ratio <= 1.0) {
            return Err(param("ladder ratio must lie in (1, 2]"));
        }
        if self.h_cap == 0 {
            return Err(param("h_cap must be positive"));
        }
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `out[x] = sum_k (-1)^(N-k) C(N,k) f[x + k h]`, zero extension outside the grid.
fn difference_into(grid: &Grid, vals: &[Complex64], steps: [i64; 2], order: usize, out: &mut [Complex64]) {
    let n = grid.n() as i64;
    out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    for k in 0..=order {
        let c = binomial(order, k) * if (order - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        let (s0, s1) = (steps[0] * k as i64, steps[1] * k as i64);
        let lo0 = (-s0).clamp(0, n);
        let hi0 = (n - s0).clamp(0, n);
        if grid.dim() == 1 {
            for i in lo0..hi0 {
                out[i as usize] += vals[(i + s0) as usize] * c;
            }
        } else {
            let lo1 = (-s1).clamp(0, n);
            let hi1 = (n - s1).clamp(0, n);
            for i in lo0..hi0 {
                let src = (i + s0) * n + s1;
                let dst = i * n;
                for j in lo1..hi1 {
                    out[(dst + j) as usize] += vals[(src + j) as usize] * c;
                }
            }
        }
    }
}

fn check_reach(f: &SampledFunction, reach: f64) -> Result<()> {
    let bound = f.grid().half_width();
    let need = f.support_radius() + reach;
    if need > bound * (1.0 + 1e-12) {
        return Err(Error::Support { support: need, bound });
    }
    Ok(())
}

/// `Delta^N_h f` by the binomial formula.
pub fn finite_difference(f: &SampledFunction, h: &Point, order: usize) -> Result<SampledFunction> {
    if order == 0 {
        return Err(param("difference order must be at least 1"));
    }
    let g = *f.grid();
    let steps = g.offset_steps(h)?;
    let reach = order as f64 * norm(h, g.dim());
    check_reach(f, reach)?;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    difference_into(&g, f.values(), steps, order, &mut out);
    SampledFunction::with_support(g, out, f.support_radius() + reach)
}

/// `Delta^N_h f` as the `N`-fold composition of first differences.
pub fn recursive_difference(f: &SampledFunction, h: &Point, order: usize) -> Result<SampledFunction> {
    if order == 0 {
        return Err(param("difference order must be at least 1"));
    }
    let g = *f.grid();
    let steps = g.offset_steps(h)?;
    let step = norm(h, g.dim());
    check_reach(f, order as f64 * step)?;
    let mut cur = f.values().to_vec();
    for _ in 0..order {
        let shifted = shift_values(&g, &cur, steps);
        cur = shifted.iter().zip(&cur).map(|(a, b)| a - b).collect();
    }
    SampledFunction::with_support(g, cur, f.support_radius() + order as f64 * step)
}

/// Grid offsets inside `B(0, radius)` (closed if `closed`), sorted by length.
struct Offsets {
    steps: Vec<[i64; 2]>,
    lengths: Vec<f64>,
}

impl Offsets {
    fn new(grid: &Grid, radius: f64, closed: bool) -> Self {
        let dx = grid.spacing();
        let m = (radius / dx).floor() as i64 + 1;
        let inside = |len: f64| {
            if closed {
                len <= radius * (1.0 + 1e-12)
            } else {
                len < radius * (1.0 - 1e-12)
            }
        };
        let mut all: Vec<([i64; 2], f64)> = Vec::new();
        let range2 = if grid.dim() == 1 { 0..=0 } else { -m..=m };
        for i in -m..=m {
            for j in range2.clone() {
                let len = dx * ((i * i + j * j) as f64).sqrt();
                if inside(len) {
                    all.push(([i, j], len));
                }
            }
        }
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        Self {
            steps: all.iter().map(|a| a.0).collect(),
            lengths: all.iter().map(|a| a.1).collect(),
        }
    }

    fn count_within(&self, t: f64, closed: bool) -> usize {
        if closed {
            self.lengths.partition_point(|&l| l <= t * (1.0 + 1e-12))
        } else {
            self.lengths.partition_point(|&l| l < t * (1.0 - 1e-12))
        }
    }
}

/// Strata of the sorted offset list: singletons for the first `cap`, then blocks doubling in
/// size every time the position doubles.
struct Strata {
    /// (begin, end, seeded representative)
    chunks: Vec<(usize, usize, usize)>,
}

impl Strata {
    fn new(total: usize, cap: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chunks = Vec::new();
        let mut b = 0usize;
        while b < total {
            let size = if b < cap { 1 } else { 2usize << ((b / cap).ilog2()) };
            let e = (b + size).min(total);
            let rep = if e - b == 1 { b } else { b + rng.gen_range(0..e - b) };
            chunks.push((b, e, rep));
            b = e;
        }
        Self { chunks }
    }

    /// Full strata inside a prefix of length `len`, and the clipped boundary stratum as
    /// (representative, member count).
    fn split(&self, len: usize) -> (usize, Option<(usize, usize)>) {
        let full = self.chunks.partition_point(|c| c.1 <= len);
        let partial = self
            .chunks
            .get(full)
            .and_then(|&(b, _, rep)| (b < len).then(|| (b + (rep - b) % (len - b), len - b)));
        (full, partial)
    }
}

/// Levels `t_m = 2^(m * log2_ratio)` admissible for `f`, ascending, plus the requested levels
/// that fall below `2 dx`.
pub fn ladder(f: &SampledFunction, params: &DiffParams) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    let g = f.grid();
    let floor = 2.0 * g.spacing();
    let mut top = (g.half_width() - f.support_radius()) / params.order as f64;
    top = top.min(params.a);
    if let Some(t) = params.t_max {
        top = top.min(t);
    }
    let requested = params.t_min.unwrap_or(floor);
    let lr = params.log2_ratio;
    let m_hi = (top.log2() / lr + 1e-9).floor() as i64;
    let m_lo = (requested.log2() / lr - 1e-9).ceil() as i64;
    let mut levels = Vec::new();
    let mut excluded = Vec::new();
    for m in m_lo..=m_hi {
        let t = (m as f64 * lr).exp2();
        if t < floor * (1.0 - 1e-12) {
            excluded.push(t);
        } else {
            levels.push(t);
        }
    }
    if levels.is_empty() {
        return Err(Error::Unresolved(top));
    }
    Ok((levels, excluded))
}

fn accumulate(acc: &mut [f64], diff: &[Complex64], v: f64, w: f64) {
    if v.is_infinite() {
        for (a, d) in acc.iter_mut().zip(diff) {
            *a = a.max(d.norm());
        }
    } else if v == 2.0 {
        for (a, d) in acc.iter_mut().zip(diff) {
            *a += d.norm_sqr() * w;
        }
    } else if v == 1.0 {
        for (a, d) in acc.iter_mut().zip(diff) {
            *a += d.norm() * w;
        }
    } else {
        for (a, d) in acc.iter_mut().zip(diff) {
            *a += d.norm().powf(v) * w;
        }
    }
}

fn finish(acc: &[f64], v: f64) -> Vec<f64> {
    if v.is_infinite() || v == 1.0 {
        acc.to_vec()
    } else {
        acc.iter().map(|a| a.powf(1.0 / v)).collect()
    }
}

/// Ball averages `(int_{B(0,t)} |Delta^N_h f(x)|^v dh)^(1/v)` at every level, fed to `sink`.
fn ball_averages<F>(f: &SampledFunction, levels: &[f64], params: &DiffParams, mut sink: F) -> Result<()>
where
    F: FnMut(usize, &[f64]) -> Result<()>,
{
    let g = *f.grid();
    let top = *levels.last().unwrap();
    check_reach(f, params.order as f64 * top)?;
    let offs = Offsets::new(&g, top, false);
    let strata = Strata::new(offs.steps.len(), params.h_cap, params.seed);
    let dv = g.cell_volume();
    let v = params.v;
    let mut acc = vec![0.0; g.len()];
    let mut diff = vec![Complex64::new(0.0, 0.0); g.len()];
    let mut done = 0usize;
    for (li, &t) in levels.iter().enumerate() {
        let len = offs.count_within(t, false);
        let (full, partial) = strata.split(len);
        for &(b, e, rep) in &strata.chunks[done..full] {
            difference_into(&g, f.values(), offs.steps[rep], params.order, &mut diff);
            accumulate(&mut acc, &diff, v, (e - b) as f64 * dv);
        }
        done = done.max(full);
        let field = match partial {
            Some((rep, count)) => {
                let mut tmp = acc.clone();
                difference_into(&g, f.values(), offs.steps[rep], params.order, &mut diff);
                accumulate(&mut tmp, &diff, v, count as f64 * dv);
                finish(&tmp, v)
            }
            None => finish(&acc, v),
        };
        sink(li, &field)?;
    }
    Ok(())
}

/// The ball average of `|Delta^N_h f|^v` over `h in B(0, t)` at every grid point.
pub fn ball_avg_difference(f: &SampledFunction, t: f64, params: &DiffParams) -> Result<SampledFunction> {
    params.validate()?;
    let g = *f.grid();
    if t < 2.0 * g.spacing() * (1.0 - 1e-12) {
        return Err(Error::Unresolved(t));
    }
    let mut out = Vec::new();
    ball_averages(f, &[t], params, |_, field| {
        out = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Ok(())
    })?;
    let support = f.support_radius() + params.order as f64 * t;
    SampledFunction::with_support(g, out, support)
}

/// One ladder level of a difference norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub t: f64,
    pub weight: f64,
    /// Morrey norm of the inner quantity at this level.
    pub inner: f64,
    /// `inner` times the level's power of `t`.
    pub scaled: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    /// `first + (sum w scaled^q)^(1/q)`
    Sum,
    /// `(first^q + sum w scaled^q)^(1/q)`
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffEstimate {
    pub estimate: NormEstimate,
    pub first_term: f64,
    pub q: f64,
    pub combine: Combine,
    pub levels: Vec<Level>,
    pub excluded_levels: Vec<f64>,
}

impl DiffEstimate {
    fn assemble(
        first_term: f64,
        q: f64,
        combine: Combine,
        levels: Vec<Level>,
        excluded: Vec<f64>,
        family: BallFamily,
    ) -> Self {
        let mut partials = Vec::with_capacity(levels.len());
        let mut est = Self {
            estimate: NormEstimate::default(),
            first_term,
            q,
            combine,
            levels,
            excluded_levels: excluded,
        };
        for l in &est.levels {
            partials.push((l.t, est.partial(|t| t <= l.t)));
        }
        let value = est.partial(|_| true);
        let range = (
            est.levels.first().map(|l| l.t).unwrap_or(0.0),
            est.levels.last().map(|l| l.t).unwrap_or(0.0),
        );
        est.estimate = NormEstimate {
            value,
            truncation: Truncation {
                family: Some(family),
                t_range: Some(range),
                ..Default::default()
            },
            partials,
            terms: est.levels.iter().map(|l| (l.t, l.scaled)).collect(),
        };
        est
    }

    /// The norm with the level sum restricted to levels `t` satisfying `keep`.
    pub fn partial<P: Fn(f64) -> bool>(&self, keep: P) -> f64 {
        let sel = self.levels.iter().filter(|l| keep(l.t));
        let q = self.q;
        if q.is_infinite() {
            let m = sel.map(|l| l.scaled).fold(0.0, f64::max);
            match self.combine {
                Combine::Sum => self.first_term + m,
                Combine::Joint => self.first_term.max(m),
            }
        } else {
            let s: f64 = sel.map(|l| l.weight * l.scaled.powf(q)).sum();
            match self.combine {
                Combine::Sum => self.first_term + s.powf(1.0 / q),
                Combine::Joint => (self.first_term.powf(q) + s).powf(1.0 / q),
            }
        }
    }

    /// The level sum alone (no first term) over levels with `t` in `[lo, hi]`, raised to `q`.
    pub fn level_sum(&self, lo: f64, hi: f64) -> f64 {
        let sel = self.levels.iter().filter(|l| l.t >= lo && l.t <= hi);
        if self.q.is_infinite() {
            sel.map(|l| l.scaled).fold(0.0, f64::max)
        } else {
            sel.map(|l| l.weight * l.scaled.powf(self.q)).sum()
        }
    }

    pub fn value(&self) -> f64 {
        self.estimate.value
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0) {
        return Err(param("q must be positive"));
    }
    Ok(())
}

fn inv(v: f64) -> f64 {
    if v.is_infinite() {
        0.0
    } else {
        1.0 / v
    }
}

/// Ball-average difference norm with parameters `(v, a)`:
/// `‖f|M^u_p‖ + (int_0^a t^(-sq - dq/v) ‖ball average‖^q dt/t)^(1/q)`.
#[allow(clippy::too_many_arguments)]
pub fn diff_norm_va(
    f: &SampledFunction,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    params: &DiffParams,
    family: &BallFamily,
) -> Result<DiffEstimate> {
    check_exponents(u, p)?;
    check_q(q)?;
    let (levels, excluded) = ladder(f, params)?;
    let eval = MorreyEvaluator::new(f.grid(), family)?;
    let first = eval.eval(&f.abs_values(), u, p)?.value;
    let d = f.grid().dim() as f64;
    let w = params.log2_ratio * std::f64::consts::LN_2;
    let mut out = Vec::with_capacity(levels.len());
    ball_averages(f, &levels, params, |li, field| {
        let t = levels[li];
        let inner = eval.eval(field, u, p)?.value;
        out.push(Level {
            t,
            weight: w,
            inner,
            scaled: t.powf(-s - d * inv(params.v)) * inner,
        });
        Ok(())
    })?;
    Ok(DiffEstimate::assemble(first, q, Combine::Sum, out, excluded, *family))
}

/// `x -> (int_{B(x,r)} |f|^v)^(1/v)` on the grid (max modulus for `v = inf`).
pub fn local_average(f: &SampledFunction, r: f64, v: f64) -> Result<Vec<f64>> {
    let g = *f.grid();
    check_reach(f, r)?;
    let offs = Offsets::new(&g, r, false);
    let mags = f.abs_values();
    let pw: Vec<f64> = if v.is_infinite() {
        mags.clone()
    } else {
        mags.iter().map(|m| m.powf(v)).collect()
    };
    let n = g.n() as i64;
    let dv = g.cell_volume();
    let mut acc = vec![0.0f64; g.len()];
    for st in &offs.steps {
        for (idx, a) in acc.iter_mut().enumerate() {
            let ij = g.unravel(idx);
            let i = ij[0] as i64 + st[0];
            let j = ij[1] as i64 + st[1];
            if i < 0 || i >= n || (g.dim() == 2 && (j < 0 || j >= n)) {
                continue;
            }
            let val = pw[g.ravel([i as usize, j as usize])];
            if v.is_infinite() {
                *a = a.max(val);
            } else {
                *a += val * dv;
            }
        }
    }
    Ok(if v.is_infinite() {
        acc
    } else {
        acc.iter().map(|a| a.powf(1.0 / v)).collect()
    })
}

#[allow(clippy::too_many_arguments)]
fn dyadic_norm(
    f: &SampledFunction,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    params: &DiffParams,
    family: &BallFamily,
    local_first: bool,
) -> Result<DiffEstimate> {
    check_exponents(u, p)?;
    check_q(q)?;
    let dyadic = DiffParams {
        log2_ratio: 1.0,
        a: 1.0,
        t_max: Some(0.5),
        ..*params
    };
    let (levels, excluded) = ladder(f, &dyadic)?;
    let eval = MorreyEvaluator::new(f.grid(), family)?;
    let first = if local_first {
        eval.eval(&local_average(f, 1.0, params.v)?, u, p)?.value
    } else {
        eval.eval(&f.abs_values(), u, p)?.value
    };
    let d = f.grid().dim() as f64;
    let mut out = Vec::with_capacity(levels.len());
    ball_averages(f, &levels, &dyadic, |li, field| {
        let t = levels[li];
        let inner = eval.eval(field, u, p)?.value;
        out.push(Level {
            t,
            weight: 1.0,
            inner,
            scaled: t.powf(-s - d * inv(params.v)) * inner,
        });
        Ok(())
    })?;
    Ok(DiffEstimate::assemble(first, q, Combine::Joint, out, excluded, *family))
}

/// Club norm: local `L_v` average over `B(x,1)` as first term plus the dyadic sum over
/// `t = 2^-j`, `j >= 1`.
pub fn diff_norm_club(
    f: &SampledFunction,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    params: &DiffParams,
    family: &BallFamily,
) -> Result<DiffEstimate> {
    dyadic_norm(f, s, u, p, q, params, family, true)
}

/// Spade norm: as the club norm with `‖f|M^u_p‖` as the first term.
pub fn diff_norm_spade(
    f: &SampledFunction,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    params: &DiffParams,
    family: &BallFamily,
) -> Result<DiffEstimate> {
    dyadic_norm(f, s, u, p, q, params, family, false)
}

/// Modulus-of-smoothness norm:
/// `‖f|M^u_p‖ + (int_0^inf t^(-sq) [sup_{|h|<=t} ‖Delta^N_h f|M^u_p‖]^q dt/t)^(1/q)`.
pub fn modulus_norm(
    f: &SampledFunction,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    params: &DiffParams,
    family: &BallFamily,
) -> Result<DiffEstimate> {
    check_exponents(u, p)?;
    check_q(q)?;
    let (levels, excluded) = ladder(f, params)?;
    let g = *f.grid();
    let top = *levels.last().unwrap();
    check_reach(f, params.order as f64 * top)?;
    let eval = MorreyEvaluator::new(&g, family)?;
    let first = eval.eval(&f.abs_values(), u, p)?.value;
    let offs = Offsets::new(&g, top, true);
    let strata = Strata::new(offs.steps.len(), params.h_cap, params.seed);
    let mut diff = vec![Complex64::new(0.0, 0.0); g.len()];
    let morrey_at = |rep: usize, diff: &mut Vec<Complex64>| -> Result<f64> {
        difference_into(&g, f.values(), offs.steps[rep], params.order, diff);
        let mags: Vec<f64> = diff.iter().map(|z| z.norm()).collect();
        Ok(eval.eval(&mags, u, p)?.value)
    };
    let w = params.log2_ratio * std::f64::consts::LN_2;
    let mut running = 0.0f64;
    let mut done = 0usize;
    let mut out = Vec::with_capacity(levels.len());
    for &t in &levels {
        let len = offs.count_within(t, true);
        let (full, partial) = strata.split(len);
        for &(_, _, rep) in &strata.chunks[done..full] {
            running = running.max(morrey_at(rep, &mut diff)?);
        }
        done = done.max(full);
        let omega = match partial {
            Some((rep, _)) => running.max(morrey_at(rep, &mut diff)?),
            None => running,
        };
        out.push(Level {
            t,
            weight: w,
            inner: omega,
            scaled: t.powf(-s) * omega,
        });
    }
    Ok(DiffEstimate::assemble(first, q, Combine::Sum, out, excluded, *family))
}
