//! Uniform cell-centered grids and complex samples of compactly supported functions.
//!
//! Grid points sit at the cell midpoints `x_i = (i + 1/2 - n/2) dx`, so the lattice is symmetric
//! about the origin and never contains `x = 0`.  Points are enumerated lexicographically, the
//! first axis varying slowest.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// A point of the ambient space; only the first `d` components are meaningful.
pub type Point = [f64; 2];

const ALIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Dimension(dim));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(param(format!("half-width must be positive, got {half_width}")));
        }
        Ok(Self { dim, half_width, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Measure of one cell, `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - self.n as f64 / 2.0) * self.spacing()
    }

    /// Per-axis indices of a flat index.
    pub fn unravel(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn ravel(&self, ij: [usize; 2]) -> usize {
        if self.dim == 1 {
            ij[0]
        } else {
            ij[0] * self.n + ij[1]
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let ij = self.unravel(idx);
        if self.dim == 1 {
            [self.coord(ij[0]), 0.0]
        } else {
            [self.coord(ij[0]), self.coord(ij[1])]
        }
    }

    /// Expresses a length as an integer number of spacings, if it is one.
    pub fn steps(&self, length: f64) -> Option<i64> {
        let q = length / self.spacing();
        let r = q.round();
        ((q - r).abs() <= ALIGN_TOL * r.abs().max(1.0)).then_some(r as i64)
    }

    /// Converts a grid-aligned offset to per-axis integer steps.
    pub fn offset_steps(&self, shift: &Point) -> Result<[i64; 2]> {
        let mut out = [0i64; 2];
        for a in 0..self.dim {
            out[a] = self
                .steps(shift[a])
                .ok_or_else(|| Error::NotAligned(shift[..self.dim].to_vec()))?;
        }
        Ok(out)
    }

    /// Radius of the smallest origin-centered ball containing the whole box.
    pub fn circumradius(&self) -> f64 {
        self.half_width * (self.dim as f64).sqrt()
    }
}

pub fn norm(x: &Point, dim: usize) -> f64 {
    if dim == 1 {
        x[0].abs()
    } else {
        x[0].hypot(x[1])
    }
}

/// Complex samples on a grid together with a declared support radius about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
    support_radius: f64,
}

impl SampledFunction {
    /// Builds a function with the zero-padding margin `support_radius <= R/2`.
    pub fn new(grid: Grid, values: Vec<Complex64>, support_radius: f64) -> Result<Self> {
        let bound = grid.half_width() / 2.0;
        if support_radius > bound * (1.0 + 1e-12) {
            return Err(Error::Support {
                support: support_radius,
                bound,
            });
        }
        Self::with_support(grid, values, support_radius)
    }

    /// Builds a function whose support may reach the box boundary.  Used for band projections
    /// and differences, which lose the margin.
    pub fn with_support(grid: Grid, values: Vec<Complex64>, support_radius: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(param(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        if !(support_radius >= 0.0) {
            return Err(param("support radius must be nonnegative"));
        }
        let f = Self {
            grid,
            values,
            support_radius,
        };
        f.check_support()?;
        Ok(f)
    }

    /// Samples `g` at every grid point.
    pub fn from_fn<F>(grid: Grid, support_radius: f64, g: F) -> Result<Self>
    where
        F: Fn(&Point) -> Complex64,
    {
        let values = (0..grid.len()).map(|i| g(&grid.point(i))).collect();
        Self::new(grid, values, support_radius)
    }

    pub fn from_real<F>(grid: Grid, support_radius: f64, g: F) -> Result<Self>
    where
        F: Fn(&Point) -> f64,
    {
        Self::from_fn(grid, support_radius, |x| Complex64::new(g(x), 0.0))
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            support_radius: 0.0,
        }
    }

    fn check_support(&self) -> Result<()> {
        if self.support_radius >= self.grid.circumradius() {
            return Ok(());
        }
        let d = self.grid.dim();
        for (i, v) in self.values.iter().enumerate() {
            if *v != Complex64::new(0.0, 0.0) && norm(&self.grid.point(i), d) > self.support_radius {
                return Err(Error::SupportViolation { index: i });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            support_radius: self.support_radius,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(param("grids differ"));
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            support_radius: self.support_radius.max(other.support_radius),
        })
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Midpoint-rule `L_p` norm over the whole grid; `p = inf` gives the max modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    /// `(sum over |x_i - c| < r of |f(x_i)|^p dx^d)^(1/p)`.
    pub fn ball_lp_integral(&self, center: &Point, radius: f64, p: f64) -> Result<f64> {
        if !(p > 0.0) || !(radius > 0.0) {
            return Err(param("ball integral needs p > 0 and radius > 0"));
        }
        let g = &self.grid;
        let d = g.dim();
        let mut s = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let x = g.point(i);
            let dist = norm(&[x[0] - center[0], x[1] - center[1]], d);
            if dist < radius {
                s += v.norm().powf(p);
            }
        }
        Ok((s * g.cell_volume()).powf(1.0 / p))
    }

    /// Exact relocation `x -> f(x - shift)` by whole grid steps, with zero fill.
    pub fn translate(&self, shift: &Point) -> Result<Self> {
        let g = self.grid;
        let steps = g.offset_steps(shift)?;
        let moved = self.support_radius + norm(shift, g.dim());
        let bound = g.half_width() / 2.0;
        if moved > bound * (1.0 + 1e-12) {
            return Err(Error::Support { support: moved, bound });
        }
        Ok(Self {
            grid: g,
            values: shift_values(&g, &self.values, [-steps[0], -steps[1]]),
            support_radius: moved,
        })
    }

    /// Writes the flat binary layout: `d` (u64), `R` (f64), `n` (u64), support radius (f64),
    /// then interleaved re/im f64 pairs, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.grid.dim() as u64).to_le_bytes())?;
        w.write_all(&self.grid.half_width().to_le_bytes())?;
        w.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        w.write_all(&self.support_radius.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut b = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b).map_err(|e| Error::Format(e.to_string()))?;
            Ok(b)
        };
        let dim = u64::from_le_bytes(next(&mut r)?) as usize;
        let half_width = f64::from_le_bytes(next(&mut r)?);
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let support = f64::from_le_bytes(next(&mut r)?);
        let grid = Grid::new(dim, half_width, n)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            values.push(Complex64::new(re, im));
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes", rest.len())));
        }
        Self::with_support(grid, values, support)
    }
}

/// Returns `out[i] = values[i + steps]`, zero where `i + steps` leaves the grid.
pub(crate) fn shift_values(g: &Grid, values: &[Complex64], steps: [i64; 2]) -> Vec<Complex64> {
    let n = g.n() as i64;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; values.len()];
    if g.dim() == 1 {
        let lo = (-steps[0]).clamp(0, n);
        let hi = (n - steps[0]).clamp(0, n);
        for i in lo..hi {
            out[i as usize] = values[(i + steps[0]) as usize];
        }
    } else {
        let lo0 = (-steps[0]).clamp(0, n);
        let hi0 = (n - steps[0]).clamp(0, n);
        let lo1 = (-steps[1]).clamp(0, n);
        let hi1 = (n - steps[1]).clamp(0, n);
        for i in lo0..hi0 {
            let src_row = ((i + steps[0]) * n) as usize;
            let dst_row = (i * n) as usize;
            for j in lo1..hi1 {
                out[dst_row + j as usize] = values[src_row + (j + steps[1]) as usize];
            }
        }
    }
    out
}
