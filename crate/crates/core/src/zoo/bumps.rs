//! Smooth compactly supported test functions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bands::radial_cutoff;
use crate::error::Result;
use crate::grid::{norm, Grid, SampledFunction};

/// Equal to 1 on `|x| <= 1` and to 0 on `|x| >= 2`.
pub fn make_plateau_bump(grid: &Grid) -> Result<SampledFunction> {
    let d = grid.dim();
    SampledFunction::from_real(*grid, 2.0, |x| radial_cutoff(norm(x, d), 1.0, 2.0))
}

/// `e^(x_1 + ... + x_d)` on `B(0, 2N+2)`, cut off smoothly to vanish outside `B(0, 3N+3)`.
pub fn make_exp_bump(grid: &Grid, order: usize) -> Result<SampledFunction> {
    let d = grid.dim();
    let inner = 2.0 * order as f64 + 2.0;
    let outer = 3.0 * order as f64 + 3.0;
    SampledFunction::from_real(*grid, outer, |x| {
        let r = norm(x, d);
        if r >= outer {
            0.0
        } else {
            radial_cutoff(r, inner, outer) * (x[0] + if d == 2 { x[1] } else { 0.0 }).exp()
        }
    })
}

/// `exp(-1/(1 - t^2))` for `|t| < 1`.
pub fn bump_profile(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// The standard bump of the given radius, centered at the origin.
pub fn make_smooth_bump(grid: &Grid, radius: f64) -> Result<SampledFunction> {
    let d = grid.dim();
    SampledFunction::from_real(*grid, radius, |x| bump_profile(norm(x, d) / radius))
}

/// Radius of the window used by [`make_seeded_smooth`].
pub const SEEDED_WINDOW: f64 = 3.5;
/// Largest angular frequency of the cosine modes in [`make_seeded_smooth`].
pub const SEEDED_MAX_FREQ: f64 = 8.0;

/// A seeded smooth function: a few random cosine modes with frequencies up to
/// [`SEEDED_MAX_FREQ`] under a smooth radial window of radius [`SEEDED_WINDOW`].  Its spectrum
/// is concentrated below a fixed frequency, so it is effectively band-limited.
pub fn make_seeded_smooth(grid: &Grid, seed: u64) -> Result<SampledFunction> {
    let d = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, [f64; 2], f64)> = (0..4)
        .map(|_| {
            let amp = rng.gen_range(-1.0..1.0);
            let mut w = [0.0; 2];
            for c in w.iter_mut().take(d) {
                *c = rng.gen_range(-SEEDED_MAX_FREQ..SEEDED_MAX_FREQ);
            }
            (amp, w, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let offset = rng.gen_range(0.5..1.5);
    let inner = rng.gen_range(0.5..2.0);
    SampledFunction::from_fn(*grid, SEEDED_WINDOW, |x| {
        let r = norm(x, d);
        if r >= SEEDED_WINDOW {
            return Complex64::new(0.0, 0.0);
        }
        let mut s = offset;
        for (amp, w, ph) in &modes {
            s += amp * (w[0] * x[0] + w[1] * x[1] + ph).cos();
        }
        Complex64::new(s * radial_cutoff(r, inner, SEEDED_WINDOW), 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffnorm::finite_difference;

    #[test]
    fn plateau_values() {
        let g = Grid::new(1, 8.0, 1024).unwrap();
        let f = make_plateau_bump(&g).unwrap();
        let at = |x: f64| f.values()[((x / g.spacing()) + 512.0 - 0.5).round() as usize].re;
        assert_eq!(at(g.coord(512)), 1.0);
        assert_eq!(at(3.0 - g.spacing() / 2.0), 0.0);
    }

    #[test]
    fn plateau_far_differences_are_unit() {
        let g = Grid::new(1, 16.0, 1024).unwrap();
        let f = make_plateau_bump(&g).unwrap();
        let d = finite_difference(&f, &[4.0, 0.0], 1).unwrap();
        for i in 0..g.len() {
            if g.coord(i).abs() <= 1.0 {
                assert_eq!(d.values()[i].norm(), 1.0);
            }
        }
    }

    #[test]
    fn plateau_second_difference_bounded_under_refinement() {
        let mut bounds = Vec::new();
        for n in [1024usize, 2048, 4096] {
            let g = Grid::new(1, 8.0, n).unwrap();
            let f = make_plateau_bump(&g).unwrap();
            let h = g.spacing();
            let v = f.values();
            let m = (1..n - 1)
                .map(|i| ((v[i + 1] - 2.0 * v[i] + v[i - 1]).re / (h * h)).abs())
                .fold(0.0, f64::max);
            bounds.push(m);
        }
        assert!(bounds[2] < 1.1 * bounds[1] && bounds[1] < 1.1 * bounds[0].max(bounds[1]));
    }

    #[test]
    fn exp_bump_shape() {
        let g = Grid::new(1, 16.0, 4096).unwrap();
        let f = make_exp_bump(&g, 1).unwrap();
        let i0 = 2048;
        assert!((f.values()[i0].re - g.coord(i0).exp()).abs() < 1e-15);
        for i in 0..g.len() {
            if g.coord(i).abs() >= 6.0 {
                assert_eq!(f.values()[i].re, 0.0);
            }
        }
    }

    #[test]
    fn seeded_functions_are_reproducible() {
        let g = Grid::new(1, 8.0, 512).unwrap();
        assert_eq!(make_seeded_smooth(&g, 3).unwrap(), make_seeded_smooth(&g, 3).unwrap());
        assert_ne!(make_seeded_smooth(&g, 3).unwrap(), make_seeded_smooth(&g, 4).unwrap());
    }
}
