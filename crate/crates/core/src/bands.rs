//! Smooth dyadic partition of unity on the DFT frequency grid and the Littlewood-Paley
//! Besov-Morrey quasi-norm.
//!
//! Frequencies are angular, `xi = 2 pi m / (n dx)`, so the Nyquist radius is `pi / dx`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::morrey::{check_exponents, BallFamily, MorreyEvaluator, NormEstimate, Truncation};

/// Inner and outer radius of the base profile transition.
pub const PROFILE_PLATEAU: f64 = 1.0;
pub const PROFILE_EDGE: f64 = 1.5;

fn glue(z: f64) -> f64 {
    if z > 0.0 {
        (-1.0 / z).exp()
    } else {
        0.0
    }
}

/// The smooth step: 0 for `t <= 0`, 1 for `t >= 1`, built from `exp(-1/t)`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = glue(t);
        a / (a + glue(1.0 - t))
    }
}

/// Radial cutoff equal to 1 on `[0, inner]`, 0 on `[outer, inf)`.
pub fn radial_cutoff(r: f64, inner: f64, outer: f64) -> f64 {
    1.0 - smooth_step((r - inner) / (outer - inner))
}

/// Base profile `phi_0` as a function of `|xi|`.
pub fn phi0(r: f64) -> f64 {
    radial_cutoff(r, PROFILE_PLATEAU, PROFILE_EDGE)
}

/// `phi_k(|xi|)` for the band index `k`.
pub fn phi_k(k: usize, r: f64) -> f64 {
    if k == 0 {
        phi0(r)
    } else {
        phi0(r / (k as f64).exp2()) - phi0(r / ((k - 1) as f64).exp2())
    }
}

pub fn nyquist(grid: &Grid) -> f64 {
    std::f64::consts::PI / grid.spacing()
}

/// `|xi|` at each DFT sample, in the same flat order as the spatial samples.
pub fn frequency_radii(grid: &Grid) -> Vec<f64> {
    let n = grid.n();
    let base = 2.0 * std::f64::consts::PI / (n as f64 * grid.spacing());
    let axis: Vec<f64> = (0..n)
        .map(|m| {
            let m = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
            m * base
        })
        .collect();
    if grid.dim() == 1 {
        axis.iter().map(|x| x.abs()).collect()
    } else {
        axis.iter()
            .flat_map(|a| axis.iter().map(move |b| a.hypot(*b)))
            .collect()
    }
}

/// Forward (unnormalized) or inverse (divided by `n^d`) DFT in place.
pub(crate) fn dft(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    if grid.dim() == 1 {
        plan.process(data);
    } else {
        plan.process(data);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            plan.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }
    if inverse {
        let scale = 1.0 / grid.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: Grid,
    k_max: usize,
    radii: Vec<f64>,
    masks: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn build(grid: &Grid, k_max: usize) -> Result<Self> {
        let nyq = nyquist(grid);
        if 3.0 * (k_max as f64 - 1.0).exp2() >= nyq {
            return Err(Error::Aliasing { k_max, nyquist: nyq });
        }
        let radii = frequency_radii(grid);
        let masks = (0..=k_max)
            .map(|k| radii.iter().map(|&r| phi_k(k, r)).collect())
            .collect();
        Ok(Self {
            grid: *grid,
            k_max,
            radii,
            masks,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn mask(&self, k: usize) -> &[f64] {
        &self.masks[k]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `max |sum_k phi_k - 1|` over frequency samples with `|xi| <= 2^(K-1)`.
    pub fn unity_residual(&self) -> f64 {
        let lim = (self.k_max as f64 - 1.0).exp2();
        (0..self.radii.len())
            .filter(|&i| self.radii[i] <= lim)
            .map(|i| (self.masks.iter().map(|m| m[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn check(&self, f: &SampledFunction) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(crate::error::param("function and partition live on different grids"));
        }
        Ok(())
    }

    fn project_spectrum(&self, spectrum: &[Complex64], k: usize) -> Result<SampledFunction> {
        let mut data: Vec<Complex64> = spectrum.iter().zip(&self.masks[k]).map(|(v, m)| v * m).collect();
        dft(&self.grid, &mut data, true);
        SampledFunction::with_support(self.grid, data, self.grid.circumradius())
    }
}

pub fn spectrum(f: &SampledFunction) -> Vec<Complex64> {
    let mut data = f.values().to_vec();
    dft(f.grid(), &mut data, false);
    data
}

/// `F^-1[phi_k F f]`.  The result fills the whole box.
pub fn band_project(f: &SampledFunction, partition: &DyadicPartition, k: usize) -> Result<SampledFunction> {
    partition.check(f)?;
    if k > partition.k_max {
        return Err(crate::error::param(format!(
            "band {k} exceeds K_max = {}",
            partition.k_max
        )));
    }
    partition.project_spectrum(&spectrum(f), k)
}

/// All projections `k = 0..=K_max` from a single forward transform.
pub fn band_projections(f: &SampledFunction, partition: &DyadicPartition) -> Result<Vec<SampledFunction>> {
    partition.check(f)?;
    let spec = spectrum(f);
    (0..=partition.k_max)
        .into_par_iter()
        .map(|k| partition.project_spectrum(&spec, k))
        .collect()
}

/// Assembles `(sum_k b_k^q)^(1/q)` (max for `q = inf`) from blocks, with cumulative partials.
pub(crate) fn lq_assemble(blocks: &[(f64, f64)], q: f64) -> (f64, Vec<(f64, f64)>) {
    let mut partials = Vec::with_capacity(blocks.len());
    let mut acc = 0.0f64;
    for &(k, b) in blocks {
        if q.is_infinite() {
            acc = acc.max(b);
            partials.push((k, acc));
        } else {
            acc += b.powf(q);
            partials.push((k, acc.powf(1.0 / q)));
        }
    }
    let value = partials.last().map(|x| x.1).unwrap_or(0.0);
    (value, partials)
}

/// Besov-Morrey quasi-norm over the bands `0..=K_max`; `terms` holds the blocks
/// `b_k = 2^(ks) ‖P_k f | M^u_p‖` and `partials` their cumulative `l_q` sums.
pub fn besov_morrey_norm(
    f: &SampledFunction,
    partition: &DyadicPartition,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    family: &BallFamily,
) -> Result<NormEstimate> {
    check_exponents(u, p)?;
    if !(q > 0.0) {
        return Err(crate::error::param("q must be positive"));
    }
    partition.check(f)?;
    let eval = MorreyEvaluator::new(&partition.grid, family)?;
    besov_morrey_with(f, partition, s, u, p, q, &eval)
}

pub(crate) fn besov_morrey_with(
    f: &SampledFunction,
    partition: &DyadicPartition,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    eval: &MorreyEvaluator,
) -> Result<NormEstimate> {
    let spec = spectrum(f);
    let blocks: Vec<(f64, f64)> = (0..=partition.k_max)
        .into_par_iter()
        .map(|k| {
            let pk = partition.project_spectrum(&spec, k)?;
            let m = eval.eval(&pk.abs_values(), u, p)?;
            Ok((k as f64, (k as f64 * s).exp2() * m.value))
        })
        .collect::<Result<_>>()?;
    let (value, partials) = lq_assemble(&blocks, q);
    Ok(NormEstimate {
        value,
        truncation: Truncation {
            family: Some(*eval.family()),
            k_max: Some(partition.k_max),
            ..Default::default()
        },
        partials,
        terms: blocks,
    })
}

/// Least-squares slope of `log2 b_k` against `k` over `lo..=hi`.
pub fn block_slope(est: &NormEstimate, lo: usize, hi: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = est
        .terms
        .iter()
        .filter(|(k, b)| *k >= lo as f64 && *k <= hi as f64 && *b > 0.0)
        .map(|(k, b)| (*k, b.log2()))
        .collect();
    crate::lab::fit::linear_fit(&pts).map(|f| f.slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_and_profile() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(phi0(1.0), 1.0);
        assert_eq!(phi0(1.5), 0.0);
        assert_eq!(phi_k(1, 0.9), 0.0);
        assert_eq!(phi_k(1, 3.1), 0.0);
    }

    #[test]
    fn band_plateaus() {
        for k in 1..8usize {
            let lo = 3.0 * (k as f64 - 2.0).exp2();
            let hi = (k as f64).exp2();
            for i in 0..=20 {
                let r = lo + (hi - lo) * i as f64 / 20.0;
                assert_eq!(phi_k(k, r), 1.0, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn telescoping_and_bounds() {
        let g = Grid::new(1, 8.0, 4096).unwrap();
        let part = DyadicPartition::build(&g, 8).unwrap();
        for (i, &r) in part.radii().iter().enumerate() {
            let sum: f64 = (0..=8).map(|k| part.mask(k)[i]).sum();
            assert!((sum - phi0(r / 256.0)).abs() <= 1e-12);
            for k in 0..=8 {
                let m = part.mask(k)[i];
                assert!((0.0..=1.0).contains(&m));
                if k >= 1 && m != 0.0 {
                    let lo = (k as f64 - 1.0).exp2();
                    assert!(r >= lo && r <= 3.0 * lo);
                }
            }
        }
        assert!(part.unity_residual() <= 1e-8);
    }

    #[test]
    fn rejects_aliasing() {
        let g = Grid::new(1, 8.0, 4096).unwrap();
        assert!(matches!(DyadicPartition::build(&g, 10), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn dft_roundtrip_2d() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let vals: Vec<Complex64> = (0..256)
            .map(|i| Complex64::new((i % 7) as f64, (i % 3) as f64))
            .collect();
        let mut data = vals.clone();
        dft(&g, &mut data, false);
        dft(&g, &mut data, true);
        for (a, b) in data.iter().zip(&vals) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
