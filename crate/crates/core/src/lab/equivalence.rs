//! Ratio sweeps between the Fourier-analytic quasi-norm and a difference quasi-norm over a family
//! of test functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{besov_morrey_norm, DyadicPartition};
use crate::diffnorm::{diff_norm_club, diff_norm_spade, diff_norm_va, modulus_norm, DiffEstimate, DiffParams};
use crate::error::{param, Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::lab::config::{EquivalenceConfig, FunctionFamily, NormPair};
use crate::lab::params::{classify, Region};
use crate::lab::report::Status;
use crate::morrey::{BallFamily, Shape};
use crate::zoo::bumps::{make_seeded_smooth, make_smooth_bump};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub index: usize,
    pub label: String,
    pub besov_morrey: f64,
    pub difference: f64,
    pub ratio: f64,
    pub refined_besov_morrey: f64,
    pub refined_difference: f64,
    pub refined_ratio: f64,
    pub ratio_change: f64,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub config: EquivalenceConfig,
    pub seed: u64,
    pub rows: Vec<EquivalenceRow>,
    pub excluded: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub spread: f64,
    pub max_change: f64,
    pub family: BallFamily,
    pub diff_params: DiffParams,
    pub status: Status,
}

/// The test functions of a family, labelled.
pub fn build_family(
    grid: &Grid,
    family: FunctionFamily,
    count: usize,
    seed: u64,
) -> Result<Vec<(String, SampledFunction)>> {
    (0..count)
        .map(|i| match family {
            FunctionFamily::Seeded => {
                let sd = seed.wrapping_add(i as u64);
                Ok((format!("seeded-{sd}"), make_seeded_smooth(grid, sd)?))
            }
            FunctionFamily::Bumps => {
                let radius = 1.0 + 2.0 * i as f64 / count.max(2) as f64;
                let f = make_smooth_bump(grid, radius)?;
                let room = grid.half_width() / 2.0 - radius;
                let steps = ((room / grid.spacing()).floor() as i64).max(0);
                let k = if steps == 0 { 0 } else { (i as i64 * 7919) % (steps + 1) };
                let shift = [k as f64 * grid.spacing(), 0.0];
                let g = f.translate(&shift)?;
                Ok((format!("bump-r{radius}-x{}", shift[0]), g))
            }
        })
        .collect()
}

fn difference_norm(
    pair: NormPair,
    f: &SampledFunction,
    cfg: &EquivalenceConfig,
    params: &DiffParams,
    family: &BallFamily,
) -> Result<DiffEstimate> {
    let x = &cfg.params;
    match pair {
        NormPair::Va => diff_norm_va(f, x.s, x.u, x.p, x.q, params, family),
        NormPair::Modulus => modulus_norm(f, x.s, x.u, x.p, x.q, params, family),
        NormPair::Club => diff_norm_club(f, x.s, x.u, x.p, x.q, params, family),
        NormPair::Spade => diff_norm_spade(f, x.s, x.u, x.p, x.q, params, family),
    }
}

/// Runs the sweep.  Requires the parameters to lie in the equivalence region.
pub fn run_equivalence_experiment(cfg: &EquivalenceConfig, seed: u64) -> Result<EquivalenceReport> {
    let verdict = classify(&cfg.params)?;
    if verdict.region != Region::Equivalent {
        return Err(param(format!(
            "parameters are not in the equivalence region ({})",
            verdict.citation
        )));
    }
    if cfg.count == 0 {
        return Err(Error::Empty("the function family is empty; nothing to compare".into()));
    }
    let grid = cfg.grid.build()?;
    if grid.dim() != cfg.params.d {
        return Err(param("grid dimension differs from d"));
    }
    let partition = DyadicPartition::build(&grid, cfg.k_max)?;
    let family = BallFamily::new(&grid, Shape::Ball);
    let fine_family = family.refine();
    let mut dp = DiffParams::new(cfg.params.order, cfg.params.v, cfg.params.a);
    dp.seed = seed;
    let fine_dp = dp.refine();
    let functions = build_family(&grid, cfg.family, cfg.count, seed)?;
    let x = cfg.params;
    let rows: Vec<EquivalenceRow> = functions
        .par_iter()
        .enumerate()
        .map(|(index, (label, f))| {
            let bm = besov_morrey_norm(f, &partition, x.s, x.u, x.p, x.q, &family)?.value;
            let df = difference_norm(cfg.pair, f, cfg, &dp, &family)?.value();
            let bm2 = besov_morrey_norm(f, &partition, x.s, x.u, x.p, x.q, &fine_family)?.value;
            let df2 = difference_norm(cfg.pair, f, cfg, &fine_dp, &fine_family)?.value();
            let excluded = !(bm > 0.0 && bm2 > 0.0);
            let ratio = if excluded { f64::NAN } else { df / bm };
            let refined_ratio = if excluded { f64::NAN } else { df2 / bm2 };
            Ok(EquivalenceRow {
                index,
                label: label.clone(),
                besov_morrey: bm,
                difference: df,
                ratio,
                refined_besov_morrey: bm2,
                refined_difference: df2,
                refined_ratio,
                ratio_change: if excluded {
                    f64::NAN
                } else {
                    (refined_ratio - ratio).abs() / ratio
                },
                excluded,
            })
        })
        .collect::<Result<_>>()?;
    let mut ratios: Vec<f64> = rows.iter().filter(|r| !r.excluded).map(|r| r.ratio).collect();
    let excluded = rows.len() - ratios.len();
    if ratios.is_empty() {
        return Err(Error::Empty("every function has zero norm".into()));
    }
    ratios.sort_by(f64::total_cmp);
    let m = ratios.len();
    let median_ratio = if m % 2 == 1 {
        ratios[m / 2]
    } else {
        0.5 * (ratios[m / 2 - 1] + ratios[m / 2])
    };
    let min_ratio = ratios[0];
    let max_ratio = ratios[m - 1];
    let spread = max_ratio / min_ratio;
    let max_change = rows
        .iter()
        .filter(|r| !r.excluded)
        .map(|r| r.ratio_change)
        .fold(0.0, f64::max);
    let ok = spread.is_finite() && spread <= cfg.max_spread && max_change <= cfg.max_change;
    Ok(EquivalenceReport {
        config: cfg.clone(),
        seed,
        rows,
        excluded,
        min_ratio,
        max_ratio,
        median_ratio,
        spread,
        max_change,
        family,
        diff_params: dp,
        status: if ok { Status::Pass } else { Status::Fail },
    })
}
