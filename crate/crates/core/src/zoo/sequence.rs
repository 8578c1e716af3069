//! Finitely supported coefficient sequences and their sequence-space quasi-norm.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bands::lq_assemble;
use crate::error::{param, Result};
use crate::grid::Grid;
use crate::morrey::{check_exponents, BallFamily, MorreyEvaluator, NormEstimate, Shape, Truncation};

/// Cells per cube edge on the local grids used to evaluate a level.
const CELLS_PER_CUBE: usize = 4;
const MAX_LOCAL_CELLS: usize = 1 << 22;

/// Coefficients `lambda_{j,k}` with level `j` and cube index `k` (second entry ignored for `d = 1`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientSequence {
    pub dim: usize,
    entries: BTreeMap<(u32, [i64; 2]), f64>,
}

impl CoefficientSequence {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, level: u32, index: [i64; 2], value: f64) {
        let index = if self.dim == 1 { [index[0], 0] } else { index };
        if value == 0.0 {
            self.entries.remove(&(level, index));
        } else {
            self.entries.insert((level, index), value);
        }
    }

    pub fn get(&self, level: u32, index: [i64; 2]) -> f64 {
        self.entries.get(&(level, index)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, [i64; 2], f64)> + '_ {
        self.entries.iter().map(|(&(j, k), &v)| (j, k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn levels(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.entries.keys().map(|k| k.0).collect();
        out.dedup();
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::new(self.dim);
        for (j, k, v) in self.iter() {
            out.insert(j, k, v * c);
        }
        out
    }
}

/// `‖ sum_k |lambda_{j,k}| chi^(u)_{j,k} | M^u_p ‖` for one level, evaluated in cube mode on a
/// local grid with spacing `2^-j / 4` around the occupied cubes.  `template` supplies the center
/// stride and radius ratio.
pub fn level_morrey(seq: &CoefficientSequence, level: u32, u: f64, p: f64, template: &BallFamily) -> Result<f64> {
    check_exponents(u, p)?;
    let d = seq.dim;
    let cubes: Vec<([i64; 2], f64)> = seq
        .iter()
        .filter(|(j, _, _)| *j == level)
        .map(|(_, k, v)| (k, v.abs()))
        .collect();
    if cubes.is_empty() {
        return Ok(0.0);
    }
    let mut lo = [i64::MAX; 2];
    let mut hi = [i64::MIN; 2];
    for (k, _) in &cubes {
        for a in 0..d {
            lo[a] = lo[a].min(k[a]);
            hi[a] = hi[a].max(k[a]);
        }
    }
    let span = (0..d).map(|a| (hi[a] - lo[a] + 1) as usize).max().unwrap();
    let n = ((span + 2) * CELLS_PER_CUBE).next_power_of_two().max(16);
    if n.pow(d as u32) > MAX_LOCAL_CELLS {
        return Err(param(format!("level {level} spans too many cubes for a local grid")));
    }
    let dx = (-(level as f64)).exp2() / CELLS_PER_CUBE as f64;
    let grid = Grid::new(d, n as f64 * dx / 2.0, n)?;
    let amp = (level as f64 * d as f64 / u).exp2();
    let mut field = vec![0.0; grid.len()];
    for (k, v) in &cubes {
        let c0 = (k[0] - lo[0] + 1) as usize * CELLS_PER_CUBE;
        let c1 = if d == 2 {
            (k[1] - lo[1] + 1) as usize * CELLS_PER_CUBE
        } else {
            0
        };
        for i in 0..CELLS_PER_CUBE {
            if d == 1 {
                field[c0 + i] += v * amp;
            } else {
                for jj in 0..CELLS_PER_CUBE {
                    field[grid.ravel([c0 + i, c1 + jj])] += v * amp;
                }
            }
        }
    }
    let family = BallFamily {
        shape: Shape::Cube,
        r_min: dx,
        r_max: 2.0 * grid.half_width(),
        ..*template
    };
    Ok(MorreyEvaluator::new(&grid, &family)?.eval(&field, u, p)?.value)
}

/// Sequence-space quasi-norm `(sum_j 2^(jq(s - d/u)) ‖...‖^q)^(1/q)`; `terms` are the level
/// blocks and `partials` their cumulative `l_q` sums.
pub fn sequence_norm(
    seq: &CoefficientSequence,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    template: &BallFamily,
) -> Result<NormEstimate> {
    check_exponents(u, p)?;
    if !(q > 0.0) {
        return Err(param("q must be positive"));
    }
    let d = seq.dim as f64;
    let blocks: Vec<(f64, f64)> = seq
        .levels()
        .into_iter()
        .map(|j| {
            let m = level_morrey(seq, j, u, p, template)?;
            Ok((j as f64, (j as f64 * (s - d / u)).exp2() * m))
        })
        .collect::<Result<_>>()?;
    let (value, partials) = lq_assemble(&blocks, q);
    Ok(NormEstimate {
        value,
        truncation: Truncation {
            family: Some(BallFamily {
                shape: Shape::Cube,
                ..*template
            }),
            ..Default::default()
        },
        partials,
        terms: blocks,
    })
}
