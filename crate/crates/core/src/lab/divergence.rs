//! Divergence scenarios: partial quasi-norm trajectories of the counterexample functions against
//! their divergence parameter, with a growth fit and verdict.

use serde::{Deserialize, Serialize};

use crate::bands::{besov_morrey_norm, DyadicPartition};
use crate::diffnorm::{ball_avg_difference, diff_norm_va, DiffParams};
use crate::error::{param, Result};
use crate::grid::Grid;
use crate::lab::config::{DivergenceConfig, GridSpec, Scenario};
use crate::lab::fit::{growth_verdict, linear_fit, GrowthFit, Verdict};
use crate::lab::params::{classify, Region, SpaceParams};
use crate::lab::report::Status;
use crate::morrey::{BallFamily, Shape};
use crate::zoo::bumps::{make_exp_bump, make_plateau_bump};
use crate::zoo::oswald::{
    atomic_blocks, d_set_constant, dilated_summand, g_norm, make_oswald, psi, resolvable_k_max, supports_disjoint,
    witness, OswaldConfig, TAU_FLOOR,
};
use crate::zoo::singular::{
    integrability_warning, make_f_alpha_delta, membership_oracle, Membership, SingularFnConfig,
};

/// Window length for the local slopes of the Oswald witness.
pub const SLOPE_WINDOW: usize = 3;
/// Accepted range for each window slope relative to the first.
pub const SLOPE_RATIO_RANGE: (f64, f64) = (0.5, 2.0);
/// Accepted growth of the atomic blocks over the first one.
pub const BLOCK_RATIO_MAX: f64 = 2.0;
/// Accepted growth of the exponential-bump partials over the run.
pub const EXP_GROWTH_MIN: f64 = 10.0;
/// Accepted mismatch of the dilation identity on a grid.
pub const DILATION_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

fn check(name: &str, value: f64, bound: impl Into<String>, pass: bool) -> Check {
    Check {
        name: name.into(),
        value,
        bound: bound.into(),
        pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// The divergence parameter (`T`, `eps`, `l` or band index).
    pub param: f64,
    /// The partial value the scenario tracks.
    pub partial: f64,
    /// Fit abscissa and ordinate derived from the two above.
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub scenario: Scenario,
    pub params: SpaceParams,
    pub grid: Option<GridSpec>,
    /// What the fit is taken over.
    pub law: String,
    pub points: Vec<TrajectoryPoint>,
    pub growth: GrowthFit,
    pub expected: Verdict,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub status: Status,
}

impl DivergenceReport {
    pub fn verdict(&self) -> Verdict {
        self.growth.verdict
    }

    pub fn series(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.param, p.partial)).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceRow<'a> {
    pub scenario: &'a str,
    pub param: f64,
    pub partial_value: f64,
    pub fitted_slope: f64,
    pub r2: f64,
    pub verdict: &'a str,
}

impl DivergenceReport {
    pub fn rows(&self) -> Vec<DivergenceRow<'_>> {
        let (slope, r2) = self.growth.fit.map(|f| (f.slope, f.r2)).unwrap_or((f64::NAN, f64::NAN));
        self.points
            .iter()
            .map(|p| DivergenceRow {
                scenario: self.scenario.name(),
                param: p.param,
                partial_value: p.partial,
                fitted_slope: slope,
                r2,
                verdict: self.growth.verdict.as_str(),
            })
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn sp(d: usize, s: f64, u: f64, p: f64, q: f64, v: f64, a: f64, order: usize) -> SpaceParams {
    SpaceParams {
        d,
        s,
        u,
        p,
        q,
        v,
        a,
        order,
    }
}

/// Scenario defaults: parameters, grid and divergence parameter values.
pub fn defaults(scenario: Scenario) -> (SpaceParams, Option<GridSpec>, Vec<f64>) {
    let inf = f64::INFINITY;
    let octaves = |lo: i32, hi: i32| (lo..=hi).map(|m| (m as f64).exp2()).collect::<Vec<_>>();
    match scenario {
        Scenario::PlateauS0 => (
            sp(1, 0.0, 2.0, 2.0, 2.0, 2.0, inf, 1),
            Some(GridSpec {
                dim: 1,
                half_width: 1024.0,
                n: 8192,
            }),
            octaves(3, 9),
        ),
        Scenario::Control => (
            sp(1, 1.5, 2.0, 1.5, 2.0, 2.0, inf, 2),
            Some(GridSpec {
                dim: 1,
                half_width: 1024.0,
                n: 8192,
            }),
            octaves(3, 9),
        ),
        Scenario::ExpBump => (
            sp(1, 2.0, 2.0, 2.0, 2.0, 2.0, inf, 1),
            Some(GridSpec {
                dim: 1,
                half_width: 16.0,
                n: 16384,
            }),
            (1..=7).map(|m| (-(m as f64)).exp2()).collect(),
        ),
        Scenario::Oswald => (
            sp(1, 1.0, 2.0, 2.0, inf, 1.0, inf, 1),
            None,
            (8..=14).map(|l| l as f64).collect(),
        ),
        Scenario::FAlphaDelta => (
            sp(1, 0.45, 2.0, 2.0, 2.0, 2.0, inf, 1),
            Some(GridSpec {
                dim: 1,
                half_width: 4.0,
                n: 32768,
            }),
            (6..=10).map(|k| k as f64).collect(),
        ),
    }
}

/// Runs one scenario.
pub fn run_divergence_experiment(cfg: &DivergenceConfig) -> Result<DivergenceReport> {
    let (dp, dg, dpts) = defaults(cfg.scenario);
    let params = cfg.params.unwrap_or(dp);
    let grid = cfg.grid.or(dg);
    let points = cfg.points.clone().unwrap_or(dpts);
    if points.is_empty() {
        return Err(param("no divergence parameter values"));
    }
    let region = classify(&params)?.region;
    match cfg.scenario {
        Scenario::PlateauS0 => {
            if !(params.s == 0.0 && params.a.is_infinite()) {
                return Err(param("plateau scenario needs s = 0 and a = inf"));
            }
            level_cap_run(cfg.scenario, params, grid.unwrap(), &points, Verdict::Diverges)
        }
        Scenario::Control => {
            if region != Region::Equivalent {
                return Err(param("the control needs parameters in the equivalence region"));
            }
            level_cap_run(cfg.scenario, params, grid.unwrap(), &points, Verdict::Convergent)
        }
        Scenario::ExpBump => {
            if !(params.order as f64 <= params.s) {
                return Err(param("exponential-bump scenario needs N <= s"));
            }
            exp_bump_run(params, grid.unwrap(), &points)
        }
        Scenario::Oswald => {
            if !(params.p == params.u && params.v >= 1.0 && params.q.is_infinite() && params.order as f64 == params.s) {
                return Err(param("lacunary scenario needs p = u, v >= 1, q = inf, N = s"));
            }
            oswald_run(params, &points)
        }
        Scenario::FAlphaDelta => {
            let alpha = cfg.alpha.unwrap_or(-0.25);
            let delta = cfg.delta.unwrap_or(0.0);
            let m = membership_oracle(params.d, params.s, params.u, params.p, params.q, alpha, delta)?;
            if m != Membership::NotMember {
                return Err(param(
                    "singular scenario needs parameters where the function is not a member",
                ));
            }
            singular_run(params, grid.unwrap(), &points, alpha, delta)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    scenario: Scenario,
    params: SpaceParams,
    grid: Option<GridSpec>,
    law: &str,
    points: Vec<TrajectoryPoint>,
    expected: Verdict,
    checks: Vec<Check>,
    notes: Vec<String>,
) -> DivergenceReport {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    let growth = growth_verdict(&xy);
    let status = if growth.verdict == Verdict::Inconclusive {
        Status::Inconclusive
    } else if growth.verdict == expected && checks.iter().all(|c| c.pass) {
        Status::Pass
    } else {
        Status::Fail
    };
    DivergenceReport {
        scenario,
        params,
        grid,
        law: law.into(),
        points,
        growth,
        expected,
        checks,
        notes,
        status,
    }
}

/// Plateau bump, partials `D(T)` over the levels `t <= T`, fit `D(T)^q` against `ln T`.
fn level_cap_run(
    scenario: Scenario,
    params: SpaceParams,
    spec: GridSpec,
    caps: &[f64],
    expected: Verdict,
) -> Result<DivergenceReport> {
    let grid = spec.build()?;
    let f = make_plateau_bump(&grid)?;
    let family = BallFamily::new(&grid, Shape::Ball);
    let mut dp = DiffParams::new(params.order, params.v, params.a);
    dp.t_max = Some(caps.iter().copied().fold(0.0, f64::max));
    let est = diff_norm_va(&f, params.s, params.u, params.p, params.q, &dp, &family)?;
    let top = est.levels.last().map(|l| l.t).unwrap_or(0.0);
    let mut notes = Vec::new();
    if caps.iter().any(|&t| t > top * (1.0 + 1e-12)) {
        notes.push(format!("largest admissible level is {top}; larger caps repeat it"));
    }
    let q = params.q;
    let points = caps
        .iter()
        .map(|&t| {
            let d = est.partial(|x| x <= t * (1.0 + 1e-12));
            TrajectoryPoint {
                param: t,
                partial: d,
                x: t.ln(),
                y: if q.is_finite() { d.powf(q) } else { d },
            }
        })
        .collect();
    Ok(finish(
        scenario,
        params,
        Some(spec),
        "partial^q against ln T",
        points,
        expected,
        Vec::new(),
        notes,
    ))
}

/// Exponential bump, partials over levels `t in [eps, 1]`, fit `log2` partial against `log2 1/eps`.
fn exp_bump_run(params: SpaceParams, spec: GridSpec, eps: &[f64]) -> Result<DivergenceReport> {
    let grid = spec.build()?;
    let f = make_exp_bump(&grid, params.order)?;
    let family = BallFamily::new(&grid, Shape::Ball);
    let mut dp = DiffParams::new(params.order, params.v, params.a);
    dp.t_min = Some(eps.iter().copied().fold(f64::INFINITY, f64::min));
    dp.t_max = Some(1.0);
    let est = diff_norm_va(&f, params.s, params.u, params.p, params.q, &dp, &family)?;
    let mut notes = Vec::new();
    if !est.excluded_levels.is_empty() {
        notes.push(format!(
            "levels below two grid spacings dropped: {:?}",
            est.excluded_levels
        ));
    }
    let mut sorted = eps.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let points: Vec<TrajectoryPoint> = sorted
        .iter()
        .map(|&e| {
            let v = est.partial(|t| t >= e * (1.0 - 1e-12) && t <= 1.0 + 1e-12);
            TrajectoryPoint {
                param: e,
                partial: v,
                x: (1.0 / e).log2(),
                y: v.log2(),
            }
        })
        .collect();
    let monotone = points.windows(2).all(|w| w[1].partial > w[0].partial);
    let growth = points.last().unwrap().partial / points[0].partial;
    let checks = vec![
        check(
            "monotone",
            if monotone { 1.0 } else { 0.0 },
            "strictly increasing as eps halves",
            monotone,
        ),
        check(
            "final_over_initial",
            growth,
            format!(">= {EXP_GROWTH_MIN}"),
            growth >= EXP_GROWTH_MIN,
        ),
    ];
    Ok(finish(
        Scenario::ExpBump,
        params,
        Some(spec),
        "log2 partial against log2(1/eps)",
        points,
        Verdict::Diverges,
        checks,
        notes,
    ))
}

/// Lacunary sum: witness `partial^p` against `l`, atomic blocks, and grid anchors.
fn oswald_run(params: SpaceParams, ls: &[f64]) -> Result<DivergenceReport> {
    let ls: Vec<usize> = ls.iter().map(|&l| l.round() as usize).collect();
    let l_max = *ls.iter().max().unwrap();
    let cfg = OswaldConfig {
        order: params.order,
        u: params.u,
        dim: params.d,
        k_max: l_max.saturating_sub(6).max(1),
        ..Default::default()
    };
    cfg.validate()?;
    let wit = witness(&cfg, params.v, params.p, &ls)?;
    let points: Vec<TrajectoryPoint> = wit
        .iter()
        .map(|w| TrajectoryPoint {
            param: w.l as f64,
            partial: w.partial_p,
            x: w.l as f64,
            y: w.partial_p,
        })
        .collect();
    let mut checks = Vec::new();
    let separated = wit.iter().all(|w| w.separated);
    checks.push(check(
        "shifted_supports_disjoint",
        separated as u8 as f64,
        "all l",
        separated,
    ));
    let disjoint = supports_disjoint(&cfg);
    checks.push(check(
        "supports_disjoint",
        disjoint as u8 as f64,
        "all k != t",
        disjoint,
    ));

    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    if xy.len() >= SLOPE_WINDOW {
        let slopes: Vec<f64> = xy
            .windows(SLOPE_WINDOW)
            .map(|w| linear_fit(w).map(|f| f.slope).unwrap_or(f64::NAN))
            .collect();
        let first = slopes[0];
        let (lo, hi) = SLOPE_RATIO_RANGE;
        let worst = slopes.iter().map(|s| s / first).fold(1.0f64, |acc, r| {
            if (r - 1.0).abs() > (acc - 1.0).abs() || r.is_nan() {
                r
            } else {
                acc
            }
        });
        let ok = first > 0.0 && slopes.iter().all(|s| (lo..=hi).contains(&(s / first)));
        checks.push(check("window_slope_ratio", worst, format!("[{lo}, {hi}]"), ok));
    }

    let block_grid = Grid::new(params.d, 8.0, 64)?;
    let template = BallFamily::new(&block_grid, Shape::Cube);
    let blocks = atomic_blocks(&cfg, params.p, &template)?;
    let first = blocks[0].1;
    let block_ratio = blocks.iter().map(|b| b.1).fold(0.0, f64::max) / first;
    checks.push(check(
        "atomic_block_ratio",
        block_ratio,
        format!("<= {BLOCK_RATIO_MAX}"),
        block_ratio <= BLOCK_RATIO_MAX,
    ));

    let profile = cfg.profile()?;
    let p0 = psi(&profile, cfg.order, params.v, params.p, TAU_FLOOR)?;
    let p1 = psi(&profile, cfg.order, params.v, params.p, 2.0 * TAU_FLOOR)?;
    let drift = (p1 - p0).abs() / p0;
    checks.push(check("psi_floor_drift", drift, "<= 0.01", drift <= 0.01));

    let (c, covered) = d_set_constant(&profile, cfg.order);
    checks.push(check(
        "d_set_constant",
        c,
        "> 0 on > half the support",
        c > 0.0 && covered > 0.5,
    ));

    let mut notes = vec![format!("atomic blocks: {blocks:?}")];
    if params.d == 1 {
        // dilation identity against grid differences for one well-resolved summand
        let g = Grid::new(1, 8.0, 8192)?;
        let (j, x0, t) = (2u32, 4.0, 0.125);
        let piece = dilated_summand(&g, &profile, j, x0)?;
        let mut dp = DiffParams::new(cfg.order, params.v, f64::INFINITY);
        dp.h_cap = usize::MAX;
        let lhs = ball_avg_difference(&piece, t, &dp)?.lp_norm(params.p);
        let d = params.d as f64;
        let scale = (-(j as f64) * d * (1.0 / params.v + 1.0 / params.p)).exp2();
        let rhs = scale * g_norm(&profile, cfg.order, params.v, params.p, (j as f64).exp2() * t)?;
        let err = (lhs - rhs).abs() / rhs;
        checks.push(check(
            "dilation_identity",
            err,
            format!("<= {DILATION_TOL}"),
            err <= DILATION_TOL,
        ));

        // the resolvable head of the sum on a grid that contains it
        let big = Grid::new(1, 32768.0, 1 << 21)?;
        let head = OswaldConfig {
            k_max: resolvable_k_max(&big, &cfg).max(1),
            ..cfg
        };
        let sampled = make_oswald(&big, &head)?;
        let exact =
            head.amplitude(1) * (-(head.level(1) as f64) * d / params.p).exp2() * profile_lp(&profile, params.p);
        let err = (sampled.lp_norm(params.p) - exact).abs() / exact;
        notes.push(format!("grid head: k_max = {} on n = {}", head.k_max, big.n()));
        checks.push(check("grid_head_lp", err, "<= 0.05", err <= 0.05));
    }
    Ok(finish(
        Scenario::Oswald,
        params,
        None,
        "witness partial^p against l",
        points,
        Verdict::Diverges,
        checks,
        notes,
    ))
}

fn profile_lp(profile: &crate::zoo::atoms::MomentProfile, p: f64) -> f64 {
    let m = 20000;
    let lo = 0.5 - profile.half_width;
    let w = 2.0 * profile.half_width;
    let dx = w / m as f64;
    let s: f64 = (0..m)
        .map(|i| profile.eval(&[lo + (i as f64 + 0.5) * dx, 0.0]).abs().powf(p) * dx)
        .sum();
    s.powf(1.0 / p)
}

/// Singular function outside its space: `log2` block values against the band index.
fn singular_run(
    params: SpaceParams,
    spec: GridSpec,
    bands: &[f64],
    alpha: f64,
    delta: f64,
) -> Result<DivergenceReport> {
    let grid = spec.build()?;
    let sf = SingularFnConfig {
        alpha,
        delta,
        theta: 0.45,
    };
    let f = make_f_alpha_delta(&grid, &sf)?;
    let k_max = bands.iter().map(|&k| k.round() as usize).max().unwrap() + 2;
    let partition = DyadicPartition::build(&grid, k_max)?;
    let family = BallFamily::new(&grid, Shape::Ball);
    let est = besov_morrey_norm(&f, &partition, params.s, params.u, params.p, params.q, &family)?;
    let points = bands
        .iter()
        .map(|&k| {
            let b = est.terms[k.round() as usize].1;
            TrajectoryPoint {
                param: k,
                partial: b,
                x: k,
                y: b.log2(),
            }
        })
        .collect();
    let mut notes = vec![format!("K_max = {k_max}; the two top bands are left out of the fit")];
    if let Some(w) = integrability_warning(&sf, params.d, params.p) {
        notes.push(w);
    }
    Ok(finish(
        Scenario::FAlphaDelta,
        params,
        Some(spec),
        "log2 block value against band index",
        points,
        Verdict::Diverges,
        Vec::new(),
        notes,
    ))
}
