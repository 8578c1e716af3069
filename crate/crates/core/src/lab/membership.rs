//! Membership scans for `f_{alpha,delta}`: the sign of the block slope against the membership
//! table, across a range of smoothness values.

use serde::{Deserialize, Serialize};

use crate::bands::{besov_morrey_norm, block_slope, DyadicPartition};
use crate::error::{param, Result};
use crate::lab::config::MembershipConfig;
use crate::lab::report::Status;
use crate::morrey::{BallFamily, Shape};
use crate::zoo::singular::{
    integrability_warning, make_f_alpha_delta, membership_oracle, Membership, SingularFnConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipRow {
    pub s: f64,
    pub slope: f64,
    pub measured: Membership,
    pub oracle: Membership,
    pub boundary_excluded: bool,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub config: MembershipConfig,
    pub threshold: f64,
    /// Slope of `log2 ‖P_k f | M^u_p‖` over the window, i.e. the block slope at `s = 0`.
    pub base_slope: f64,
    pub blocks: Vec<(f64, f64)>,
    pub rows: Vec<MembershipRow>,
    pub compared: usize,
    pub agreement: f64,
    pub warning: Option<String>,
    pub status: Status,
}

/// Runs the scan.  Blocks are computed once at `s = 0`; the slope at `s` is the base slope plus
/// `s`.  A negative slope over the window reads as membership.
pub fn run_membership_scan(cfg: &MembershipConfig) -> Result<MembershipReport> {
    let grid = cfg.grid.build()?;
    if grid.dim() != cfg.d {
        return Err(param("grid dimension differs from d"));
    }
    let (lo, hi) = cfg.window;
    if !(lo < hi && hi <= cfg.k_max) {
        return Err(param("slope window must satisfy lo < hi <= K_max"));
    }
    if cfg.s_values.is_empty() {
        return Err(param("empty s scan"));
    }
    let sf = SingularFnConfig {
        alpha: cfg.alpha,
        delta: cfg.delta,
        theta: cfg.theta,
    };
    let f = make_f_alpha_delta(&grid, &sf)?;
    let partition = DyadicPartition::build(&grid, cfg.k_max)?;
    let family = BallFamily::new(&grid, Shape::Ball);
    let est = besov_morrey_norm(&f, &partition, 0.0, cfg.u, cfg.p, cfg.q, &family)?;
    let base_slope = block_slope(&est, lo, hi).ok_or_else(|| param("too few nonzero blocks in the window"))?;
    let threshold = cfg.d as f64 / cfg.u + cfg.alpha;
    let rows = cfg
        .s_values
        .iter()
        .map(|&s| {
            let oracle = membership_oracle(cfg.d, s, cfg.u, cfg.p, cfg.q, cfg.alpha, cfg.delta)?;
            let slope = base_slope + s;
            let measured = if slope < 0.0 {
                Membership::Member
            } else {
                Membership::NotMember
            };
            let boundary_excluded = (s - threshold).abs() <= cfg.boundary + 1e-12;
            Ok(MembershipRow {
                s,
                slope,
                measured,
                oracle,
                boundary_excluded,
                agree: measured == oracle,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let compared = rows.iter().filter(|r| !r.boundary_excluded).count();
    let agreeing = rows.iter().filter(|r| !r.boundary_excluded && r.agree).count();
    let agreement = if compared == 0 {
        f64::NAN
    } else {
        agreeing as f64 / compared as f64
    };
    let status = if compared == 0 {
        Status::Inconclusive
    } else if agreeing == compared {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(MembershipReport {
        config: cfg.clone(),
        threshold,
        base_slope,
        blocks: est.terms,
        rows,
        compared,
        agreement,
        warning: integrability_warning(&sf, cfg.d, cfg.p),
        status,
    })
}
