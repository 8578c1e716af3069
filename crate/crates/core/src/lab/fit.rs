//! Least-squares growth fits and the divergence verdict rule.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope x + intercept`; `None` with fewer than two distinct abscissae.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<LinearFit> {
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
        points: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Diverges,
    Convergent,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Diverges => "diverges",
            Verdict::Convergent => "convergent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

pub const MIN_POINTS: usize = 5;
pub const MIN_R2: f64 = 0.9;
/// Growth counts as sustained when the late half-window slope keeps at least this share of the
/// early one.
pub const SUSTAIN_RATIO: f64 = 0.5;
/// Growth counts as saturating when the late slope falls below this share of the early one.
pub const SATURATE_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub fit: Option<LinearFit>,
    pub head_slope: f64,
    pub tail_slope: f64,
    pub verdict: Verdict,
}

/// Fits `pts` (divergence parameter, partial value) and classifies the trajectory.
///
/// Diverges: positive slope, `R^2 >= 0.9`, at least five points, and sustained growth.
/// Convergent: the late slope collapses relative to the early one, or the trajectory is flat
/// or falling.  Anything else is inconclusive.
pub fn growth_verdict(pts: &[(f64, f64)]) -> GrowthFit {
    let fit = linear_fit(pts);
    let n = pts.len();
    if n < MIN_POINTS || fit.is_none() {
        return GrowthFit {
            fit,
            head_slope: f64::NAN,
            tail_slope: f64::NAN,
            verdict: Verdict::Inconclusive,
        };
    }
    let fit = fit.unwrap();
    let half = n.div_ceil(2);
    let head = linear_fit(&pts[..half]).map(|f| f.slope).unwrap_or(0.0);
    let tail = linear_fit(&pts[n - half..]).map(|f| f.slope).unwrap_or(0.0);
    let scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let flat = |s: f64| s.abs() <= 1e-12 * scale;
    let sustained = head > 0.0 && !flat(head) && tail >= SUSTAIN_RATIO * head;
    let verdict = if fit.slope > 0.0 && fit.r2 >= MIN_R2 && sustained {
        Verdict::Diverges
    } else if (head > 0.0 && tail <= SATURATE_RATIO * head)
        || (head <= 0.0 || flat(head)) && (tail <= 0.0 || flat(tail))
    {
        Verdict::Convergent
    } else {
        Verdict::Inconclusive
    };
    GrowthFit {
        fit: Some(fit),
        head_slope: head,
        tail_slope: tail,
        verdict,
    }
}
