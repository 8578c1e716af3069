//! Parameter tuples and the region classifier: sufficient conditions for equivalence of the
//! Fourier-analytic and difference quasi-norms, the known failure cases, and the open gaps.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceParams {
    pub d: usize,
    pub s: f64,
    pub u: f64,
    pub p: f64,
    pub q: f64,
    pub v: f64,
    #[serde(default = "infinite")]
    pub a: f64,
    /// Difference order.
    #[serde(rename = "N")]
    pub order: usize,
}

fn infinite() -> f64 {
    f64::INFINITY
}

const EPS: f64 = 1e-12;

fn eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS * (1.0 + a.abs().max(b.abs()))
}

fn lt(a: f64, b: f64) -> bool {
    a < b && !eq(a, b)
}

fn le(a: f64, b: f64) -> bool {
    a < b || eq(a, b)
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

impl SpaceParams {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.d) {
            return Err(Error::Dimension(self.d));
        }
        if !(self.p > 0.0 && self.p <= self.u && self.u.is_finite()) {
            return Err(param("need 0 < p <= u < inf"));
        }
        if !(self.q > 0.0) {
            return Err(param("need q > 0"));
        }
        if !(self.v > 0.0) {
            return Err(param("need v > 0"));
        }
        if !(self.a >= 1.0) {
            return Err(param("need 1 <= a <= inf"));
        }
        if self.order == 0 {
            return Err(param("need N >= 1"));
        }
        if !self.s.is_finite() {
            return Err(param("s must be finite"));
        }
        Ok(())
    }

    fn dim(&self) -> f64 {
        self.d as f64
    }

    /// `d max(0, 1/p - 1)`
    pub fn sigma_p(&self) -> f64 {
        self.dim() * (1.0 / self.p - 1.0).max(0.0)
    }

    /// `d max(0, 1/p - 1, 1/q - 1)`
    pub fn sigma_pq(&self) -> f64 {
        self.dim() * (1.0 / self.p - 1.0).max(recip(self.q) - 1.0).max(0.0)
    }

    /// `d max(0, 1/p - 1, 1/p - 1/v)`, the smoothness above which equivalence holds.
    pub fn equivalence_threshold(&self) -> f64 {
        self.dim() * (1.0 / self.p - 1.0).max(1.0 / self.p - recip(self.v)).max(0.0)
    }

    /// `d (p/u) (1/p - 1/w)`
    fn scaled(&self, w: f64) -> f64 {
        self.dim() * self.p / self.u * (1.0 / self.p - recip(w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    /// `s <= 0` (`a = inf`); for `a < inf`: `s < 0`, or `s = 0` with `p >= 2, q > 2` or
    /// `1 <= p < 2, q > p`.
    I,
    /// `p < 1`, `s < d (p/u)(1/p - 1)`.
    IIa,
    /// `p < 1`, `s = d (p/u)(1/p - 1)`, `q > 1`.
    IIb,
    /// `p < v < inf`, `s < d (p/u)(1/p - 1/v)`.
    III,
    /// `N < s`.
    IVa,
    /// `N = s`, `q < inf`.
    IVb,
    /// `N = s`, `q = inf`, `u = p`, `v >= 1`.
    IVc,
    /// `s = 0`, `a < inf`, and `p >= 2, q <= 2` or `1 <= p < 2, q <= p`.
    OpenI,
    /// `d (p/u)(1/p - 1) < s <= d (1/p - 1)`, `p < 1`, `v <= 1`.
    OpenII,
    /// `d (p/u)(1/p - 1/v) <= s <= d (1/p - 1/v)`, `v > max(1, p)`.
    OpenIII,
    /// `N = s`, `q = inf`, `p < u`.
    OpenIV,
    /// Covered neither by the sufficient conditions, nor a failure case, nor the open list.
    Uncovered,
}

impl CaseTag {
    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::I => "i",
            CaseTag::IIa => "ii-a",
            CaseTag::IIb => "ii-b",
            CaseTag::III => "iii",
            CaseTag::IVa => "iv-a",
            CaseTag::IVb => "iv-b",
            CaseTag::IVc => "iv-c",
            CaseTag::OpenI => "open-i",
            CaseTag::OpenII => "open-ii",
            CaseTag::OpenIII => "open-iii",
            CaseTag::OpenIV => "open-iv",
            CaseTag::Uncovered => "uncovered",
        }
    }

    pub fn citation(&self) -> &'static str {
        match self {
            CaseTag::I => "necessary s > 0: s <= 0 (a = inf); s < 0 or s = 0 with large q (any a)",
            CaseTag::IIa => "singular distributions: p < 1, s < d(p/u)(1/p - 1)",
            CaseTag::IIb => "singular distributions: p < 1, s = d(p/u)(1/p - 1), q > 1",
            CaseTag::III => "p < v: s < d(p/u)(1/p - 1/v)",
            CaseTag::IVa => "order too small: N < s",
            CaseTag::IVb => "order too small: N = s, q < inf",
            CaseTag::IVc => "lacunary sum: N = s, q = inf, u = p, v >= 1",
            CaseTag::OpenI => "open: s = 0, a < inf, small q",
            CaseTag::OpenII => "open: p < 1, v <= 1, d(p/u)(1/p - 1) < s <= d(1/p - 1)",
            CaseTag::OpenIII => "open: v > max(1,p), d(p/u)(1/p - 1/v) <= s <= d(1/p - 1/v)",
            CaseTag::OpenIV => "open: N = s, q = inf, p < u",
            CaseTag::Uncovered => "not covered by any listed case",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "tag")]
pub enum Region {
    Equivalent,
    NotEquivalent(CaseTag),
    Open(CaseTag),
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::Equivalent => "equivalent",
            Region::NotEquivalent(_) => "not-equivalent",
            Region::Open(_) => "open",
        }
    }

    pub fn tag(&self) -> Option<CaseTag> {
        match self {
            Region::Equivalent => None,
            Region::NotEquivalent(t) | Region::Open(t) => Some(*t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub region: Region,
    pub citation: String,
    /// Every failure case that applies, in order.
    pub matching: Vec<CaseTag>,
}

/// All failure cases that apply, lowest first.
pub fn failure_cases(x: &SpaceParams) -> Vec<CaseTag> {
    let mut out = Vec::new();
    let s = x.s;
    let n = x.order as f64;
    let finite_a = x.a.is_finite();
    let s_zero_large_q =
        eq(s, 0.0) && ((x.p >= 2.0 && x.q > 2.0 && !eq(x.q, 2.0)) || (x.p >= 1.0 && x.p < 2.0 && lt(x.p, x.q)));
    if lt(s, 0.0) || (eq(s, 0.0) && !finite_a) || s_zero_large_q {
        out.push(CaseTag::I);
    }
    if x.p < 1.0 {
        let edge = x.scaled(1.0);
        if lt(s, edge) {
            out.push(CaseTag::IIa);
        } else if eq(s, edge) && lt(1.0, x.q) {
            out.push(CaseTag::IIb);
        }
    }
    if x.p < x.v && x.v.is_finite() && lt(s, x.scaled(x.v)) {
        out.push(CaseTag::III);
    }
    if lt(n, s) {
        out.push(CaseTag::IVa);
    } else if eq(n, s) {
        if x.q.is_finite() {
            out.push(CaseTag::IVb);
        } else if eq(x.u, x.p) && x.v >= 1.0 {
            out.push(CaseTag::IVc);
        }
    }
    out
}

fn open_case(x: &SpaceParams) -> Option<CaseTag> {
    let s = x.s;
    let n = x.order as f64;
    if eq(s, 0.0) && x.a.is_finite() && ((x.p >= 2.0 && le(x.q, 2.0)) || (x.p >= 1.0 && x.p < 2.0 && le(x.q, x.p))) {
        return Some(CaseTag::OpenI);
    }
    if x.p < 1.0 && x.v <= 1.0 && lt(x.scaled(1.0), s) && le(s, x.dim() * (1.0 / x.p - 1.0)) {
        return Some(CaseTag::OpenII);
    }
    if x.v > x.p.max(1.0) && le(x.scaled(x.v), s) && le(s, x.dim() * (1.0 / x.p - recip(x.v))) {
        return Some(CaseTag::OpenIII);
    }
    if eq(n, s) && x.q.is_infinite() && x.p < x.u && !eq(x.p, x.u) {
        return Some(CaseTag::OpenIV);
    }
    None
}

/// Total classification of a valid parameter tuple.  Failure cases take precedence and the
/// lowest applicable tag is reported.
pub fn classify(x: &SpaceParams) -> Result<RegionVerdict> {
    x.validate()?;
    let matching = failure_cases(x);
    let region = if let Some(&first) = matching.first() {
        Region::NotEquivalent(first)
    } else if lt(x.equivalence_threshold(), x.s) && lt(x.s, x.order as f64) {
        Region::Equivalent
    } else {
        Region::Open(open_case(x).unwrap_or(CaseTag::Uncovered))
    };
    let citation = match region.tag() {
        None => "sufficient: s > d max(0, 1/p - 1, 1/p - 1/v) and N > s".to_string(),
        Some(t) => t.citation().to_string(),
    };
    Ok(RegionVerdict {
        region,
        citation,
        matching,
    })
}
