//! Reports: fixed-schema tables, plot-ready series, a run manifest, and exit codes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lab::config::LabConfig;
use crate::lab::divergence::DivergenceReport;
use crate::lab::equivalence::EquivalenceReport;
use crate::lab::membership::MembershipReport;
use crate::lab::params::{RegionVerdict, SpaceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// 2 if anything failed, else 3 if anything was inconclusive, else 0.
pub fn exit_code<I: IntoIterator<Item = Status>>(statuses: I) -> i32 {
    let mut code = EXIT_PASS;
    for s in statuses {
        match s {
            Status::Fail => return EXIT_FAIL,
            Status::Inconclusive => code = EXIT_INCONCLUSIVE,
            Status::Pass => {}
        }
    }
    code
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub rows: Vec<(SpaceParams, RegionVerdict)>,
}

#[derive(Debug, Clone, Serialize)]
struct ClassifyRow<'a> {
    d: usize,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    v: f64,
    a: f64,
    #[serde(rename = "N")]
    order: usize,
    verdict: &'a str,
    tag: &'a str,
    matching: String,
    citation: &'a str,
}

#[derive(Debug, Clone, Serialize)]
struct MembershipCsvRow {
    s: f64,
    slope: f64,
    measured: &'static str,
    oracle: &'static str,
    boundary_excluded: bool,
    agree: bool,
}

#[derive(Debug, Clone, Serialize)]
struct SeriesRow {
    x: f64,
    y: f64,
}

/// Serializes rows with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Report(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
}

fn to_json<T: Serialize + ?Sized>(x: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(x).map_err(|e| Error::Report(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn membership_label(m: crate::zoo::singular::Membership) -> &'static str {
    match m {
        crate::zoo::singular::Membership::Member => "member",
        crate::zoo::singular::Membership::NotMember => "not-member",
    }
}

/// Any finished experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    Classify(ClassifyReport),
    Equivalence(EquivalenceReport),
    Divergence(DivergenceReport),
    Membership(MembershipReport),
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Classify(_) => "classify",
            Outcome::Equivalence(_) => "equivalence",
            Outcome::Divergence(_) => "divergence",
            Outcome::Membership(_) => "membership",
        }
    }

    pub fn name(&self) -> String {
        match self {
            Outcome::Classify(_) => "classify".into(),
            Outcome::Equivalence(r) => format!("equivalence-{}", r.config.pair.name()),
            Outcome::Divergence(r) => format!("divergence-{}", r.scenario.name()),
            Outcome::Membership(_) => "membership".into(),
        }
    }

    pub fn status(&self) -> Status {
        match self {
            Outcome::Classify(_) => Status::Pass,
            Outcome::Equivalence(r) => r.status,
            Outcome::Divergence(r) => r.status,
            Outcome::Membership(r) => r.status,
        }
    }

    /// The fixed-schema table.
    pub fn table(&self, format: Format) -> Result<String> {
        if format == Format::Json {
            return to_json(self);
        }
        match self {
            Outcome::Classify(r) => {
                let rows: Vec<ClassifyRow> = r
                    .rows
                    .iter()
                    .map(|(x, v)| ClassifyRow {
                        d: x.d,
                        s: x.s,
                        u: x.u,
                        p: x.p,
                        q: x.q,
                        v: x.v,
                        a: x.a,
                        order: x.order,
                        verdict: v.region.name(),
                        tag: v.region.tag().map(|t| t.label()).unwrap_or(""),
                        matching: v.matching.iter().map(|t| t.label()).collect::<Vec<_>>().join(" "),
                        citation: &v.citation,
                    })
                    .collect();
                to_csv(&rows)
            }
            Outcome::Equivalence(r) => to_csv(&r.rows),
            Outcome::Divergence(r) => to_csv(&r.rows()),
            Outcome::Membership(r) => {
                let rows: Vec<MembershipCsvRow> = r
                    .rows
                    .iter()
                    .map(|x| MembershipCsvRow {
                        s: x.s,
                        slope: x.slope,
                        measured: membership_label(x.measured),
                        oracle: membership_label(x.oracle),
                        boundary_excluded: x.boundary_excluded,
                        agree: x.agree,
                    })
                    .collect();
                to_csv(&rows)
            }
        }
    }

    /// Plot-ready `(x, y)` series: partial trajectories and block profiles.
    pub fn series(&self) -> Vec<(String, Vec<(f64, f64)>)> {
        match self {
            Outcome::Classify(_) => Vec::new(),
            Outcome::Equivalence(r) => vec![(
                "ratio".into(),
                r.rows.iter().map(|x| (x.index as f64, x.ratio)).collect(),
            )],
            Outcome::Divergence(r) => vec![("partials".into(), r.series())],
            Outcome::Membership(r) => vec![("blocks".into(), r.blocks.clone())],
        }
    }

    /// Headline numbers for the manifest.
    pub fn summary(&self) -> Value {
        match self {
            Outcome::Classify(r) => json!({ "tuples": r.rows.len() }),
            Outcome::Equivalence(r) => json!({
                "pair": r.config.pair.name(),
                "functions": r.rows.len(),
                "excluded": r.excluded,
                "min_ratio": r.min_ratio,
                "max_ratio": r.max_ratio,
                "median_ratio": r.median_ratio,
                "spread": r.spread,
                "max_change": r.max_change,
                "seed": r.seed,
                "ball_family": r.family,
                "ladder": r.diff_params,
            }),
            Outcome::Divergence(r) => json!({
                "scenario": r.scenario.name(),
                "law": r.law,
                "verdict": r.growth.verdict.as_str(),
                "expected": r.expected.as_str(),
                "slope": r.growth.fit.map(|f| f.slope),
                "r2": r.growth.fit.map(|f| f.r2),
                "head_slope": r.growth.head_slope,
                "tail_slope": r.growth.tail_slope,
                "params": r.params,
                "grid": r.grid,
                "checks": r.checks,
                "notes": r.notes,
            }),
            Outcome::Membership(r) => json!({
                "threshold": r.threshold,
                "base_slope": r.base_slope,
                "compared": r.compared,
                "agreement": r.agreement,
                "warning": r.warning,
                "grid": r.config.grid,
                "k_max": r.config.k_max,
                "window": r.config.window,
            }),
        }
    }
}

/// Fixed constants that shape every estimate.
pub fn constants() -> Value {
    use crate::bands::{PROFILE_EDGE, PROFILE_PLATEAU};
    use crate::diffnorm::DEFAULT_H_CAP;
    use crate::lab::fit::{MIN_POINTS, MIN_R2, SATURATE_RATIO, SUSTAIN_RATIO};
    use crate::morrey::{DEFAULT_LOG2_RATIO, DEFAULT_STRIDE, MAX_REFINEMENTS};
    json!({
        "profile": { "plateau": PROFILE_PLATEAU, "edge": PROFILE_EDGE, "step": "exp(-1/t) glue" },
        "ball_family": { "stride": DEFAULT_STRIDE, "log2_ratio": DEFAULT_LOG2_RATIO, "max_refinements": MAX_REFINEMENTS },
        "difference_ladder": { "log2_ratio": 1.0, "h_cap": DEFAULT_H_CAP, "floor": "2 dx" },
        "verdict": {
            "min_points": MIN_POINTS,
            "min_r2": MIN_R2,
            "sustain_ratio": SUSTAIN_RATIO,
            "saturate_ratio": SATURATE_RATIO,
        },
    })
}

/// Writes `manifest.json`, one table per experiment and the series files into `out`, and returns
/// the exit code.
pub fn emit_report(outcomes: &[Outcome], config: &LabConfig, out: &Path, format: Format) -> Result<i32> {
    std::fs::create_dir_all(out)?;
    let mut entries = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        let stem = format!("{i:02}-{}", o.name());
        let table: PathBuf = out.join(format!("{stem}.{}", format.extension()));
        std::fs::write(&table, o.table(format)?)?;
        let mut files = vec![file_name(&table)];
        for (label, pts) in o.series() {
            let path = out.join(format!("{stem}.{label}.series.csv"));
            let rows: Vec<SeriesRow> = pts.into_iter().map(|(x, y)| SeriesRow { x, y }).collect();
            std::fs::write(&path, to_csv(&rows)?)?;
            files.push(file_name(&path));
        }
        entries.push(json!({
            "name": o.name(),
            "kind": o.kind(),
            "status": o.status().as_str(),
            "files": files,
            "summary": o.summary(),
        }));
    }
    let code = exit_code(outcomes.iter().map(|o| o.status()));
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "config": config,
        "constants": constants(),
        "format": format.extension(),
        "experiments": entries,
        "exit_code": code,
    });
    std::fs::write(out.join("manifest.json"), to_json(&manifest)?)?;
    Ok(code)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
