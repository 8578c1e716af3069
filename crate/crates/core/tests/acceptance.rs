//! Acceptance suite.  Prints one line per criterion and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use bmlab_core::bands::DyadicPartition;
use bmlab_core::diffnorm::{finite_difference, recursive_difference};
use bmlab_core::grid::{Grid, SampledFunction};
use bmlab_core::lab::config::{DivergenceConfig, EquivalenceConfig, LabConfig, MembershipConfig, Scenario};
use bmlab_core::lab::divergence::{run_divergence_experiment, DivergenceReport};
use bmlab_core::lab::equivalence::run_equivalence_experiment;
use bmlab_core::lab::fit::Verdict;
use bmlab_core::lab::membership::run_membership_scan;
use bmlab_core::lab::params::{classify, CaseTag, Region, SpaceParams};
use bmlab_core::lab::report::{emit_report, Format, Status};
use bmlab_core::lab::run_all;
use bmlab_core::morrey::{morrey_norm, BallFamily, Shape};
use bmlab_core::zoo::bumps::{make_plateau_bump, make_seeded_smooth};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn c1_partition() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, r, n) in [(1usize, 8.0, 4096usize), (2, 2.0, 512)] {
        let g = Grid::new(d, r, n).unwrap();
        worst = worst.max(DyadicPartition::build(&g, 8).unwrap().unity_residual());
    }
    (
        worst <= 1e-8,
        format!("max |sum phi_k - 1| = {worst:.2e} (<= 1e-8), K = 8, d = 1, 2"),
    )
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn c2_differences() -> Outcome {
    let g1 = Grid::new(1, 8.0, 4096).unwrap();
    let g2 = Grid::new(2, 16.0, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // error against the scale of the binomial sum, 2^N max |f|; the error against max |Delta f|
    // is reported alongside, it mostly measures cancellation at small |h|.
    let mut worst: f64 = 0.0;
    let mut out_rel: f64 = 0.0;
    for seed in 0..100u64 {
        let g = if seed < 80 { g1 } else { g2 };
        let f = make_seeded_smooth(&g, seed).unwrap();
        let dx = g.spacing();
        for order in 1..=5 {
            let h = [
                rng.gen_range(1i32..=12) as f64 * dx * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                if g.dim() == 2 {
                    rng.gen_range(-12i32..=12) as f64 * dx
                } else {
                    0.0
                },
            ];
            let a = finite_difference(&f, &h, order).unwrap();
            let b = recursive_difference(&f, &h, order).unwrap();
            let err = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            worst = worst.max(err / ((order as f64).exp2() * max_abs(f.values())));
            out_rel = out_rel.max(err / max_abs(b.values()));
        }
    }
    let g = Grid::new(1, 8.0, 4096).unwrap();
    let plateau = make_plateau_bump(&g).unwrap();
    let mut poly_worst: f64 = 0.0;
    for order in 1..=5usize {
        let coef: Vec<f64> = (0..order)
            .map(|j| (j as f64 + 1.0) / 3.0 * if j % 2 == 0 { 1.0 } else { -1.7 })
            .collect();
        let vals = plateau
            .values()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let x = g.coord(i);
                p * coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
            })
            .collect();
        let f = SampledFunction::new(g, vals, 2.0).unwrap();
        let h = 3.0 * g.spacing();
        let diff = finite_difference(&f, &[h, 0.0], order).unwrap();
        for i in 0..g.len() {
            let x = g.coord(i);
            if x > -1.0 && x + order as f64 * h < 1.0 {
                poly_worst = poly_worst.max(diff.values()[i].norm());
            }
        }
    }
    (
        worst <= 1e-12 && poly_worst <= 1e-10,
        format!(
            "binomial vs recursive rel {worst:.2e} (<= 1e-12; vs max|Delta f| {out_rel:.2e}), polynomial residual {poly_worst:.2e} (<= 1e-10)"
        ),
    )
}

fn c3_morrey() -> Outcome {
    let g = Grid::new(1, 8.0, 4096).unwrap();
    let fam = BallFamily::new(&g, Shape::Ball);
    let ps = [1.0, 1.5, 2.0, 3.0];
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let f = make_seeded_smooth(&g, 100 + seed).unwrap();
        let p = ps[seed as usize % ps.len()];
        let est = morrey_norm(&f, p, p, &fam).unwrap().value;
        worst = worst.max((est / f.lp_norm(p) - 1.0).abs());
    }
    let cube = BallFamily::new(&g, Shape::Cube);
    let mut cube_worst: f64 = 0.0;
    for (j, k, u, p) in [
        (0i32, 0i64, 2.0, 1.0),
        (2, 1, 3.0, 2.0),
        (-1, -1, 2.0, 2.0),
        (1, -2, 4.0, 1.5),
    ] {
        let side = (-(j as f64)).exp2();
        let lo = k as f64 * side;
        let amp = (j as f64 / u).exp2();
        let f = SampledFunction::from_real(g, lo.abs().max((lo + side).abs()), |x| {
            if x[0] >= lo && x[0] < lo + side {
                amp
            } else {
                0.0
            }
        })
        .unwrap();
        cube_worst = cube_worst.max((morrey_norm(&f, u, p, &cube).unwrap().value - 1.0).abs());
    }
    let g2 = Grid::new(2, 4.0, 256).unwrap();
    let cube2 = BallFamily::new(&g2, Shape::Cube);
    let amp = (2.0f64 / 3.0).exp2();
    let f = SampledFunction::from_real(g2, 1.0, |x| {
        if (0.0..0.5).contains(&x[0]) && (0.0..0.5).contains(&x[1]) {
            amp
        } else {
            0.0
        }
    })
    .unwrap();
    cube_worst = cube_worst.max((morrey_norm(&f, 3.0, 1.5, &cube2).unwrap().value - 1.0).abs());
    (
        worst <= 0.03 && cube_worst <= 0.05,
        format!(
            "p = u vs L_p max rel {worst:.2e} (<= 0.03), cube indicators max |norm - 1| {cube_worst:.2e} (<= 0.05)"
        ),
    )
}

fn c4_equivalence() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for cfg in [EquivalenceConfig::default(), EquivalenceConfig::modulus()] {
        let r = run_equivalence_experiment(&cfg, 7).unwrap();
        let pass = r.status == Status::Pass && r.spread <= 50.0 && r.max_change <= 0.10 && r.rows.len() == 20;
        ok &= pass;
        parts.push(format!(
            "{} s={} spread {:.3} (<= 50) max change {:.4} (<= 0.10)",
            cfg.pair.name(),
            cfg.params.s,
            r.spread,
            r.max_change
        ));
    }
    (ok, parts.join("; "))
}

fn fit_text(r: &DivergenceReport) -> String {
    match r.growth.fit {
        Some(f) => format!("slope {:.4} R2 {:.5}", f.slope, f.r2),
        None => "no fit".into(),
    }
}

fn c5_plateau() -> Outcome {
    let p = run_divergence_experiment(&DivergenceConfig::new(Scenario::PlateauS0)).unwrap();
    let c = run_divergence_experiment(&DivergenceConfig::new(Scenario::Control)).unwrap();
    let fit_ok = p.growth.fit.map(|f| f.slope > 0.0 && f.r2 >= 0.9).unwrap_or(false);
    let ok = fit_ok && p.status == Status::Pass && c.verdict() == Verdict::Convergent;
    (
        ok,
        format!(
            "plateau {} -> {}; control -> {}",
            fit_text(&p),
            p.verdict().as_str(),
            c.verdict().as_str()
        ),
    )
}

fn checks_text(r: &DivergenceReport) -> String {
    r.checks
        .iter()
        .map(|c| format!("{}={:.4}{}", c.name, c.value, if c.pass { "" } else { "(x)" }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn c6_oswald() -> Outcome {
    let r = run_divergence_experiment(&DivergenceConfig::new(Scenario::Oswald)).unwrap();
    let ok = r.status == Status::Pass && r.verdict() == Verdict::Diverges && r.checks.iter().all(|c| c.pass);
    (
        ok,
        format!("{} -> {}; {}", fit_text(&r), r.verdict().as_str(), checks_text(&r)),
    )
}

fn c7_exp_bump() -> Outcome {
    let r = run_divergence_experiment(&DivergenceConfig::new(Scenario::ExpBump)).unwrap();
    let halvings = r.points.len().saturating_sub(1);
    let ok = r.status == Status::Pass && halvings >= 5 && r.checks.iter().all(|c| c.pass);
    (ok, format!("{halvings} halvings (>= 5); {}", checks_text(&r)))
}

fn c8_membership() -> Outcome {
    let r = run_membership_scan(&MembershipConfig::default()).unwrap();
    let compared: Vec<_> = r.rows.iter().filter(|x| !x.boundary_excluded).collect();
    let flagged: Vec<_> = r.rows.iter().filter(|x| x.boundary_excluded).map(|x| x.s).collect();
    let agree = compared.iter().filter(|x| x.agree).count();
    let straddle = compared.iter().any(|x| x.s < r.threshold) && compared.iter().any(|x| x.s > r.threshold);
    let ok = compared.len() == 4 && agree == 4 && straddle && flagged.contains(&r.threshold);
    (
        ok,
        format!(
            "{agree}/{} agree, threshold {}, base slope {:.4}, boundary flagged at {:?}",
            compared.len(),
            r.threshold,
            r.base_slope,
            flagged
        ),
    )
}

const INF: f64 = f64::INFINITY;

/// `(d, s, u, p, q, v, a, N)` and the expected verdict, worked out by hand.
fn table() -> Vec<([f64; 8], Region)> {
    use CaseTag::*;
    use Region::{Equivalent as Eq, NotEquivalent as No, Open};
    vec![
        ([1.0, -0.5, 2.0, 1.5, 2.0, 2.0, INF, 2.0], No(I)),
        ([1.0, 1.5, 2.0, 1.5, 2.0, 2.0, INF, 2.0], Eq),
        ([1.0, 0.7, 1.0, 0.5, 2.0, 1.0, INF, 2.0], Open(OpenII)),
        ([1.0, 0.0, 2.0, 2.0, 2.0, 2.0, INF, 1.0], No(I)),
        ([2.0, 0.0, 2.0, 2.0, 3.0, 2.0, 4.0, 1.0], No(I)),
        ([1.0, 0.0, 3.0, 1.5, 2.0, 2.0, 2.0, 1.0], No(I)),
        ([1.0, 0.0, 2.0, 2.0, 2.0, 2.0, 4.0, 1.0], Open(OpenI)),
        ([1.0, 0.0, 3.0, 1.5, 1.0, 1.5, 1.0, 2.0], Open(OpenI)),
        ([1.0, 0.2, 1.0, 0.5, 2.0, 1.0, INF, 2.0], No(IIa)),
        ([1.0, 0.5, 1.0, 0.5, 2.0, 1.0, INF, 2.0], No(IIb)),
        ([1.0, 0.5, 1.0, 0.5, 1.0, 1.0, INF, 2.0], Open(Uncovered)),
        ([1.0, 0.5, 2.0, 1.0, 2.0, 3.0, INF, 2.0], Open(OpenIII)),
        ([1.0, 0.2, 2.0, 1.0, 2.0, 3.0, INF, 2.0], No(III)),
        ([2.0, 1.0, 4.0, 2.0, 2.0, 4.0, INF, 2.0], Eq),
        ([1.0, 3.0, 2.0, 2.0, 2.0, 2.0, INF, 2.0], No(IVa)),
        ([1.0, 2.0, 2.0, 2.0, 2.0, 2.0, INF, 2.0], No(IVb)),
        ([1.0, 1.0, 2.0, 2.0, INF, 1.0, INF, 1.0], No(IVc)),
        ([1.0, 1.0, 3.0, 2.0, INF, 1.0, INF, 1.0], Open(OpenIV)),
        ([1.0, 1.0, 2.0, 2.0, INF, 0.5, INF, 1.0], Open(Uncovered)),
        ([1.0, -1.0, 2.0, 0.5, 2.0, 1.0, INF, 1.0], No(I)),
        ([1.0, 2.5, 2.0, 0.5, 2.0, 1.0, INF, 2.0], No(IVa)),
        ([1.0, 1.5, 2.0, 0.5, 2.0, 0.5, INF, 2.0], Eq),
        ([1.0, 1.5, 2.0, 1.5, 2.0, 2.0, 1.0, 2.0], Eq),
        ([2.0, 0.8, 3.0, 2.0, 1.0, INF, 5.0, 1.0], Open(OpenIII)),
        ([1.0, 0.1, 2.0, 0.8, 2.0, 0.9, INF, 1.0], No(IIb)),
        ([1.0, 0.15, 2.0, 0.8, 2.0, 0.9, INF, 1.0], Open(OpenII)),
        ([1.0, 0.3, 2.0, 0.8, 2.0, 0.9, INF, 1.0], Eq),
        ([2.0, 1.0, 2.0, 1.0, 1.0, 1.0, INF, 1.0], No(IVb)),
        ([2.0, 0.0, 2.0, 1.0, 0.5, 1.0, 3.0, 3.0], Open(OpenI)),
        ([1.0, 0.05, 4.0, 1.0, 2.0, 2.0, INF, 1.0], No(III)),
    ]
}

fn tuple(t: &[f64; 8]) -> SpaceParams {
    SpaceParams {
        d: t[0] as usize,
        s: t[1],
        u: t[2],
        p: t[3],
        q: t[4],
        v: t[5],
        a: t[6],
        order: t[7] as usize,
    }
}

fn c9_classifier() -> Outcome {
    let rows = table();
    let mut misses = Vec::new();
    for (i, (t, want)) in rows.iter().enumerate() {
        let got = classify(&tuple(t)).unwrap().region;
        if got != *want {
            misses.push(format!("#{}: {got:?} != {want:?}", i + 1));
        }
    }
    let tags: std::collections::BTreeSet<_> = rows.iter().filter_map(|(_, r)| r.tag()).collect();
    let branches = rows.iter().any(|(t, r)| *r == Region::Equivalent && t[6].is_finite())
        && rows.iter().any(|(t, r)| *r == Region::Equivalent && t[6].is_infinite());
    let ok = misses.is_empty() && rows.len() == 30 && tags.len() == 12 && branches;
    (
        ok,
        format!(
            "{}/{} tuples match, {} distinct tags, both a branches {}{}",
            rows.len() - misses.len(),
            rows.len(),
            tags.len(),
            branches,
            if misses.is_empty() {
                String::new()
            } else {
                format!("; {}", misses.join(", "))
            }
        ),
    )
}

fn run_to_dir(cfg: &LabConfig, dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let outcomes = run_all(cfg).unwrap();
    emit_report(&outcomes, cfg, dir, Format::Csv).unwrap();
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn c10_determinism() -> Outcome {
    let cfg = LabConfig {
        seed: 11,
        classify: table().iter().map(|(t, _)| tuple(t)).collect(),
        equivalence: vec![EquivalenceConfig::default()],
        divergence: vec![
            DivergenceConfig::new(Scenario::Control),
            DivergenceConfig::new(Scenario::ExpBump),
        ],
        membership: vec![MembershipConfig::default()],
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = run_to_dir(&cfg, a.path());
    let fb = run_to_dir(&cfg, b.path());
    let csv = fa.iter().filter(|(n, _)| n.ends_with(".csv")).count();
    let ok = fa == fb && csv > 0;
    (
        ok,
        format!(
            "{} files ({csv} csv) byte-identical across reruns: {}",
            fa.len(),
            fa == fb
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("partition of unity", c1_partition),
        ("difference algebra", c2_differences),
        ("morrey consistency", c3_morrey),
        ("equivalence window", c4_equivalence),
        ("plateau divergence", c5_plateau),
        ("lacunary divergence", c6_oswald),
        ("exponential-bump divergence", c7_exp_bump),
        ("membership boundary", c8_membership),
        ("classifier fidelity", c9_classifier),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
