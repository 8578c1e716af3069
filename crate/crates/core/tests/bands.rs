use bmlab_core::bands::{
    band_project, band_projections, besov_morrey_norm, block_slope, phi_k, spectrum, DyadicPartition,
};
use bmlab_core::grid::{Grid, SampledFunction};
use bmlab_core::morrey::{morrey_norm, BallFamily, Shape};
use bmlab_core::zoo::bumps::make_seeded_smooth;
use bmlab_core::zoo::singular::{make_f_alpha_delta, SingularFnConfig};
use num_complex::Complex64;

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn unity_in_two_dimensions() {
    let g = Grid::new(2, 2.0, 512).unwrap();
    let part = DyadicPartition::build(&g, 8).unwrap();
    assert!(part.unity_residual() <= 1e-8);
}

#[test]
fn zero_projects_to_zero() {
    let g = Grid::new(1, 8.0, 1024).unwrap();
    let part = DyadicPartition::build(&g, 6).unwrap();
    let z = SampledFunction::zeros(g);
    for k in 0..=6 {
        assert!(band_project(&z, &part, k)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.norm() == 0.0));
    }
    let fam = BallFamily::new(&g, Shape::Ball);
    assert_eq!(
        besov_morrey_norm(&z, &part, 1.0, 2.0, 1.0, 2.0, &fam).unwrap().value,
        0.0
    );
}

#[test]
fn blocks_reassemble_band_limited_functions() {
    // seeded functions carry frequencies up to 8 < 2^(K-1) = 128.
    let g = Grid::new(1, 8.0, 4096).unwrap();
    let part = DyadicPartition::build(&g, 8).unwrap();
    for seed in 0..3 {
        let f = make_seeded_smooth(&g, seed).unwrap();
        let blocks = band_projections(&f, &part).unwrap();
        let mut sum = vec![Complex64::new(0.0, 0.0); g.len()];
        for b in &blocks {
            for (s, v) in sum.iter_mut().zip(b.values()) {
                *s += v;
            }
        }
        assert!(rel_err(&sum, f.values()) <= 1e-8);
    }
}

#[test]
fn plateau_tone_lives_in_one_band() {
    let g = Grid::new(1, 8.0, 4096).unwrap();
    let part = DyadicPartition::build(&g, 8).unwrap();
    let k = 5;
    // the DFT frequency 2 pi m / 16 closest to 28 sits on the plateau [3 * 2^(k-2), 2^k] = [24, 32].
    let m = (28.0 * 16.0 / (2.0 * std::f64::consts::PI)).round();
    let w = 2.0 * std::f64::consts::PI * m / 16.0;
    assert_eq!(phi_k(k, w), 1.0);
    let vals = (0..g.len())
        .map(|i| Complex64::from_polar(1.0, w * g.point(i)[0]))
        .collect();
    let f = SampledFunction::with_support(g, vals, g.circumradius()).unwrap();
    for j in 0..=8 {
        let b = band_project(&f, &part, j).unwrap();
        if j == k {
            assert!(rel_err(b.values(), f.values()) <= 1e-10);
        } else {
            assert!(b.values().iter().all(|v| v.norm() <= 1e-10), "band {j}");
        }
    }
    let fam = BallFamily::new(&g, Shape::Ball);
    let s = 0.7;
    let est = besov_morrey_norm(&f, &part, s, 2.0, 2.0, 2.0, &fam).unwrap();
    let direct = morrey_norm(&f, 2.0, 2.0, &fam).unwrap().value;
    assert!((est.value - (k as f64 * s).exp2() * direct).abs() <= 1e-8 * est.value);
    assert_eq!(est.terms.iter().filter(|t| t.1 > 1e-8).count(), 1);
}

#[test]
fn projected_blocks_stay_in_their_annulus() {
    let g = Grid::new(1, 8.0, 1024).unwrap();
    let part = DyadicPartition::build(&g, 6).unwrap();
    let f = make_seeded_smooth(&g, 3).unwrap();
    for k in 1..=6 {
        let b = band_project(&f, &part, k).unwrap();
        let spec = spectrum(&b);
        let lo = (k as f64 - 1.0).exp2();
        for (z, &r) in spec.iter().zip(part.radii()) {
            if r < lo * (1.0 - 1e-12) || r > 3.0 * lo * (1.0 + 1e-12) {
                assert!(z.norm() <= 1e-9 * g.len() as f64, "k={k} r={r}");
            }
        }
    }
}

#[test]
fn scaling_and_cutoff_monotonicity() {
    let g = Grid::new(1, 8.0, 2048).unwrap();
    let f = make_seeded_smooth(&g, 11).unwrap();
    let fam = BallFamily::new(&g, Shape::Ball);
    let part = DyadicPartition::build(&g, 7).unwrap();
    let a = besov_morrey_norm(&f, &part, 0.5, 2.0, 1.5, 2.0, &fam).unwrap();
    let b = besov_morrey_norm(&f.scale(Complex64::new(0.0, -3.0)), &part, 0.5, 2.0, 1.5, 2.0, &fam).unwrap();
    assert!((b.value - 3.0 * a.value).abs() <= 1e-10 * b.value);
    let top = b.terms.iter().map(|t| t.1).fold(0.0, f64::max);
    for (x, y) in a.terms.iter().zip(&b.terms) {
        assert!((y.1 - 3.0 * x.1).abs() <= 1e-10 * top);
    }
    for w in a.partials.windows(2) {
        assert!(w[1].1 >= w[0].1);
    }
}

#[test]
fn singular_block_slope() {
    // slope of log2 b_k tends to s - (d/u + alpha); a wide cutoff keeps its transient below band 4
    let g = Grid::new(1, 16.0, 131072).unwrap();
    let f = make_f_alpha_delta(
        &g,
        &SingularFnConfig {
            alpha: -0.25,
            delta: 0.0,
            theta: 1.8,
        },
    )
    .unwrap();
    let k_max = 12;
    let part = DyadicPartition::build(&g, k_max).unwrap();
    let fam = BallFamily::new(&g, Shape::Ball);
    for s in [0.0, 0.6] {
        let est = besov_morrey_norm(&f, &part, s, 2.0, 2.0, 2.0, &fam).unwrap();
        for k in 4..=k_max - 2 {
            let step = (est.terms[k + 1].1 / est.terms[k].1).log2();
            assert!((step - (s - 0.25)).abs() <= 0.1, "s={s} k={k}: {step}");
        }
        let fit = block_slope(&est, 4, k_max - 2).unwrap();
        assert!((fit - (s - 0.25)).abs() <= 0.1);
    }
}
