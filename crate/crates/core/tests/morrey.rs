use bmlab_core::error::Error;
use bmlab_core::grid::{norm, Grid, SampledFunction};
use bmlab_core::morrey::{morrey_norm, refine_until_stable, BallFamily, Shape};
use bmlab_core::zoo::singular::{make_f_alpha_delta, SingularFnConfig};

fn indicator(g: Grid, lo: f64, hi: f64) -> SampledFunction {
    SampledFunction::from_real(g, lo.abs().max(hi.abs()), |x| {
        if x[0] >= lo && x[0] < hi {
            1.0
        } else {
            0.0
        }
    })
    .unwrap()
}

#[test]
fn unit_interval_is_unit_in_l2() {
    let g = Grid::new(1, 8.0, 4096).unwrap();
    let f = indicator(g, 0.0, 1.0);
    let fam = BallFamily::new(&g, Shape::Ball).refine();
    let est = morrey_norm(&f, 2.0, 2.0, &fam).unwrap();
    assert!((est.value - 1.0).abs() <= 0.03, "{}", est.value);
}

#[test]
fn normalized_dyadic_cubes() {
    let g = Grid::new(1, 8.0, 4096).unwrap();
    let fam = BallFamily::new(&g, Shape::Cube);
    for (j, k, u, p) in [(0i32, 0i64, 2.0, 1.0), (2, 1, 3.0, 2.0), (-1, -1, 2.0, 2.0)] {
        let side = (-(j as f64)).exp2();
        let lo = k as f64 * side;
        let amp = (j as f64 / u).exp2();
        let f = SampledFunction::from_real(g, (lo.abs()).max((lo + side).abs()), |x| {
            if x[0] >= lo && x[0] < lo + side {
                amp
            } else {
                0.0
            }
        })
        .unwrap();
        let est = morrey_norm(&f, u, p, &fam).unwrap();
        assert!((est.value - 1.0).abs() <= 0.05, "j={j}: {}", est.value);
    }
}

#[test]
fn normalized_cube_2d() {
    let g = Grid::new(2, 4.0, 256).unwrap();
    let fam = BallFamily::new(&g, Shape::Cube);
    let amp = (2.0f64 * 1.0 / 3.0).exp2();
    let f = SampledFunction::from_real(g, 1.0, |x| {
        if (0.0..0.5).contains(&x[0]) && (0.0..0.5).contains(&x[1]) {
            amp
        } else {
            0.0
        }
    })
    .unwrap();
    let est = morrey_norm(&f, 3.0, 1.5, &fam).unwrap();
    assert!((est.value - 1.0).abs() <= 0.05, "{}", est.value);
}

#[test]
fn smooth_bump_stabilizes() {
    let g = Grid::new(1, 8.0, 4096).unwrap();
    let f = SampledFunction::from_real(g, 1.0, |x| {
        let t = x[0].abs();
        if t < 1.0 {
            (-1.0 / (1.0 - t * t)).exp()
        } else {
            0.0
        }
    })
    .unwrap();
    let fam = BallFamily::new(&g, Shape::Ball);
    let est = refine_until_stable(&f, 3.0, 1.5, &fam, 0.01).unwrap();
    assert!(est.partials.len() <= 7);
    assert!(est.value > 0.0);
}

#[test]
fn zero_converges_in_one_pass() {
    let g = Grid::new(1, 8.0, 1024).unwrap();
    let est = refine_until_stable(
        &SampledFunction::zeros(g),
        2.0,
        1.0,
        &BallFamily::new(&g, Shape::Ball),
        0.01,
    )
    .unwrap();
    assert_eq!(est.value, 0.0);
    assert_eq!(est.partials.len(), 2);
}

#[test]
fn singular_function_does_not_stabilize() {
    // alpha close to -d/p with d/u + alpha < 0: locally L_p, but the small-ball profile
    // r^(d/u + alpha) keeps rising as r shrinks.
    let g = Grid::new(1, 4.0, 8192).unwrap();
    let f = make_f_alpha_delta(
        &g,
        &SingularFnConfig {
            alpha: -0.45,
            delta: 0.0,
            theta: 0.45,
        },
    )
    .unwrap();
    let fam = BallFamily::new(&g, Shape::Ball);
    match refine_until_stable(&f, 4.0, 2.0, &fam, 0.01) {
        Err(Error::NotConverged { last, .. }) => assert!(last.value > 0.0),
        other => panic!("expected a non-convergence signal, got {other:?}"),
    }
}

#[test]
fn small_ball_profile_tracks_closed_form() {
    // |B(0,r)|^(1/u - 1/p) (int_B |x|^(alpha p))^(1/p) = c r^(d/u + alpha)
    let g = Grid::new(1, 4.0, 32768).unwrap();
    let alpha = -0.25;
    let f = make_f_alpha_delta(
        &g,
        &SingularFnConfig {
            alpha,
            delta: 0.0,
            theta: 0.45,
        },
    )
    .unwrap();
    let (u, p) = (2.0, 1.0);
    let mass = |r: f64| f.ball_lp_integral(&[0.0, 0.0], r, p).unwrap();
    let val = |r: f64| (2.0 * r).powf(1.0 / u - 1.0 / p) * mass(r);
    let slope = (val(1.0 / 64.0) / val(1.0 / 16.0)).log2() / -2.0;
    assert!((slope - (1.0 / u + alpha)).abs() < 0.05, "{slope}");
}

#[test]
fn partials_are_monotone_and_refinement_only_grows() {
    let g = Grid::new(2, 4.0, 128).unwrap();
    let f = SampledFunction::from_real(g, 1.5, |x| {
        let r = norm(x, 2);
        if r < 1.5 {
            (1.5 - r) * (1.0 + x[0])
        } else {
            0.0
        }
    })
    .unwrap();
    let fam = BallFamily::new(&g, Shape::Ball);
    let a = morrey_norm(&f, 4.0, 2.0, &fam).unwrap();
    let b = morrey_norm(&f, 4.0, 2.0, &fam.refine()).unwrap();
    assert!(b.value >= a.value);
    for w in a.partials.windows(2) {
        assert!(w[1].1 >= w[0].1);
    }
}
