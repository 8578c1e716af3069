use bmlab_core::bands::{phi_k, DyadicPartition};
use bmlab_core::diffnorm::{finite_difference, recursive_difference};
use bmlab_core::grid::{Grid, SampledFunction};
use bmlab_core::lab::params::{classify, Region, SpaceParams};
use bmlab_core::morrey::{morrey_norm, BallFamily, Shape};
use bmlab_core::zoo::bumps::make_seeded_smooth;
use num_complex::Complex64;
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![
        (1u32..=16).prop_map(|k| k as f64 / 4.0),
        (0.1f64..6.0),
        Just(f64::INFINITY),
    ]
}

fn tuple() -> impl Strategy<Value = SpaceParams> {
    (
        1usize..=2,
        prop_oneof![(-8i32..=16).prop_map(|k| k as f64 / 4.0), -2.0f64..4.0],
        (1u32..=16).prop_map(|k| k as f64 / 4.0),
        0.05f64..=1.0,
        exponent(),
        exponent(),
        prop_oneof![Just(f64::INFINITY), (1u32..=8).prop_map(|k| k as f64)],
        1usize..=4,
    )
        .prop_map(|(d, s, u, pr, q, v, a, order)| SpaceParams {
            d,
            s,
            u,
            p: (u * pr).max(0.05),
            q,
            v,
            a,
            order,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn classifier_is_total_and_deterministic(x in tuple()) {
        let a = classify(&x).unwrap();
        let b = classify(&x).unwrap();
        prop_assert_eq!(&a, &b);
        match a.region {
            Region::NotEquivalent(t) => prop_assert_eq!(Some(&t), a.matching.first()),
            Region::Equivalent | Region::Open(_) => prop_assert!(a.matching.is_empty()),
        }
        if a.region == Region::Equivalent {
            prop_assert!(x.s > x.equivalence_threshold() && x.s < x.order as f64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn morrey_is_homogeneous(seed in 0u64..1000, c in 0.1f64..10.0, up in 1usize..4) {
        let g = Grid::new(1, 8.0, 1024).unwrap();
        let f = make_seeded_smooth(&g, seed).unwrap();
        let fam = BallFamily::new(&g, Shape::Ball);
        let (u, p) = (up as f64 + 1.0, up as f64);
        let a = morrey_norm(&f, u, p, &fam).unwrap().value;
        let b = morrey_norm(&f.scale(Complex64::new(0.0, c)), u, p, &fam).unwrap().value;
        prop_assert!((b - c * a).abs() <= 1e-10 * c * a);
    }

    #[test]
    fn binomial_matches_recursive(seed in 0u64..1000, m in -40i64..40, order in 1usize..=5) {
        let g = Grid::new(1, 8.0, 2048).unwrap();
        let f = make_seeded_smooth(&g, seed).unwrap();
        let h = [m as f64 * g.spacing(), 0.0];
        let a = finite_difference(&f, &h, order).unwrap();
        let b = recursive_difference(&f, &h, order).unwrap();
        let scale = (order as f64).exp2() * f.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn partition_masks_stay_in_range(k_max in 2usize..=9) {
        let g = Grid::new(1, 4.0, 4096).unwrap();
        let part = DyadicPartition::build(&g, k_max).unwrap();
        prop_assert!(part.unity_residual() <= 1e-8);
        for k in 0..=k_max {
            for (&r, &m) in part.radii().iter().zip(part.mask(k)) {
                prop_assert!((0.0..=1.0).contains(&m));
                prop_assert_eq!(m, phi_k(k, r));
                if k > 0 && m > 0.0 {
                    let lo = (k as f64 - 1.0).exp2();
                    prop_assert!(r >= lo && r <= 3.0 * lo);
                }
            }
        }
    }
}

#[test]
fn zero_is_zero_everywhere() {
    let g = Grid::new(2, 4.0, 64).unwrap();
    let z = SampledFunction::zeros(g);
    let fam = BallFamily::new(&g, Shape::Cube);
    assert_eq!(morrey_norm(&z, 3.0, 2.0, &fam).unwrap().value, 0.0);
}
