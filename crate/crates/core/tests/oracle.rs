use metric_entropy::oracle::{binary_expansion_center, brute_force_covering, interval_covering};
use metric_entropy::{Exponent, FieldTag, FiniteEllipsoid};
use proptest::prelude::*;

const EXPONENTS: [Exponent; 3] = [Exponent::ONE, Exponent::TWO, Exponent::INFINITY];

fn real(p: Exponent, axes: &[f64]) -> FiniteEllipsoid {
    FiniteEllipsoid::new(p, FieldTag::Real, axes.to_vec()).unwrap()
}

/// Smallest cover of `[0, 1]` by closed intervals of radius `ε`, counted
/// by placing intervals left to right.
fn sweep_count(eps: f64) -> u64 {
    let mut covered = 0.0;
    let mut n = 0;
    while covered < 1.0 - 1e-12 {
        covered += 2.0 * eps;
        n += 1;
    }
    n
}

#[test]
fn interval_covering_matches_left_to_right_sweep() {
    for eps in [
        0.5, 0.3, 0.25, 0.2, 0.125, 0.1, 0.0625, 0.05, 0.01, 0.007, 0.001,
    ] {
        let r = interval_covering(eps).unwrap();
        assert_eq!(r.upper_count, sweep_count(eps), "eps={eps}");
        assert_eq!(r.lower_count, r.upper_count);
        let centers = r.centers.unwrap();
        assert_eq!(centers.len() as u64, r.upper_count);
        // every point of [0, 1] is within ε of a center
        for i in 0..=10_000 {
            let x = i as f64 / 10_000.0;
            assert!(
                centers.iter().any(|c| (c[0] - x).abs() <= eps + 1e-12),
                "eps={eps} x={x}"
            );
        }
    }
}

#[test]
fn packing_of_unit_interval_is_optimal() {
    // [−½, ½] is a translate of [0, 1]
    let e = real(Exponent::TWO, &[0.5]);
    for eps in [0.3, 0.25, 0.2, 0.125, 0.1, 0.0625] {
        let r = brute_force_covering(&e, Exponent::TWO, eps, eps / 8.0).unwrap();
        let exact = interval_covering(eps).unwrap().upper_count;
        assert_eq!(r.lower_count, exact, "eps={eps}");
        assert!(r.upper_count >= exact);
    }
}

#[test]
fn refinement_never_loses_packing_points() {
    let two = Exponent::TWO;
    let cases = [
        (real(two, &[0.5]), 0.125),
        (real(two, &[1.0, 1.0]), 0.5),
        (real(two, &[1.0, 0.5]), 0.25),
    ];
    for (e, eps) in cases {
        let mut last = 0;
        for div in [4.0, 8.0, 16.0] {
            let r = brute_force_covering(&e, two, eps, eps / div).unwrap();
            assert!(r.lower_count >= last, "{e:?} eps={eps} div={div}");
            assert!(r.lower_count <= r.upper_count);
            last = r.lower_count;
        }
    }
}

#[test]
fn binary_center_is_nearest_covering_center() {
    for k in 0..=12u32 {
        let centers = interval_covering((-(k as f64) - 1.0).exp2())
            .unwrap()
            .centers
            .unwrap();
        assert_eq!(centers.len(), 1usize << k);
        let n = 1u64 << k;
        for m in 0..n {
            // interior points of the m-th dyadic interval
            for frac in [0.01, 0.25, 0.5, 0.77, 0.99] {
                let x = (m as f64 + frac) / n as f64;
                let b = binary_expansion_center(x, k).unwrap();
                let nearest = centers
                    .iter()
                    .map(|c| c[0])
                    .min_by(|a, c| (a - x).abs().partial_cmp(&(c - x).abs()).unwrap())
                    .unwrap();
                assert_eq!(b, nearest, "k={k} x={x}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn packing_never_exceeds_cover(
        p in 0usize..3,
        q in 0usize..3,
        axes in prop::collection::vec(0.2f64..1.2, 1..=2),
        eps in 0.1f64..0.8,
    ) {
        let mut axes = axes;
        axes.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let e = real(EXPONENTS[p], &axes);
        let r = brute_force_covering(&e, EXPONENTS[q], eps, eps / 8.0).unwrap();
        prop_assert!(r.lower_count >= 1);
        prop_assert!(r.lower_count <= r.upper_count, "{:?}", r);
    }

    #[test]
    fn binary_center_is_within_half_an_interval(x in 0.0f64..=1.0, k in 0u32..=40) {
        let c = binary_expansion_center(x, k).unwrap();
        prop_assert!((x - c).abs() <= (-(k as f64) - 1.0).exp2());
    }
}
