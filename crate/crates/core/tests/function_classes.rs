use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2};

use metric_entropy::function_classes::{
    cauchy_violations, embed_disk_function, fourier_reindex, fourier_unreindex, ClassSpec,
    DiskClass, ExpTypeClass, StripClass,
};
use metric_entropy::{Epsilon, InfiniteEllipsoid};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn classes() -> Vec<ClassSpec> {
    vec![
        ClassSpec::Strip(StripClass::new(0.5, 1.0).unwrap()),
        ClassSpec::Strip(StripClass::new(2.0 * LN_2, 10.0).unwrap()),
        ClassSpec::Disk(DiskClass::new(1.0, 2.0, 1.0).unwrap()),
        ClassSpec::Disk(DiskClass::new(0.5, E, 3.0).unwrap()),
        ClassSpec::Exptype(ExpTypeClass::new(0.25, 1.0).unwrap()),
        ClassSpec::Exptype(ExpTypeClass::new(10.0, 2.5).unwrap()),
    ]
}

/// Random point of `e` on its first `len` coordinates; some samples sit on
/// the boundary.
fn sample_inside(e: &InfiniteEllipsoid, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let axes = e.semi_axes(len).unwrap();
    let mut x: Vec<f64> = axes
        .iter()
        .map(|&m| {
            let u: f64 = rng.gen_range(0.0..1.0);
            m * u * u
        })
        .collect();
    let n = e.norm(&x).unwrap();
    let target = if rng.gen_bool(0.5) {
        1.0
    } else {
        rng.gen_range(0.0..1.0)
    };
    if n > 0.0 {
        for v in &mut x {
            *v *= target / n * (1.0 - 1e-12);
        }
    }
    x
}

#[test]
fn inner_ellipsoid_lies_inside_outer() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for cls in classes() {
        let (inner, outer) = cls.ellipsoids().unwrap();
        for len in [1usize, 2, 5, 20, 60] {
            for _ in 0..300 {
                let x = sample_inside(&inner, len, &mut rng);
                assert!(inner.membership(&x).unwrap());
                assert!(outer.membership(&x).unwrap(), "{cls:?} len={len} x={x:?}");
            }
        }
    }
}

#[test]
fn brackets_are_ordered_across_grids() {
    for cls in classes() {
        for i in 0..60 {
            let l = 4.0 * 1.25f64.powi(i);
            let b = cls.bracket(Epsilon::from_log2_inv(l).unwrap()).unwrap();
            assert!(b.lo <= b.hi, "{cls:?} L={l}: {b:?}");
        }
    }
}

#[test]
fn strip_band_stays_near_two() {
    for s in [0.5, 1.0, 2.0 * LN_2, 3.0] {
        for m in [1.0, 10.0] {
            let cls = StripClass::new(s, m).unwrap();
            for l in [1e2, 1e3, 1e4, 1e6] {
                let b = cls
                    .strip_entropy_bracket(Epsilon::from_log2_inv(l).unwrap())
                    .unwrap();
                let ratio = (b.hi - b.lo) / b.gamma_band.unwrap();
                assert!((0.0..=2.2).contains(&ratio), "s={s} M={m} L={l}: {ratio}");
            }
        }
    }
}

proptest! {
    #[test]
    fn cauchy_sequences_obey_geometric_bound(
        r in 0.1f64..2.0,
        gap in 0.05f64..3.0,
        m in 0.1f64..10.0,
        fill in prop::collection::vec((0.0f64..=1.0, 0.0f64..std::f64::consts::TAU), 1..80),
    ) {
        let r_prime = r + gap;
        let taylor: Vec<Complex64> = fill
            .iter()
            .enumerate()
            .map(|(k, &(u, theta))| Complex64::from_polar(u * m / r_prime.powi(k as i32), theta))
            .collect();
        prop_assert!(cauchy_violations(&taylor, m, r_prime).unwrap().is_empty());

        let embedded = embed_disk_function(&taylor, r).unwrap();
        let l2 = embedded.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let rho = r / r_prime;
        let bound = m / (1.0 - rho * rho).sqrt();
        prop_assert!(l2 <= bound * (1.0 + 1e-12), "{} > {}", l2, bound);
    }

    #[test]
    fn oversized_coefficient_is_reported(m in 0.1f64..10.0, r_prime in 1.1f64..4.0, k in 0usize..20) {
        let mut taylor = vec![Complex64::new(0.0, 0.0); 20];
        taylor[k] = Complex64::new(0.0, 1.01 * m / r_prime.powi(k as i32));
        let v = cauchy_violations(&taylor, m, r_prime).unwrap();
        prop_assert_eq!(v.len(), 1);
        prop_assert_eq!(v[0].k, k);
    }

    #[test]
    fn reindexing_round_trips(keys in prop::collection::btree_set(-1_000_000i64..1_000_000, 0..64)) {
        let two_sided: BTreeMap<i64, usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let one_sided = fourier_reindex(&two_sided);
        prop_assert_eq!(one_sided.len(), two_sided.len());
        prop_assert!(!one_sided.contains_key(&0));
        prop_assert_eq!(fourier_unreindex(&one_sided).unwrap(), two_sided);
    }
}
