//! Partition contracts: summing box sums over a window's box range equals
//! the brute-force window sum, trimming loses no mass, the partition stays
//! within twice the grid size, and moment keys canonicalize consistently.

mod common;

use common::{exact_sum, TestRng};
use ksmooth::{
    build_partition, enumerate_moment_keys, knn_bandwidth_1d, precompute_box_sums, Estimator,
    MomentKey, SumPolicy,
};
use proptest::prelude::*;

/// Window sums via box ranges against brute force; both sides are exact to
/// near working precision, the slack covers the re-summation of box totals.
const WINDOW_SUM_REL_TOL: f64 = 1e-10;

#[test]
fn box_ranges_reproduce_window_sums() {
    let mut rng = TestRng::new(0x9A47);
    for _ in 0..100 {
        let n = 50 + rng.below(351);
        let mut xs: Vec<f64> = (0..n).map(|_| 2.0 * rng.normal()).collect();
        xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
        let ys: Vec<f64> = xs.iter().map(|&x| x + rng.normal()).collect();

        let m = 5 + rng.below(36);
        let z: Vec<f64> = (0..m)
            .map(|j| xs[((n - 1) as f64 * j as f64 / (m - 1) as f64).round() as usize])
            .collect();
        let k = (2 + rng.below(n / 2)).min(n);
        let knn = knn_bandwidth_1d(&xs, &z, k).expect("knn");

        let part = build_partition(&z, &knn.h, &xs).expect("partition");
        assert!(
            part.thresholds.len() <= 2 * m,
            "kept {} thresholds for {m} windows",
            part.thresholds.len()
        );

        let keys = enumerate_moment_keys(1, Estimator::Loclin);
        let sums = precompute_box_sums(
            &xs,
            &ys,
            std::slice::from_ref(&part),
            &keys,
            SumPolicy::Compensated,
        )
        .expect("box sums");

        for j in 0..m {
            let (lo, hi) = (z[j] - knn.h[j], z[j] + knn.h[j]);
            for (slot, key) in keys.iter().enumerate() {
                let from_boxes: Vec<f64> = part
                    .box_range(j)
                    .map(|b| sums.value(&[b], slot))
                    .collect();
                let ranged = exact_sum(&from_boxes);
                let terms: Vec<f64> = xs
                    .iter()
                    .zip(&ys)
                    .filter(|(&x, _)| lo <= x && x < hi)
                    .map(|(&x, &y)| key.eval(&[x], y))
                    .collect();
                let brute = exact_sum(&terms);
                let scale = brute.abs().max(1.0);
                assert!(
                    (ranged - brute).abs() <= WINDOW_SUM_REL_TOL * scale,
                    "window {j}, key {key:?}: box-range {ranged} vs brute {brute}"
                );
            }
        }
    }
}

#[test]
fn trimming_preserves_totals() {
    let mut rng = TestRng::new(0x9A48);
    for _ in 0..50 {
        let n = 100 + rng.below(200);
        let mut xs: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
        let ys: Vec<f64> = xs.iter().map(|&x| 1.0 + x * x).collect();

        let m = 4 + rng.below(20);
        let z: Vec<f64> = (0..m)
            .map(|j| xs[((n - 1) as f64 * j as f64 / (m - 1) as f64).round() as usize])
            .collect();
        let knn = knn_bandwidth_1d(&xs, &z, 2 + rng.below(n / 3)).expect("knn");
        let part = build_partition(&z, &knn.h, &xs).expect("partition");

        let keys = enumerate_moment_keys(1, Estimator::Nw);
        let sums = precompute_box_sums(
            &xs,
            &ys,
            std::slice::from_ref(&part),
            &keys,
            SumPolicy::Compensated,
        )
        .expect("box sums");

        let span_lo = part.thresholds[0];
        let span_hi = *part.thresholds.last().expect("nonempty");
        for (slot, key) in keys.iter().enumerate() {
            let box_values: Vec<f64> = (0..part.box_count)
                .map(|b| sums.value(&[b], slot))
                .collect();
            let total = exact_sum(&box_values);
            let terms: Vec<f64> = xs
                .iter()
                .zip(&ys)
                .filter(|(&x, _)| span_lo <= x && x < span_hi)
                .map(|(&x, &y)| key.eval(&[x], y))
                .collect();
            let brute = exact_sum(&terms);
            let scale = brute.abs().max(1.0);
            assert!(
                (total - brute).abs() <= WINDOW_SUM_REL_TOL * scale,
                "key {key:?}: trimmed total {total} vs span sum {brute}"
            );
        }
    }
}

proptest! {
    /// Key construction canonicalizes: the factor order never matters, and
    /// evaluation agrees with the naive product of powers.
    #[test]
    fn moment_keys_canonicalize(
        pairs in proptest::collection::vec((0usize..4, 0u32..3), 0..6),
        q in 0u8..2,
        point in proptest::array::uniform4(-2.0_f64..2.0),
        y in -2.0_f64..2.0,
        order_seed in any::<u64>(),
    ) {
        let key = MomentKey::new(&pairs, q);
        let mut reordered = pairs.clone();
        TestRng::new(order_seed).shuffle(&mut reordered);
        let same = MomentKey::new(&reordered, q);
        prop_assert_eq!(&key, &same);

        let mut expected = if q == 1 { y } else { 1.0 };
        for &(dim, power) in &pairs {
            expected *= point[dim].powi(power as i32);
        }
        let got = key.eval(&point, y);
        prop_assert!(
            (got - expected).abs() <= 1e-12 * expected.abs().max(1.0),
            "eval {} vs naive {}", got, expected
        );
    }
}
