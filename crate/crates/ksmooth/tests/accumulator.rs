//! Accumulator contract: compensated summation never loses to plain
//! summation against an exact oracle, and add/subtract streams return the
//! compensated total to its starting value.

mod common;

use common::{exact_sum, ulp, TestRng};
use ksmooth::{Accumulator, CompensatedSum, PlainSum};
use proptest::prelude::*;

const SEQUENCES: usize = 1000;
const TERMS: usize = 10_000;
/// Term magnitudes span 12 orders, 1e-6 to 1e6.
const MAGNITUDE_ORDERS: f64 = 12.0;
/// Fraction of error-prone sequences the compensated sum must strictly beat.
const STRICT_IMPROVEMENT_SHARE: f64 = 0.95;

fn fold<A: Accumulator>(values: &[f64]) -> f64 {
    let mut acc = A::default();
    for &v in values {
        acc.add(v);
    }
    acc.total()
}

fn wide_magnitude(rng: &mut TestRng) -> f64 {
    let magnitude = 10f64.powf(MAGNITUDE_ORDERS * rng.uniform() - MAGNITUDE_ORDERS / 2.0);
    if rng.next_u64() & 1 == 0 {
        magnitude
    } else {
        -magnitude
    }
}

#[test]
fn compensated_never_trails_plain_against_exact_oracle() {
    let mut rng = TestRng::new(0xACC0);
    let mut values = vec![0.0_f64; TERMS];
    let mut error_prone = 0usize;
    let mut strictly_better = 0usize;
    for sequence in 0..SEQUENCES {
        for v in values.iter_mut() {
            *v = wide_magnitude(&mut rng);
        }
        let exact = exact_sum(&values);
        let plain_err = (fold::<PlainSum>(&values) - exact).abs();
        let comp_err = (fold::<CompensatedSum>(&values) - exact).abs();
        assert!(
            comp_err <= plain_err,
            "sequence {sequence}: compensated error {comp_err:e} exceeds plain {plain_err:e}"
        );
        if plain_err > 0.0 {
            error_prone += 1;
            if comp_err < plain_err {
                strictly_better += 1;
            }
        }
    }
    assert!(error_prone > 0, "plain summation was exact on every sequence");
    let required = (STRICT_IMPROVEMENT_SHARE * error_prone as f64).ceil() as usize;
    assert!(
        strictly_better >= required,
        "strict improvement on {strictly_better}/{error_prone} sequences, need {required}"
    );
}

#[test]
fn add_then_subtract_returns_to_start() {
    let mut rng = TestRng::new(0xACC1);
    for _ in 0..100 {
        let base = rng.range(1.0, 100.0);
        let mut values: Vec<f64> = (0..1000).map(|_| wide_magnitude(&mut rng)).collect();
        let mut acc = CompensatedSum::default();
        acc.add(base);
        let start = acc.total();
        for &v in &values {
            acc.add(v);
        }
        rng.shuffle(&mut values);
        for &v in &values {
            acc.add(-v);
        }
        let drift = (acc.total() - start).abs();
        assert!(
            drift <= ulp(start),
            "drift {drift:e} exceeds one ulp of the starting value {start}"
        );
    }
}

#[test]
fn ten_tenths_make_one() {
    let mut acc = CompensatedSum::default();
    for _ in 0..10 {
        acc.add(0.1);
    }
    assert!((acc.total() - 1.0).abs() <= ulp(1.0));
}

proptest! {
    /// Adding then subtracting the same multiset, in any order, returns the
    /// compensated accumulator to its starting value within one ulp.
    #[test]
    fn add_subtract_roundtrip(
        start in 1.0_f64..100.0,
        values in proptest::collection::vec(-1e6_f64..1e6, 0..200),
        order_seed in any::<u64>(),
    ) {
        let mut acc = CompensatedSum::default();
        acc.add(start);
        let before = acc.total();
        for &v in &values {
            acc.add(v);
        }
        let mut order = values;
        TestRng::new(order_seed).shuffle(&mut order);
        for &v in &order {
            acc.add(-v);
        }
        prop_assert!((acc.total() - before).abs() <= ulp(before));
    }
}
