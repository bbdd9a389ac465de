//! Fixtures shared by the benchmarks.

use segguard_core::{Database, Market, Rational, ValuationGrid};

/// Market on `1..=k` with mass proportional to `k + 1 - i` at valuation `i`.
pub fn declining_market(k: usize) -> Market {
    let total: i64 = (1..=k as i64).sum();
    let masses = (1..=k as i64)
        .map(|i| Rational::new(k as i64 + 1 - i, total))
        .collect();
    Market::new(ValuationGrid::integers(k).expect("k >= 2"), masses).expect("sums to one")
}

pub fn worked_example() -> Market {
    Market::new(
        ValuationGrid::integers(3).expect("grid"),
        vec![
            Rational::new(2, 5),
            Rational::new(1, 2),
            Rational::new(1, 10),
        ],
    )
    .expect("valid")
}

pub fn even_database(n: usize) -> Database {
    Database::new(vec![Rational::new(1, n as i64); n]).expect("sums to one")
}
