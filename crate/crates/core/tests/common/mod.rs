#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use segguard_core::{compute_bounds, Database, Market, Rational, ValuationGrid};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn x_star() -> Market {
    Market::new(
        ValuationGrid::integers(3).unwrap(),
        vec![q(2, 5), q(1, 2), q(1, 10)],
    )
    .unwrap()
}

/// Strictly increasing integer grid with gaps in 1..=3.
pub fn random_grid(rng: &mut ChaCha8Rng, k: usize) -> ValuationGrid {
    let mut v = 0i64;
    let values = (0..k)
        .map(|_| {
            v += rng.gen_range(1..=3);
            Rational::from_integer(v)
        })
        .collect();
    ValuationGrid::new(values).unwrap()
}

/// Integer weights in `0..=max_weight`, normalized; at least one positive.
pub fn random_masses(rng: &mut ChaCha8Rng, k: usize, max_weight: i64) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=max_weight)).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| Rational::new(x, total)).collect();
        }
    }
}

pub fn random_market(rng: &mut ChaCha8Rng, k: usize) -> Market {
    let grid = random_grid(rng, k);
    Market::new(grid, random_masses(rng, k, 9)).unwrap()
}

/// Random market whose uniform monopoly price is below the top valuation.
pub fn random_bounded_market(rng: &mut ChaCha8Rng, max_k: usize) -> Market {
    loop {
        let k = rng.gen_range(2..=max_k);
        let m = random_market(rng, k);
        if compute_bounds(&m).is_ok() {
            return m;
        }
    }
}

pub fn random_database(rng: &mut ChaCha8Rng, max_n: usize) -> Database {
    let n = rng.gen_range(1..=max_n);
    loop {
        let w: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = w.iter().sum();
        if let Ok(d) = Database::new(w.into_iter().map(|x| Rational::new(x, total)).collect()) {
            return d;
        }
    }
}

/// Database with first label exactly `t` and the rest split evenly.
pub fn database_with_first(t: &Rational, n: usize) -> Option<Database> {
    if n < 2 || !t.is_positive() || *t >= Rational::one() {
        return None;
    }
    let rest = (Rational::one() - t) / Rational::from_integer(n as i64 - 1);
    let mut m = vec![t.clone()];
    m.extend(std::iter::repeat_n(rest, n - 1));
    Database::new(m).ok()
}
