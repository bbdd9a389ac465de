//! Robust label-mass thresholds.
//!
//! `lambda_lower` is the smallest label mass that still lets nature build a
//! segment where the monopolist prices above the uniform monopoly price:
//!
//! ```text
//! lambda_lower = min_{v_j <= v_i*} ( max_{v_i > v_i*} v_i tail_i ) / v_j + 1 - tail_j
//! ```
//!
//! `lambda_upper` is the largest label mass for which some segment can be
//! priced strictly below the uniform monopoly price:
//!
//! ```text
//! lambda_upper = max_{v_j < v_i*} 1 - (v_i* tail_i* - v_j tail_j) / (v_i* - v_j)
//! ```
//!
//! Both are computed on the full grid, zero-mass points included.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{Market, PriceIndex};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub lambda_lower: Rational,
    pub lambda_upper: Rational,
    /// Highest maximizer of `v_i tail_i` over prices above the uniform price.
    pub i_bar: PriceIndex,
    /// Lowest minimizer in the `lambda_lower` formula.
    pub i_low: PriceIndex,
    pub i_star: PriceIndex,
    /// Highest maximizer in the `lambda_upper` formula; `None` when no
    /// valuation lies below the uniform price.
    pub i_upper: Option<PriceIndex>,
    pub u_star: Rational,
    pub pi_star: Rational,
    /// Every `lambda_lower` term, indexed by `j <= i_star`.
    pub lower_terms: Vec<Rational>,
    /// Every `lambda_upper` term, indexed by `j < i_star`.
    pub upper_terms: Vec<Rational>,
}

/// Computes both thresholds and their witness indices.
///
/// Fails with [`Error::UniformPriceAtTop`] when the uniform monopoly price is
/// the highest valuation: uniform pricing then leaves no surplus and every
/// database is trivially worst-case optimal.
pub fn compute_bounds(market: &Market) -> Result<Bounds> {
    let i_star = market.monopoly_price_index();
    if i_star == market.grid().top() {
        return Err(Error::UniformPriceAtTop);
    }
    let values = market.values();
    let tails = market.tails();
    let revenues: Vec<Rational> = values.iter().zip(&tails).map(|(v, t)| v * t).collect();
    let is = i_star.0;

    let mut i_bar = is + 1;
    for i in is + 1..values.len() {
        if revenues[i] >= revenues[i_bar] {
            i_bar = i;
        }
    }
    let top = &revenues[i_bar];

    let lower_terms: Vec<Rational> = (0..=is)
        .map(|j| top / &values[j] + Rational::one() - &tails[j])
        .collect();
    let mut i_low = 0;
    for j in 1..=is {
        if lower_terms[j] < lower_terms[i_low] {
            i_low = j;
        }
    }

    let upper_terms: Vec<Rational> = (0..is)
        .map(|j| Rational::one() - (&revenues[is] - &revenues[j]) / (&values[is] - &values[j]))
        .collect();
    let mut i_upper = None;
    for (j, term) in upper_terms.iter().enumerate() {
        match i_upper {
            Some(b) if upper_terms[b] > *term => {}
            _ => i_upper = Some(j),
        }
    }
    let lambda_upper = i_upper
        .map(|j| upper_terms[j].clone())
        .unwrap_or_else(Rational::zero);

    Ok(Bounds {
        lambda_lower: lower_terms[i_low].clone(),
        lambda_upper,
        i_bar: PriceIndex(i_bar),
        i_low: PriceIndex(i_low),
        i_star,
        i_upper: i_upper.map(PriceIndex),
        u_star: market.consumer_surplus(i_star),
        pi_star: market.producer_surplus(i_star),
        lower_terms,
        upper_terms,
    })
}

impl Bounds {
    /// Largest `n` with `n < 1 / lambda_lower`; `None` when `lambda_lower`
    /// is zero (no consumer values above the uniform price, so any number of
    /// labels is worst-case optimal).
    pub fn max_label_count(&self) -> Option<BigInt> {
        (!self.lambda_lower.is_zero()).then(|| self.lambda_lower.recip().floor_strict())
    }

    /// Whether some database other than the trivial one is worst-case optimal.
    pub fn nontrivial_wc_nonempty(&self) -> bool {
        self.lambda_lower < Rational::new(1, 2)
    }

    /// Whether some worst-case optimal database can also strictly raise
    /// consumer surplus.
    pub fn f2_nonempty(&self) -> bool {
        self.nontrivial_wc_nonempty() && self.lambda_upper > self.lambda_lower
    }

    /// Whether `i_star` attains the `lambda_lower` minimum.
    pub fn i_star_minimizes_lower(&self) -> bool {
        self.lower_terms[self.i_star.0] == self.lambda_lower
    }

    /// A two-label database in WC when one exists: `(1/2, 1/2)`.
    pub fn nontrivial_wc_witness(&self) -> Option<Vec<Rational>> {
        self.nontrivial_wc_nonempty()
            .then(|| vec![Rational::new(1, 2), Rational::new(1, 2)])
    }

    /// A two-label database in F2 when one exists: the smaller label sits
    /// halfway between `lambda_lower` and `min(lambda_upper, 1/2)`.
    pub fn f2_witness(&self) -> Option<Vec<Rational>> {
        if !self.f2_nonempty() {
            return None;
        }
        let cap = self.lambda_upper.clone().min(Rational::new(1, 2));
        let t = (&self.lambda_lower + &cap) / Rational::from_integer(2);
        Some(vec![t.clone(), Rational::one() - t])
    }

    pub fn report(&self, market: &Market) -> BoundsReport {
        let v = |k: PriceIndex| market.grid().value(k).clone();
        BoundsReport {
            lambda_lower_dec: self.lambda_lower.to_f64(),
            lambda_lower: self.lambda_lower.clone(),
            lambda_upper_dec: self.lambda_upper.to_f64(),
            lambda_upper: self.lambda_upper.clone(),
            uniform_price: v(self.i_star),
            i_star: self.i_star.0 + 1,
            v_bar: v(self.i_bar),
            i_bar: self.i_bar.0 + 1,
            v_low: v(self.i_low),
            i_low: self.i_low.0 + 1,
            u_star_dec: self.u_star.to_f64(),
            u_star: self.u_star.clone(),
            pi_star_dec: self.pi_star.to_f64(),
            pi_star: self.pi_star.clone(),
            max_label_count: self
                .max_label_count()
                .map(|n| n.to_u64().unwrap_or(u64::MAX)),
            nontrivial_wc_nonempty: self.nontrivial_wc_nonempty(),
            f2_nonempty: self.f2_nonempty(),
        }
    }
}

/// JSON view of [`Bounds`]: exact strings, decimal companions, one-based
/// grid positions.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub lambda_lower: Rational,
    pub lambda_lower_dec: f64,
    pub lambda_upper: Rational,
    pub lambda_upper_dec: f64,
    pub uniform_price: Rational,
    pub i_star: usize,
    pub v_bar: Rational,
    pub i_bar: usize,
    pub v_low: Rational,
    pub i_low: usize,
    pub u_star: Rational,
    pub u_star_dec: f64,
    pub pi_star: Rational,
    pub pi_star_dec: f64,
    /// `null` when unbounded.
    pub max_label_count: Option<u64>,
    pub nontrivial_wc_nonempty: bool,
    pub f2_nonempty: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::ValuationGrid;
    use crate::rational::q;

    fn market3(masses: [Rational; 3]) -> Market {
        Market::new(ValuationGrid::integers(3).unwrap(), masses.to_vec()).unwrap()
    }

    fn x_star() -> Market {
        market3([q(2, 5), q(1, 2), q(1, 10)])
    }

    #[test]
    fn worked_example_bounds() {
        let b = compute_bounds(&x_star()).unwrap();
        assert_eq!(b.lambda_lower, q(3, 10));
        assert_eq!(b.i_low, PriceIndex(0));
        assert_eq!(b.i_bar, PriceIndex(2));
        assert_eq!(b.i_star, PriceIndex(1));
        assert_eq!(b.lambda_upper, q(4, 5));
        assert_eq!(b.u_star, q(1, 10));
        assert_eq!(b.pi_star, q(6, 5));
        assert_eq!(b.max_label_count(), Some(BigInt::from(3)));
        assert!(b.nontrivial_wc_nonempty());
        assert!(b.f2_nonempty());
    }

    #[test]
    fn sweep_family_is_linear() {
        for j in 1..=10 {
            let x3 = q(j, 100);
            let m = market3([q(2, 5), q(3, 5) - &x3, x3.clone()]);
            let b = compute_bounds(&m).unwrap();
            assert_eq!(b.lambda_lower, q(3, 1) * &x3);
            assert_eq!(b.i_star, PriceIndex(1));
        }
    }

    #[test]
    fn uniform_price_at_top_is_rejected() {
        let m = Market::new(ValuationGrid::integers(2).unwrap(), vec![q(1, 4), q(3, 4)]).unwrap();
        assert_eq!(compute_bounds(&m), Err(Error::UniformPriceAtTop));
    }

    #[test]
    fn label_counts() {
        let mk = |l: Rational| Bounds {
            lambda_lower: l,
            lambda_upper: q(0, 1),
            i_bar: PriceIndex(1),
            i_low: PriceIndex(0),
            i_star: PriceIndex(0),
            i_upper: None,
            u_star: q(0, 1),
            pi_star: q(0, 1),
            lower_terms: vec![],
            upper_terms: vec![],
        };
        assert_eq!(mk(q(3, 10)).max_label_count(), Some(BigInt::from(3)));
        assert_eq!(mk(q(1, 2)).max_label_count(), Some(BigInt::from(1)));
        assert_eq!(mk(q(1, 4)).max_label_count(), Some(BigInt::from(3)));
        assert!(!mk(q(1, 2)).nontrivial_wc_nonempty());
        assert_eq!(mk(q(0, 1)).max_label_count(), None);
        assert!(mk(q(3, 10)).nontrivial_wc_nonempty());
    }

    #[test]
    fn high_lower_bound_market() {
        let m = market3([q(1, 5), q(3, 10), q(1, 2)]);
        assert_eq!(m.monopoly_price_index(), PriceIndex(1));
        let b = compute_bounds(&m).unwrap();
        assert_eq!(b.lambda_lower, q(19, 20));
        assert!(!b.nontrivial_wc_nonempty());
        assert!(!b.f2_nonempty());
    }

    #[test]
    fn no_valuation_below_uniform_price() {
        // i* = 0: lambda_upper is defined as 0.
        let m = market3([q(7, 10), q(1, 5), q(1, 10)]);
        let b = compute_bounds(&m).unwrap();
        assert_eq!(b.i_star, PriceIndex(0));
        assert_eq!(b.lambda_upper, q(0, 1));
        assert_eq!(b.i_upper, None);
        assert!(!b.f2_nonempty());
    }

    #[test]
    fn nothing_above_uniform_price() {
        let m = Market::new(ValuationGrid::integers(2).unwrap(), vec![q(1, 1), q(0, 1)]).unwrap();
        let b = compute_bounds(&m).unwrap();
        assert_eq!(b.lambda_lower, q(0, 1));
        assert_eq!(b.max_label_count(), None);
        assert_eq!(b.u_star, q(0, 1));
    }

    #[test]
    fn shift_within_low_region_keeps_lower_bound() {
        // Tails weakly fall up to the uniform price and stay put above it,
        // the uniform price is unchanged, yet the bound does not move.
        let shifted = market3([q(1, 2), q(2, 5), q(1, 10)]);
        let b = compute_bounds(&shifted).unwrap();
        assert_eq!(b.i_star, PriceIndex(1));
        assert_eq!(
            b.lambda_lower,
            compute_bounds(&x_star()).unwrap().lambda_lower
        );
    }

    #[test]
    fn report_fields() {
        let m = x_star();
        let r = compute_bounds(&m).unwrap().report(&m);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["lambda_lower"], "3/10");
        assert_eq!(json["lambda_lower_dec"], 0.3);
        assert_eq!(json["i_star"], 2);
        assert_eq!(json["uniform_price"], "2");
    }
}
