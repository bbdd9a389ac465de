//! Valuation grids, markets, monopoly pricing and surplus accounting.
//!
//! Prices are always grid valuations, so a price is identified by its
//! [`PriceIndex`] into the grid. Revenue at index `k` is `v_k * tail_k`
//! where `tail_k` is the mass of consumers valuing the good at `v_k` or more.
//! Among revenue-maximizing prices the monopolist picks the highest one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Zero-based position of a price in the valuation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceIndex(pub usize);

impl PriceIndex {
    pub fn get(self) -> usize {
        self.0
    }
}

/// Strictly increasing list of positive valuations `v_1 < ... < v_K`, `K >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ValuationGrid {
    values: Vec<Rational>,
}

impl ValuationGrid {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::GridTooSmall(values.len()));
        }
        for (index, v) in values.iter().enumerate() {
            if !v.is_positive() {
                return Err(Error::NonPositiveValuation {
                    index,
                    value: v.clone(),
                });
            }
            if index > 0 && values[index - 1] >= *v {
                return Err(Error::GridNotIncreasing {
                    index,
                    prev: values[index - 1].clone(),
                    value: v.clone(),
                });
            }
        }
        Ok(ValuationGrid { values })
    }

    /// The grid `{1, 2, ..., k}`.
    pub fn integers(k: usize) -> Result<Self> {
        Self::new((1..=k as i64).map(Rational::from_integer).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, k: PriceIndex) -> &Rational {
        &self.values[k.0]
    }

    pub fn top(&self) -> PriceIndex {
        PriceIndex(self.values.len() - 1)
    }

    pub fn check_index(&self, k: PriceIndex) -> Result<()> {
        if k.0 < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: k.0,
                len: self.len(),
            })
        }
    }

    /// Multiplies every valuation by `c > 0`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }
}

impl<'de> Deserialize<'de> for ValuationGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<Rational>::deserialize(d)?;
        ValuationGrid::new(values).map_err(serde::de::Error::custom)
    }
}

/// `tail[k] = sum_{j >= k} masses[j]`.
pub fn tail_sums(masses: &[Rational]) -> Vec<Rational> {
    let mut tails = vec![Rational::zero(); masses.len()];
    let mut acc = Rational::zero();
    for (k, m) in masses.iter().enumerate().rev() {
        acc += m;
        tails[k] = acc.clone();
    }
    tails
}

/// Highest revenue-maximizing price index for a non-negative mass vector
/// that need not be normalized.
pub fn best_response(values: &[Rational], masses: &[Rational]) -> PriceIndex {
    let tails = tail_sums(masses);
    let mut best = 0;
    let mut best_rev = &values[0] * &tails[0];
    for k in 1..values.len() {
        let rev = &values[k] * &tails[k];
        if rev >= best_rev {
            best = k;
            best_rev = rev;
        }
    }
    PriceIndex(best)
}

/// `sum_{j >= k} (v_j - v_k) * masses[j]`.
pub fn surplus_at(values: &[Rational], masses: &[Rational], k: PriceIndex) -> Rational {
    let p = &values[k.0];
    values[k.0..]
        .iter()
        .zip(&masses[k.0..])
        .map(|(v, m)| (v - p) * m)
        .sum()
}

/// `v_k * sum_{j >= k} masses[j]`.
pub fn revenue_at(values: &[Rational], masses: &[Rational], k: PriceIndex) -> Rational {
    let tail: Rational = masses[k.0..].iter().sum();
    &values[k.0] * tail
}

/// A probability distribution over the valuation grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Market {
    grid: ValuationGrid,
    masses: Vec<Rational>,
}

impl Market {
    /// Validates non-negativity and exact unit sum.
    pub fn new(grid: ValuationGrid, masses: Vec<Rational>) -> Result<Self> {
        if masses.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: masses.len(),
            });
        }
        if let Some((index, value)) = masses.iter().enumerate().find(|(_, m)| m.is_negative()) {
            return Err(Error::NegativeMass {
                index,
                value: value.clone(),
            });
        }
        let sum: Rational = masses.iter().sum();
        if sum != Rational::one() {
            return Err(Error::MassNotOne {
                index: masses.len() - 1,
                sum,
            });
        }
        Ok(Market { grid, masses })
    }

    /// Validates both the grid and the masses from raw lists.
    pub fn from_parts(values: Vec<Rational>, masses: Vec<Rational>) -> Result<Self> {
        Market::new(ValuationGrid::new(values)?, masses)
    }

    pub fn grid(&self) -> &ValuationGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Rational] {
        self.grid.values()
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn mass(&self, k: PriceIndex) -> &Rational {
        &self.masses[k.0]
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn tails(&self) -> Vec<Rational> {
        tail_sums(&self.masses)
    }

    /// Mass of consumers with valuation at least `v_k`.
    pub fn tail(&self, k: PriceIndex) -> Rational {
        self.masses[k.0..].iter().sum()
    }

    /// Indices with positive mass, increasing.
    pub fn support(&self) -> Vec<usize> {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_positive())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn revenue(&self, k: PriceIndex) -> Rational {
        revenue_at(self.values(), &self.masses, k)
    }

    pub fn revenues(&self) -> Vec<Rational> {
        self.tails()
            .into_iter()
            .zip(self.values())
            .map(|(t, v)| v * t)
            .collect()
    }

    /// Highest price among the revenue maximizers.
    pub fn monopoly_price_index(&self) -> PriceIndex {
        best_response(self.values(), &self.masses)
    }

    pub fn consumer_surplus(&self, k: PriceIndex) -> Rational {
        surplus_at(self.values(), &self.masses, k)
    }

    /// Same number as [`Market::revenue`]; named as a surplus quantity.
    pub fn producer_surplus(&self, k: PriceIndex) -> Rational {
        self.revenue(k)
    }

    /// `sum_{j >= k} v_j x_j`, the total surplus generated at price `v_k`.
    pub fn served_value(&self, k: PriceIndex) -> Rational {
        self.values()[k.0..]
            .iter()
            .zip(&self.masses[k.0..])
            .map(|(v, m)| v * m)
            .sum()
    }

    /// The same market on a grid scaled by `c > 0`.
    pub fn scaled(&self, c: &Rational) -> Result<Market> {
        Market::new(self.grid.scaled(c)?, self.masses.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct MarketRepr {
    valuations: Vec<Rational>,
    masses: Vec<Rational>,
}

impl Serialize for Market {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MarketRepr {
            valuations: self.values().to_vec(),
            masses: self.masses.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Market {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MarketRepr::deserialize(d)?;
        Market::from_parts(repr.valuations, repr.masses).map_err(serde::de::Error::custom)
    }
}

pub fn check_alpha(alpha: &Rational) -> Result<()> {
    if *alpha < Rational::new(1, 2) || *alpha > Rational::one() {
        Err(Error::AlphaOutOfRange(alpha.clone()))
    } else {
        Ok(())
    }
}

/// `alpha * cs + (1 - alpha) * ps` for `alpha` in `[1/2, 1]`.
pub fn weighted_total_surplus(alpha: &Rational, cs: &Rational, ps: &Rational) -> Result<Rational> {
    check_alpha(alpha)?;
    Ok(alpha * cs + (Rational::one() - alpha) * ps)
}
