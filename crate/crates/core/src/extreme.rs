//! Extreme markets and the greedy decomposition into nested extreme markets.
//!
//! The extreme market on a support `S` puts no mass outside `S` and makes
//! the monopolist indifferent among every price in `S`: revenue equals
//! `min S` at each of them. The greedy procedure repeatedly packs as much
//! of the residual market as possible into the extreme market on the
//! residual's support; each round removes at least one valuation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{Market, PriceIndex, ValuationGrid};
use crate::rational::Rational;

/// Non-empty, strictly increasing set of grid positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, grid_len: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::EmptySupport);
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= grid_len) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: grid_len,
            });
        }
        Ok(SupportSet(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn lowest(&self) -> usize {
        self.0[0]
    }

    pub fn highest(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_strict_subset_of(&self, other: &SupportSet) -> bool {
        self.len() < other.len() && self.0.iter().all(|i| other.contains(*i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremeMarket {
    pub support: SupportSet,
    pub market: Market,
}

impl ExtremeMarket {
    /// True when revenue is identical at every support point and there is
    /// no mass off the support.
    pub fn is_indifferent(&self) -> bool {
        let revenues = self.market.revenues();
        let r0 = &revenues[self.support.lowest()];
        let off_support_empty = (0..self.market.len())
            .filter(|i| !self.support.contains(*i))
            .all(|i| self.market.masses()[i].is_zero());
        off_support_empty && self.support.indices().iter().all(|&i| revenues[i] == *r0)
    }
}

/// Builds the extreme market on `support`.
pub fn extreme_market(grid: &ValuationGrid, support: &SupportSet) -> ExtremeMarket {
    let values = grid.values();
    let lo = &values[support.lowest()];
    let hi = &values[support.highest()];
    let mut masses = vec![Rational::zero(); grid.len()];
    let idx = support.indices();
    for w in idx.windows(2) {
        let (i, next) = (w[0], w[1]);
        masses[i] = lo * (values[i].recip() - values[next].recip());
    }
    masses[support.highest()] = lo / hi;
    let market = Market::new(grid.clone(), masses).expect("extreme market masses sum to one");
    ExtremeMarket {
        support: support.clone(),
        market,
    }
}

/// Convenience wrapper taking raw grid positions.
pub fn extreme_market_on(grid: &ValuationGrid, indices: &[usize]) -> Result<ExtremeMarket> {
    let support = SupportSet::new(indices.to_vec(), grid.len())?;
    Ok(extreme_market(grid, &support))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionStep {
    pub extreme: ExtremeMarket,
    /// Consumer mass assigned to this extreme market.
    pub mass: Rational,
}

/// Output of [`greedy_decompose`].
///
/// `residuals[l]` is the residual market after round `l` (`residuals[0]` is
/// the input); the final entry is the all-zero vector left after the last
/// round. `alphas[l]` is the share of `residuals[l]` packed into
/// `steps[l]`, so `alphas.len() == steps.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreedyDecomposition {
    pub steps: Vec<DecompositionStep>,
    pub residuals: Vec<Vec<Rational>>,
    pub alphas: Vec<Rational>,
}

impl GreedyDecomposition {
    /// Sum of step masses over steps whose support contains grid position `i`.
    pub fn mass_containing(&self, i: usize) -> Result<Rational> {
        let len = self.residuals.first().map(|r| r.len()).unwrap_or_default();
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
        Ok(self
            .steps
            .iter()
            .filter(|s| s.extreme.support.contains(i))
            .map(|s| &s.mass)
            .sum())
    }

    /// `sum_l y_l x^{S_l}`, coordinate by coordinate.
    pub fn recombine(&self) -> Vec<Rational> {
        let len = self.residuals[0].len();
        let mut out = vec![Rational::zero(); len];
        for step in &self.steps {
            for (o, m) in out.iter_mut().zip(step.extreme.market.masses()) {
                *o += &step.mass * m;
            }
        }
        out
    }

    /// Cumulative masses `y_0, y_0 + y_1, ...`.
    pub fn prefix_masses(&self) -> Vec<Rational> {
        let mut acc = Rational::zero();
        self.steps
            .iter()
            .map(|s| {
                acc += &s.mass;
                acc.clone()
            })
            .collect()
    }
}

/// Greedy decomposition of `market` into nested extreme markets.
pub fn greedy_decompose(market: &Market) -> GreedyDecomposition {
    let grid = market.grid();
    let k = market.len();
    let mut residual: Vec<Rational> = market.masses().to_vec();
    let mut residuals = vec![residual.clone()];
    let mut steps = Vec::new();
    let mut alphas = Vec::new();
    // prod_{j <= l} (1 - alpha_j)
    let mut remaining = Rational::one();

    loop {
        let support_idx: Vec<usize> = (0..k).filter(|&i| residual[i].is_positive()).collect();
        let support = SupportSet::new(support_idx, k).expect("residual is a market");
        let extreme = extreme_market(grid, &support);
        let target = extreme.market.masses();

        if residual.as_slice() == target {
            alphas.push(Rational::one());
            steps.push(DecompositionStep {
                extreme,
                mass: remaining,
            });
            residuals.push(vec![Rational::zero(); k]);
            break;
        }

        // z(t) = x^S + t (x - x^S); coordinate i reaches zero at
        // t = x^S_i / (x^S_i - x_i) whenever x_i < x^S_i.
        let t_hat = (0..k)
            .filter(|&i| residual[i] < target[i])
            .map(|i| &target[i] / (&target[i] - &residual[i]))
            .min()
            .expect("some coordinate falls below the extreme market");
        let next: Vec<Rational> = (0..k)
            .map(|i| &target[i] + &t_hat * (&residual[i] - &target[i]))
            .collect();
        let alpha = Rational::one() - t_hat.recip();

        steps.push(DecompositionStep {
            extreme,
            mass: &alpha * &remaining,
        });
        remaining = remaining * (Rational::one() - &alpha);
        alphas.push(alpha);
        residuals.push(next.clone());
        residual = next;
    }

    GreedyDecomposition {
        steps,
        residuals,
        alphas,
    }
}

/// Convenience: revenue at every support point of each step, for checks.
pub fn step_revenues(step: &DecompositionStep) -> Vec<Rational> {
    step.extreme
        .support
        .indices()
        .iter()
        .map(|&i| step.extreme.market.revenue(PriceIndex(i)))
        .collect()
}
