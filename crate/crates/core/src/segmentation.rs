//! Segmentations, their priced outcomes, and the two adversarial witnesses.
//!
//! A segmentation assigns each label a conditional market; the label-weighted
//! mixture must reproduce the aggregate market exactly. The monopolist prices
//! every segment at its highest revenue-maximizing valuation.
//!
//! Two constructions are provided:
//!
//! * [`construct_cs_reducing`]: when some label mass is at most
//!   `lambda_lower`, fill that label with a prefix of the greedy
//!   decomposition. Every extreme market in the prefix has `v_bar` in its
//!   support, so the label is priced at `v_bar` or higher and consumer
//!   surplus falls strictly below uniform pricing.
//! * [`construct_cs_improving`]: when the database is worst-case optimal and
//!   some label mass is below `lambda_upper`, pack that label with every
//!   consumer valuing below the uniform price plus just enough high-valuation
//!   consumers that a lower price becomes strictly optimal. Both consumer and
//!   producer surplus rise strictly.
//!
//! In both cases the remaining labels share the leftover consumers evenly.

use serde::{Deserialize, Serialize};

use crate::bounds::compute_bounds;
use crate::error::{Error, Result};
use crate::extreme::greedy_decompose;
use crate::market::{
    best_response, check_alpha, revenue_at, surplus_at, Market, PriceIndex, ValuationGrid,
};
use crate::rational::Rational;
use crate::regulation::{classify_with, Database};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    database: Database,
    conditionals: Vec<Market>,
}

impl Segmentation {
    /// Checks label count and grid agreement; marginal consistency is checked
    /// against a specific aggregate market by [`Segmentation::check_marginals`].
    pub fn new(database: Database, conditionals: Vec<Market>) -> Result<Self> {
        if conditionals.len() != database.len() {
            return Err(Error::LabelCountMismatch {
                expected: database.len(),
                got: conditionals.len(),
            });
        }
        let grid = conditionals[0].grid();
        if conditionals.iter().any(|c| c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Segmentation {
            database,
            conditionals,
        })
    }

    /// Every label sees the aggregate market.
    pub fn independent(market: &Market, database: &Database) -> Self {
        Segmentation {
            database: database.clone(),
            conditionals: vec![market.clone(); database.len()],
        }
    }

    pub fn database(&self) -> &Database {
        &self.database
    }

    pub fn conditionals(&self) -> &[Market] {
        &self.conditionals
    }

    pub fn conditional(&self, label: usize) -> &Market {
        &self.conditionals[label]
    }

    /// `sum_s f_s sigma(k|s)` for every `k`.
    pub fn aggregate(&self) -> Vec<Rational> {
        let k = self.conditionals[0].len();
        let mut out = vec![Rational::zero(); k];
        for (f, c) in self.database.masses().iter().zip(&self.conditionals) {
            for (o, m) in out.iter_mut().zip(c.masses()) {
                *o += f * m;
            }
        }
        out
    }

    /// Exact marginal consistency; on failure reports the coordinate with the
    /// largest absolute residual.
    pub fn check_marginals(&self, market: &Market) -> Result<()> {
        if self.conditionals[0].grid() != market.grid() {
            return Err(Error::GridMismatch);
        }
        let agg = self.aggregate();
        let worst = agg
            .iter()
            .zip(market.masses())
            .map(|(a, x)| a - x)
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().cmp(&b.abs()))
            .expect("non-empty grid");
        if worst.1.is_zero() {
            Ok(())
        } else {
            Err(Error::InconsistentMarginals {
                index: worst.0,
                residual: worst.1,
            })
        }
    }

    pub fn to_repr(&self) -> SegmentationRepr {
        SegmentationRepr {
            database: self.database.clone(),
            conditionals: self
                .conditionals
                .iter()
                .map(|c| c.masses().to_vec())
                .collect(),
        }
    }

    pub fn from_repr(grid: &ValuationGrid, repr: SegmentationRepr) -> Result<Self> {
        let conditionals = repr
            .conditionals
            .into_iter()
            .map(|masses| Market::new(grid.clone(), masses))
            .collect::<Result<Vec<_>>>()?;
        Segmentation::new(repr.database, conditionals)
    }
}

/// JSON form: `{"database": {"masses": [...]}, "conditionals": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationRepr {
    pub database: Database,
    pub conditionals: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentationOutcome {
    pub prices: Vec<PriceIndex>,
    pub cs: Rational,
    pub ps: Rational,
}

impl SegmentationOutcome {
    pub fn weighted(&self, alpha: &Rational) -> Result<Rational> {
        check_alpha(alpha)?;
        Ok(alpha * &self.cs + (Rational::one() - alpha) * &self.ps)
    }
}

/// Prices each segment at its best response and totals the surpluses.
pub fn evaluate(market: &Market, segmentation: &Segmentation) -> Result<SegmentationOutcome> {
    segmentation.check_marginals(market)?;
    Ok(evaluate_unchecked(segmentation))
}

pub(crate) fn evaluate_unchecked(segmentation: &Segmentation) -> SegmentationOutcome {
    let values = segmentation.conditionals[0].values();
    let mut prices = Vec::with_capacity(segmentation.database.len());
    let mut cs = Rational::zero();
    let mut ps = Rational::zero();
    for (f, c) in segmentation
        .database
        .masses()
        .iter()
        .zip(&segmentation.conditionals)
    {
        let p = best_response(values, c.masses());
        cs += f * surplus_at(values, c.masses(), p);
        ps += f * revenue_at(values, c.masses(), p);
        prices.push(p);
    }
    SegmentationOutcome { prices, cs, ps }
}

/// Completes a segmentation from one label's conditional by splitting the
/// leftover consumers evenly across the other labels.
fn complete_evenly(
    market: &Market,
    database: &Database,
    label: usize,
    sigma: Vec<Rational>,
) -> Result<Segmentation> {
    let f = database.mass(label);
    let rest = Rational::one() - f;
    let leftover: Vec<Rational> = market
        .masses()
        .iter()
        .zip(&sigma)
        .map(|(x, s)| (x - f * s) / &rest)
        .collect();
    let grid = market.grid().clone();
    let own = Market::new(grid.clone(), sigma)?;
    let other = Market::new(grid, leftover)?;
    let conditionals = (0..database.len())
        .map(|s| {
            if s == label {
                own.clone()
            } else {
                other.clone()
            }
        })
        .collect();
    Segmentation::new(database.clone(), conditionals)
}

/// Segmentation with consumer surplus strictly below uniform pricing, for a
/// label whose mass does not exceed `lambda_lower`.
pub fn construct_cs_reducing(
    market: &Market,
    database: &Database,
    label: usize,
) -> Result<Segmentation> {
    database.check_label(label)?;
    let bounds = compute_bounds(market)?;
    if database.is_trivial() {
        return Err(Error::TrivialDatabase);
    }
    let f = database.mass(label);
    if *f > bounds.lambda_lower {
        return Err(Error::LabelNotBinding {
            label,
            mass: f.clone(),
            bound: bounds.lambda_lower,
        });
    }

    let decomposition = greedy_decompose(market);
    let prefix = decomposition.prefix_masses();
    let t = prefix
        .iter()
        .position(|p| p >= f)
        .expect("decomposition masses sum to one");

    let k = market.len();
    let mut sigma = vec![Rational::zero(); k];
    let mut used = Rational::zero();
    for step in &decomposition.steps[..t] {
        let w = &step.mass / f;
        for (s, x) in sigma.iter_mut().zip(step.extreme.market.masses()) {
            *s += &w * x;
        }
        used += w;
    }
    let last = Rational::one() - used;
    for (s, x) in sigma
        .iter_mut()
        .zip(decomposition.steps[t].extreme.market.masses())
    {
        *s += &last * x;
    }
    complete_evenly(market, database, label, sigma)
}

/// A consumer-surplus-improving witness together with how it was built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovingWitness {
    pub segmentation: Segmentation,
    /// Highest price below the uniform price whose revenue in the packed
    /// segment strictly beats the uniform price.
    pub low_price: PriceIndex,
    /// Mass left at or above the uniform price when consumers valuing below
    /// it would not fit in the label; `None` otherwise.
    pub epsilon: Option<Rational>,
}

/// Fills `total` mass into positions `from..` in increasing order, each
/// capped by `caps[j]`.
fn fill_upward(sigma: &mut [Rational], caps: &[Rational], from: usize, total: &Rational) -> bool {
    let mut left = total.clone();
    for j in from..sigma.len() {
        let take = left.clone().min(caps[j].clone());
        left -= &take;
        sigma[j] = take;
    }
    left.is_zero()
}

/// Highest `k < i_star` with revenue strictly above revenue at `i_star`,
/// provided the segment's best response is below `i_star`.
fn strict_low_price(
    values: &[Rational],
    sigma: &[Rational],
    i_star: PriceIndex,
) -> Option<PriceIndex> {
    if best_response(values, sigma) >= i_star {
        return None;
    }
    let at_star = revenue_at(values, sigma, i_star);
    (0..i_star.0)
        .rev()
        .map(PriceIndex)
        .find(|&k| revenue_at(values, sigma, k) > at_star)
}

/// Segmentation with consumer and producer surplus both strictly above
/// uniform pricing, for a worst-case optimal database and a label with mass
/// below `lambda_upper`.
///
/// If the consumers valuing below the uniform price already fill the label,
/// the label keeps only `epsilon` mass at or above the uniform price. When
/// `epsilon` is not given, the largest `1/2^m` (`m <= 64`) that leaves a
/// strictly better low price is used.
pub fn construct_cs_improving(
    market: &Market,
    database: &Database,
    label: usize,
    epsilon: Option<&Rational>,
) -> Result<ImprovingWitness> {
    database.check_label(label)?;
    let bounds = compute_bounds(market)?;
    let class = classify_with(&bounds, database);
    if !class.in_wc {
        let violator = class.binding_label.expect("violating label");
        return Err(Error::NotWorstCaseOptimal {
            label: violator,
            mass: database.mass(violator).clone(),
            bound: bounds.lambda_lower,
        });
    }
    let f = database.mass(label);
    if *f >= bounds.lambda_upper {
        return Err(Error::LabelNotQualifying {
            label,
            mass: f.clone(),
            bound: bounds.lambda_upper,
        });
    }

    let values = market.values();
    let is = bounds.i_star.0;
    let caps: Vec<Rational> = market.masses().iter().map(|x| x / f).collect();
    let low_sum: Rational = caps[..is].iter().sum();
    let k = market.len();

    if low_sum < Rational::one() {
        let mut sigma = vec![Rational::zero(); k];
        sigma[..is].clone_from_slice(&caps[..is]);
        let high = Rational::one() - &low_sum;
        let filled = fill_upward(&mut sigma, &caps, is, &high);
        debug_assert!(filled, "high-valuation mass is available");
        let low_price = strict_low_price(values, &sigma, bounds.i_star)
            .ok_or(Error::WitnessSearchExhausted { label })?;
        return Ok(ImprovingWitness {
            segmentation: complete_evenly(market, database, label, sigma)?,
            low_price,
            epsilon: None,
        });
    }

    let build = |eps: &Rational| -> Option<(Vec<Rational>, PriceIndex)> {
        if !eps.is_positive() || *eps >= Rational::one() {
            return None;
        }
        let scale = (Rational::one() - eps) / &low_sum;
        let mut sigma = vec![Rational::zero(); k];
        for j in 0..is {
            sigma[j] = &caps[j] * &scale;
        }
        if !fill_upward(&mut sigma, &caps, is, eps) {
            return None;
        }
        let low = strict_low_price(values, &sigma, bounds.i_star)?;
        Some((sigma, low))
    };

    let (eps, (sigma, low_price)) = match epsilon {
        Some(e) => (
            e.clone(),
            build(e).ok_or_else(|| Error::EpsilonRejected(e.clone()))?,
        ),
        None => (1..=64u32)
            .map(Rational::pow2_recip)
            .find_map(|e| build(&e).map(|r| (e, r)))
            .ok_or(Error::WitnessSearchExhausted { label })?,
    };
    Ok(ImprovingWitness {
        segmentation: complete_evenly(market, database, label, sigma)?,
        low_price,
        epsilon: Some(eps),
    })
}
