//! Brute-force verification engine.
//!
//! Every feasible segmentation is priced by some profile `(p_1, ..., p_n)` of
//! per-label prices. For a fixed profile the segmentations under which each
//! `p_s` is weakly revenue-maximal form a polytope, and the surplus charged at
//! that profile is linear on it. Enumerating profiles and solving one exact
//! LP per profile gives the infimum and supremum of surplus over all
//! segmentations.
//!
//! Worst case: ties only ever move the true price up, which never raises the
//! objective, so the minimum over weak polytopes is exact and attained.
//!
//! Best case: the true best response needs strict inequalities against every
//! higher price. A profile contributes only if that strict region is
//! non-empty; the supremum is then the weak maximum, attained iff the optimal
//! face meets the strict region. When it is not attained the result carries a
//! strict interior point so witnesses arbitrarily close to the supremum can be
//! produced.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::market::{check_alpha, Market, PriceIndex};
use crate::rational::Rational;
use crate::regulation::Database;
use crate::segmentation::{evaluate_unchecked, Segmentation, SegmentationOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    ConsumerSurplus,
    /// `alpha * CS + (1 - alpha) * PS`.
    Weighted(Rational),
}

impl Objective {
    fn alpha(&self) -> Rational {
        match self {
            Objective::ConsumerSurplus => Rational::one(),
            Objective::Weighted(a) => a.clone(),
        }
    }

    pub fn of(&self, outcome: &SegmentationOutcome) -> Rational {
        let a = self.alpha();
        &a * &outcome.cs + (Rational::one() - &a) * &outcome.ps
    }

    fn check(&self) -> Result<()> {
        match self {
            Objective::ConsumerSurplus => Ok(()),
            Objective::Weighted(a) => check_alpha(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Upper limit on the number of price profiles enumerated.
    pub max_profiles: u128,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_profiles: 1_000_000,
        }
    }
}

/// Extremes of the true best response over every optimal vertex visited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexStats {
    /// Highest price charged in any segment.
    pub max_price: PriceIndex,
    /// Lowest producer surplus.
    pub min_ps: Rational,
}

impl VertexStats {
    fn merge(a: Option<VertexStats>, b: Option<VertexStats>) -> Option<VertexStats> {
        match (a, b) {
            (Some(a), Some(b)) => Some(VertexStats {
                max_price: a.max_price.max(b.max_price),
                min_ps: a.min_ps.min(b.min_ps),
            }),
            (a, None) => a,
            (None, b) => b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Exact infimum (worst case) or supremum (best case).
    pub value: Rational,
    pub profile: Vec<PriceIndex>,
    pub witness: Segmentation,
    /// Objective at `witness` under the true tie-broken best response.
    pub witness_value: Rational,
    /// Whether the true best response at `witness` is `profile`.
    pub achieved: bool,
    pub profiles_enumerated: u64,
    pub lps_solved: u64,
    pub vertex_stats: Option<VertexStats>,
    approach: Option<Approach>,
}

/// Optimal vertex and a strict point of the same profile.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Approach {
    vertex: Vec<Rational>,
    vertex_value: Rational,
    strict: Vec<Rational>,
    strict_value: Rational,
}

impl OracleResult {
    /// A segmentation whose true objective exceeds `target`, when one exists
    /// among the best-case segmentations of this profile.
    pub fn witness_exceeding(&self, market: &Market, target: &Rational) -> Option<Segmentation> {
        if self.witness_value > *target {
            return Some(self.witness.clone());
        }
        let ap = self.approach.as_ref()?;
        if ap.vertex_value <= *target {
            return None;
        }
        // Objective is linear along the segment from the vertex to the strict
        // point; every point but the vertex is strict.
        let gap = &ap.vertex_value - &ap.strict_value;
        let mut t = (&ap.vertex_value - target) / &gap / Rational::from_integer(2);
        if t > Rational::one() {
            t = Rational::one();
        }
        let point: Vec<Rational> = ap
            .vertex
            .iter()
            .zip(&ap.strict)
            .map(|(y, z)| (Rational::one() - &t) * y + &t * z)
            .collect();
        to_segmentation(market, self.witness.database(), &point).ok()
    }
}

/// Infimum of consumer surplus over all segmentations.
pub fn worst_case_cs(
    market: &Market,
    database: &Database,
    config: &OracleConfig,
) -> Result<OracleResult> {
    worst_case(market, database, &Objective::ConsumerSurplus, config)
}

/// Infimum of `alpha`-weighted total surplus over all segmentations.
pub fn worst_case_weighted(
    market: &Market,
    database: &Database,
    alpha: &Rational,
    config: &OracleConfig,
) -> Result<OracleResult> {
    worst_case(
        market,
        database,
        &Objective::Weighted(alpha.clone()),
        config,
    )
}

/// Supremum of consumer surplus over all segmentations.
pub fn best_case_cs(
    market: &Market,
    database: &Database,
    config: &OracleConfig,
) -> Result<OracleResult> {
    best_case(market, database, &Objective::ConsumerSurplus, config)
}

pub fn best_case_weighted(
    market: &Market,
    database: &Database,
    alpha: &Rational,
    config: &OracleConfig,
) -> Result<OracleResult> {
    best_case(
        market,
        database,
        &Objective::Weighted(alpha.clone()),
        config,
    )
}

struct Problem<'a> {
    market: &'a Market,
    database: &'a Database,
    objective: &'a Objective,
    /// Prices range over `0..base`.
    base: usize,
    count: u64,
}

impl<'a> Problem<'a> {
    fn new(
        market: &'a Market,
        database: &'a Database,
        objective: &'a Objective,
        config: &OracleConfig,
    ) -> Result<Self> {
        objective.check()?;
        // Prices above the highest valuation with positive mass earn nothing.
        let base = market.support().last().map_or(market.len(), |&t| t + 1);
        let profiles = (base as u128)
            .checked_pow(database.len() as u32)
            .unwrap_or(u128::MAX);
        if profiles > config.max_profiles {
            return Err(Error::EnumerationTooLarge {
                profiles,
                limit: config.max_profiles,
            });
        }
        Ok(Problem {
            market,
            database,
            objective,
            base,
            count: profiles as u64,
        })
    }

    /// Label 0 is the most significant digit, so index order is lexicographic.
    fn profile(&self, mut idx: u64) -> Vec<usize> {
        let n = self.database.len();
        let mut p = vec![0; n];
        for s in (0..n).rev() {
            p[s] = (idx % self.base as u64) as usize;
            idx /= self.base as u64;
        }
        p
    }

    fn num_vars(&self) -> usize {
        self.database.len() * self.market.len()
    }

    fn var(&self, s: usize, k: usize) -> usize {
        s * self.market.len() + k
    }

    fn objective_coeffs(&self, profile: &[usize]) -> Vec<Rational> {
        let alpha = self.objective.alpha();
        let beta = Rational::one() - &alpha;
        let values = self.market.values();
        let mut c = vec![Rational::zero(); self.num_vars()];
        for (s, &p) in profile.iter().enumerate() {
            let f = self.database.mass(s);
            for k in p..values.len() {
                let per = &alpha * (&values[k] - &values[p]) + &beta * &values[p];
                c[self.var(s, k)] = f * per;
            }
        }
        c
    }

    /// Feasible segmentations with every `p_s` weakly optimal. With `strict`,
    /// one extra variable `delta <= 1` is appended and every row against a
    /// higher price must clear it.
    fn polytope(&self, profile: &[usize], strict: bool, sense: Sense) -> LinearProgram {
        let k_len = self.market.len();
        let n = self.database.len();
        let nv = self.num_vars() + usize::from(strict);
        let delta = self.num_vars();
        let values = self.market.values();
        let mut lp = LinearProgram::new(nv, sense);
        for s in 0..n {
            let terms: Vec<(usize, Rational)> = (0..k_len)
                .map(|k| (self.var(s, k), Rational::one()))
                .collect();
            lp.add_sparse(&terms, Relation::Eq, Rational::one());
        }
        for k in 0..k_len {
            let terms: Vec<(usize, Rational)> = (0..n)
                .map(|s| (self.var(s, k), self.database.mass(s).clone()))
                .collect();
            lp.add_sparse(&terms, Relation::Eq, self.market.masses()[k].clone());
        }
        for (s, &p) in profile.iter().enumerate() {
            for i in 0..k_len {
                if i == p {
                    continue;
                }
                // v_p tail(p) - v_i tail(i) >= 0  (or >= delta for i > p)
                let mut terms: Vec<(usize, Rational)> = Vec::new();
                for k in p..k_len {
                    terms.push((self.var(s, k), values[p].clone()));
                }
                for k in i..k_len {
                    terms.push((self.var(s, k), -&values[i]));
                }
                if strict && i > p {
                    terms.push((delta, -Rational::one()));
                }
                lp.add_sparse(&terms, Relation::Ge, Rational::zero());
            }
        }
        if strict {
            lp.add_sparse(&[(delta, Rational::one())], Relation::Le, Rational::one());
        }
        lp
    }

    fn segmentation(&self, point: &[Rational]) -> Result<Segmentation> {
        to_segmentation(self.market, self.database, point)
    }

    fn outcome(&self, point: &[Rational]) -> SegmentationOutcome {
        evaluate_unchecked(
            &self
                .segmentation(point)
                .expect("LP point is a segmentation"),
        )
    }

    fn stats(&self, point: &[Rational]) -> VertexStats {
        let o = self.outcome(point);
        VertexStats {
            max_price: *o.prices.iter().max().expect("non-empty database"),
            min_ps: o.ps,
        }
    }
}

/// Weak-optimality polytope of `profile`, in the variable order
/// `sigma(k|s)` at position `s * K + k` used by [`segmentation_point`].
pub fn profile_polytope(
    market: &Market,
    database: &Database,
    profile: &[PriceIndex],
) -> Result<LinearProgram> {
    if profile.len() != database.len() {
        return Err(Error::LabelCountMismatch {
            expected: database.len(),
            got: profile.len(),
        });
    }
    for &p in profile {
        market.grid().check_index(p)?;
    }
    let problem = Problem {
        market,
        database,
        objective: &Objective::ConsumerSurplus,
        base: market.len(),
        count: 0,
    };
    let raw: Vec<usize> = profile.iter().map(|p| p.0).collect();
    let mut lp = problem.polytope(&raw, false, Sense::Minimize);
    lp.set_objective(problem.objective_coeffs(&raw));
    Ok(lp)
}

/// Flattens a segmentation into LP variables.
pub fn segmentation_point(segmentation: &Segmentation) -> Vec<Rational> {
    segmentation
        .conditionals()
        .iter()
        .flat_map(|c| c.masses().iter().cloned())
        .collect()
}

fn to_segmentation(
    market: &Market,
    database: &Database,
    point: &[Rational],
) -> Result<Segmentation> {
    let k = market.len();
    let conditionals = (0..database.len())
        .map(|s| Market::new(market.grid().clone(), point[s * k..(s + 1) * k].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Segmentation::new(database.clone(), conditionals)
}

fn to_prices(profile: &[usize]) -> Vec<PriceIndex> {
    profile.iter().map(|&p| PriceIndex(p)).collect()
}

/// Per-profile result folded by the parallel reduction.
struct Partial {
    best: Option<Candidate>,
    lps: u64,
    stats: Option<VertexStats>,
}

struct Candidate {
    value: Rational,
    profile: Vec<usize>,
    point: Vec<Rational>,
    achieved: bool,
    approach: Option<Approach>,
}

fn fold(a: Partial, b: Partial, better: fn(&Candidate, &Candidate) -> Ordering) -> Partial {
    let best = match (a.best, b.best) {
        (Some(x), Some(y)) => Some(if better(&y, &x) == Ordering::Less {
            y
        } else {
            x
        }),
        (x, None) => x,
        (None, y) => y,
    };
    Partial {
        best,
        lps: a.lps + b.lps,
        stats: VertexStats::merge(a.stats, b.stats),
    }
}

fn finish(problem: &Problem, total: Partial) -> Result<OracleResult> {
    let c = total.best.ok_or(Error::Infeasible)?;
    let witness = problem.segmentation(&c.point)?;
    let outcome = evaluate_unchecked(&witness);
    Ok(OracleResult {
        value: c.value,
        witness_value: problem.objective.of(&outcome),
        achieved: outcome.prices == to_prices(&c.profile),
        profile: to_prices(&c.profile),
        witness,
        profiles_enumerated: problem.count,
        lps_solved: total.lps,
        vertex_stats: total.stats,
        approach: c.approach,
    })
}

fn worst_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.value
        .cmp(&b.value)
        .then_with(|| a.profile.cmp(&b.profile))
}

fn worst_case(
    market: &Market,
    database: &Database,
    objective: &Objective,
    config: &OracleConfig,
) -> Result<OracleResult> {
    let problem = Problem::new(market, database, objective, config)?;
    let total = (0..problem.count)
        .into_par_iter()
        .map(|idx| {
            let profile = problem.profile(idx);
            let mut lp = problem.polytope(&profile, false, Sense::Minimize);
            lp.set_objective(problem.objective_coeffs(&profile));
            match lp.solve() {
                Ok(sol) => Partial {
                    stats: Some(problem.stats(&sol.point)),
                    best: Some(Candidate {
                        value: sol.value,
                        profile,
                        point: sol.point,
                        achieved: false,
                        approach: None,
                    }),
                    lps: 1,
                },
                Err(_) => Partial {
                    best: None,
                    lps: 1,
                    stats: None,
                },
            }
        })
        .reduce(
            || Partial {
                best: None,
                lps: 0,
                stats: None,
            },
            |a, b| fold(a, b, worst_order),
        );
    finish(&problem, total)
}

fn best_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.value
        .cmp(&a.value)
        .then_with(|| b.achieved.cmp(&a.achieved))
        .then_with(|| a.profile.cmp(&b.profile))
}

fn best_case(
    market: &Market,
    database: &Database,
    objective: &Objective,
    config: &OracleConfig,
) -> Result<OracleResult> {
    let problem = Problem::new(market, database, objective, config)?;
    let total = (0..problem.count)
        .into_par_iter()
        .map(|idx| best_for_profile(&problem, problem.profile(idx)))
        .reduce(
            || Partial {
                best: None,
                lps: 0,
                stats: None,
            },
            |a, b| fold(a, b, best_order),
        );
    finish(&problem, total)
}

fn best_for_profile(problem: &Problem, profile: Vec<usize>) -> Partial {
    let coeffs = problem.objective_coeffs(&profile);
    let prices = to_prices(&profile);
    let mut lp = problem.polytope(&profile, false, Sense::Maximize);
    lp.set_objective(coeffs.clone());
    let Ok(top) = lp.solve() else {
        return Partial {
            best: None,
            lps: 1,
            stats: None,
        };
    };
    let stats = Some(problem.stats(&top.point));
    if problem.outcome(&top.point).prices == prices {
        return Partial {
            best: Some(Candidate {
                value: top.value,
                profile,
                point: top.point,
                achieved: true,
                approach: None,
            }),
            lps: 1,
            stats,
        };
    }

    let nv = problem.num_vars();
    let mut delta_objective = vec![Rational::zero(); nv + 1];
    delta_objective[nv] = Rational::one();

    // Is the strict region non-empty at all?
    let mut lp = problem.polytope(&profile, true, Sense::Maximize);
    lp.set_objective(delta_objective.clone());
    let interior = lp.solve().expect("weak polytope is non-empty");
    if !interior.value.is_positive() {
        return Partial {
            best: None,
            lps: 2,
            stats,
        };
    }
    let strict: Vec<Rational> = interior.point[..nv].to_vec();

    // Does the optimal face meet the strict region?
    let mut face_coeffs = coeffs.clone();
    face_coeffs.push(Rational::zero());
    lp.add(face_coeffs, Relation::Eq, top.value.clone());
    let face = lp.solve().expect("optimal face is non-empty");
    if face.value.is_positive() {
        return Partial {
            best: Some(Candidate {
                value: top.value,
                profile,
                point: face.point[..nv].to_vec(),
                achieved: true,
                approach: None,
            }),
            lps: 3,
            stats,
        };
    }

    let strict_value: Rational = coeffs.iter().zip(&strict).map(|(c, x)| c * x).sum();
    let t = Rational::new(1, 2);
    let mid: Vec<Rational> = top
        .point
        .iter()
        .zip(&strict)
        .map(|(y, z)| (Rational::one() - &t) * y + &t * z)
        .collect();
    Partial {
        best: Some(Candidate {
            value: top.value.clone(),
            profile,
            point: mid,
            achieved: false,
            approach: Some(Approach {
                vertex: top.point,
                vertex_value: top.value,
                strict,
                strict_value,
            }),
        }),
        lps: 3,
        stats,
    }
}

/// Largest mass of a single segment that can be priced strictly below the
/// uniform monopoly price.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowPriceThreshold {
    /// Supremum of such segment masses; zero when no valuation lies below the
    /// uniform price.
    pub value: Rational,
    /// Price achieving the supremum (lowest on ties).
    pub price: Option<PriceIndex>,
    /// Whether a segment of exactly `value` mass can be priced there.
    pub attained: bool,
}

/// LP per candidate price `j < i*`: maximize `sum y` over sub-markets
/// `0 <= y <= x` whose true best response is `j`.
pub fn low_price_mass_threshold(market: &Market) -> Result<LowPriceThreshold> {
    let i_star = market.monopoly_price_index().0;
    let mut best = LowPriceThreshold {
        value: Rational::zero(),
        price: None,
        attained: false,
    };
    for j in 0..i_star {
        let k = market.len();
        let mut lp = submarket_lp(market, j, false, Sense::Maximize);
        lp.set_objective(vec![Rational::one(); k]);
        let top = lp.solve()?;
        // Strict region must be non-empty for the weak maximum to be a supremum.
        let mut strict = submarket_lp(market, j, true, Sense::Maximize);
        let mut obj = vec![Rational::zero(); k + 1];
        obj[k] = Rational::one();
        strict.set_objective(obj.clone());
        if !strict.solve()?.value.is_positive() {
            continue;
        }
        let mut row = vec![Rational::one(); k];
        row.push(Rational::zero());
        strict.add(row, Relation::Eq, top.value.clone());
        let attained = strict
            .solve()
            .map(|s| s.value.is_positive())
            .unwrap_or(false);
        if top.value > best.value || (top.value == best.value && attained && !best.attained) {
            best = LowPriceThreshold {
                value: top.value,
                price: Some(PriceIndex(j)),
                attained,
            };
        }
    }
    Ok(best)
}

/// Whether some segment of mass exactly `t` can be priced strictly below the
/// uniform monopoly price.
pub fn can_price_below_uniform(market: &Market, t: &Rational) -> Result<bool> {
    let i_star = market.monopoly_price_index().0;
    let k = market.len();
    for j in 0..i_star {
        let mut lp = submarket_lp(market, j, true, Sense::Maximize);
        let mut obj = vec![Rational::zero(); k + 1];
        obj[k] = Rational::one();
        lp.set_objective(obj);
        let mut row = vec![Rational::one(); k];
        row.push(Rational::zero());
        lp.add(row, Relation::Eq, t.clone());
        match lp.solve() {
            Ok(s) if s.value.is_positive() => return Ok(true),
            Ok(_) | Err(Error::Infeasible) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

fn submarket_lp(market: &Market, j: usize, strict: bool, sense: Sense) -> LinearProgram {
    let k = market.len();
    let values = market.values();
    let mut lp = LinearProgram::new(k + usize::from(strict), sense);
    for (i, x) in market.masses().iter().enumerate() {
        lp.add_sparse(&[(i, Rational::one())], Relation::Le, x.clone());
    }
    for i in 0..k {
        if i == j {
            continue;
        }
        let mut terms: Vec<(usize, Rational)> = (j..k).map(|m| (m, values[j].clone())).collect();
        terms.extend((i..k).map(|m| (m, -&values[i])));
        if strict && i > j {
            terms.push((k, -Rational::one()));
        }
        lp.add_sparse(&terms, Relation::Ge, Rational::zero());
    }
    if strict {
        lp.add_sparse(&[(k, Rational::one())], Relation::Le, Rational::one());
    }
    lp
}
