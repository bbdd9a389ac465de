//! Databases and their classification against the robust thresholds.
//!
//! A database is worst-case optimal (WC) iff every label mass is strictly
//! above `lambda_lower`. A WC database can also strictly raise consumer
//! surplus (F2) iff some label mass is strictly below `lambda_upper`.
//! Undominated databases are F2 when F2 is non-empty, otherwise all of WC.

use serde::{Deserialize, Serialize};

use crate::bounds::{compute_bounds, Bounds};
use crate::error::{Error, Result};
use crate::market::{check_alpha, Market};
use crate::rational::Rational;

/// Distribution of labels over consumers: every mass positive, summing to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Database {
    masses: Vec<Rational>,
}

impl Database {
    pub fn new(masses: Vec<Rational>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        if let Some((index, value)) = masses.iter().enumerate().find(|(_, m)| !m.is_positive()) {
            return Err(Error::NonPositiveLabelMass {
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
        Ok(Database { masses })
    }

    /// The single-label database: no information about consumers.
    pub fn trivial() -> Self {
        Database {
            masses: vec![Rational::one()],
        }
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn mass(&self, label: usize) -> &Rational {
        &self.masses[label]
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.masses.len() == 1
    }

    pub fn min_mass(&self) -> &Rational {
        self.masses.iter().min().expect("non-empty")
    }

    pub fn check_label(&self, label: usize) -> Result<()> {
        if label < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: label,
                len: self.len(),
            })
        }
    }
}

impl<'de> Deserialize<'de> for Database {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            masses: Vec<Rational>,
        }
        let repr = Repr::deserialize(d)?;
        Database::new(repr.masses).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub in_wc: bool,
    pub in_f2: bool,
    pub undominated: bool,
    /// Smallest label violating the lower bound when not in WC; smallest
    /// label under the upper bound when in F2; otherwise none.
    pub binding_label: Option<usize>,
}

/// Classification against precomputed bounds.
pub fn classify_with(bounds: &Bounds, database: &Database) -> Classification {
    let masses = database.masses();
    let violator = masses.iter().position(|f| *f <= bounds.lambda_lower);
    let in_wc = violator.is_none();
    let qualifier = masses.iter().position(|f| *f < bounds.lambda_upper);
    let in_f2 = in_wc && qualifier.is_some();
    let undominated = if bounds.f2_nonempty() { in_f2 } else { in_wc };
    let binding_label = if !in_wc {
        violator
    } else if in_f2 {
        qualifier
    } else {
        None
    };
    Classification {
        in_wc,
        in_f2,
        undominated,
        binding_label,
    }
}

pub fn classify(market: &Market, database: &Database) -> Result<Classification> {
    Ok(classify_with(&compute_bounds(market)?, database))
}

/// Classification under the `alpha`-weighted surplus objective. The sets
/// coincide with the consumer-surplus ones for every `alpha` in `[1/2, 1]`;
/// the oracle checks that independently.
pub fn classify_weighted(
    market: &Market,
    database: &Database,
    alpha: &Rational,
) -> Result<Classification> {
    check_alpha(alpha)?;
    classify(market, database)
}

/// Outcome of checking a whole policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolicyVerdict {
    pub worst_case_optimal: bool,
    /// Position in the policy of the first database outside WC.
    pub first_violator: Option<usize>,
}

/// A policy is worst-case optimal iff every permitted database is in WC.
pub fn policy_is_worst_case_optimal(
    market: &Market,
    databases: &[Database],
) -> Result<PolicyVerdict> {
    if databases.is_empty() {
        return Ok(PolicyVerdict {
            worst_case_optimal: true,
            first_violator: None,
        });
    }
    let bounds = compute_bounds(market)?;
    let first_violator = databases
        .iter()
        .position(|f| !classify_with(&bounds, f).in_wc);
    Ok(PolicyVerdict {
        worst_case_optimal: first_violator.is_none(),
        first_violator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::ValuationGrid;
    use crate::rational::q;

    fn x_star() -> Market {
        Market::new(
            ValuationGrid::integers(3).unwrap(),
            vec![q(2, 5), q(1, 2), q(1, 10)],
        )
        .unwrap()
    }

    fn db(m: &[Rational]) -> Database {
        Database::new(m.to_vec()).unwrap()
    }

    #[test]
    fn database_validation() {
        assert!(matches!(Database::new(vec![]), Err(Error::EmptyDatabase)));
        assert!(matches!(
            Database::new(vec![q(1, 1), q(0, 1)]),
            Err(Error::NonPositiveLabelMass { index: 1, .. })
        ));
        assert!(matches!(
            Database::new(vec![q(1, 2), q(1, 3)]),
            Err(Error::MassNotOne { .. })
        ));
        let d: Database = serde_json::from_str(r#"{"masses": ["1/2","1/2"]}"#).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn worked_example_classification() {
        let m = x_star();
        let half = classify(&m, &db(&[q(1, 2), q(1, 2)])).unwrap();
        assert!(half.in_wc && half.in_f2 && half.undominated);
        assert_eq!(half.binding_label, Some(0));

        let edge = classify(&m, &db(&[q(3, 10), q(7, 10)])).unwrap();
        assert!(!edge.in_wc && !edge.in_f2 && !edge.undominated);
        assert_eq!(edge.binding_label, Some(0));

        let trivial = classify(&m, &Database::trivial()).unwrap();
        assert!(trivial.in_wc);
        assert!(!trivial.in_f2);
        assert!(!trivial.undominated);
        assert_eq!(trivial.binding_label, None);
    }

    #[test]
    fn undominated_falls_back_to_wc_when_f2_empty() {
        // lambda_lower = 19/20: only the trivial database is in WC and F2 is empty.
        let m = Market::new(
            ValuationGrid::integers(3).unwrap(),
            vec![q(1, 5), q(3, 10), q(1, 2)],
        )
        .unwrap();
        let c = classify(&m, &Database::trivial()).unwrap();
        assert!(c.in_wc && !c.in_f2 && c.undominated);
    }

    #[test]
    fn policies() {
        let m = x_star();
        let v = policy_is_worst_case_optimal(&m, &[Database::trivial()]).unwrap();
        assert!(v.worst_case_optimal);
        let v = policy_is_worst_case_optimal(&m, &[Database::trivial(), db(&[q(3, 10), q(7, 10)])])
            .unwrap();
        assert!(!v.worst_case_optimal);
        assert_eq!(v.first_violator, Some(1));
        let v = policy_is_worst_case_optimal(&m, &[]).unwrap();
        assert!(v.worst_case_optimal);
    }

    #[test]
    fn weighted_matches_plain() {
        let m = x_star();
        let half = db(&[q(1, 2), q(1, 2)]);
        let edge = db(&[q(3, 10), q(7, 10)]);
        assert!(classify_weighted(&m, &half, &q(1, 2)).unwrap().in_wc);
        assert!(!classify_weighted(&m, &edge, &q(3, 4)).unwrap().in_wc);
        assert_eq!(
            classify_weighted(&m, &half, &q(1, 1)).unwrap(),
            classify(&m, &half).unwrap()
        );
        assert!(matches!(
            classify_weighted(&m, &half, &q(1, 4)),
            Err(Error::AlphaOutOfRange(_))
        ));
    }
}
