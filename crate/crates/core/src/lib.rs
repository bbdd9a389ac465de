//! Exact analysis of third-degree price discrimination when a regulator
//! controls which consumer data the seller may use but not how nature
//! segments consumers within it.
//!
//! All arithmetic is exact; see [`Rational`].

#![allow(clippy::result_large_err)]

pub mod bounds;
pub mod error;
pub mod extreme;
pub mod lp;
pub mod market;
pub mod oracle;
pub mod rational;
pub mod regulation;
pub mod segmentation;

pub use bounds::{compute_bounds, Bounds, BoundsReport};
pub use error::{Error, Result};
pub use extreme::{
    extreme_market, extreme_market_on, greedy_decompose, DecompositionStep, ExtremeMarket,
    GreedyDecomposition, SupportSet,
};
pub use market::{check_alpha, weighted_total_surplus, Market, PriceIndex, ValuationGrid};
pub use oracle::{
    best_case_cs, best_case_weighted, can_price_below_uniform, low_price_mass_threshold,
    profile_polytope, segmentation_point, worst_case_cs, worst_case_weighted, LowPriceThreshold,
    Objective, OracleConfig, OracleResult,
};
pub use rational::Rational;
pub use regulation::{
    classify, classify_weighted, classify_with, policy_is_worst_case_optimal, Classification,
    Database, PolicyVerdict,
};
pub use segmentation::{
    construct_cs_improving, construct_cs_reducing, evaluate, ImprovingWitness, Segmentation,
    SegmentationOutcome, SegmentationRepr,
};
