use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Field indices are zero-based; messages number positions and labels from 1.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("valuation grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),

    #[error("valuation at position {} is not positive: {value}", .index + 1)]
    NonPositiveValuation { index: usize, value: Rational },

    #[error("valuations not strictly increasing at position {}: {prev} >= {value}", .index + 1)]
    GridNotIncreasing {
        index: usize,
        prev: Rational,
        value: Rational,
    },

    #[error("expected {expected} masses, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("negative mass at position {}: {value}", .index + 1)]
    NegativeMass { index: usize, value: Rational },

    #[error("masses sum to {sum}, not 1 (over {} positions)", .index + 1)]
    MassNotOne { index: usize, sum: Rational },

    #[error("database has no labels")]
    EmptyDatabase,

    #[error("label {} has non-positive mass {value}", .index + 1)]
    NonPositiveLabelMass { index: usize, value: Rational },

    #[error("support set is empty")]
    EmptySupport,

    #[error("position {} out of range 1..={len}", .index + 1)]
    IndexOutOfRange { index: usize, len: usize },

    #[error("alpha {0} outside [1/2, 1]")]
    AlphaOutOfRange(Rational),

    #[error("uniform monopoly price is the highest valuation; robust bounds are undefined")]
    UniformPriceAtTop,

    #[error("segmentation is inconsistent with the market at position {} (residual {residual})", .index + 1)]
    InconsistentMarginals { index: usize, residual: Rational },

    #[error("segmentation has {got} conditionals but the database has {expected} labels")]
    LabelCountMismatch { expected: usize, got: usize },

    #[error("conditional market is on a different valuation grid")]
    GridMismatch,

    #[error("label {} has mass {mass} > lower bound {bound}", .label + 1)]
    LabelNotBinding {
        label: usize,
        mass: Rational,
        bound: Rational,
    },

    #[error("database has a single label")]
    TrivialDatabase,

    #[error("database is not worst-case optimal (label {} has mass {mass} <= {bound})", .label + 1)]
    NotWorstCaseOptimal {
        label: usize,
        mass: Rational,
        bound: Rational,
    },

    #[error("label {} has mass {mass} >= upper bound {bound}", .label + 1)]
    LabelNotQualifying {
        label: usize,
        mass: Rational,
        bound: Rational,
    },

    #[error("epsilon {0} does not leave a strictly better low price")]
    EpsilonRejected(Rational),

    #[error("no strict witness found for label {} within the search depth", .label + 1)]
    WitnessSearchExhausted { label: usize },

    #[error("price-profile enumeration too large: {profiles} profiles exceeds limit {limit}")]
    EnumerationTooLarge { profiles: u128, limit: u128 },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("parse error: {0}")]
    Parse(String),
}
