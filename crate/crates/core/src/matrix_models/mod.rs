//! Gaussian Hermitian ensembles with an external source: exact Wick contraction,
//! genus expansion, the perturbative cubic integral against the graph side, and two
//! numeric checks (normalization by quadrature, the rank-2 unitary orbit integral).

mod numeric;
mod wick;

use thiserror::Error;

pub use numeric::{gaussian_normalization_check, hciz_check, hciz_closed_form, HciZReport, NormalizationReport};
pub use wick::{
    genus_expansion, kontsevich_match, pairing_diagrams, wick_moment, wick_moment_budget, GaussianSpec, LaurentN, MatchReport, Moment,
    PairingDiagram, TraceWord, DEFAULT_MATCHING_BUDGET,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MatrixError {
    #[error("{needed} matchings exceed the budget {budget}")]
    BudgetError { needed: u128, budget: u128 },
    #[error("invalid trace word: {0}")]
    InvalidWord(String),
    #[error("invalid Gaussian spec: {0}")]
    InvalidSpec(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge: {0}")]
    NumericError(String),
    #[error(transparent)]
    Ribbon(#[from] crate::ribbon::RibbonError),
}
