//! Exact-arithmetic workbench for ψ-class intersection numbers, integrable
//! hierarchies, Virasoro representations, Gaussian matrix models and torsion.

pub mod fock;
pub mod kdv;
pub mod kp;
pub mod linalg;
pub mod matrix_models;
pub mod ribbon;
pub mod scalar;
pub mod series;
pub mod torsion;

pub use scalar::{GaussianRational, Rational};

/// Series with Gaussian-rational coefficients: the default carrier for F, Z and Fock states.
pub type Series = series::TruncatedSeries<GaussianRational>;
/// Series with rational coefficients.
pub type RationalSeries = series::TruncatedSeries<Rational>;
/// Floating-point series, for numeric experiments on the same algebra.
pub type FloatSeries = series::TruncatedSeries<f64>;
pub type ExactMatrix = linalg::Matrix<Rational>;
pub type FloatMatrix = linalg::Matrix<f64>;
