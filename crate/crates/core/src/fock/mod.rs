//! Fock space `B = ℂ[x_1, x_2, ..]` with the Heisenberg action, the oscillator
//! Virasoro representation, the vertex operator, and the target-manifold operators.

mod coeffs;
mod operator;
mod oscillator;
mod target;
mod vertex;

use thiserror::Error;

pub use coeffs::{cd_identity_check, coeff_c, coeff_d, CdIdentityReport, CdRow, CdSampleGrid, ClassShift};
pub use operator::OperatorExpr;
pub use oscillator::{
    fock_layout, heisenberg_apply, oscillator_commutator_check, oscillator_virasoro_apply, printed_display_apply,
    printed_display_report, CommutatorReport, DisplayDiff, OscillatorParams,
};
pub use target::{
    target_commutator_report, target_virasoro_build, CohomologyData, TargetCommutatorEntry, TargetCommutatorReport,
    TargetSpace,
};
pub use vertex::{vertex_commutation_check, vertex_diagonal_check, vertex_operator_apply, VertexCheck, VertexExpansion};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FockError {
    #[error("weight {weight} exceeds the cap {cap}")]
    TruncationError { weight: u64, cap: u32 },
    #[error("no test monomials fit under the cap: {0}")]
    InsufficientCap(String),
    #[error("pole: b + {l} = 0")]
    PoleError { l: i64 },
    #[error("invalid index range: {0}")]
    InvalidRange(String),
    #[error("invalid cohomology data: {0}")]
    InvalidData(String),
}
