//! Operator-splitting solvers for the periodic 2D extended Fisher-Kolmogorov
//! equation `u_t = -κ Δ²u + Δu + u - u³`.
//!
//! Space is discretised by the five-point periodic Laplacian. The resulting
//! ODE system is split into a biharmonic flow, a Laplacian flow and a
//! pointwise reaction flow, each solved exactly. [`flows`] composes them on
//! dense fields; [`lowrank`] runs the same composition on factored states
//! with a rank-adaptive integrator for the reaction part.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod flows;
pub mod grid;
mod linalg;
pub mod lowrank;
#[cfg(any(test, feature = "oracles"))]
pub mod oracle;
pub mod problems;
pub mod spectral;

pub use diagnostics::{
    discrete_energy, error_metrics, max_norm, observed_order, record_step, ErrorMetrics, RunRecord, SolverState,
};
pub use error::{EfkError, Result};
pub use field::Field;
pub use flows::{frs_run, frs_step, laplacian_flow_full, nonlinear_flow_field, nonlinear_flow_scalar};
pub use grid::{build_grid, PeriodicGrid};
pub use lowrank::{
    alrs_run, alrs_step, biharmonic_flow_lowrank, effective_rank, laplacian_flow_lowrank, rank_adaptive_nonlinear_step,
    reconstruct, truncate_fixed, truncated_svd, AlrsConfig, BiharmonicRank, LowRankState, ToleranceMode,
    TruncationPolicy,
};
pub use problems::{ProblemKind, ProblemSpec};
pub use spectral::{
    apply_biharmonic, apply_biharmonic_exp, apply_exp_x, apply_exp_y, apply_laplacian, build_spectrum, SpectrumTables,
};
