//! Norms, discrete energy, error metrics and per-step records.

use crate::error::{EfkError, Result};
use crate::field::Field;
use crate::flows::potential;
use crate::grid::PeriodicGrid;
use crate::lowrank::{effective_rank, reconstruct, LowRankState};
use crate::spectral::{apply_laplacian, SpectrumTables};

/// Relative singular-value threshold used for the rank of dense states.
pub const EFFECTIVE_RANK_THRESHOLD: f64 = 1e-3;

/// Diagnostics of one time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub step: usize,
    pub time: f64,
    pub max_norm: f64,
    pub energy: f64,
    pub rank: usize,
}

pub fn max_norm(w: &Field) -> f64 {
    w.max_abs()
}

/// `h_x h_y Σ [ κ/2 (δ_s W)² - ½ W δ_s W + F(W) ]`.
///
/// On a periodic grid `-Σ W δ_s W` equals the sum of squared forward
/// differences, so the middle term is the discrete `½|∇u|²`.
pub fn discrete_energy(w: &Field, spec: &SpectrumTables) -> Result<f64> {
    let lap = apply_laplacian(w, spec)?;
    let kappa = spec.kappa();
    let g = spec.grid();
    let sum: f64 = w
        .values()
        .iter()
        .zip(lap.values().iter())
        .map(|(&u, &l)| 0.5 * kappa * l * l - 0.5 * u * l + potential(u))
        .sum();
    Ok(g.h_x * g.h_y * sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub err_inf: f64,
    pub err_l2: f64,
    pub relerr: f64,
}

/// Max-norm error, discrete L2 error and relative Frobenius error of `u`
/// against `reference`, both sampled on `grid`.
pub fn error_metrics(u: &Field, reference: &Field, grid: &PeriodicGrid) -> Result<ErrorMetrics> {
    if u.shape() != reference.shape() || u.shape() != grid.shape() {
        return Err(EfkError::ShapeMismatch {
            expected: grid.shape(),
            got: if u.shape() != grid.shape() { u.shape() } else { reference.shape() },
        });
    }
    let ref_norm = reference.frobenius_norm();
    if ref_norm == 0.0 {
        return Err(EfkError::ZeroReference("relative error against a zero reference"));
    }
    let diff = u.values() - reference.values();
    let fro = diff.norm();
    Ok(ErrorMetrics {
        err_inf: diff.amax(),
        err_l2: (grid.h_x * grid.h_y).sqrt() * fro,
        relerr: fro / ref_norm,
    })
}

/// `log(e_coarse / e_fine) / log(s_coarse / s_fine)`.
///
/// Not finite when the two step sizes (or errors) coincide.
pub fn observed_order(e_coarse: f64, e_fine: f64, s_coarse: f64, s_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (s_coarse / s_fine).ln()
}

/// A solver state that can be monitored.
pub trait SolverState {
    /// Dense field represented by the state.
    fn dense(&self) -> Field;
    /// Factored rank for low-rank states, effective rank for dense ones.
    fn monitored_rank(&self) -> usize;
}

impl SolverState for Field {
    fn dense(&self) -> Field {
        self.clone()
    }

    fn monitored_rank(&self) -> usize {
        effective_rank(self, EFFECTIVE_RANK_THRESHOLD)
    }
}

impl SolverState for LowRankState {
    fn dense(&self) -> Field {
        reconstruct(self)
    }

    fn monitored_rank(&self) -> usize {
        self.rank()
    }
}

pub fn record_step<S: SolverState + ?Sized>(step: usize, tau: f64, state: &S, spec: &SpectrumTables) -> Result<RunRecord> {
    let w = state.dense();
    Ok(RunRecord {
        step,
        time: step as f64 * tau,
        max_norm: max_norm(&w),
        energy: discrete_energy(&w, spec)?,
        rank: state.monitored_rank(),
    })
}
