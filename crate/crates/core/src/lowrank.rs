//! Factored low-rank states and the rank-adaptive splitting scheme.
//!
//! A state is `U S Vᵀ` with orthonormal `U` (`n_x x r`) and `V` (`n_y x r`).
//! One step composes three substeps, reaction first:
//!
//! * reaction: one step of the rank-adaptive basis-update & Galerkin
//!   integrator (augmented K- and L-steps, Galerkin S-step, truncation);
//! * biharmonic: exact dense flow followed by SVD re-compression;
//! * Laplacian: `e^{τA_x} U S Vᵀ e^{τA_y}`, applied to the factors, which
//!   keeps the rank unchanged.

use nalgebra::{DMatrix, DVector};

use crate::error::{EfkError, Result};
use crate::field::Field;
use crate::flows::reaction;
use crate::grid::PeriodicGrid;
use crate::linalg::{singular_values, svd_sorted};
use crate::spectral::{apply_exp_x, apply_exp_y, SpectrumTables};

/// How the discarded singular-value tail is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ToleranceMode {
    /// `sqrt(Σ_{i>r} σ_i²) <= theta`.
    #[default]
    Absolute,
    /// `sqrt(Σ_{i>r} σ_i²) <= theta * ||S||_F`.
    Relative,
}

/// Rank selection rule for every truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub theta: f64,
    pub r_min: usize,
    pub r_max: usize,
    pub mode: ToleranceMode,
}

impl TruncationPolicy {
    /// Absolute tolerance `theta`, ranks in `[1, r_max]`.
    pub fn new(theta: f64, r_max: usize) -> Result<Self> {
        let p = Self {
            theta,
            r_min: 1,
            r_max,
            mode: ToleranceMode::Absolute,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(EfkError::InvalidParameter(format!("theta must be positive, got {}", self.theta)));
        }
        if self.r_min < 1 || self.r_min > self.r_max {
            return Err(EfkError::InvalidParameter(format!(
                "rank bounds must satisfy 1 <= r_min <= r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        Ok(())
    }

    /// Rank to keep for the given descending singular values.
    pub fn select_rank(&self, sigma: &[f64]) -> usize {
        let tol = match self.mode {
            ToleranceMode::Absolute => self.theta,
            ToleranceMode::Relative => self.theta * sigma.iter().map(|s| s * s).sum::<f64>().sqrt(),
        };
        let tol2 = tol * tol;
        // tail[r] = Σ_{i>=r} σ_i²
        let mut r = sigma.len();
        let mut tail = 0.0;
        while r > 0 {
            let next = tail + sigma[r - 1] * sigma[r - 1];
            if next > tol2 {
                break;
            }
            tail = next;
            r -= 1;
        }
        let cap = self.r_max.min(sigma.len()).max(1);
        r.clamp(self.r_min.min(cap), cap)
    }
}

/// Which rule the biharmonic re-compression uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiharmonicRank {
    /// Tolerance-based truncation with the scheme's policy.
    #[default]
    Tolerance,
    /// Keep the incoming rank.
    Fixed,
}

/// Parameters of the rank-adaptive splitting scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlrsConfig {
    pub policy: TruncationPolicy,
    /// RK4 substeps per time step inside the K-, L- and S-steps.
    pub rk_substeps: usize,
    pub biharmonic_rank: BiharmonicRank,
}

impl AlrsConfig {
    pub fn new(policy: TruncationPolicy) -> Self {
        Self {
            policy,
            rk_substeps: 4,
            biharmonic_rank: BiharmonicRank::Tolerance,
        }
    }
}

impl From<TruncationPolicy> for AlrsConfig {
    fn from(policy: TruncationPolicy) -> Self {
        Self::new(policy)
    }
}

/// `left · core · rightᵀ` with orthonormal `left` and `right`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankState {
    left: DMatrix<f64>,
    core: DMatrix<f64>,
    right: DMatrix<f64>,
    grid: PeriodicGrid,
}

impl LowRankState {
    /// Checks shapes and orthonormality (to `1e-10`) of the factors.
    pub fn new(left: DMatrix<f64>, core: DMatrix<f64>, right: DMatrix<f64>, grid: PeriodicGrid) -> Result<Self> {
        let r = core.nrows();
        if core.ncols() != r || r == 0 {
            return Err(EfkError::InvalidParameter(format!("core must be square and nonempty, got {:?}", core.shape())));
        }
        if left.shape() != (grid.n_x, r) {
            return Err(EfkError::ShapeMismatch { expected: (grid.n_x, r), got: left.shape() });
        }
        if right.shape() != (grid.n_y, r) {
            return Err(EfkError::ShapeMismatch { expected: (grid.n_y, r), got: right.shape() });
        }
        let state = Self { left, core, right, grid };
        if state.orthonormality_defect() > 1e-10 {
            return Err(EfkError::InvalidParameter("factors are not orthonormal".into()));
        }
        Ok(state)
    }

    pub fn rank(&self) -> usize {
        self.core.nrows()
    }

    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    pub fn core(&self) -> &DMatrix<f64> {
        &self.core
    }

    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Largest deviation of `UᵀU` and `VᵀV` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let r = self.rank();
        let id = DMatrix::<f64>::identity(r, r);
        let du = (self.left.transpose() * &self.left - &id).amax();
        let dv = (self.right.transpose() * &self.right - &id).amax();
        du.max(dv)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        &self.left * &self.core * self.right.transpose()
    }
}

/// Dense field represented by a factored state.
pub fn reconstruct(x: &LowRankState) -> Field {
    Field::from_parts(x.to_matrix(), x.grid)
}

fn svd_truncate(m: &DMatrix<f64>, rank: impl FnOnce(&[f64]) -> usize) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let svd = svd_sorted(m)?;
    let r = rank(&svd.sigma).max(1).min(svd.sigma.len());
    let core = DMatrix::from_diagonal(&DVector::from_iterator(r, svd.sigma[..r].iter().copied()));
    Ok((svd.u.columns(0, r).into_owned(), core, svd.v.columns(0, r).into_owned()))
}

fn truncate_matrix(m: &DMatrix<f64>, grid: PeriodicGrid, policy: &TruncationPolicy) -> Result<LowRankState> {
    let (left, core, right) = svd_truncate(m, |s| policy.select_rank(s))?;
    Ok(LowRankState { left, core, right, grid })
}

/// Compresses `w` to the smallest rank whose discarded tail is within `theta`,
/// clamped to `[r_min, r_max]`.
pub fn truncated_svd(w: &Field, policy: &TruncationPolicy) -> Result<LowRankState> {
    policy.validate()?;
    truncate_matrix(w.values(), *w.grid(), policy)
}

/// Best rank-`r` approximation in the Frobenius norm.
pub fn truncate_fixed(w: &Field, r: usize) -> Result<LowRankState> {
    if r == 0 {
        return Err(EfkError::InvalidParameter("rank must be at least 1".into()));
    }
    let (left, core, right) = svd_truncate(w.values(), |_| r)?;
    Ok(LowRankState { left, core, right, grid: *w.grid() })
}

/// Number of singular values above `rel_threshold * σ_1`; zero for the zero matrix.
pub fn effective_rank(w: &Field, rel_threshold: f64) -> usize {
    effective_rank_matrix(w.values(), rel_threshold)
}

pub(crate) fn effective_rank_matrix(w: &DMatrix<f64>, rel_threshold: f64) -> usize {
    let Ok(s) = singular_values(w) else {
        return 0;
    };
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_threshold * top).count()
}

/// Orthonormal basis of the column span of `m`.
///
/// Directions with singular value below `1e-12 σ_max` are pruned, so a
/// rank-deficient augmentation yields fewer than `m.ncols()` columns.
fn orthonormalize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = svd_sorted(m)?;
    let top = svd.sigma.first().copied().unwrap_or(0.0);
    let keep = if top == 0.0 {
        1
    } else {
        svd.sigma.iter().take_while(|&&s| s > 1e-12 * top).count()
    };
    Ok(svd.u.columns(0, keep).into_owned())
}

fn reaction_matrix(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(reaction)
}

/// Classical RK4 with `substeps` equal steps over `[0, tau]`.
fn rk4<F>(y0: DMatrix<f64>, tau: f64, substeps: usize, rhs: F) -> DMatrix<f64>
where
    F: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    let n = substeps.max(1);
    let h = tau / n as f64;
    let mut y = y0;
    for _ in 0..n {
        let k1 = rhs(&y);
        let k2 = rhs(&(&y + &k1 * (0.5 * h)));
        let k3 = rhs(&(&y + &k2 * (0.5 * h)));
        let k4 = rhs(&(&y + &k3 * h));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    y
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(EfkError::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// One rank-adaptive step for the reaction flow `W' = P(W) f(W)`.
///
/// Rank of the result is at most twice the input rank.
pub fn rank_adaptive_nonlinear_step(x: &LowRankState, tau: f64, config: &AlrsConfig) -> Result<LowRankState> {
    check_tau(tau)?;
    config.policy.validate()?;
    let (u0, s0, v0) = (&x.left, &x.core, &x.right);
    let steps = config.rk_substeps;

    // K-step: K' = f(K V0ᵀ) V0, K(0) = U0 S0.
    let v0t = v0.transpose();
    let k = rk4(u0 * s0, tau, steps, |k| reaction_matrix(&(k * &v0t)) * v0);
    // L-step: L' = f(U0 Lᵀ)ᵀ U0, L(0) = V0 S0ᵀ.
    let l = rk4(v0 * s0.transpose(), tau, steps, |l| reaction_matrix(&(u0 * l.transpose())).transpose() * u0);

    let u_hat = orthonormalize(&concat_columns(u0, &k))?;
    let v_hat = orthonormalize(&concat_columns(v0, &l))?;

    // S-step (Galerkin): S' = Ûᵀ f(Û S V̂ᵀ) V̂, S(0) = Ûᵀ U0 S0 V0ᵀ V̂.
    let u_hat_t = u_hat.transpose();
    let v_hat_t = v_hat.transpose();
    let s_init = (&u_hat_t * u0) * s0 * (&v0t * &v_hat);
    let s1 = rk4(s_init, tau, steps, |s| &u_hat_t * reaction_matrix(&(&u_hat * s * &v_hat_t)) * &v_hat);

    let (p, core, q) = svd_truncate(&s1, |sig| config.policy.select_rank(sig))?;
    Ok(LowRankState {
        left: u_hat * p,
        core,
        right: v_hat * q,
        grid: x.grid,
    })
}

fn concat_columns(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

fn check_grid(x: &LowRankState, spec: &SpectrumTables) -> Result<()> {
    if x.grid.shape() != spec.grid().shape() {
        return Err(EfkError::ShapeMismatch {
            expected: spec.grid().shape(),
            got: x.grid.shape(),
        });
    }
    Ok(())
}

/// Exact biharmonic flow of the densified state, re-compressed by SVD.
pub fn biharmonic_flow_lowrank(x: &LowRankState, tau: f64, spec: &SpectrumTables, config: &AlrsConfig) -> Result<LowRankState> {
    check_tau(tau)?;
    check_grid(x, spec)?;
    let dense = spec.biharmonic_exp_matrix(&x.to_matrix(), tau);
    match config.biharmonic_rank {
        BiharmonicRank::Tolerance => truncate_matrix(&dense, x.grid, &config.policy),
        BiharmonicRank::Fixed => {
            let r = x.rank();
            let (left, core, right) = svd_truncate(&dense, |_| r)?;
            Ok(LowRankState { left, core, right, grid: x.grid })
        }
    }
}

/// `e^{τA_x} U S Vᵀ e^{τA_y}` on the factors; the rank is preserved exactly.
pub fn laplacian_flow_lowrank(x: &LowRankState, tau: f64, spec: &SpectrumTables) -> Result<LowRankState> {
    check_grid(x, spec)?;
    let left_raw = apply_exp_x(&x.left, tau, spec)?;
    let right_raw = apply_exp_y(&x.right, tau, spec)?;
    let ql = left_raw.qr();
    let qr = right_raw.qr();
    let core = ql.r() * &x.core * qr.r().transpose();
    Ok(LowRankState {
        left: ql.q(),
        core,
        right: qr.q(),
        grid: x.grid,
    })
}

/// One rank-adaptive splitting step: reaction, biharmonic, Laplacian.
pub fn alrs_step(x: &LowRankState, tau: f64, spec: &SpectrumTables, config: &AlrsConfig) -> Result<LowRankState> {
    check_grid(x, spec)?;
    let w = rank_adaptive_nonlinear_step(x, tau, config)?;
    let k = biharmonic_flow_lowrank(&w, tau, spec, config)?;
    laplacian_flow_lowrank(&k, tau, spec)
}

/// Runs `steps` steps, calling `observer(k, &U^k, rank)` after each one.
pub fn alrs_run<F>(
    u0: &LowRankState,
    tau: f64,
    steps: usize,
    spec: &SpectrumTables,
    config: &AlrsConfig,
    mut observer: F,
) -> Result<LowRankState>
where
    F: FnMut(usize, &LowRankState, usize),
{
    let mut x = u0.clone();
    for k in 1..=steps {
        x = alrs_step(&x, tau, spec, config)?;
        observer(k, &x, x.rank());
    }
    Ok(x)
}
