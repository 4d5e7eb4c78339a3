//! Single runs: dispatch to a scheme, record diagnostics, write artifacts.

use std::path::Path;

use efk_core::{
    alrs_run, build_spectrum, frs_run, record_step, reconstruct, truncate_fixed, Field, LowRankState, ProblemKind,
    RunRecord, SpectrumTables,
};

use crate::config::{Method, RunConfig};
use crate::error::{HarnessError, Result};
use crate::output::{snapshot_file_name, write_field, write_series, FINAL_FILE, SERIES_FILE};

#[derive(Debug, Clone)]
pub enum FinalState {
    Dense(Field),
    LowRank(LowRankState),
}

impl FinalState {
    pub fn field(&self) -> Field {
        match self {
            FinalState::Dense(f) => f.clone(),
            FinalState::LowRank(x) => reconstruct(x),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: Field,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: FinalState,
    /// One record per time level, starting at `t = 0`.
    pub records: Vec<RunRecord>,
    pub snapshots: Vec<Snapshot>,
}

/// Initial data on the configured grid.
pub fn initial_field(cfg: &RunConfig) -> Result<Field> {
    let grid = cfg.problem.grid(cfg.n_x, cfg.n_y)?;
    match (&cfg.initial, cfg.problem.kind) {
        (Some(path), _) => crate::output::read_field(path, grid),
        (None, ProblemKind::Custom) => Err(HarnessError::config("problem.name = custom needs problem.initial")),
        (None, _) => Ok(cfg.problem.initial(&grid)?),
    }
}

/// Step indices for the requested snapshot times, snapped to the nearest
/// step and deduplicated.
pub fn snapshot_steps(times: &[f64], tau: f64, steps: usize) -> Vec<usize> {
    let mut out: Vec<usize> = times
        .iter()
        .map(|t| ((t / tau).round() as usize).min(steps))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Runs the configured scheme and writes artifacts when an output directory
/// is set.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let u0 = initial_field(cfg)?;
    let spec = build_spectrum(u0.grid(), cfg.problem.kappa)?;
    let out = solve(cfg, &u0, &spec)?;
    if let Some(dir) = &cfg.output_dir {
        write_run(dir, &out)?;
    }
    Ok(out)
}

/// Runs the configured scheme from `u0` without touching the filesystem.
pub fn solve(cfg: &RunConfig, u0: &Field, spec: &SpectrumTables) -> Result<RunOutput> {
    let tau = cfg.tau();
    let wanted = snapshot_steps(&cfg.snapshot_times, tau, cfg.steps);
    let mut snapshots = Vec::new();
    let mut take = |step: usize, field: &dyn Fn() -> Field| {
        if wanted.binary_search(&step).is_ok() {
            snapshots.push(Snapshot { step, time: step as f64 * tau, field: field() });
        }
    };
    let mut records = Vec::with_capacity(cfg.steps + 1);
    // The observer cannot return errors, so the first failure is parked here.
    let mut failure = None;

    let final_state = match cfg.method {
        Method::Frs => {
            records.push(record_step(0, tau, u0, spec)?);
            take(0, &|| u0.clone());
            let last = frs_run(u0, tau, cfg.steps, spec, |k, u| {
                if failure.is_some() {
                    return;
                }
                match record_step(k, tau, u, spec) {
                    Ok(r) => records.push(r),
                    Err(e) => failure = Some(e),
                }
                take(k, &|| u.clone());
            })?;
            FinalState::Dense(last)
        }
        Method::Alrs => {
            let scheme = cfg.alrs.scheme(cfg.n_x, cfg.n_y)?;
            let x0 = truncate_fixed(u0, cfg.alrs.r0.min(cfg.n_x.min(cfg.n_y)))?;
            records.push(record_step(0, tau, &x0, spec)?);
            take(0, &|| reconstruct(&x0));
            let last = alrs_run(&x0, tau, cfg.steps, spec, &scheme, |k, x, _| {
                if failure.is_some() {
                    return;
                }
                match record_step(k, tau, x, spec) {
                    Ok(r) => records.push(r),
                    Err(e) => failure = Some(e),
                }
                take(k, &|| reconstruct(x));
            })?;
            FinalState::LowRank(last)
        }
    };
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(RunOutput { final_state, records, snapshots })
}

/// Writes `series.csv`, `final.csv` and one CSV per snapshot.
pub fn write_run(dir: &Path, out: &RunOutput) -> Result<()> {
    write_series(&dir.join(SERIES_FILE), &out.records)?;
    write_field(&dir.join(FINAL_FILE), &out.final_state.field())?;
    for s in &out.snapshots {
        write_field(&dir.join(snapshot_file_name(s.time)), &s.field)?;
    }
    Ok(())
}

/// Pointwise subsampling onto the coarse grid whose nodes are every
/// `factor_x`-th and `factor_y`-th fine node.
pub fn restrict_to_coarse(fine: &Field, factor_x: usize, factor_y: usize) -> Result<Field> {
    let (n_x, n_y) = fine.shape();
    if factor_x == 0 || factor_y == 0 || n_x % factor_x != 0 || n_y % factor_y != 0 {
        return Err(HarnessError::config(format!(
            "factors ({factor_x}, {factor_y}) do not divide the fine grid ({n_x}, {n_y})"
        )));
    }
    let grid = fine.grid().with_nodes(n_x / factor_x, n_y / factor_y)?;
    let m = fine.values();
    Ok(Field::new(
        nalgebra::DMatrix::from_fn(grid.n_x, grid.n_y, |i, j| m[(i * factor_x, j * factor_y)]),
        grid,
    )?)
}
