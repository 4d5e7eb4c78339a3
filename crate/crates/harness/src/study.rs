//! Refinement studies against a fine full-rank reference.
//!
//! A level `(M, N)` runs on an `N x N` grid with `M` steps. Spatial levels are
//! compared at the nodes they share with the reference grid.

use std::path::Path;
use std::thread;

use efk_core::{error_metrics, observed_order, ErrorMetrics, Field};

use crate::config::{ErrorNorm, Method, RunConfig, StudyAxis, StudyConfig};
use crate::error::{HarnessError, Result};
use crate::output::{write_table, TableRow};
use crate::runner::{restrict_to_coarse, run};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub steps: usize,
    pub nodes: usize,
    pub metrics: ErrorMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub norms: Vec<ErrorNorm>,
    pub levels: Vec<LevelResult>,
    /// `orders[k][l]` compares level `l` with level `l - 1`; `None` for the
    /// first level and whenever the ratio is undefined.
    pub orders: Vec<Vec<Option<f64>>>,
}

impl StudyTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["level".to_string(), "M".to_string(), "N".to_string()];
        for n in &self.norms {
            let (e, o) = n.columns();
            h.push(e.to_string());
            h.push(o.to_string());
        }
        h
    }

    pub fn rows(&self) -> Vec<TableRow> {
        self.levels
            .iter()
            .enumerate()
            .map(|(l, lv)| TableRow {
                level: l + 1,
                steps: lv.steps,
                nodes: lv.nodes,
                cells: self
                    .norms
                    .iter()
                    .zip(&self.orders)
                    .map(|(n, o)| (norm_value(&lv.metrics, *n), o[l]))
                    .collect(),
            })
            .collect()
    }

    /// Errors of one norm, level by level.
    pub fn errors(&self, norm: ErrorNorm) -> Vec<f64> {
        self.levels.iter().map(|l| norm_value(&l.metrics, norm)).collect()
    }

    /// Defined orders of one norm.
    pub fn orders_of(&self, norm: ErrorNorm) -> Vec<f64> {
        self.norms
            .iter()
            .position(|n| *n == norm)
            .map(|k| self.orders[k].iter().flatten().copied().collect())
            .unwrap_or_default()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_table(path, &self.header(), &self.rows())
    }
}

pub fn norm_value(m: &ErrorMetrics, norm: ErrorNorm) -> f64 {
    match norm {
        ErrorNorm::Inf => m.err_inf,
        ErrorNorm::L2 => m.err_l2,
        ErrorNorm::Rel => m.relerr,
    }
}

/// Runs a copy of `base` at `(steps, n)` without writing artifacts.
fn level_config(base: &RunConfig, steps: usize, n: usize, method: Method) -> RunConfig {
    let mut cfg = base.clone();
    cfg.steps = steps;
    cfg.n_x = n;
    cfg.n_y = n;
    cfg.method = method;
    cfg.output_dir = None;
    cfg.snapshot_times.clear();
    cfg
}

/// Full-rank solution at `(M_ref, N_ref)`, whatever the base method.
pub fn reference_solution(base: &RunConfig, reference: (usize, usize)) -> Result<Field> {
    let cfg = level_config(base, reference.0, reference.1, Method::Frs);
    Ok(run(&cfg)?.final_state.field())
}

pub fn refinement_study(study: &StudyConfig, base: &RunConfig) -> Result<StudyTable> {
    study.validate()?;
    let reference = reference_solution(base, study.reference)?;
    refinement_study_with_reference(study, base, &reference)
}

/// Study against a precomputed reference; levels run in parallel.
pub fn refinement_study_with_reference(study: &StudyConfig, base: &RunConfig, reference: &Field) -> Result<StudyTable> {
    study.validate()?;
    let (n_ref_x, n_ref_y) = reference.shape();
    if n_ref_x != n_ref_y || n_ref_x != study.reference.1 {
        return Err(HarnessError::config(format!(
            "reference field is {n_ref_x} x {n_ref_y}, expected N_ref = {}",
            study.reference.1
        )));
    }
    let results: Vec<Result<LevelResult>> = thread::scope(|s| {
        let handles: Vec<_> = study
            .levels
            .iter()
            .map(|&(m, n)| {
                s.spawn(move || -> Result<LevelResult> {
                    let cfg = level_config(base, m, n, base.method);
                    let u = run(&cfg)?.final_state.field();
                    let f = n_ref_x / n;
                    let r = restrict_to_coarse(reference, f, f)?;
                    let metrics = error_metrics(&u, &r, u.grid())?;
                    Ok(LevelResult { steps: m, nodes: n, metrics })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(HarnessError::Output("study level panicked".into()))))
            .collect()
    });
    let levels = results.into_iter().collect::<Result<Vec<_>>>()?;

    let extent = base.problem.x_hi - base.problem.x_lo;
    let size = |l: &LevelResult| match study.axis {
        StudyAxis::Temporal => base.problem.final_time / l.steps as f64,
        StudyAxis::Spatial => extent / l.nodes as f64,
    };
    let orders = study
        .norms
        .iter()
        .map(|&norm| {
            (0..levels.len())
                .map(|l| {
                    if l == 0 {
                        return None;
                    }
                    let (c, f) = (&levels[l - 1], &levels[l]);
                    let p = observed_order(norm_value(&c.metrics, norm), norm_value(&f.metrics, norm), size(c), size(f));
                    p.is_finite().then_some(p)
                })
                .collect()
        })
        .collect();
    Ok(StudyTable { norms: study.norms.clone(), levels, orders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use efk_core::ProblemSpec;

    fn base() -> RunConfig {
        RunConfig::new(ProblemSpec::example1(), 16, 8, Method::Frs)
    }

    #[test]
    fn identical_levels_leave_order_empty() {
        let study = StudyConfig {
            axis: StudyAxis::Temporal,
            levels: vec![(4, 16), (4, 16), (8, 16)],
            reference: (32, 16),
            norms: vec![ErrorNorm::Inf, ErrorNorm::L2],
        };
        let t = refinement_study(&study, &base()).unwrap();
        assert_eq!(t.orders[0][0], None);
        assert_eq!(t.orders[0][1], None);
        assert!(t.orders[1][2].is_some());
        assert_eq!(t.levels[0], t.levels[1]);
        assert_eq!(t.header(), ["level", "M", "N", "err_inf", "order_inf", "err_l2", "order_l2"]);
    }

    #[test]
    fn rejects_non_nested_levels() {
        let study = StudyConfig {
            axis: StudyAxis::Spatial,
            levels: vec![(4, 12)],
            reference: (4, 32),
            norms: vec![ErrorNorm::Inf],
        };
        assert!(matches!(refinement_study(&study, &base()), Err(HarnessError::Config(_))));
    }

    #[test]
    fn alrs_levels_use_full_rank_reference() {
        let mut b = base();
        b.method = Method::Alrs;
        let study = StudyConfig {
            axis: StudyAxis::Temporal,
            levels: vec![(4, 16), (8, 16)],
            reference: (32, 16),
            norms: vec![ErrorNorm::Rel],
        };
        let r = reference_solution(&b, study.reference).unwrap();
        let direct = run(&level_config(&b, 32, 16, Method::Frs)).unwrap().final_state.field();
        assert_eq!(r, direct);
        let t = refinement_study_with_reference(&study, &b, &r).unwrap();
        assert_eq!(t.header(), ["level", "M", "N", "relerr", "rate"]);
        assert!(t.errors(ErrorNorm::Rel).iter().all(|e| *e > 0.0));
    }
}
