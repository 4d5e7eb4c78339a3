//! Flat `key = value` configuration with dotted keys.
//!
//! ```text
//! # comment
//! problem.name = example1
//! grid.n = 256
//! time.steps = 128
//! method = alrs
//! alrs.r0 = 4
//! ```
//!
//! Every key can be overridden from the command line with `--set key=value`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use efk_core::{AlrsConfig, BiharmonicRank, ProblemKind, ProblemSpec, ToleranceMode, TruncationPolicy};

use crate::error::{HarnessError, Result};

pub const KNOWN_KEYS: &[&str] = &[
    "problem.name",
    "problem.kappa",
    "problem.final_time",
    "problem.epsilon",
    "problem.initial",
    "domain.x_lo",
    "domain.x_hi",
    "domain.y_lo",
    "domain.y_hi",
    "grid.n",
    "grid.n_x",
    "grid.n_y",
    "time.steps",
    "method",
    "alrs.r0",
    "alrs.theta",
    "alrs.r_max",
    "alrs.rk_substeps",
    "alrs.tolerance",
    "alrs.biharmonic_rank",
    "output.dir",
    "output.snapshots",
    "seed",
    "study.axis",
    "study.levels",
    "study.reference",
    "study.norms",
];

/// Raw key-value settings, later keys overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::config(format!("line {}: expected key = value", lineno + 1)))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(HarnessError::config(format!("unknown key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| HarnessError::config(format!("override '{assignment}' is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| HarnessError::config(format!("invalid value '{v}' for {key}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Frs,
    Alrs,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Frs => "frs",
            Method::Alrs => "alrs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlrsSettings {
    pub r0: usize,
    pub theta: f64,
    /// Defaults to `min(n_x, n_y)`.
    pub r_max: Option<usize>,
    pub rk_substeps: usize,
    pub tolerance: ToleranceMode,
    pub biharmonic_rank: BiharmonicRank,
}

impl Default for AlrsSettings {
    fn default() -> Self {
        Self {
            r0: 4,
            theta: 1e-3,
            r_max: None,
            rk_substeps: 4,
            tolerance: ToleranceMode::Absolute,
            biharmonic_rank: BiharmonicRank::Tolerance,
        }
    }
}

impl AlrsSettings {
    pub fn scheme(&self, n_x: usize, n_y: usize) -> Result<AlrsConfig> {
        let full = n_x.min(n_y);
        let policy = TruncationPolicy {
            theta: self.theta,
            r_min: 1,
            r_max: self.r_max.unwrap_or(full).min(full),
            mode: self.tolerance,
        };
        policy.validate().map_err(|e| HarnessError::config(e.to_string()))?;
        Ok(AlrsConfig {
            policy,
            rk_substeps: self.rk_substeps,
            biharmonic_rank: self.biharmonic_rank,
        })
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    /// Snapshot-format CSV with the initial field (required for `custom`).
    pub initial: Option<PathBuf>,
    pub n_x: usize,
    pub n_y: usize,
    pub steps: usize,
    pub method: Method,
    pub alrs: AlrsSettings,
    pub output_dir: Option<PathBuf>,
    pub snapshot_times: Vec<f64>,
    pub seed: u64,
}

impl RunConfig {
    /// Preset problem on an `n x n` grid with `steps` time steps.
    pub fn new(problem: ProblemSpec, n: usize, steps: usize, method: Method) -> Self {
        Self {
            problem,
            initial: None,
            n_x: n,
            n_y: n,
            steps,
            method,
            alrs: AlrsSettings::default(),
            output_dir: None,
            snapshot_times: Vec::new(),
            seed: 0,
        }
    }

    pub fn tau(&self) -> f64 {
        self.problem.final_time / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate().map_err(|e| HarnessError::config(e.to_string()))?;
        if self.steps < 1 {
            return Err(HarnessError::config("time.steps must be at least 1"));
        }
        if self.n_x < 2 || self.n_y < 2 {
            return Err(HarnessError::config("grid needs at least 2 nodes per direction"));
        }
        if self.method == Method::Alrs {
            if self.alrs.r0 < 1 {
                return Err(HarnessError::config("alrs.r0 must be at least 1"));
            }
            if self.alrs.theta.is_nan() || self.alrs.theta <= 0.0 {
                return Err(HarnessError::config("alrs.theta must be positive"));
            }
            if self.alrs.rk_substeps < 1 {
                return Err(HarnessError::config("alrs.rk_substeps must be at least 1"));
            }
        }
        if self.problem.kind == ProblemKind::Custom && self.initial.is_none() {
            return Err(HarnessError::config("problem.name = custom needs problem.initial"));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| t.is_nan() || **t < 0.0) {
            return Err(HarnessError::config(format!("invalid snapshot time {t}")));
        }
        Ok(())
    }

    pub fn from_settings(s: &Settings) -> Result<Self> {
        let kind = match s.get("problem.name") {
            None => ProblemKind::Example1,
            Some(name) => {
                ProblemKind::parse(name).ok_or_else(|| HarnessError::config(format!("unknown problem '{name}'")))?
            }
        };
        let mut problem = ProblemSpec::preset(kind);
        if let Some(v) = s.parsed("problem.kappa")? {
            problem.kappa = v;
        }
        if let Some(v) = s.parsed("problem.final_time")? {
            problem.final_time = v;
        }
        if let Some(v) = s.parsed("problem.epsilon")? {
            problem.epsilon = Some(v);
        }
        if let Some(v) = s.parsed("domain.x_lo")? {
            problem.x_lo = v;
        }
        if let Some(v) = s.parsed("domain.x_hi")? {
            problem.x_hi = v;
        }
        if let Some(v) = s.parsed("domain.y_lo")? {
            problem.y_lo = v;
        }
        if let Some(v) = s.parsed("domain.y_hi")? {
            problem.y_hi = v;
        }

        let n: usize = s.parsed("grid.n")?.unwrap_or(64);
        let method = match s.get("method").unwrap_or("frs") {
            "frs" => Method::Frs,
            "alrs" => Method::Alrs,
            other => return Err(HarnessError::config(format!("unknown method '{other}'"))),
        };
        let mut alrs = AlrsSettings::default();
        if let Some(v) = s.parsed("alrs.r0")? {
            alrs.r0 = v;
        }
        if let Some(v) = s.parsed("alrs.theta")? {
            alrs.theta = v;
        }
        alrs.r_max = s.parsed("alrs.r_max")?;
        if let Some(v) = s.parsed("alrs.rk_substeps")? {
            alrs.rk_substeps = v;
        }
        if let Some(v) = s.get("alrs.tolerance") {
            alrs.tolerance = match v {
                "absolute" => ToleranceMode::Absolute,
                "relative" => ToleranceMode::Relative,
                _ => return Err(HarnessError::config(format!("unknown tolerance mode '{v}'"))),
            };
        }
        if let Some(v) = s.get("alrs.biharmonic_rank") {
            alrs.biharmonic_rank = match v {
                "tolerance" => BiharmonicRank::Tolerance,
                "fixed" => BiharmonicRank::Fixed,
                _ => return Err(HarnessError::config(format!("unknown biharmonic rank rule '{v}'"))),
            };
        }
        let snapshot_times = match s.get("output.snapshots") {
            None | Some("") => Vec::new(),
            Some(list) => list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| HarnessError::config(format!("invalid snapshot time '{t}'")))
                })
                .collect::<Result<_>>()?,
        };
        let cfg = RunConfig {
            problem,
            initial: s.get("problem.initial").map(PathBuf::from),
            n_x: s.parsed("grid.n_x")?.unwrap_or(n),
            n_y: s.parsed("grid.n_y")?.unwrap_or(n),
            steps: s.parsed("time.steps")?.unwrap_or(16),
            method,
            alrs,
            output_dir: s.get("output.dir").map(PathBuf::from),
            snapshot_times,
            seed: s.parsed("seed")?.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyAxis {
    Temporal,
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    Inf,
    L2,
    Rel,
}

impl ErrorNorm {
    pub fn columns(&self) -> (&'static str, &'static str) {
        match self {
            ErrorNorm::Inf => ("err_inf", "order_inf"),
            ErrorNorm::L2 => ("err_l2", "order_l2"),
            ErrorNorm::Rel => ("relerr", "rate"),
        }
    }
}

/// Refinement study: levels `(M, N)` measured against one fine reference.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub axis: StudyAxis,
    pub levels: Vec<(usize, usize)>,
    pub reference: (usize, usize),
    pub norms: Vec<ErrorNorm>,
}

impl StudyConfig {
    /// Default norms follow the method: max and L2 errors for the full-rank
    /// scheme, relative Frobenius error for the low-rank one.
    pub fn default_norms(method: Method) -> Vec<ErrorNorm> {
        match method {
            Method::Frs => vec![ErrorNorm::Inf, ErrorNorm::L2],
            Method::Alrs => vec![ErrorNorm::Rel],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(HarnessError::config("study needs at least one level"));
        }
        let (m_ref, n_ref) = self.reference;
        for &(m, n) in &self.levels {
            if m < 1 || n < 2 {
                return Err(HarnessError::config(format!("invalid level ({m}, {n})")));
            }
            if n_ref % n != 0 {
                return Err(HarnessError::config(format!(
                    "level N = {n} does not divide reference N = {n_ref}; spatial levels must be nested"
                )));
            }
            let finer = match self.axis {
                StudyAxis::Temporal => m_ref > m,
                StudyAxis::Spatial => n_ref > n,
            };
            if !finer {
                return Err(HarnessError::config(format!(
                    "reference ({m_ref}, {n_ref}) is not finer than level ({m}, {n}) on the varied axis"
                )));
            }
        }
        if self.norms.is_empty() {
            return Err(HarnessError::config("study needs at least one error norm"));
        }
        Ok(())
    }

    pub fn from_settings(s: &Settings, method: Method) -> Result<Self> {
        let axis = match s.get("study.axis").unwrap_or("temporal") {
            "temporal" => StudyAxis::Temporal,
            "spatial" => StudyAxis::Spatial,
            other => return Err(HarnessError::config(format!("unknown study axis '{other}'"))),
        };
        let levels = s
            .get("study.levels")
            .ok_or_else(|| HarnessError::config("study.levels is required"))?
            .split(',')
            .map(parse_pair)
            .collect::<Result<Vec<_>>>()?;
        let reference = parse_pair(
            s.get("study.reference")
                .ok_or_else(|| HarnessError::config("study.reference is required"))?,
        )?;
        let norms = match s.get("study.norms") {
            None => Self::default_norms(method),
            Some(list) => list
                .split(',')
                .map(|n| match n.trim() {
                    "inf" => Ok(ErrorNorm::Inf),
                    "l2" => Ok(ErrorNorm::L2),
                    "rel" => Ok(ErrorNorm::Rel),
                    other => Err(HarnessError::config(format!("unknown norm '{other}'"))),
                })
                .collect::<Result<_>>()?,
        };
        let study = StudyConfig {
            axis,
            levels,
            reference,
            norms,
        };
        study.validate()?;
        Ok(study)
    }
}

/// Parses `M:N`.
fn parse_pair(text: &str) -> Result<(usize, usize)> {
    let bad = || HarnessError::config(format!("expected M:N, got '{text}'"));
    let (m, n) = text.trim().split_once(':').ok_or_else(bad)?;
    Ok((m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_and_overrides() {
        let mut s = Settings::parse(
            "# example\nproblem.name = star\ngrid.n = 32  # inline\n\ntime.steps=8\nmethod = alrs\nalrs.r0 = 16\n",
        )
        .unwrap();
        s.apply_override("alrs.theta=1e-4").unwrap();
        s.apply_override("output.snapshots = 0, 0.005").unwrap();
        let cfg = RunConfig::from_settings(&s).unwrap();
        assert_eq!(cfg.problem.kind, ProblemKind::Star);
        assert_eq!((cfg.n_x, cfg.n_y, cfg.steps), (32, 32, 8));
        assert_eq!(cfg.method, Method::Alrs);
        assert_eq!(cfg.alrs.r0, 16);
        assert_eq!(cfg.alrs.theta, 1e-4);
        assert_eq!(cfg.snapshot_times, vec![0.0, 0.005]);
        assert_eq!(cfg.tau(), 0.01 / 8.0);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(Settings::parse("nonsense").is_err());
        assert!(Settings::parse("grid.size = 3").is_err());
        let mut s = Settings::default();
        assert!(s.apply_override("method").is_err());
        s.set("time.steps", "0").unwrap();
        assert!(RunConfig::from_settings(&s).is_err());
        let s = Settings::parse("method = euler").unwrap();
        assert!(RunConfig::from_settings(&s).is_err());
        let s = Settings::parse("grid.n = many").unwrap();
        assert!(RunConfig::from_settings(&s).is_err());
        let s = Settings::parse("problem.name = custom").unwrap();
        assert!(RunConfig::from_settings(&s).is_err());
    }

    #[test]
    fn study_settings() {
        let s = Settings::parse("study.axis = spatial\nstudy.levels = 512:16, 512:32\nstudy.reference = 512:512\n").unwrap();
        let st = StudyConfig::from_settings(&s, Method::Frs).unwrap();
        assert_eq!(st.axis, StudyAxis::Spatial);
        assert_eq!(st.levels, vec![(512, 16), (512, 32)]);
        assert_eq!(st.norms, vec![ErrorNorm::Inf, ErrorNorm::L2]);
        assert_eq!(StudyConfig::from_settings(&s, Method::Alrs).unwrap().norms, vec![ErrorNorm::Rel]);

        let s = Settings::parse("study.axis = spatial\nstudy.levels = 512:24\nstudy.reference = 512:512\n").unwrap();
        assert!(StudyConfig::from_settings(&s, Method::Frs).is_err());
        let s = Settings::parse("study.levels = 64:256\nstudy.reference = 64:256\n").unwrap();
        assert!(StudyConfig::from_settings(&s, Method::Frs).is_err());
        let s = Settings::parse("study.levels = 64x256\nstudy.reference = 64:256\n").unwrap();
        assert!(StudyConfig::from_settings(&s, Method::Frs).is_err());
    }
}
