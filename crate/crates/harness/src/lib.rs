//! Run orchestration for the EFK solvers: configuration, single runs,
//! refinement studies, CSV artifacts and static plots.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod runner;
pub mod study;

pub use config::{AlrsSettings, ErrorNorm, Method, RunConfig, Settings, StudyAxis, StudyConfig};
pub use error::{HarnessError, Result};
pub use plot::{emit_plots, RecordSet};
pub use runner::{restrict_to_coarse, run, solve, FinalState, RunOutput, Snapshot};
pub use study::{refinement_study, refinement_study_with_reference, reference_solution, StudyTable};
