//! Parameter selection, the accuracy-to-network pipeline and the experiment
//! suites driven by the CLI.

pub mod config;
pub mod params;
pub mod pipeline;
pub mod suites;

pub use config::{ExperimentConfig, ProblemId};
pub use params::{c_delta_argmax, ln_c_delta, ln_param_bound, select_epsilon, select_n};
pub use pipeline::{l2_error, theorem_pipeline, PipelineConfig, PipelineMode, PipelineResult, Reference};
pub use suites::{run_suite, write_outputs, Check, Suite, SuiteOutput};
