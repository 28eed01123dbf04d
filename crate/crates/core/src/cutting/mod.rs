//! Gate cutting: decomposition, subexperiments, execution, reconstruction.

mod exec;
mod plan;
mod qpd;
mod reconstruct;

pub use exec::{execute_plan, execute_plan_runs, tallies_from_json, tallies_to_json, Engine, ExecConfig, Mode, WeightedTally};
pub use plan::{enumerate_subexperiments, sample_subexperiment_terms, CutPlan, CutSite, SampledTerm, DEFAULT_CUT_CAP, TERMS_PER_CUT};
pub use qpd::{cut_dress_gate, expand_postselected, gamma, qpd_rzz, Dressing, LocalOp, QpdTerm};
pub use reconstruct::{reconstruct_distribution, reconstruct_expectation, required_shots, total_deviation, Normalized, QuasiDistribution};
