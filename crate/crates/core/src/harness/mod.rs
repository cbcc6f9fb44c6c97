//! Inequality experiments, extremal search and diagnostics.

pub mod corpus;
pub mod experiments;
pub mod oscillation_bound;
pub mod record;
pub mod search;
pub mod sharpness;
pub mod spec;
pub mod suite;
pub mod two_weight;

pub use corpus::{bump, generate_named, trial_rng, FunctionFamily, WeightFamily};
pub use experiments::{duality_violations, run_experiment, Inputs};
pub use oscillation_bound::{oscillation_bound_check, OscillationBound};
pub use record::{from_jsonl, max_ratio, to_jsonl, RatioRecord};
pub use search::{hill_climb, search_extremal, SearchResult};
pub use sharpness::{sharpness_probe, sharpness_probe_with, spread, strictly_increasing, SharpnessTrend};
pub use spec::{ExperimentKind, ExperimentSpec};
pub use suite::{run_suite, standard_suite, suite_jsonl};
pub use two_weight::two_weight_constant;
