//! The standard experiment suite.

use super::experiments::run_experiment;
use super::record::{to_jsonl, RatioRecord};
use super::spec::{ExperimentKind, ExperimentSpec};
use crate::error::Result;

/// One spec per kind at default parameters, seed 0.
pub fn standard_suite() -> Vec<ExperimentSpec> {
    use ExperimentKind::*;
    ExperimentKind::ALL
        .iter()
        .map(|&kind| {
            let trials = match kind {
                FsCarleson => 200,
                FsSparse => 100,
                Holder => 200,
                OscBound => 100,
                MbFs | ReverseFs | Coifman | Duality => 100,
                _ => 40,
            };
            ExperimentSpec::new(kind).with_trials(trials)
        })
        .collect()
}

pub fn run_suite(specs: &[ExperimentSpec]) -> Result<Vec<RatioRecord>> {
    let mut out = Vec::new();
    for spec in specs {
        out.extend(run_experiment(spec)?);
    }
    Ok(out)
}

/// The suite's records as JSON lines.
pub fn suite_jsonl(specs: &[ExperimentSpec]) -> Result<String> {
    to_jsonl(&run_suite(specs)?)
}
