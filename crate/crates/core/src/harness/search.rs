//! Randomized hill climbing over test functions and weights.

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use super::corpus::trial_rng;
use super::experiments::{Context, Inputs};
use super::record::RatioRecord;
use super::spec::{ExperimentKind, ExperimentSpec};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Weight};

const SEARCH_STREAM: u64 = 1 << 50;

/// Outcome of an extremal search.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best: RatioRecord,
    pub iterations: usize,
    /// Best-so-far ratio after each iteration; `trace[0]` is the start.
    pub trace: Vec<f64>,
    pub inputs: Inputs,
}

impl SearchResult {
    pub fn best_f(&self) -> &GridFunction {
        &self.inputs.fs[0]
    }

    pub fn best_w(&self) -> &Weight {
        &self.inputs.w
    }
}

/// Accept-if-improved climb: `budget - 1` perturbations after evaluating
/// `init`. Returns the best state, its score and the best-so-far trace.
pub fn hill_climb<S, R, P, O>(
    init: S,
    budget: usize,
    rng: &mut R,
    mut perturb: P,
    mut objective: O,
) -> Result<(S, f64, Vec<f64>)>
where
    S: Clone,
    R: Rng,
    P: FnMut(&S, &mut R) -> Result<S>,
    O: FnMut(&S) -> Result<f64>,
{
    if budget == 0 {
        return Err(Error::invalid("search budget must be at least 1"));
    }
    let mut best_score = objective(&init)?;
    let mut best = init;
    let mut trace = Vec::with_capacity(budget);
    trace.push(best_score);
    for _ in 1..budget {
        let cand = perturb(&best, rng)?;
        let score = objective(&cand)?;
        if score > best_score {
            best = cand;
            best_score = score;
        }
        trace.push(best_score);
    }
    Ok((best, best_score, trace))
}

/// A random dyadic block `[start, start + len)` of an `n`-cell grid.
fn block(n: usize, rng: &mut impl Rng) -> (usize, usize) {
    let levels = n.trailing_zeros();
    let level = rng.random_range(0..=levels);
    let len = n >> level;
    (rng.random_range(0..1usize << level) * len, len)
}

/// Multiplies a random dyadic block by `exp(0.5 Z)`; one time in four adds
/// `Z` times the root mean square instead.
pub fn perturb_values(v: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let mut out = v.to_vec();
    let (start, len) = block(v.len(), rng);
    let z: f64 = rng.sample(StandardNormal);
    if rng.random_bool(0.25) {
        let rms = (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt().max(1e-12);
        for x in &mut out[start..start + len] {
            *x += z * rms;
        }
    } else {
        let c = (0.5 * z).exp();
        for x in &mut out[start..start + len] {
            *x *= c;
        }
    }
    out
}

/// Weight version: additions use `|Z|` times the mean, keeping `w >= 0`.
pub fn perturb_weight(w: &Weight, rng: &mut impl Rng) -> Result<Weight> {
    let v = w.values();
    let mut out = v.to_vec();
    let (start, len) = block(v.len(), rng);
    let z: f64 = rng.sample(StandardNormal);
    if rng.random_bool(0.25) {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        for x in &mut out[start..start + len] {
            *x += z.abs() * m;
        }
    } else {
        let c = (0.5 * z).exp();
        for x in &mut out[start..start + len] {
            *x *= c;
        }
    }
    Weight::new(w.grid(), out)
}

fn perturb_function(f: &GridFunction, rng: &mut impl Rng) -> Result<GridFunction> {
    GridFunction::real(f.grid(), perturb_values(f.require_real()?, rng))
}

#[derive(Clone, Copy)]
enum Slot {
    F(usize),
    W,
    U,
}

fn slots(kind: ExperimentKind, x: &Inputs) -> Vec<Slot> {
    use ExperimentKind::*;
    let mut s: Vec<Slot> = if kind == Coifman { Vec::new() } else { (0..x.fs.len()).map(Slot::F).collect() };
    if !matches!(kind, MbStrong | Holder | OscBound) {
        s.push(Slot::W);
    }
    if x.u.is_some() {
        s.push(Slot::U);
    }
    s
}

/// Maximizes the kind's ratio starting from trial 0's inputs.
/// `DUALITY` and `SHARPNESS` climb their underlying `M^k` ratio.
pub fn search_extremal(spec: &ExperimentSpec, budget: usize) -> Result<SearchResult> {
    let ctx = Context::new(spec)?;
    let init = ctx.inputs(0)?;
    let slots = slots(spec.kind, &init);
    let mut rng = trial_rng(spec.seed, SEARCH_STREAM);
    let (best, _, trace) = hill_climb(
        init,
        budget,
        &mut rng,
        |x: &Inputs, rng| {
            let mut y = x.clone();
            match slots[rng.random_range(0..slots.len())] {
                Slot::F(i) => y.fs[i] = perturb_function(&x.fs[i], rng)?,
                Slot::W => y.w = perturb_weight(&x.w, rng)?,
                Slot::U => y.u = Some(perturb_weight(x.u.as_ref().expect("slot"), rng)?),
            }
            Ok(y)
        },
        |x| ctx.ratio_of(0, x).map(|r| r.2),
    )?;
    let (lhs, rhs, _) = ctx.ratio_of(0, &best)?;
    let mut params = ctx.trial_params(&best)?;
    params
        .as_object_mut()
        .expect("params object")
        .insert("budget".into(), json!(budget));
    Ok(SearchResult {
        best: RatioRecord::new(spec.kind.name(), params, spec.seed, 0, lhs, rhs)?,
        iterations: budget,
        trace,
        inputs: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiments::run_experiment;
    use proptest::prelude::*;

    #[test]
    fn budget_one_is_the_first_trial() {
        let spec = ExperimentSpec::new(ExperimentKind::FsM).with_trials(1).with_levels(6);
        let s = search_extremal(&spec, 1).unwrap();
        let r = &run_experiment(&spec).unwrap()[0];
        assert_eq!((s.best.lhs, s.best.rhs, s.best.ratio), (r.lhs, r.rhs, r.ratio));
        assert_eq!(s.trace, vec![r.ratio]);
    }

    #[test]
    fn floor_p_maximal_loses_to_search() {
        let mut low = ExperimentSpec::new(ExperimentKind::FsMk).with_levels(7);
        low.k = Some(2);
        let mut high = low.clone();
        high.k = Some(3);
        let a = search_extremal(&low, 80).unwrap();
        let b = search_extremal(&high, 80).unwrap();
        assert!(a.best.ratio > b.best.ratio, "{} vs {}", a.best.ratio, b.best.ratio);
    }

    #[test]
    fn deterministic() {
        let spec = ExperimentSpec::new(ExperimentKind::ReverseFs).with_levels(5);
        let a = search_extremal(&spec, 30).unwrap();
        let b = search_extremal(&spec, 30).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn zero_budget_rejected() {
        let spec = ExperimentSpec::new(ExperimentKind::FsM).with_levels(4);
        assert!(search_extremal(&spec, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn trace_is_monotone(seed in 0u64..1000, budget in 1usize..25) {
            let spec = ExperimentSpec::new(ExperimentKind::FsCarleson).with_levels(5).with_seed(seed);
            let s = search_extremal(&spec, budget).unwrap();
            prop_assert_eq!(s.trace.len(), budget);
            prop_assert!(s.trace.windows(2).all(|w| w[1] >= w[0]));
            prop_assert_eq!(*s.trace.last().unwrap(), s.best.ratio);
        }

        #[test]
        fn weight_perturbation_stays_admissible(seed in 0u64..1000) {
            let g = crate::grid::TorusGrid::new(5).unwrap();
            let mut rng = trial_rng(seed, 0);
            let mut w = crate::harness::corpus::bump(g, 0.125, 3).unwrap();
            for _ in 0..20 {
                w = perturb_weight(&w, &mut rng).unwrap();
                prop_assert!(w.values().iter().all(|&x| x >= 0.0));
            }
        }
    }
}
