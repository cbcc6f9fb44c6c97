//! Growth of the `M^k` Fefferman–Stein ratio on shrinking bump weights.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::corpus::{bump, trial_rng};
use super::record::{ratio, RatioRecord};
use super::search::{hill_climb, perturb_values};
use super::spec::{ExperimentKind, ExperimentSpec};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid, Weight};
use crate::maximal::MaximalSpec;
use crate::operators::{hilbert_transform, OperatorSpec};
use crate::par;

/// Ratio sequences for two iteration counts over a sequence of bump widths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessTrend {
    pub p: f64,
    pub k_low: u32,
    pub k_high: u32,
    pub eps: Vec<f64>,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    /// `(lhs, rhs)` of each entry of `low` / `high`.
    pub low_sides: Vec<(f64, f64)>,
    pub high_sides: Vec<(f64, f64)>,
}

impl SharpnessTrend {
    /// Last over first.
    pub fn growth_low(&self) -> f64 {
        growth(&self.low)
    }

    pub fn growth_high(&self) -> f64 {
        growth(&self.high)
    }
}

fn growth(v: &[f64]) -> f64 {
    match (v.first(), v.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => f64::NAN,
    }
}

/// `max(v) / min(v)`.
pub fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

pub fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Probe with `w_ε = ε^{-1} χ_[0,ε)`.
#[allow(clippy::too_many_arguments)]
pub fn sharpness_probe(
    p: f64,
    k_low: u32,
    k_high: u32,
    eps: &[f64],
    op: &OperatorSpec,
    grid: TorusGrid,
    budget: usize,
    seed: u64,
) -> Result<SharpnessTrend> {
    sharpness_probe_with(p, k_low, k_high, eps, op, budget, seed, |e| bump(grid, e, 0))
}

/// Probe with an arbitrary weight per width. For each `ε` and `k`, the test
/// function maximizing `∫|Tf|^p w_ε / ∫|f|^p M^k w_ε` is sought: for the
/// Hilbert transform the start is the `p = 2` maximizer from an eigen solve,
/// otherwise a random draw; then a hill climb over `f` with `budget`
/// evaluations.
#[allow(clippy::too_many_arguments)]
pub fn sharpness_probe_with(
    p: f64,
    k_low: u32,
    k_high: u32,
    eps: &[f64],
    op: &OperatorSpec,
    budget: usize,
    seed: u64,
    weight: impl Fn(f64) -> Result<Weight> + Sync,
) -> Result<SharpnessTrend> {
    if !(p > 1.0) || k_low == 0 || k_high == 0 {
        return Err(Error::invalid("sharpness needs p > 1 and k >= 1"));
    }
    if eps.is_empty() || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("eps must be strictly decreasing"));
    }
    let jobs: Vec<(usize, u32)> = (0..eps.len()).flat_map(|i| [(i, k_low), (i, k_high)]).collect();
    let out: Vec<(f64, f64, f64)> = par::map(jobs.len(), |j| {
        let (i, k) = jobs[j];
        best_ratio(p, k, &weight(eps[i])?, op, budget, seed)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let pick = |off: usize| -> (Vec<f64>, Vec<(f64, f64)>) {
        out.iter().skip(off).step_by(2).map(|&(l, r, q)| (q, (l, r))).unzip()
    };
    let (low, low_sides) = pick(0);
    let (high, high_sides) = pick(1);
    Ok(SharpnessTrend {
        p,
        k_low,
        k_high,
        eps: eps.to_vec(),
        low,
        high,
        low_sides,
        high_sides,
    })
}

fn sides(op: &OperatorSpec, p: f64, w: &[f64], v: &[f64], f: &GridFunction) -> Result<(f64, f64)> {
    let tf = op.magnitude(f)?;
    let fa = f.abs();
    let n = w.len() as f64;
    Ok((
        tf.iter().zip(w).map(|(t, w)| t.powf(p) * w).sum::<f64>() / n,
        fa.iter().zip(v).map(|(f, v)| f.powf(p) * v).sum::<f64>() / n,
    ))
}

fn best_ratio(
    p: f64,
    k: u32,
    w: &Weight,
    op: &OperatorSpec,
    budget: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let grid = w.grid();
    let wv = w.values();
    let v = MaximalSpec::Iterated(k).apply_values(wv)?;
    let mut rng = trial_rng(seed, 0);
    let init = if *op == OperatorSpec::Hilbert {
        warm_start(wv, &v)?
    } else {
        (0..grid.cells()).map(|_| rng.sample(StandardNormal)).collect()
    };
    let f0 = GridFunction::real(grid, init)?;
    let objective = |f: &GridFunction| -> Result<f64> {
        let (l, r) = sides(op, p, wv, &v, f)?;
        ratio(0, l, r)
    };
    let (best, _, _) = hill_climb(
        f0,
        budget,
        &mut rng,
        |f: &GridFunction, rng| GridFunction::real(grid, perturb_values(f.require_real()?, rng)),
        objective,
    )?;
    let (l, r) = sides(op, p, wv, &v, &best)?;
    Ok((l, r, ratio(0, l, r)?))
}

/// Leading eigenvector of `V^{-1/2} H^T W H V^{-1/2}`, mapped back by
/// `f = V^{-1/2} g`. With `A = W^{1/2} H V^{-1/2}` restricted to the rows
/// where `w > 0`, the eigenvector is `A^T y` for the top eigenvector `y` of
/// the small matrix `A A^T`.
fn warm_start(w: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = w.len();
    let grid = TorusGrid::with_cells(n)?;
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let h = hilbert_transform(&GridFunction::real(grid, e0)?)?.require_real()?.to_vec();
    let s2: Vec<f64> = v.iter().map(|x| 1.0 / x).collect();
    let rows: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
    let m = rows.len();
    // Row i of A: sqrt(w_i) h[i - j] s_j.
    let kernel = |i: usize, j: usize| h[(i + n - j) % n];
    let entries: Vec<Vec<f64>> = par::map(m, |a| {
        let i = rows[a];
        (0..m)
            .map(|b| {
                let k = rows[b];
                (0..n).map(|j| kernel(i, j) * kernel(k, j) * s2[j]).sum::<f64>() * (w[i] * w[k]).sqrt()
            })
            .collect()
    });
    let gram = DMatrix::from_fn(m, m, |a, b| 0.5 * (entries[a][b] + entries[b][a]));
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.imax();
    let y = eig.eigenvectors.column(top);
    Ok((0..n)
        .map(|j| {
            let g: f64 = (0..m).map(|a| y[a] * w[rows[a]].sqrt() * kernel(rows[a], j)).sum();
            g * s2[j]
        })
        .collect())
}

/// `SHARPNESS` records: per width one record for `k_low` and one for
/// `k_high`, then a summary record whose ratio is the `k_low` growth factor.
pub(crate) fn sharpness_records(spec: &ExperimentSpec) -> Result<Vec<RatioRecord>> {
    let k_low = spec.p.floor() as u32;
    let trend = sharpness_probe(
        spec.p,
        k_low,
        k_low + 1,
        &spec.eps(),
        &spec.op_spec()?,
        TorusGrid::new(spec.levels())?,
        spec.budget(),
        spec.seed,
    )?;
    let kind = ExperimentKind::Sharpness.name();
    let base = spec.params();
    let with = |extra: Value| -> Value {
        let mut m = base.clone();
        let obj = m.as_object_mut().expect("params object");
        for (k, v) in extra.as_object().expect("object") {
            obj.insert(k.clone(), v.clone());
        }
        m
    };
    let mut out = Vec::new();
    for (i, &e) in trend.eps.iter().enumerate() {
        for (j, (k, sides)) in [(trend.k_low, trend.low_sides[i]), (trend.k_high, trend.high_sides[i])]
            .into_iter()
            .enumerate()
        {
            out.push(RatioRecord::new(
                kind,
                with(json!({"eps": e, "k": k})),
                spec.seed,
                2 * i + j,
                sides.0,
                sides.1,
            )?);
        }
    }
    let summary = with(json!({
        "summary": true,
        "ratios_low": trend.low,
        "ratios_high": trend.high,
        "growth_low": trend.growth_low(),
        "growth_high": trend.growth_high(),
        "spread_high": spread(&trend.high),
    }));
    out.push(RatioRecord::new(
        kind,
        summary,
        spec.seed,
        2 * trend.eps.len(),
        *trend.low.last().expect("non-empty"),
        trend.low[0],
    )?);
    Ok(out)
}
