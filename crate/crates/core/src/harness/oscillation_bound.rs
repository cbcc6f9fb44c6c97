//! Empirical implicit constant in the local oscillation estimate for
//! maximally modulated operators.

use crate::error::{Error, Result};
use crate::grid::{DyadicInterval, GridFunction, PrefixSums};
use crate::operators::{lq_rows, OperatorProfile, OperatorSpec};
use crate::oscillation::oscillation_of;

/// Both sides of the oscillation estimate on one interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillationBound {
    /// `ω_λ(Tf; Q)` (or of `|T̄f|_q`).
    pub omega: f64,
    /// `ψ(r) (avg_{2Q} g^r)^{1/r} + Σ_m 2^{-mδ} avg_{2^m Q} g`, `g = |f|` or `|f|_q`.
    pub bound: f64,
}

impl OscillationBound {
    pub fn ratio(&self) -> f64 {
        if self.bound > 0.0 {
            self.omega / self.bound
        } else {
            0.0
        }
    }
}

/// Evaluates both sides for one function (`q = None`) or a vector of
/// functions aggregated in `ℓ^q`. The dilations `2^m Q` stop at the torus.
pub fn oscillation_bound_check(
    fs: &[GridFunction],
    q: Option<f64>,
    op: &OperatorSpec,
    interval: DyadicInterval,
    profile: &OperatorProfile,
    r: f64,
    lambda: f64,
) -> Result<OscillationBound> {
    let first = fs.first().ok_or_else(|| Error::invalid("no functions supplied"))?;
    if q.is_none() && fs.len() != 1 {
        return Err(Error::invalid("several components need an exponent q"));
    }
    if !(r > 1.0 && r <= profile.r0) {
        return Err(Error::invalid(format!("r = {r} must lie in (1, {}]", profile.r0)));
    }
    let grid = first.grid();
    for f in &fs[1..] {
        first.ensure_same_grid(f)?;
    }
    let outs: Vec<Vec<f64>> = fs.iter().map(|f| op.magnitude(f)).collect::<Result<_>>()?;
    let mags: Vec<Vec<f64>> = fs.iter().map(GridFunction::abs).collect();
    let (tf, g) = match q {
        Some(q) => (lq_rows(&outs, q), lq_rows(&mags, q)),
        None => (outs.into_iter().next().expect("one"), mags.into_iter().next().expect("one")),
    };
    let cells = interval.to_cells(grid);
    let vals: Vec<f64> = cells.cells(grid).map(|c| tf[c]).collect();
    let omega = oscillation_of(&vals, lambda).omega;

    let gr: Vec<f64> = g.iter().map(|v| v.powf(r)).collect();
    let ps_r = PrefixSums::new(&gr);
    let ps = PrefixSums::new(&g);
    let hull = cells.dilate(2.0, grid)?;
    let local = ps_r.wrapped_average(hull.start, hull.len).max(0.0).powf(1.0 / r);
    let mut tail = 0.0;
    let mut m = 0i32;
    loop {
        let d = cells.dilate(2f64.powi(m), grid)?;
        tail += 2f64.powf(-(m as f64) * profile.delta) * ps.wrapped_average(d.start, d.len);
        if d.is_full(grid) {
            break;
        }
        m += 1;
    }
    Ok(OscillationBound {
        omega,
        bound: profile.psi_at(r) * local + tail,
    })
}
