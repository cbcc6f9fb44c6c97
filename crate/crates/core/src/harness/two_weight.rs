//! Joint Luxemburg testing constant of a weight pair.

use crate::error::{Error, Result};
use crate::grid::Weight;
use crate::par;
use crate::young::{luxemburg_of_values, YoungFunction};

/// `[u,v]_{A,B} = sup_Q ||u^{1/p}||_{A,Q} ||v^{-r/p}||_{B,Q}^{1/r}` over every
/// wrapped cell interval `Q`.
pub fn two_weight_constant(
    u: &Weight,
    v: &Weight,
    a: &YoungFunction,
    b: &YoungFunction,
    p: f64,
    r: f64,
) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch {
            expected: u.grid().cells(),
            found: v.grid().cells(),
        });
    }
    if !(p > 1.0 && r > 1.0 && r < p) {
        return Err(Error::invalid(format!("need 1 < r < p (r = {r}, p = {p})")));
    }
    if let Some(c) = v.values().iter().position(|&x| x <= 0.0) {
        return Err(Error::EvaluatorDomain(format!("v vanishes at cell {c}; v^(-r/p) is undefined")));
    }
    let n = u.values().len();
    let x: Vec<f64> = u.values().iter().map(|t| t.powf(1.0 / p)).collect();
    let y: Vec<f64> = v.values().iter().map(|t| t.powf(-r / p)).collect();
    let xx: Vec<f64> = x.iter().chain(&x).copied().collect();
    let yy: Vec<f64> = y.iter().chain(&y).copied().collect();
    let rows = par::map(n, |s| -> Result<f64> {
        let mut best = 0.0f64;
        for len in 1..=n {
            let na = luxemburg_of_values(a, &xx[s..s + len])?;
            let nb = luxemburg_of_values(b, &yy[s..s + len])?;
            best = best.max(na * nb.powf(1.0 / r));
        }
        Ok(best)
    });
    rows.into_iter().try_fold(0.0f64, |acc, r| Ok(acc.max(r?)))
}
