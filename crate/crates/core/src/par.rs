//! Data-parallel building blocks.
//!
//! With the `parallel` feature these run on the rayon global pool; without it
//! they fall back to plain sequential loops. Every helper returns results in
//! index order and only combines partial results with order-insensitive
//! reductions (elementwise max), so output is bitwise identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..n`, preserving index order.
pub fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `task(t, scratch, acc)` for every `t in 0..tasks`; each task raises
/// entries of its accumulator of length `width`, and the accumulators are
/// merged by elementwise maximum. `scratch` is per-worker working memory.
pub fn max_fold<S, I, F>(tasks: usize, width: usize, init_scratch: I, task: F) -> Vec<f64>
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(usize, &mut S, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..tasks)
            .into_par_iter()
            .fold(
                || (init_scratch(), vec![f64::NEG_INFINITY; width]),
                |(mut scratch, mut acc), t| {
                    task(t, &mut scratch, &mut acc);
                    (scratch, acc)
                },
            )
            .map(|(_, acc)| acc)
            .reduce(|| vec![f64::NEG_INFINITY; width], merge_max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init_scratch();
        let mut acc = vec![f64::NEG_INFINITY; width];
        for t in 0..tasks {
            task(t, &mut scratch, &mut acc);
        }
        acc
    }
}

/// Maximum of `f(i)` over `i in 0..n` for scalar-valued tasks.
pub fn max_of<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map(n, f).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
fn merge_max(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        if y > *x {
            *x = y;
        }
    }
    a
}

/// Elementwise maximum of equally sized vectors.
pub fn elementwise_max(rows: impl IntoIterator<Item = Vec<f64>>, width: usize) -> Vec<f64> {
    rows.into_iter()
        .fold(vec![f64::NEG_INFINITY; width], |mut acc, row| {
            for (a, v) in acc.iter_mut().zip(row) {
                if v > *a {
                    *a = v;
                }
            }
            acc
        })
}
