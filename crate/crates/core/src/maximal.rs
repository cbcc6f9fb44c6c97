//! Exact discrete maximal operators over all wrapped cell intervals, and the
//! dyadic sparse operators.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, PrefixSums, Weight};
use crate::oscillation::SparseFamily;
use crate::par;
use crate::young::{luxemburg_of_values, YoungFunction};

/// `sup_{I ∋ x} (1/|I|) ∫_I v` over every wrapped interval, for `v >= 0`.
///
/// For a fixed start `s` the cell `s + a` lies in exactly the intervals of
/// length `> a`, so a suffix maximum over lengths gives its best value from
/// that start in O(N); all N starts give O(N²).
pub fn maximal_values(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let ps = PrefixSums::new(values);
    par::max_fold(
        n,
        n,
        || vec![0.0f64; n],
        |s, avgs, acc| {
            for (len, a) in (1..=n).zip(avgs.iter_mut()) {
                *a = ps.wrapped_average(s, len);
            }
            let mut best = f64::NEG_INFINITY;
            for off in (0..n).rev() {
                best = best.max(avgs[off]);
                let c = (s + off) % n;
                if best > acc[c] {
                    acc[c] = best;
                }
            }
        },
    )
}

/// Hardy–Littlewood maximal function `Mw`.
pub fn hl_maximal(w: &Weight) -> Weight {
    Weight::new(w.grid(), maximal_values(w.values())).expect("maximal function of a weight is a weight")
}

/// `M^k w`, the `k`-fold composition.
pub fn iterated_maximal(w: &Weight, k: u32) -> Result<Weight> {
    if k == 0 {
        return Err(Error::invalid("iteration count k must be at least 1"));
    }
    let mut v = w.values().to_vec();
    for _ in 0..k {
        v = maximal_values(&v);
    }
    Weight::new(w.grid(), v)
}

/// `M_s w = (M(w^s))^{1/s}`.
pub fn power_maximal(w: &Weight, s: f64) -> Result<Weight> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::invalid(format!("power s = {s} must exceed 1")));
    }
    let ws: Vec<f64> = w.values().iter().map(|v| v.powf(s)).collect();
    let m = maximal_values(&ws);
    Weight::new(w.grid(), m.into_iter().map(|v| v.powf(1.0 / s)).collect())
}

/// `sup_{I ∋ x} ||v||_{A,I}` over every wrapped interval, one Luxemburg
/// root per interval.
pub fn orlicz_maximal_values(values: &[f64], a: &YoungFunction) -> Result<Vec<f64>> {
    let n = values.len();
    let doubled: Vec<f64> = values.iter().chain(values).copied().collect();
    let rows = par::map(n, |s| -> Result<Vec<f64>> {
        let mut norms = vec![0.0f64; n];
        for len in 1..=n {
            norms[len - 1] = luxemburg_of_values(a, &doubled[s..s + len])?;
        }
        let mut out = vec![0.0f64; n];
        let mut best = f64::NEG_INFINITY;
        for off in (0..n).rev() {
            best = best.max(norms[off]);
            out[(s + off) % n] = best;
        }
        Ok(out)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(par::elementwise_max(rows, n))
}

/// Orlicz maximal function `M_A w`.
pub fn orlicz_maximal(w: &Weight, a: &YoungFunction) -> Result<Weight> {
    Weight::new(w.grid(), orlicz_maximal_values(w.values(), a)?)
}

/// `A_{r,S} f = Σ_{Q∈S} (avg_{Q̄} |f|^r)^{1/r} χ_Q` with `Q̄ = 2Q` when
/// `dilated`, else `Q̄ = Q`.
pub fn sparse_operator(
    f: &GridFunction,
    family: &SparseFamily,
    r: f64,
    dilated: bool,
) -> Result<GridFunction> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::invalid(format!("sparse exponent r = {r} must be at least 1")));
    }
    let grid = f.grid();
    if family.grid() != grid {
        return Err(Error::GridMismatch {
            expected: grid.cells(),
            found: family.grid().cells(),
        });
    }
    let fr: Vec<f64> = f.abs().into_iter().map(|v| if r == 1.0 { v } else { v.powf(r) }).collect();
    let ps = PrefixSums::new(&fr);
    let mut out = vec![0.0f64; grid.cells()];
    for q in family.intervals() {
        let cells = q.to_cells(grid);
        let hull = if dilated { cells.dilate(2.0, grid)? } else { cells };
        let avg = ps.wrapped_average(hull.start, hull.len).max(0.0);
        let term = if r == 1.0 { avg } else { avg.powf(1.0 / r) };
        for c in q.cells(grid) {
            out[c] += term;
        }
    }
    GridFunction::real(grid, out)
}

/// `sup_x M((M_A w)^δ)(x) / (M_A w)^δ(x)`.
pub fn coifman_rochberg_ratio(w: &Weight, a: &YoungFunction, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta = {delta} must lie in (0, 1)")));
    }
    let ma = orlicz_maximal_values(w.values(), a)?;
    let g: Vec<f64> = ma.iter().map(|v| v.powf(delta)).collect();
    let mg = maximal_values(&g);
    Ok(mg
        .iter()
        .zip(&g)
        .map(|(m, v)| if *v > 0.0 { m / v } else { 1.0 })
        .fold(1.0, f64::max))
}

/// A maximal operator selected by name.
#[derive(Clone, Debug)]
pub enum MaximalSpec {
    Hl,
    Iterated(u32),
    Power(f64),
    Orlicz(YoungFunction),
}

impl fmt::Display for MaximalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaximalSpec::Hl => write!(f, "M"),
            MaximalSpec::Iterated(k) => write!(f, "M^k:{k}"),
            MaximalSpec::Power(s) => write!(f, "Ms:{s}"),
            MaximalSpec::Orlicz(a) => write!(f, "MA:{}", a.label()),
        }
    }
}

impl MaximalSpec {
    /// Parses `M`, `M^k:3`, `Ms:1.5` or `MA:logpow:2`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "M" {
            return Ok(MaximalSpec::Hl);
        }
        let (head, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("unknown maximal spec {spec:?}")))?;
        match head {
            "M^k" => {
                let k: u32 = rest
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad iteration count {rest:?}")))?;
                if k == 0 {
                    return Err(Error::invalid("iteration count k must be at least 1"));
                }
                Ok(MaximalSpec::Iterated(k))
            }
            "Ms" => {
                let s: f64 = rest
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad power {rest:?}")))?;
                if !(s > 1.0 && s.is_finite()) {
                    return Err(Error::invalid(format!("power s = {s} must exceed 1")));
                }
                Ok(MaximalSpec::Power(s))
            }
            "MA" => Ok(MaximalSpec::Orlicz(YoungFunction::parse(rest)?)),
            _ => Err(Error::invalid(format!("unknown maximal spec {spec:?}"))),
        }
    }

    /// Applies the operator to non-negative samples.
    pub fn apply_values(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            MaximalSpec::Hl => Ok(maximal_values(v)),
            MaximalSpec::Iterated(k) => {
                let mut out = v.to_vec();
                for _ in 0..*k {
                    out = maximal_values(&out);
                }
                Ok(out)
            }
            MaximalSpec::Power(s) => {
                let vs: Vec<f64> = v.iter().map(|x| x.powf(*s)).collect();
                Ok(maximal_values(&vs).into_iter().map(|x| x.powf(1.0 / s)).collect())
            }
            MaximalSpec::Orlicz(a) => orlicz_maximal_values(v, a),
        }
    }

    pub fn apply(&self, w: &Weight) -> Result<Weight> {
        Weight::new(w.grid(), self.apply_values(w.values())?)
    }

    /// Applies the operator to `|f|`.
    pub fn apply_abs(&self, f: &GridFunction) -> Result<GridFunction> {
        GridFunction::real(f.grid(), self.apply_values(&f.abs())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DyadicInterval, TorusGrid};
    use crate::oscillation::{SparseFamily, SparseNode};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Triple loop: every cell, every start, every length, direct sums.
    fn brute_force(v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|x| {
                let mut best = f64::NEG_INFINITY;
                for s in 0..n {
                    for len in 1..=n {
                        let off = (x + n - s) % n;
                        if off < len {
                            let sum: f64 = (0..len).map(|i| v[(s + i) % n]).sum();
                            best = best.max(sum / len as f64);
                        }
                    }
                }
                best
            })
            .collect()
    }

    fn random_weight(j: u32, seed: u64) -> Weight {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = TorusGrid::new(j).unwrap();
        let v = (0..g.cells()).map(|_| rng.random::<f64>().powi(3) * 10.0).collect();
        Weight::new(g, v).unwrap()
    }

    #[test]
    fn spec_examples() {
        let g = TorusGrid::new(3).unwrap();
        let half = Weight::new(g, vec![1., 1., 1., 1., 0., 0., 0., 0.]).unwrap();
        assert!((hl_maximal(&half).values()[4] - 0.8).abs() < 1e-15);
        let spike = Weight::new(g, vec![8., 0., 0., 0., 0., 0., 0., 0.]).unwrap();
        let m = hl_maximal(&spike);
        for i in 0..8 {
            let expect = 8.0 / (i.min(8 - i) + 1) as f64;
            assert!((m.values()[i] - expect).abs() < 1e-14, "cell {i}");
        }
        let one = Weight::constant(g, 1.0).unwrap();
        assert!(hl_maximal(&one).values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..20 {
            let w = random_weight(1 + (seed as u32 % 5) + 1, seed);
            let fast = hl_maximal(&w);
            let slow = brute_force(w.values());
            for (a, b) in fast.values().iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn iterated_composition_and_errors() {
        let w = random_weight(5, 3);
        let m1 = iterated_maximal(&w, 1).unwrap();
        assert_eq!(m1.values(), hl_maximal(&w).values());
        let m3 = iterated_maximal(&w, 3).unwrap();
        let chained = hl_maximal(&hl_maximal(&hl_maximal(&w)));
        assert_eq!(m3.values(), chained.values());
        assert!(iterated_maximal(&w, 0).is_err());
    }

    #[test]
    fn power_maximal_limits() {
        let g = TorusGrid::new(6).unwrap();
        let w = Weight::from_function(
            GridFunction::from_fn(g, |x| 2.0 + (2.0 * std::f64::consts::PI * x).sin()).unwrap(),
        )
        .unwrap();
        let m = hl_maximal(&w);
        let ms = power_maximal(&w, 1.0001).unwrap();
        let m2 = power_maximal(&w, 2.0).unwrap();
        for i in 0..g.cells() {
            assert!((ms.values()[i] - m.values()[i]).abs() < 1e-3);
            assert!(m2.values()[i] >= m.values()[i] * (1.0 - 1e-14));
        }
        assert!(power_maximal(&w, 1.0).is_err());
    }

    #[test]
    fn orlicz_consistency() {
        let w = random_weight(5, 11);
        let a1 = YoungFunction::power(1.0).unwrap();
        let m = hl_maximal(&w);
        let ma = orlicz_maximal(&w, &a1).unwrap();
        for (x, y) in ma.values().iter().zip(m.values()) {
            assert!((x - y).abs() <= 1e-12 * y);
        }
        let a2 = YoungFunction::power(2.5).unwrap();
        let ms = power_maximal(&w, 2.5).unwrap();
        let ma2 = orlicz_maximal(&w, &a2).unwrap();
        for (x, y) in ma2.values().iter().zip(ms.values()) {
            assert!((x - y).abs() <= 1e-9 * y);
        }
    }

    #[test]
    fn llogl_controlled_by_m_squared() {
        let a = YoungFunction::log_power(1.0).unwrap();
        let mut worst = 0.0f64;
        for seed in 0..5 {
            let w = random_weight(5, 100 + seed);
            let ma = orlicz_maximal(&w, &a).unwrap();
            let m2 = iterated_maximal(&w, 2).unwrap();
            for (x, y) in ma.values().iter().zip(m2.values()) {
                worst = worst.max(x / y);
            }
        }
        assert!(worst.is_finite() && worst < 10.0, "{worst}");
    }

    #[test]
    fn sparse_operator_examples() {
        let g = TorusGrid::new(4).unwrap();
        let root = g.root();
        let single = SparseFamily {
            grid_levels: 4,
            root,
            nodes: vec![SparseNode {
                level: 0,
                index: 0,
                e_cells: vec![[0, 16]],
                median: 0.0,
                omega: 0.0,
                parent: None,
            }],
        };
        let one = GridFunction::constant(g, 1.0).unwrap();
        let out = sparse_operator(&one, &single, 1.0, true).unwrap();
        assert!(out.as_real().unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-15));

        let f = GridFunction::from_fn(g, |x| x * 3.0 - 1.0).unwrap();
        let rms = (f.abs().iter().map(|v| v * v).sum::<f64>() / 16.0).sqrt();
        let out = sparse_operator(&f, &single, 2.0, false).unwrap();
        assert!(out.as_real().unwrap().iter().all(|&v| (v - rms).abs() < 1e-14));

        // Nested pair {Q0, [0,1/4)} on f = χ_[0,1/2).
        let mut nested = single.clone();
        nested.nodes[0].e_cells = vec![[4, 12]];
        nested.nodes.push(SparseNode {
            level: 2,
            index: 0,
            e_cells: vec![[0, 4]],
            median: 0.0,
            omega: 0.0,
            parent: Some(0),
        });
        let half = GridFunction::from_fn(g, |x| if x < 0.5 { 1.0 } else { 0.0 }).unwrap();
        let undilated = sparse_operator(&half, &nested, 1.0, false).unwrap();
        let u = undilated.as_real().unwrap();
        assert!((u[0] - 1.5).abs() < 1e-15 && (u[8] - 0.5).abs() < 1e-15);
        // 2·[0,1/4) wraps to cells 14..16 ∪ 0..6: 6 of 8 cells are in the support.
        let dq = DyadicInterval::new(2, 0, g).unwrap().to_cells(g).dilate(2.0, g).unwrap();
        assert_eq!((dq.start, dq.len), (14, 8));
        let dilated = sparse_operator(&half, &nested, 1.0, true).unwrap();
        let d = dilated.as_real().unwrap();
        assert!((d[0] - (0.5 + 0.75)).abs() < 1e-15 && (d[8] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coifman_rochberg_basics() {
        let g = TorusGrid::new(4).unwrap();
        let a = YoungFunction::power(1.0).unwrap();
        let c = Weight::constant(g, 3.0).unwrap();
        assert!((coifman_rochberg_ratio(&c, &a, 0.5).unwrap() - 1.0).abs() < 1e-12);
        let w = random_weight(5, 9);
        let r = coifman_rochberg_ratio(&w, &a, 0.5).unwrap();
        assert!(r >= 1.0 && r.is_finite());
        assert!(coifman_rochberg_ratio(&w, &a, 1.0).is_err());
    }

    #[test]
    fn iterated_bounded_by_power_maximal() {
        let mut worst = 0.0f64;
        for seed in 0..10 {
            let w = random_weight(6, 300 + seed);
            let m3 = iterated_maximal(&w, 3).unwrap();
            let mr = power_maximal(&w, 1.5).unwrap();
            for (x, y) in m3.values().iter().zip(mr.values()) {
                worst = worst.max(x / y);
            }
        }
        assert!(worst.is_finite() && worst > 0.0);
    }

    #[test]
    fn spec_strings() {
        assert!(matches!(MaximalSpec::parse("M").unwrap(), MaximalSpec::Hl));
        assert!(matches!(MaximalSpec::parse("M^k:3").unwrap(), MaximalSpec::Iterated(3)));
        assert!(matches!(MaximalSpec::parse("Ms:1.5").unwrap(), MaximalSpec::Power(s) if s == 1.5));
        assert!(matches!(MaximalSpec::parse("MA:logpow:2").unwrap(), MaximalSpec::Orlicz(_)));
        for bad in ["", "M^k:0", "Ms:1", "MA:foo:1", "N"] {
            assert!(MaximalSpec::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(MaximalSpec::parse("MA:logpow:2").unwrap().to_string(), "MA:logpow:2");
    }

    proptest! {
        #[test]
        fn maximal_properties(values in prop::collection::vec(0.0f64..100.0, 16), c in 0.01f64..100.0) {
            prop_assume!(values.iter().any(|&v| v > 0.0));
            let m = maximal_values(&values);
            let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
            let mc = maximal_values(&scaled);
            let m2 = maximal_values(&m);
            for i in 0..16 {
                prop_assert!(m[i] >= values[i] * (1.0 - 1e-14));
                prop_assert!((mc[i] - c * m[i]).abs() <= 1e-12 * (c * m[i]).max(1e-300));
                prop_assert!(m2[i] >= m[i] * (1.0 - 1e-14));
            }
        }

        #[test]
        fn sparse_monotone_and_homogeneous(
            values in prop::collection::vec(0.0f64..10.0, 32),
            bump in prop::collection::vec(0.0f64..1.0, 32),
            c in 0.1f64..10.0,
        ) {
            let g = TorusGrid::new(5).unwrap();
            let f = GridFunction::real(g, values.clone()).unwrap();
            let fam = crate::oscillation::sparse_decompose(&f, g.root(), &Default::default()).unwrap();
            let bigger = GridFunction::real(g, values.iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
            let a = sparse_operator(&f, &fam, 1.5, true).unwrap();
            let b = sparse_operator(&bigger, &fam, 1.5, true).unwrap();
            let s = sparse_operator(&f.scaled(c), &fam, 1.5, true).unwrap();
            for i in 0..32 {
                let (x, y, z) = (a.as_real().unwrap()[i], b.as_real().unwrap()[i], s.as_real().unwrap()[i]);
                prop_assert!(y >= x * (1.0 - 1e-14));
                prop_assert!((z - c * x).abs() <= 1e-12 * (c * x).max(1e-300));
            }
        }
    }
}
