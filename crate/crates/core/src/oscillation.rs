//! Rearrangement quantiles, medians, local mean oscillation and the
//! stopping-time sparse decomposition with its structural audit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellInterval, DyadicInterval, GridFunction, TorusGrid};

/// Rank `floor(x)` with a relative guard of `1e-12` so that products such as
/// `0.29 * 100` land on 29 rather than 28.
pub(crate) fn guarded_floor(x: f64) -> usize {
    (x * (1.0 + 1e-12)).floor().max(0.0) as usize
}

/// Number of whole cells `k = floor(t / h)` strictly ahead of the quantile at
/// measure `t`.
pub fn rank_for_measure(t: f64, grid: TorusGrid) -> usize {
    guarded_floor(t * grid.cells() as f64)
}

/// The `(k+1)`-th largest entry of `values` (0 if `k >= len`). Reorders the slice.
pub fn quantile_by_rank(values: &mut [f64], k: usize) -> f64 {
    if k >= values.len() {
        return 0.0;
    }
    let (_, nth, _) = values.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    *nth
}

/// `(g chi_Q)^*(t)`: the non-increasing rearrangement of `|g|` restricted to
/// `q`, evaluated at measure `t`.
pub fn rearrangement_quantile(g: &GridFunction, q: CellInterval, t: f64) -> Result<f64> {
    q.validate(g.grid())?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!("rearrangement at non-positive measure {t}")));
    }
    let abs = g.abs();
    let mut vals: Vec<f64> = q.cells(g.grid()).map(|c| abs[c]).collect();
    Ok(quantile_by_rank(&mut vals, rank_for_measure(t, g.grid())))
}

/// Lower median `v[ceil(m/2)]` (1-based) of the ascending order. Reorders the slice.
pub fn lower_median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty set");
    let idx = values.len().div_ceil(2) - 1;
    let (_, nth, _) = values.select_nth_unstable_by(idx, f64::total_cmp);
    *nth
}

/// Median value `m_f(Q)` with both defining count inequalities checked.
pub fn median(f: &GridFunction, q: CellInterval) -> Result<f64> {
    q.validate(f.grid())?;
    let values = f.require_real()?;
    let mut vals: Vec<f64> = q.cells(f.grid()).map(|c| values[c]).collect();
    let m = lower_median(&mut vals);
    let above = vals.iter().filter(|&&v| v > m).count();
    let below = vals.iter().filter(|&&v| v < m).count();
    if 2 * above > vals.len() || 2 * below > vals.len() {
        return Err(Error::InvariantBreach(format!(
            "median {m} violates counts (above {above}, below {below}, m {})",
            vals.len()
        )));
    }
    Ok(m)
}

/// Local mean oscillation and the constant attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Oscillation {
    pub omega: f64,
    pub center: f64,
}

/// Exact `omega_lambda` of a finite sample: with `k = floor(lambda m)`, the
/// smallest half-width of a window of `m - k` consecutive sorted values.
pub fn oscillation_of(values: &[f64], lambda: f64) -> Oscillation {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    oscillation_of_sorted(&sorted, lambda)
}

pub(crate) fn oscillation_of_sorted(sorted: &[f64], lambda: f64) -> Oscillation {
    let m = sorted.len();
    let k = guarded_floor(lambda * m as f64).min(m.saturating_sub(1));
    let width = m - k;
    let mut best = Oscillation {
        omega: f64::INFINITY,
        center: 0.0,
    };
    for start in 0..=k {
        let lo = sorted[start];
        let hi = sorted[start + width - 1];
        let half = (hi - lo) / 2.0;
        if half < best.omega {
            best = Oscillation {
                omega: half,
                center: lo + half,
            };
        }
    }
    best
}

/// `omega_lambda(f; Q) = inf_c ((f - c) chi_Q)^*(lambda |Q|)` and its minimiser.
pub fn local_mean_oscillation(f: &GridFunction, q: CellInterval, lambda: f64) -> Result<Oscillation> {
    q.validate(f.grid())?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid(format!("oscillation parameter {lambda} outside (0,1)")));
    }
    let values = f.require_real()?;
    let vals: Vec<f64> = q.cells(f.grid()).map(|c| values[c]).collect();
    Ok(oscillation_of(&vals, lambda))
}

/// Parameters of the stopping-time construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionConfig {
    /// Quantile parameter of the oscillation.
    pub lambda: f64,
    /// A descendant is selected when more than this fraction of it is exceptional.
    pub density: f64,
    /// A descendant is selected when its median moves by more than `jump * omega`.
    pub jump: f64,
    /// Deepest level a selected interval may have; `None` means the grid depth.
    pub max_depth: Option<u32>,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self {
            lambda: 0.125,
            density: 0.5,
            jump: 2.0,
            max_depth: None,
        }
    }
}

impl DecompositionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 0.5) {
            return Err(Error::invalid(format!("lambda {} outside (0, 1/2]", self.lambda)));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::invalid(format!("density {} outside (0, 1]", self.density)));
        }
        if !(self.jump >= 1.0) {
            return Err(Error::invalid(format!("jump multiplier {} < 1", self.jump)));
        }
        Ok(())
    }
}

/// One interval of a sparse family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseNode {
    pub level: u32,
    pub index: usize,
    /// `E(Q)` as sorted `[start, len]` runs of cells.
    pub e_cells: Vec<[usize; 2]>,
    pub median: f64,
    pub omega: f64,
    pub parent: Option<usize>,
}

impl SparseNode {
    pub fn interval(&self) -> DyadicInterval {
        DyadicInterval {
            level: self.level,
            index: self.index,
        }
    }

    pub fn e_count(&self) -> usize {
        self.e_cells.iter().map(|r| r[1]).sum()
    }
}

/// Sparse family of dyadic intervals inside a root interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseFamily {
    pub grid_levels: u32,
    pub root: DyadicInterval,
    pub nodes: Vec<SparseNode>,
}

impl SparseFamily {
    pub fn grid(&self) -> TorusGrid {
        TorusGrid::new(self.grid_levels).expect("family built on a valid grid")
    }

    pub fn intervals(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        self.nodes.iter().map(SparseNode::interval)
    }

    /// Checks disjointness of the `E` sets, `|E(Q)| >= |Q|/2`, containment
    /// of every `E(Q)` in `Q`, and that children strictly descend from parents.
    pub fn audit(&self) -> Result<()> {
        let grid = self.grid();
        let mut owner = vec![usize::MAX; grid.cells()];
        for (i, node) in self.nodes.iter().enumerate() {
            let q = node.interval();
            let range = q.cells(grid);
            if 2 * node.e_count() < range.len() {
                return Err(Error::ConstructionFailure {
                    level: node.level,
                    index: node.index,
                    e_cells: node.e_count(),
                    half: range.len() as f64 / 2.0,
                });
            }
            for &[start, len] in &node.e_cells {
                for c in start..start + len {
                    if !range.contains(&c) {
                        return Err(Error::InvariantBreach(format!(
                            "E cell {c} outside its interval ({}, {})",
                            node.level, node.index
                        )));
                    }
                    if owner[c] != usize::MAX {
                        return Err(Error::InvariantBreach(format!(
                            "cell {c} owned by nodes {} and {i}",
                            owner[c]
                        )));
                    }
                    owner[c] = i;
                }
            }
            if let Some(p) = node.parent {
                let parent = self
                    .nodes
                    .get(p)
                    .ok_or_else(|| Error::InvariantBreach(format!("dangling parent {p}")))?;
                let pq = parent.interval();
                if !(pq.contains(&q) && pq.level < q.level) {
                    return Err(Error::InvariantBreach(format!(
                        "node {i} is not a strict descendant of its parent {p}"
                    )));
                }
            } else if q != self.root {
                return Err(Error::InvariantBreach(format!("orphan node {i}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let family: SparseFamily = serde_json::from_str(text)?;
        TorusGrid::new(family.grid_levels)?;
        Ok(family)
    }
}

/// Stopping-time sparse decomposition of a real function on `root`.
///
/// For each selected `Q`: `Omega(Q)` is the set of cells where
/// `|f - m_f(Q)|` exceeds its own `lambda|Q|` rearrangement quantile. The
/// children of `Q` are the maximal strict dyadic descendants `P` with
/// `|P ∩ Omega(Q)| > density |P|` or `|m_f(P) - m_f(Q)| > jump * omega(Q)`,
/// and `E(Q)` is `Q` minus its children.
pub fn sparse_decompose(
    f: &GridFunction,
    root: DyadicInterval,
    cfg: &DecompositionConfig,
) -> Result<SparseFamily> {
    cfg.validate()?;
    let grid = f.grid();
    let values = f.require_real()?;
    DyadicInterval::new(root.level, root.index, grid)?;
    let max_level = cfg.max_depth.unwrap_or(grid.levels()).min(grid.levels());

    let mut nodes: Vec<SparseNode> = Vec::new();
    let mut queue = std::collections::VecDeque::from([(root, None::<usize>)]);
    let mut scratch = Vec::new();

    while let Some((q, parent)) = queue.pop_front() {
        let range = q.cells(grid);
        let vals = &values[range.clone()];
        let m = vals.len();

        scratch.clear();
        scratch.extend_from_slice(vals);
        let med = lower_median(&mut scratch);
        scratch.sort_unstable_by(f64::total_cmp);
        let osc = oscillation_of_sorted(&scratch, cfg.lambda);

        let k = guarded_floor(cfg.lambda * m as f64);
        let mut dev: Vec<f64> = vals.iter().map(|v| (v - med).abs()).collect();
        let threshold = quantile_by_rank(&mut dev, k);
        let mut exceptional = vec![0usize; m + 1];
        for (i, v) in vals.iter().enumerate() {
            exceptional[i + 1] = exceptional[i] + usize::from((v - med).abs() > threshold);
        }

        let mut children = Vec::new();
        if q.level < max_level {
            let ctx = StopContext {
                grid,
                values,
                offset: range.start,
                exceptional: &exceptional,
                median: med,
                jump_limit: cfg.jump * osc.omega,
                density: cfg.density,
                max_level,
            };
            for c in q.children() {
                ctx.visit(c, &mut children, &mut Vec::new());
            }
        }

        let mut e_cells = Vec::new();
        let mut cursor = range.start;
        for c in &children {
            let cr = c.cells(grid);
            if cr.start > cursor {
                e_cells.push([cursor, cr.start - cursor]);
            }
            cursor = cr.end;
        }
        if range.end > cursor {
            e_cells.push([cursor, range.end - cursor]);
        }

        let node = SparseNode {
            level: q.level,
            index: q.index,
            e_cells,
            median: med,
            omega: osc.omega,
            parent,
        };
        if 2 * node.e_count() < m {
            return Err(Error::ConstructionFailure {
                level: q.level,
                index: q.index,
                e_cells: node.e_count(),
                half: m as f64 / 2.0,
            });
        }
        let id = nodes.len();
        nodes.push(node);
        queue.extend(children.into_iter().map(|c| (c, Some(id))));
    }

    let family = SparseFamily {
        grid_levels: grid.levels(),
        root,
        nodes,
    };
    family.audit()?;
    Ok(family)
}

struct StopContext<'a> {
    grid: TorusGrid,
    values: &'a [f64],
    offset: usize,
    exceptional: &'a [usize],
    median: f64,
    jump_limit: f64,
    density: f64,
    max_level: u32,
}

impl StopContext<'_> {
    fn visit(&self, p: DyadicInterval, out: &mut Vec<DyadicInterval>, scratch: &mut Vec<f64>) {
        let r = p.cells(self.grid);
        let count = self.exceptional[r.end - self.offset] - self.exceptional[r.start - self.offset];
        let selected = count as f64 > self.density * r.len() as f64 || {
            scratch.clear();
            scratch.extend_from_slice(&self.values[r.clone()]);
            (lower_median(scratch) - self.median).abs() > self.jump_limit
        };
        if selected {
            out.push(p);
        } else if p.level < self.max_level {
            for c in p.children() {
                self.visit(c, out, scratch);
            }
        }
    }
}

/// Empirical domination constant
/// `max_x |f(x) - m_f(Q0)| / sum_{Q in S, Q ∋ x} omega(Q)` (with `0/0 = 0`)
/// and the cell attaining it.
pub fn verify_domination(f: &GridFunction, family: &SparseFamily) -> Result<(f64, usize)> {
    let grid = f.grid();
    if grid.levels() != family.grid_levels {
        return Err(Error::GridMismatch {
            expected: family.grid().cells(),
            found: f.len(),
        });
    }
    let values = f.require_real()?;
    let root_median = family
        .nodes
        .first()
        .map(|n| n.median)
        .ok_or_else(|| Error::invalid("empty sparse family"))?;

    let mut sums = vec![0.0f64; grid.cells()];
    for node in &family.nodes {
        for c in node.interval().cells(grid) {
            sums[c] += node.omega;
        }
    }
    let mut best = (0.0f64, family.root.first_cell(grid));
    for c in family.root.cells(grid) {
        let num = (values[c] - root_median).abs();
        if num == 0.0 {
            continue;
        }
        let ratio = if sums[c] > 0.0 { num / sums[c] } else { f64::INFINITY };
        if ratio > best.0 {
            best = (ratio, c);
        }
    }
    Ok(best)
}
