//! Discrete model of the torus [0,1): a uniform grid of `N = 2^J` cells,
//! piecewise-constant functions on it, dyadic intervals and wrapped intervals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform dyadic grid of `2^levels` cells on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    levels: u32,
}

impl TorusGrid {
    pub const MIN_LEVELS: u32 = 2;
    pub const MAX_LEVELS: u32 = 24;

    pub fn new(levels: u32) -> Result<Self> {
        if !(Self::MIN_LEVELS..=Self::MAX_LEVELS).contains(&levels) {
            return Err(Error::invalid(format!(
                "grid level count {levels} outside [{}, {}]",
                Self::MIN_LEVELS,
                Self::MAX_LEVELS
            )));
        }
        Ok(Self { levels })
    }

    /// Grid with `cells` cells; `cells` must be a power of two.
    pub fn with_cells(cells: usize) -> Result<Self> {
        if !cells.is_power_of_two() {
            return Err(Error::invalid(format!("{cells} cells is not a power of two")));
        }
        Self::new(cells.trailing_zeros())
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn cells(&self) -> usize {
        1usize << self.levels
    }

    /// Cell width `h = 1/N`, exact in binary floating point.
    pub fn cell_width(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    /// Left endpoint of cell `i`.
    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.cell_width()
    }

    pub fn full(&self) -> CellInterval {
        CellInterval {
            start: 0,
            len: self.cells(),
        }
    }

    pub fn root(&self) -> DyadicInterval {
        DyadicInterval { level: 0, index: 0 }
    }
}

/// Sample storage of a grid function.
#[derive(Clone, Debug, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Piecewise-constant function on a [`TorusGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: TorusGrid,
    samples: Samples,
}

impl GridFunction {
    pub fn real(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        check_len(grid, values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite value at cell {i}")));
        }
        Ok(Self {
            grid,
            samples: Samples::Real(values),
        })
    }

    pub fn complex(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        check_len(grid, values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite value at cell {i}")));
        }
        Ok(Self {
            grid,
            samples: Samples::Complex(values),
        })
    }

    /// Real function sampled at the left endpoint of every cell.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.cells()).map(|i| f(grid.point(i))).collect();
        Self::real(grid, values)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Result<Self> {
        Self::real(grid, vec![c; grid.cells()])
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.cells()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.samples, Samples::Complex(_))
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.samples {
            Samples::Real(v) => Some(v),
            Samples::Complex(_) => None,
        }
    }

    pub fn require_real(&self) -> Result<&[f64]> {
        self.as_real().ok_or(Error::ComplexUnsupported)
    }

    /// Pointwise modulus `|f|`.
    pub fn abs(&self) -> Vec<f64> {
        match &self.samples {
            Samples::Real(v) => v.iter().map(|x| x.abs()).collect(),
            Samples::Complex(v) => v.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match &self.samples {
            Samples::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Samples::Complex(v) => v.clone(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let samples = match &self.samples {
            Samples::Real(v) => Samples::Real(v.iter().map(|x| x * c).collect()),
            Samples::Complex(v) => Samples::Complex(v.iter().map(|z| z * c).collect()),
        };
        Self {
            grid: self.grid,
            samples,
        }
    }

    pub fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    /// Average of a real function over `interval`.
    pub fn interval_average(&self, interval: CellInterval) -> Result<f64> {
        interval_average(self, interval)
    }
}

fn check_len(grid: TorusGrid, len: usize) -> Result<()> {
    if len != grid.cells() {
        return Err(Error::GridMismatch {
            expected: grid.cells(),
            found: len,
        });
    }
    Ok(())
}

/// Non-negative grid function with at least one positive cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight(GridFunction);

impl Weight {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| *v < 0.0) {
            return Err(Error::validation(format!("negative weight value at cell {i}")));
        }
        if !values.iter().any(|v| *v > 0.0) {
            return Err(Error::validation("weight vanishes identically"));
        }
        GridFunction::real(grid, values).map(Self)
    }

    pub fn from_function(f: GridFunction) -> Result<Self> {
        let grid = f.grid();
        match f.samples {
            Samples::Real(v) => Self::new(grid, v),
            Samples::Complex(_) => Err(Error::ComplexUnsupported),
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.cells()])
    }

    pub fn grid(&self) -> TorusGrid {
        self.0.grid()
    }

    pub fn values(&self) -> &[f64] {
        match &self.0.samples {
            Samples::Real(v) => v,
            Samples::Complex(_) => unreachable!("weights are real"),
        }
    }

    pub fn as_function(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_function(self) -> GridFunction {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid(), self.values().iter().map(|v| v * c).collect())
    }
}

/// Dyadic interval `[k 2^-j, (k+1) 2^-j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: usize,
}

impl DyadicInterval {
    pub fn new(level: u32, index: usize, grid: TorusGrid) -> Result<Self> {
        if level > grid.levels() || index >= (1usize << level) {
            return Err(Error::invalid(format!(
                "dyadic interval (level {level}, index {index}) not on a grid of depth {}",
                grid.levels()
            )));
        }
        Ok(Self { level, index })
    }

    /// Number of cells covered on `grid`.
    pub fn cell_len(&self, grid: TorusGrid) -> usize {
        1usize << (grid.levels() - self.level)
    }

    pub fn first_cell(&self, grid: TorusGrid) -> usize {
        self.index * self.cell_len(grid)
    }

    pub fn cells(&self, grid: TorusGrid) -> std::ops::Range<usize> {
        let start = self.first_cell(grid);
        start..start + self.cell_len(grid)
    }

    pub fn measure(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn to_cells(&self, grid: TorusGrid) -> CellInterval {
        CellInterval {
            start: self.first_cell(grid),
            len: self.cell_len(grid),
        }
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.level >= self.level && (other.index >> (other.level - self.level)) == self.index
    }

    pub fn is_disjoint(&self, other: &DyadicInterval) -> bool {
        !self.contains(other) && !other.contains(self)
    }

    pub fn parent(&self) -> Option<DyadicInterval> {
        (self.level > 0).then(|| DyadicInterval {
            level: self.level - 1,
            index: self.index / 2,
        })
    }

    pub fn children(&self) -> [DyadicInterval; 2] {
        let level = self.level + 1;
        [
            DyadicInterval {
                level,
                index: 2 * self.index,
            },
            DyadicInterval {
                level,
                index: 2 * self.index + 1,
            },
        ]
    }
}

/// The two dyadic children of `q`, or nothing when `q` is a single cell.
pub fn dyadic_descendants(q: DyadicInterval, grid: TorusGrid) -> Vec<DyadicInterval> {
    if q.level >= grid.levels() {
        Vec::new()
    } else {
        q.children().to_vec()
    }
}

/// Arbitrary interval of whole cells, wrapping past the last cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellInterval {
    pub start: usize,
    pub len: usize,
}

impl CellInterval {
    pub fn new(start: usize, len: usize, grid: TorusGrid) -> Result<Self> {
        let cells = grid.cells();
        if start >= cells || len == 0 || len > cells {
            return Err(Error::InvalidInterval { start, len, cells });
        }
        Ok(Self { start, len })
    }

    pub fn validate(&self, grid: TorusGrid) -> Result<()> {
        Self::new(self.start, self.len, grid).map(|_| ())
    }

    pub fn measure(&self, grid: TorusGrid) -> f64 {
        self.len as f64 * grid.cell_width()
    }

    /// Cell indices in order from `start`, wrapping modulo `N`.
    pub fn cells(&self, grid: TorusGrid) -> impl Iterator<Item = usize> {
        let n = grid.cells();
        let start = self.start;
        (0..self.len).map(move |i| (start + i) & (n - 1))
    }

    pub fn contains(&self, cell: usize, grid: TorusGrid) -> bool {
        let n = grid.cells();
        (cell + n - self.start) % n < self.len
    }

    pub fn is_full(&self, grid: TorusGrid) -> bool {
        self.len == grid.cells()
    }

    /// Concentric dilation by `factor >= 1`.
    ///
    /// The new length is `round_half_up(factor * len)` capped at `N`. The
    /// centre is anchored at `start + floor(len/2)` and the new start is
    /// `centre - floor(new_len/2)` modulo `N`; an interval that covers the
    /// whole torus is normalised to start at cell 0.
    pub fn dilate(&self, factor: f64, grid: TorusGrid) -> Result<Self> {
        if !(factor >= 1.0) || !factor.is_finite() {
            return Err(Error::invalid(format!("dilation factor {factor} < 1")));
        }
        let n = grid.cells();
        let scaled = factor * self.len as f64;
        let new_len = if scaled >= n as f64 {
            n
        } else {
            ((scaled + 0.5).floor() as usize).clamp(1, n)
        };
        if new_len == n {
            return Ok(Self { start: 0, len: n });
        }
        let centre = self.start + self.len / 2;
        let start = (centre + n - new_len / 2) % n;
        Ok(Self {
            start,
            len: new_len,
        })
    }
}

/// Compensated prefix sums for O(1) wrapped interval sums.
///
/// Each prefix is kept as an unevaluated pair `hi + lo` (Neumaier summation)
/// so that differences of large prefixes keep close to full precision.
#[derive(Clone, Debug)]
pub struct PrefixSums {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl PrefixSums {
    pub fn new(values: &[f64]) -> Self {
        let mut hi = Vec::with_capacity(values.len() + 1);
        let mut lo = Vec::with_capacity(values.len() + 1);
        hi.push(0.0);
        lo.push(0.0);
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for &x in values {
            let t = s + x;
            if s.abs() >= x.abs() {
                c += (s - t) + x;
            } else {
                c += (x - t) + s;
            }
            s = t;
            hi.push(s);
            lo.push(c);
        }
        Self { hi, lo }
    }

    pub fn len(&self) -> usize {
        self.hi.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sum of `values[a..b]`, `a <= b <= len`.
    #[inline]
    pub fn range_sum(&self, a: usize, b: usize) -> f64 {
        (self.hi[b] - self.hi[a]) + (self.lo[b] - self.lo[a])
    }

    /// Sum over `len` cells starting at `start`, wrapping modulo the length.
    #[inline]
    pub fn wrapped_sum(&self, start: usize, len: usize) -> f64 {
        let n = self.len();
        let end = start + len;
        if end <= n {
            self.range_sum(start, end)
        } else {
            self.range_sum(start, n) + self.range_sum(0, end - n)
        }
    }

    #[inline]
    pub fn wrapped_average(&self, start: usize, len: usize) -> f64 {
        self.wrapped_sum(start, len) / len as f64
    }
}

/// `(1/|I|) * integral of f over I` for a real function, via prefix sums.
pub fn interval_average(f: &GridFunction, interval: CellInterval) -> Result<f64> {
    interval.validate(f.grid())?;
    let values = f.require_real()?;
    Ok(PrefixSums::new(values).wrapped_average(interval.start, interval.len))
}

/// Discretised integral `sum(values) * h`.
pub fn integral(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
