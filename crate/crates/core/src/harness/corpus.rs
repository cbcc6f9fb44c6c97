//! Seeded generators for weights and test functions.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid, Weight};

/// Per-trial generator: stream `stream` of the ChaCha8 generator keyed by `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Weight corpus families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightFamily {
    /// iid `exp(Z)`, `Z ~ N(0,1)`.
    Lognormal,
    /// `ε^{-1} χ_I` with `|I| = ε` at a random start, zero elsewhere.
    Bump(f64),
    /// `|x - x₀|^{-a}` (torus distance from cell centres to a random node).
    Power(f64),
    /// Two bumps of random dyadic widths and amplitudes `1` and `10^{U(-2,2)}`.
    TwoBump,
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Lognormal => write!(f, "lognormal"),
            WeightFamily::Bump(e) => write!(f, "bump:{e}"),
            WeightFamily::Power(a) => write!(f, "power:{a}"),
            WeightFamily::TwoBump => write!(f, "two-bump"),
        }
    }
}

impl WeightFamily {
    /// The four default stress families.
    pub fn standard() -> Vec<WeightFamily> {
        vec![
            WeightFamily::Lognormal,
            WeightFamily::Bump(1.0 / 16.0),
            WeightFamily::Power(0.4),
            WeightFamily::TwoBump,
        ]
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad parameter in weight family {spec:?}")))
        };
        match spec.split_once(':') {
            None if spec == "lognormal" => Ok(WeightFamily::Lognormal),
            None if spec == "two-bump" => Ok(WeightFamily::TwoBump),
            Some(("bump", e)) => {
                let e = num(e)?;
                if !(e > 0.0 && e <= 1.0) {
                    return Err(Error::invalid(format!("bump width {e} outside (0, 1]")));
                }
                Ok(WeightFamily::Bump(e))
            }
            Some(("power", a)) => {
                let a = num(a)?;
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::invalid(format!("power exponent {a} outside (0, 1)")));
                }
                Ok(WeightFamily::Power(a))
            }
            _ => Err(Error::invalid(format!("unknown weight family {spec:?}"))),
        }
    }

    pub fn generate(&self, grid: TorusGrid, rng: &mut impl Rng) -> Result<Weight> {
        let n = grid.cells();
        match *self {
            WeightFamily::Lognormal => {
                let v = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).exp()).collect();
                Weight::new(grid, v)
            }
            WeightFamily::Bump(eps) => {
                let start = rng.random_range(0..n);
                bump(grid, eps, start)
            }
            WeightFamily::Power(a) => {
                let node = rng.random_range(0..n);
                let h = grid.cell_width();
                let v = (0..n)
                    .map(|j| {
                        let d = (j as f64 - node as f64 + 0.5).abs() * h;
                        d.min(1.0 - d).powf(-a)
                    })
                    .collect();
                Weight::new(grid, v)
            }
            WeightFamily::TwoBump => {
                let levels = grid.levels();
                let mut v = vec![0.0; n];
                for amp in [1.0, 10f64.powf(rng.random_range(-2.0..2.0))] {
                    let width = 1usize << rng.random_range(0..levels.saturating_sub(2).max(1));
                    let start = rng.random_range(0..n);
                    let height = amp * n as f64 / width as f64;
                    for i in 0..width {
                        v[(start + i) % n] += height;
                    }
                }
                Weight::new(grid, v)
            }
        }
    }
}

/// `ε^{-1} χ` on `max(1, round(εN))` cells from `start`.
pub fn bump(grid: TorusGrid, eps: f64, start: usize) -> Result<Weight> {
    let n = grid.cells();
    let width = ((eps * n as f64).round() as usize).clamp(1, n);
    let height = n as f64 / width as f64;
    let mut v = vec![0.0; n];
    for i in 0..width {
        v[(start + i) % n] = height;
    }
    Weight::new(grid, v)
}

/// Test-function families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionFamily {
    /// iid standard normal samples.
    Gaussian,
    /// Piecewise constant on dyadic blocks of a random level.
    Block,
    /// A few random real Fourier modes.
    Modes,
}

impl fmt::Display for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionFamily::Gaussian => "gaussian",
            FunctionFamily::Block => "block",
            FunctionFamily::Modes => "modes",
        })
    }
}

impl FunctionFamily {
    pub const ALL: [FunctionFamily; 3] = [FunctionFamily::Gaussian, FunctionFamily::Block, FunctionFamily::Modes];

    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim() {
            "gaussian" => Ok(FunctionFamily::Gaussian),
            "block" => Ok(FunctionFamily::Block),
            "modes" => Ok(FunctionFamily::Modes),
            other => Err(Error::invalid(format!("unknown function family {other:?}"))),
        }
    }

    pub fn generate(&self, grid: TorusGrid, rng: &mut impl Rng) -> Result<GridFunction> {
        let n = grid.cells();
        let v: Vec<f64> = match self {
            FunctionFamily::Gaussian => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            FunctionFamily::Block => {
                let level = rng.random_range(1..grid.levels());
                let block = n >> level;
                let vals: Vec<f64> = (0..1usize << level).map(|_| rng.sample(StandardNormal)).collect();
                (0..n).map(|j| vals[j / block]).collect()
            }
            FunctionFamily::Modes => {
                let modes: Vec<(f64, f64, f64)> = (0..4)
                    .map(|_| {
                        (
                            rng.sample::<f64, _>(StandardNormal),
                            rng.random_range(1..=(n / 4).max(1)) as f64,
                            rng.random_range(0.0..std::f64::consts::TAU),
                        )
                    })
                    .collect();
                (0..n)
                    .map(|j| {
                        let x = grid.point(j);
                        modes
                            .iter()
                            .map(|(a, k, ph)| a * (std::f64::consts::TAU * k * x + ph).cos())
                            .sum()
                    })
                    .collect()
            }
        };
        GridFunction::real(grid, v)
    }

    /// Draws a family uniformly, then a function from it.
    pub fn generate_any(grid: TorusGrid, rng: &mut impl Rng) -> Result<(FunctionFamily, GridFunction)> {
        let fam = Self::ALL[rng.random_range(0..Self::ALL.len())];
        Ok((fam, fam.generate(grid, rng)?))
    }
}

/// A named generator for the command line: any weight or function family.
pub fn generate_named(name: &str, grid: TorusGrid, seed: u64) -> Result<GridFunction> {
    let mut rng = trial_rng(seed, 0);
    if let Ok(fam) = FunctionFamily::parse(name) {
        return fam.generate(grid, &mut rng);
    }
    Ok(WeightFamily::parse(name)?.generate(grid, &mut rng)?.into_function())
}
