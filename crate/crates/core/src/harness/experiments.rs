//! Per-kind evaluation of both sides of each inequality.

use rand::Rng;
use serde_json::{json, Value};

use super::corpus::{trial_rng, FunctionFamily, WeightFamily};
use super::oscillation_bound::oscillation_bound_check;
use super::record::{ratio, RatioRecord};
use super::sharpness::sharpness_records;
use super::spec::{ExperimentKind, ExperimentSpec, SPARSE_FAMILIES};
use super::two_weight::two_weight_constant;
use crate::error::{Error, Result};
use crate::grid::{CellInterval, DyadicInterval, GridFunction, TorusGrid, Weight};
use crate::maximal::{maximal_values, orlicz_maximal_values, sparse_operator, MaximalSpec};
use crate::operators::{lq_rows, OperatorProfile, OperatorSpec};
use crate::oscillation::{sparse_decompose, DecompositionConfig, SparseFamily};
use crate::par;
use crate::young::{complementary, luxemburg_of_values, YoungFunction};

/// Scale factors of the per-trial homogeneity check.
const SCALE_F: f64 = 3.7;
const SCALE_W: f64 = 0.29;
const SCALE_TOL: f64 = 1e-10;

/// `REVERSE_FS` floors `w` at this multiple of its mean.
const REVERSE_FLOOR: f64 = 1e-3;

/// Stream offsets for experiment-level randomness, far from trial indices.
const SPARSE_STREAM: u64 = 1 << 48;
const PROFILE_STREAM: u64 = 1 << 49;

/// Everything a trial evaluates.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub fs: Vec<GridFunction>,
    pub w: Weight,
    /// Second weight (`REVERSE_FS`).
    pub u: Option<Weight>,
    /// Random interval (`HOLDER`, `OSC_BOUND`).
    pub interval: Option<DyadicInterval>,
    pub cells: Option<CellInterval>,
    /// Sparse family or Young function index.
    pub variant: usize,
    pub function_family: FunctionFamily,
    pub weight_family: WeightFamily,
}

impl Inputs {
    pub fn scaled(&self, cf: f64, cw: f64) -> Result<Self> {
        let mut out = self.clone();
        out.fs = self.fs.iter().map(|f| f.scaled(cf)).collect();
        out.w = self.w.scaled(cw)?;
        out.u = self.u.as_ref().map(|u| u.scaled(cw)).transpose()?;
        Ok(out)
    }
}

fn mean(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    v.sum::<f64>() / n as f64
}

fn pow_abs(v: &[f64], p: f64) -> Vec<f64> {
    v.iter().map(|x| x.abs().powf(p)).collect()
}

/// Resolved parameters and per-experiment precomputation.
pub(crate) struct Context {
    pub spec: ExperimentSpec,
    pub grid: TorusGrid,
    pub op: OperatorSpec,
    pub maximal: MaximalSpec,
    pub a: YoungFunction,
    pub b: YoungFunction,
    pub gamma: YoungFunction,
    pub holder: Vec<(YoungFunction, YoungFunction)>,
    pub sparse: Vec<SparseFamily>,
    pub profile: Option<OperatorProfile>,
    pub params: Value,
}

impl Context {
    pub fn new(spec: &ExperimentSpec) -> Result<Self> {
        use ExperimentKind::*;
        spec.validate()?;
        let grid = TorusGrid::new(spec.levels())?;
        let op = spec.op_spec()?;
        let mut holder = Vec::new();
        if spec.kind == Holder {
            let bs = match &spec.young_b {
                Some(s) => vec![YoungFunction::parse(s)?],
                None => ["power:2", "power:3", "logpow:1", "logpow:2"]
                    .iter()
                    .map(|s| YoungFunction::parse(s))
                    .collect::<Result<_>>()?,
            };
            for b in bs {
                let bb = complementary(&b)?;
                holder.push((b, bb));
            }
        }
        let mut sparse = Vec::new();
        if spec.kind == FsSparse {
            let cfg = DecompositionConfig {
                lambda: spec.lambda(),
                ..DecompositionConfig::default()
            };
            sparse = par::map(SPARSE_FAMILIES, |i| {
                let mut rng = trial_rng(spec.seed, SPARSE_STREAM + i as u64);
                let f = FunctionFamily::generate_any(grid, &mut rng)?.1;
                sparse_decompose(&f, grid.root(), &cfg)
            })
            .into_iter()
            .collect::<Result<_>>()?;
        }
        let profile = if spec.kind == OscBound {
            let mut rng = trial_rng(spec.seed, PROFILE_STREAM);
            let corpus: Vec<GridFunction> = (0..16)
                .map(|_| FunctionFamily::generate_any(grid, &mut rng).map(|x| x.1))
                .collect::<Result<_>>()?;
            Some(OperatorProfile::measure(&op, &corpus, &[1.25, 1.5, 1.75, 2.0], super::spec::DEFAULT_R0)?)
        } else {
            None
        };
        Ok(Self {
            spec: spec.clone(),
            grid,
            op,
            maximal: spec.maximal_spec()?,
            a: spec.young_a()?,
            b: spec.young_b()?,
            gamma: spec.young_gamma()?,
            holder,
            sparse,
            profile,
            params: spec.params(),
        })
    }

    fn vector_components(&self) -> usize {
        use ExperimentKind::*;
        match self.spec.kind {
            FsVv => self.spec.components(),
            OscBound if self.spec.q.is_some() => self.spec.components(),
            Holder => 2,
            _ => 1,
        }
    }

    /// Regenerates the inputs of trial `trial`.
    pub fn inputs(&self, trial: usize) -> Result<Inputs> {
        use ExperimentKind::*;
        let spec = &self.spec;
        let grid = self.grid;
        let (stream, variant) = match spec.kind {
            FsSparse => (trial / SPARSE_FAMILIES, trial % SPARSE_FAMILIES),
            Holder => (trial, trial % self.holder.len()),
            _ => (trial, 0),
        };
        let mut rng = trial_rng(spec.seed, stream as u64);
        let weight_family = spec.families[stream % spec.families.len()];
        let mut w = weight_family.generate(grid, &mut rng)?;
        let mut fs = Vec::new();
        let mut function_family = FunctionFamily::Gaussian;
        for i in 0..self.vector_components() {
            let (fam, f) = FunctionFamily::generate_any(grid, &mut rng)?;
            if i == 0 {
                function_family = fam;
            }
            fs.push(f);
        }
        let mut u = None;
        let mut interval = None;
        let mut cells = None;
        match spec.kind {
            ReverseFs => {
                u = Some(WeightFamily::Lognormal.generate(grid, &mut rng)?);
                let floor = REVERSE_FLOOR * mean(w.values().iter().copied(), grid.cells());
                w = Weight::new(grid, w.values().iter().map(|&x| x.max(floor)).collect())?;
            }
            Holder => {
                fs = fs
                    .iter()
                    .map(|f| GridFunction::real(grid, f.abs()))
                    .collect::<Result<_>>()?;
                let n = grid.cells();
                cells = Some(CellInterval::new(rng.random_range(0..n), rng.random_range(1..=n), grid)?);
            }
            OscBound => {
                let level = rng.random_range(0..=grid.levels().saturating_sub(2));
                let index = rng.random_range(0..1usize << level);
                interval = Some(DyadicInterval::new(level, index, grid)?);
            }
            _ => {}
        }
        Ok(Inputs {
            fs,
            w,
            u,
            interval,
            cells,
            variant,
            function_family,
            weight_family,
        })
    }

    /// `(lhs, rhs)` of the kind's inequality on `inputs`.
    pub fn sides(&self, x: &Inputs) -> Result<(f64, f64)> {
        use ExperimentKind::*;
        let p = self.spec.p;
        let n = self.grid.cells();
        let w = x.w.values();
        let f = &x.fs[0];
        let fa = f.abs();
        let fp = pow_abs(&fa, p);
        let fs_weighted = |tf: &[f64], mw: &[f64]| -> (f64, f64) {
            (
                mean(tf.iter().zip(w).map(|(t, w)| t.abs().powf(p) * w), n),
                mean(fp.iter().zip(mw).map(|(a, m)| a * m), n),
            )
        };
        Ok(match self.spec.kind {
            FsM => fs_weighted(&maximal_values(&fa), &maximal_values(w)),
            FsMs | FsMk | FsMa | FsCarleson | FsWalsh | FsLacunary | FsBv | FsPoly | Duality | Sharpness => {
                let tf = self.op.magnitude(f)?;
                fs_weighted(&tf, &self.maximal.apply_values(w)?)
            }
            FsSparse => {
                let family = &self.sparse[x.variant];
                let af = sparse_operator(f, family, self.spec.r(), true)?.abs();
                let (l, r) = fs_weighted(&af, &self.maximal.apply_values(w)?);
                (l.powf(1.0 / p), r.powf(1.0 / p))
            }
            FsVv => {
                let q = self.spec.q();
                let outs: Vec<Vec<f64>> = x.fs.iter().map(|f| self.op.magnitude(f)).collect::<Result<_>>()?;
                let ins: Vec<Vec<f64>> = x.fs.iter().map(GridFunction::abs).collect();
                let tf = lq_rows(&outs, q);
                let g = pow_abs(&lq_rows(&ins, q), p);
                let mw = self.maximal.apply_values(w)?;
                (
                    mean(tf.iter().zip(w).map(|(t, w)| t.powf(p) * w), n),
                    mean(g.iter().zip(&mw).map(|(a, m)| a * m), n),
                )
            }
            MbStrong => {
                let mb = orlicz_maximal_values(&fa, &self.b)?;
                (mean(mb.iter().map(|v| v.powf(p)), n), mean(fp.iter().copied(), n))
            }
            MbFs => {
                let mb = orlicz_maximal_values(&fa, &self.b)?;
                fs_weighted(&mb, &maximal_values(w))
            }
            ReverseFs => {
                let u = x.u.as_ref().ok_or_else(|| Error::invalid("REVERSE_FS needs a second weight"))?.values();
                let maw = orlicz_maximal_values(w, &self.a)?;
                let mf = maximal_values(&fa);
                let mu = maximal_values(u);
                (
                    mean((0..n).map(|i| mf[i].powf(p) * u[i] / maw[i].powf(p - 1.0)), n),
                    mean((0..n).map(|i| fp[i] * mu[i] / w[i].powf(p - 1.0)), n),
                )
            }
            Coifman => {
                let d = self.spec.delta();
                let g: Vec<f64> = orlicz_maximal_values(w, &self.a)?.iter().map(|v| v.powf(d)).collect();
                let mg = maximal_values(&g);
                let mut best = (0.0, 1.0);
                for i in 0..n {
                    if g[i] > 0.0 && mg[i] * best.1 > best.0 * g[i] {
                        best = (mg[i], g[i]);
                    }
                }
                best
            }
            TwoWeight => {
                let tf = self.op.magnitude(f)?;
                fs_weighted(&tf, &orlicz_maximal_values(w, &self.gamma)?)
            }
            Holder => {
                let q = x.cells.ok_or_else(|| Error::invalid("HOLDER needs an interval"))?;
                let (b, bb) = &self.holder[x.variant];
                let gv = x.fs[1].abs();
                let fq: Vec<f64> = q.cells(self.grid).map(|c| fa[c]).collect();
                let gq: Vec<f64> = q.cells(self.grid).map(|c| gv[c]).collect();
                let avg = mean(fq.iter().zip(&gq).map(|(a, b)| a * b), q.len);
                (avg, luxemburg_of_values(b, &fq)? * luxemburg_of_values(bb, &gq)?)
            }
            OscBound => {
                let q = x.interval.ok_or_else(|| Error::invalid("OSC_BOUND needs an interval"))?;
                let profile = self.profile.as_ref().expect("profile measured for OSC_BOUND");
                let b = oscillation_bound_check(
                    &x.fs,
                    self.spec.q,
                    &self.op,
                    q,
                    profile,
                    self.spec.r(),
                    self.spec.lambda(),
                )?;
                (b.omega, b.bound)
            }
        })
    }

    pub fn ratio_of(&self, trial: usize, x: &Inputs) -> Result<(f64, f64, f64)> {
        let (l, r) = self.sides(x)?;
        Ok((l, r, ratio(trial, l, r)?))
    }

    /// Record parameters: the resolved spec plus per-trial provenance.
    pub fn trial_params(&self, x: &Inputs) -> Result<Value> {
        use ExperimentKind::*;
        let mut params = self.params.clone();
        let m = params.as_object_mut().expect("params object");
        if self.spec.kind != Coifman {
            m.insert("function_family".into(), json!(x.function_family.to_string()));
        }
        if !matches!(self.spec.kind, MbStrong | Holder | OscBound) {
            m.insert("weight_family".into(), json!(x.weight_family.to_string()));
        }
        match self.spec.kind {
            FsSparse => {
                m.insert("sparse_family".into(), json!(x.variant));
            }
            Holder => {
                let q = x.cells.expect("interval");
                m.insert("B".into(), json!(self.holder[x.variant].0.label()));
                m.insert("interval".into(), json!([q.start, q.len]));
            }
            OscBound => {
                let q = x.interval.expect("interval");
                m.insert("interval".into(), json!([q.level, q.index]));
                m.insert("psi".into(), json!(self.profile.as_ref().map(|p| p.psi_at(self.spec.r()))));
            }
            TwoWeight => {
                let v = Weight::new(self.grid, orlicz_maximal_values(x.w.values(), &self.gamma)?)?;
                let a = YoungFunction::inner_power(&self.gamma, self.spec.p)?;
                let c = two_weight_constant(&x.w, &v, &a, &self.b, self.spec.p, self.spec.r())?;
                m.insert("pair_constant".into(), json!(c));
            }
            _ => {}
        }
        Ok(params)
    }

    fn trial_record(&self, trial: usize) -> Result<RatioRecord> {
        let x = self.inputs(trial)?;
        let (lhs, rhs, r) = self.ratio_of(trial, &x)?;
        let (_, _, rs) = self.ratio_of(trial, &x.scaled(SCALE_F, SCALE_W)?)?;
        if (r - rs).abs() > SCALE_TOL * r.max(rs) {
            return Err(Error::InvariantBreach(format!(
                "{} trial {trial}: ratio {r} changes to {rs} under scaling",
                self.spec.kind
            )));
        }
        RatioRecord::new(self.spec.kind.name(), self.trial_params(&x)?, self.spec.seed, trial, lhs, rhs)
    }
}

/// Runs every trial of `spec`; one record per trial, in trial order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RatioRecord>> {
    match spec.kind {
        ExperimentKind::Sharpness => {
            spec.validate()?;
            sharpness_records(spec)
        }
        ExperimentKind::Duality => duality(spec),
        _ => {
            let ctx = Context::new(spec)?;
            par::map(spec.trials, |t| ctx.trial_record(t)).into_iter().collect()
        }
    }
}

/// `||Cf||_q <= (C_FS R_M)^{1/p} ||f||_q` with `C_FS` the largest FS ratio
/// against `g = |Cf|^{q-p}` and `R_M` the largest `M^k` ratio on
/// `L^{(q/p)'}`, both over the same trials. `ratio > 1` is a violation.
fn duality(spec: &ExperimentSpec) -> Result<Vec<RatioRecord>> {
    let ctx = Context::new(spec)?;
    let (p, q) = (spec.p, spec.q());
    let s = q / (q - p);
    let n = ctx.grid.cells();
    struct Pass {
        fs: f64,
        rm: f64,
        cf_q: f64,
        f_q: f64,
        x: Inputs,
    }
    let norm = |v: &[f64], e: f64| mean(v.iter().map(|x| x.abs().powf(e)), n).powf(1.0 / e);
    let passes: Vec<Pass> = par::map(spec.trials, |t| -> Result<Pass> {
        let x = ctx.inputs(t)?;
        let f = &x.fs[0];
        let cf = ctx.op.magnitude(f)?;
        let g: Vec<f64> = cf.iter().map(|v| v.powf(q - p)).collect();
        let mg = ctx.maximal.apply_values(&g)?;
        let fa = f.abs();
        let lhs = mean(cf.iter().zip(&g).map(|(c, g)| c.powf(p) * g), n);
        let rhs = mean(fa.iter().zip(&mg).map(|(f, m)| f.powf(p) * m), n);
        let fs = ratio(t, lhs, rhs)?;
        let gn = norm(&g, s);
        let rm = ratio(t, norm(&mg, s), gn)?;
        Ok(Pass {
            fs,
            rm,
            cf_q: norm(&cf, q),
            f_q: norm(&fa, q),
            x,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let c_fs = passes.iter().map(|x| x.fs).fold(0.0, f64::max);
    let r_m = passes.iter().map(|x| x.rm).fold(0.0, f64::max);
    let factor = (c_fs * r_m).powf(1.0 / p);
    passes
        .iter()
        .enumerate()
        .map(|(t, pass)| {
            let mut params = ctx.trial_params(&pass.x)?;
            let m = params.as_object_mut().expect("params object");
            m.insert("fs_constant".into(), json!(c_fs));
            m.insert("maximal_ratio".into(), json!(r_m));
            RatioRecord::new(spec.kind.name(), params, spec.seed, t, pass.cf_q, factor * pass.f_q)
        })
        .collect()
}

/// Records of a `DUALITY` run whose ratio exceeds 1.
pub fn duality_violations(records: &[RatioRecord]) -> usize {
    records.iter().filter(|r| r.ratio > 1.0).count()
}
