//! Experiment kinds, parameters and the `key=value` config format.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use super::corpus::WeightFamily;
use crate::error::{Error, Result};
use crate::maximal::MaximalSpec;
use crate::operators::OperatorSpec;
use crate::young::YoungFunction;

macro_rules! kinds {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Which inequality an experiment measures.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum ExperimentKind { $($variant),* }

        impl ExperimentKind {
            pub const ALL: &'static [ExperimentKind] = &[$(ExperimentKind::$variant),*];

            pub fn name(&self) -> &'static str {
                match self { $(ExperimentKind::$variant => $name),* }
            }
        }

        impl FromStr for ExperimentKind {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok(ExperimentKind::$variant),)*
                    other => Err(Error::invalid(format!("unknown experiment kind {other:?}"))),
                }
            }
        }
    };
}

kinds! {
    FsM => "FS_M",
    FsMs => "FS_MS",
    FsMk => "FS_MK",
    FsMa => "FS_MA",
    FsSparse => "FS_SPARSE",
    FsCarleson => "FS_CARLESON",
    FsWalsh => "FS_WALSH",
    FsLacunary => "FS_LACUNARY",
    FsBv => "FS_BV",
    FsPoly => "FS_POLY",
    FsVv => "FS_VV",
    MbStrong => "MB_STRONG",
    MbFs => "MB_FS",
    ReverseFs => "REVERSE_FS",
    Coifman => "COIFMAN",
    TwoWeight => "TWO_WEIGHT",
    Duality => "DUALITY",
    Sharpness => "SHARPNESS",
    Holder => "HOLDER",
    OscBound => "OSC_BOUND",
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Weak-type range bound used for the default sparse exponent.
pub const DEFAULT_R0: f64 = 2.0;

/// Number of independent sparse families in `FS_SPARSE`.
pub const SPARSE_FAMILIES: usize = 20;

/// Full parameterisation of an experiment. Optional fields fall back to
/// kind-specific defaults through the accessor methods.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub p: f64,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub k: Option<u32>,
    pub delta: Option<f64>,
    pub lambda: Option<f64>,
    pub op: Option<String>,
    pub young_a: Option<String>,
    pub young_b: Option<String>,
    pub young_gamma: Option<String>,
    pub levels: Option<u32>,
    pub trials: usize,
    pub seed: u64,
    pub families: Vec<WeightFamily>,
    pub components: Option<usize>,
    pub budget: Option<usize>,
    pub eps: Option<Vec<f64>>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            p: 2.0,
            q: None,
            r: None,
            s: None,
            k: None,
            delta: None,
            lambda: None,
            op: None,
            young_a: None,
            young_b: None,
            young_gamma: None,
            levels: None,
            trials: 20,
            seed: 0,
            families: WeightFamily::standard(),
            components: None,
            budget: None,
            eps: None,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_levels(mut self, levels: u32) -> Self {
        self.levels = Some(levels);
        self
    }

    /// Grid depth `J`.
    pub fn levels(&self) -> u32 {
        use ExperimentKind::*;
        self.levels.unwrap_or(match self.kind {
            FsCarleson => 9,
            Sharpness => 10,
            FsMa | MbStrong | MbFs | TwoWeight | Holder => 6,
            FsSparse | ReverseFs | Coifman | FsPoly => 7,
            _ => 8,
        })
    }

    /// Iteration count of the controlling `M^k`.
    pub fn k(&self) -> u32 {
        self.k.unwrap_or(self.p.floor() as u32 + 1)
    }

    pub fn s(&self) -> f64 {
        self.s.unwrap_or(1.5)
    }

    pub fn q(&self) -> f64 {
        use ExperimentKind::*;
        self.q.unwrap_or(match self.kind {
            Duality => 4.0,
            _ => 2.0,
        })
    }

    /// `r`, defaulting to `r_p = min(r0, (p+2)/3)` (and `4/3` for the pair test).
    pub fn r(&self) -> f64 {
        self.r.unwrap_or(match self.kind {
            ExperimentKind::TwoWeight => 4.0 / 3.0,
            _ => DEFAULT_R0.min((self.p + 2.0) / 3.0),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(0.5)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(0.125)
    }

    pub fn components(&self) -> usize {
        self.components.unwrap_or(3)
    }

    pub fn budget(&self) -> usize {
        self.budget.unwrap_or(60)
    }

    /// Bump widths for the sharpness probe, `2^{-3} .. 2^{-9}` by default.
    pub fn eps(&self) -> Vec<f64> {
        self.eps
            .clone()
            .unwrap_or_else(|| (3..=9).map(|e| 2f64.powi(-e)).collect())
    }

    pub fn op_spec(&self) -> Result<OperatorSpec> {
        use ExperimentKind::*;
        let default = match self.kind {
            FsMk | Sharpness => "hilbert",
            FsWalsh => "walsh",
            FsLacunary => "lacunary:2,1",
            FsBv => "bvmult:8,0",
            FsPoly => "polycarleson:2,3",
            _ => "carleson",
        };
        let spec = OperatorSpec::parse(self.op.as_deref().unwrap_or(default))?;
        if self.kind == FsCarleson && spec != OperatorSpec::Carleson {
            return Err(Error::invalid("FS_CARLESON always uses the carleson operator"));
        }
        Ok(spec)
    }

    /// Controlling maximal operator on the right-hand side of FS-type kinds.
    pub fn maximal_spec(&self) -> Result<MaximalSpec> {
        use ExperimentKind::*;
        Ok(match self.kind {
            FsM | MbFs => MaximalSpec::Hl,
            FsMs => MaximalSpec::Power(self.s()),
            FsMa | FsSparse => MaximalSpec::Orlicz(self.young_a()?),
            _ => MaximalSpec::Iterated(self.k()),
        })
    }

    /// `A`: defaults to `t log^{⌊p⌋}(1+t)` (`logpow:2` for `REVERSE_FS`,
    /// `logpow:1` for `COIFMAN`).
    pub fn young_a(&self) -> Result<YoungFunction> {
        use ExperimentKind::*;
        match &self.young_a {
            Some(s) => YoungFunction::parse(s),
            None => match self.kind {
                ReverseFs => YoungFunction::log_power(2.0),
                Coifman => YoungFunction::log_power(1.0),
                _ => YoungFunction::log_power(self.p.floor()),
            },
        }
    }

    /// `B`: `logpow:1` for the maximal battery, `t^{(p/r)'+0.1}` for the pair test.
    pub fn young_b(&self) -> Result<YoungFunction> {
        match &self.young_b {
            Some(s) => YoungFunction::parse(s),
            None => match self.kind {
                ExperimentKind::TwoWeight => {
                    let pr = self.p / self.r();
                    YoungFunction::power(pr / (pr - 1.0) + 0.1)
                }
                _ => YoungFunction::log_power(1.0),
            },
        }
    }

    /// `Γ`: `logpow:1`.
    pub fn young_gamma(&self) -> Result<YoungFunction> {
        match &self.young_gamma {
            Some(s) => YoungFunction::parse(s),
            None => YoungFunction::log_power(1.0),
        }
    }

    /// Checks every parameter the kind uses. Runs before any trial.
    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        let bad = |m: String| Err(Error::validation(m));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p = {} must exceed 1", self.p));
        }
        let j = self.levels();
        if !(3..=14).contains(&j) {
            return bad(format!("J = {j} outside 3..=14"));
        }
        if self.families.is_empty() {
            return bad("at least one weight family is required".into());
        }
        if self.k() == 0 {
            return bad("k must be at least 1".into());
        }
        if self.kind == FsMs && !(self.s() > 1.0 && self.s() < 2.0) {
            return bad(format!("s = {} must lie in (1, 2)", self.s()));
        }
        let r = self.r();
        match self.kind {
            FsSparse if !(r > 1.0 && r < (self.p + 1.0) / 2.0) => {
                return bad(format!("r = {r} must lie in (1, (p+1)/2)"));
            }
            OscBound if !(r > 1.0 && r <= DEFAULT_R0) => {
                return bad(format!("r = {r} must lie in (1, r0 = {DEFAULT_R0}]"));
            }
            TwoWeight if !(r > 1.0 && r < DEFAULT_R0.min(self.p)) => {
                return bad(format!("r = {r} must lie in (1, min(r0, p))"));
            }
            _ => {}
        }
        if !(self.delta() > 0.0 && self.delta() < 1.0) {
            return bad(format!("delta = {} must lie in (0, 1)", self.delta()));
        }
        if !(self.lambda() > 0.0 && self.lambda() < 1.0) {
            return bad(format!("lambda = {} must lie in (0, 1)", self.lambda()));
        }
        if !(self.q() >= 1.0) {
            return bad(format!("q = {} must be at least 1", self.q()));
        }
        if self.kind == Duality && !(self.q() > self.p && self.q().is_finite()) {
            return bad(format!("duality needs q > p (q = {}, p = {})", self.q(), self.p));
        }
        if self.components() == 0 {
            return bad("components must be at least 1".into());
        }
        if self.budget() == 0 {
            return bad("budget must be at least 1".into());
        }
        let eps = self.eps();
        if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad("eps must be a strictly decreasing list in (0, 1]".into());
        }
        self.op_spec()?;
        self.maximal_spec()?;
        self.young_a()?;
        self.young_b()?;
        self.young_gamma()?;
        Ok(())
    }

    /// Resolved parameters for the records, keys sorted.
    pub fn params(&self) -> Value {
        use ExperimentKind::*;
        let mut m = Map::new();
        m.insert("p".into(), json!(self.p));
        m.insert("J".into(), json!(self.levels()));
        m.insert("trials".into(), json!(self.trials));
        let fams: Vec<String> = self.families.iter().map(ToString::to_string).collect();
        m.insert("families".into(), json!(fams.join(",")));
        let op = self.op_spec().map(|o| o.to_string()).unwrap_or_default();
        let maximal = self.maximal_spec().map(|o| o.to_string()).unwrap_or_default();
        match self.kind {
            FsM => {
                m.insert("maximal".into(), json!(maximal));
            }
            FsMs | FsMk | FsMa | FsCarleson | FsWalsh | FsLacunary | FsBv | FsPoly => {
                m.insert("op".into(), json!(op));
                m.insert("maximal".into(), json!(maximal));
            }
            FsSparse => {
                m.insert("r".into(), json!(self.r()));
                m.insert("maximal".into(), json!(maximal));
                m.insert("sparse_families".into(), json!(SPARSE_FAMILIES));
            }
            FsVv => {
                m.insert("op".into(), json!(op));
                m.insert("maximal".into(), json!(maximal));
                m.insert("q".into(), json!(self.q()));
                m.insert("components".into(), json!(self.components()));
            }
            MbStrong | MbFs => {
                m.insert("B".into(), json!(self.young_b().map(|y| y.label().to_string()).unwrap_or_default()));
            }
            ReverseFs | Coifman => {
                m.insert("A".into(), json!(self.young_a().map(|y| y.label().to_string()).unwrap_or_default()));
                if self.kind == Coifman {
                    m.insert("delta".into(), json!(self.delta()));
                }
            }
            TwoWeight => {
                m.insert("op".into(), json!(op));
                m.insert("r".into(), json!(self.r()));
                m.insert("Gamma".into(), json!(self.young_gamma().map(|y| y.label().to_string()).unwrap_or_default()));
                m.insert("B".into(), json!(self.young_b().map(|y| y.label().to_string()).unwrap_or_default()));
            }
            Duality => {
                m.insert("op".into(), json!(op));
                m.insert("maximal".into(), json!(maximal));
                m.insert("q".into(), json!(self.q()));
            }
            Sharpness => {
                m.insert("op".into(), json!(op));
                m.insert("k_low".into(), json!(self.p.floor() as u32));
                m.insert("k_high".into(), json!(self.p.floor() as u32 + 1));
                m.insert("eps".into(), json!(self.eps()));
                m.insert("budget".into(), json!(self.budget()));
            }
            Holder => {}
            OscBound => {
                m.insert("op".into(), json!(op));
                m.insert("r".into(), json!(self.r()));
                m.insert("lambda".into(), json!(self.lambda()));
                if let Some(q) = self.q {
                    m.insert("q".into(), json!(q));
                    m.insert("components".into(), json!(self.components()));
                }
            }
        }
        Value::Object(m)
    }

    /// Parses a `key = value` config; `#` starts a comment.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key=value, found {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "kind" {
                kind = Some(value.parse::<ExperimentKind>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?);
            } else {
                pairs.push((i + 1, key.to_string(), value.to_string()));
            }
        }
        let kind = kind.ok_or_else(|| Error::validation("config lacks a kind"))?;
        let mut spec = Self::new(kind);
        for (line, key, value) in pairs {
            spec.set(&key, &value).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(spec)
    }

    /// Sets one parameter from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::invalid(format!("bad value {v:?} for {key}")))
        }
        match key {
            "p" => self.p = num(key, value)?,
            "q" => {
                self.q = Some(if value == "inf" { f64::INFINITY } else { num(key, value)? })
            }
            "r" => self.r = Some(num(key, value)?),
            "s" => self.s = Some(num(key, value)?),
            "k" => self.k = Some(num(key, value)?),
            "delta" => self.delta = Some(num(key, value)?),
            "lambda" => self.lambda = Some(num(key, value)?),
            "op" => self.op = Some(value.to_string()),
            "A" | "young" => self.young_a = Some(value.to_string()),
            "B" => self.young_b = Some(value.to_string()),
            "Gamma" => self.young_gamma = Some(value.to_string()),
            "J" => self.levels = Some(num(key, value)?),
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "families" => {
                self.families = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(WeightFamily::parse)
                    .collect::<Result<_>>()?
            }
            "components" => self.components = Some(num(key, value)?),
            "budget" => self.budget = Some(num(key, value)?),
            "eps" => {
                self.eps = Some(
                    value
                        .split(',')
                        .map(|s| num::<f64>(key, s.trim()))
                        .collect::<Result<_>>()?,
                )
            }
            _ => return Err(Error::invalid(format!("unknown parameter {key:?}"))),
        }
        Ok(())
    }
}
