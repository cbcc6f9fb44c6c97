//! Modulated singular operators on the discrete torus.

pub mod fourier;
pub mod walsh;

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Samples};
use crate::par;
use fourier::{signed_frequency, twiddles, Spectral};

#[inline]
fn hilbert_multiplier(k: usize, n: usize) -> Complex64 {
    if k == 0 || 2 * k == n {
        Complex64::new(0.0, 0.0)
    } else if k < n / 2 {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::new(0.0, 1.0)
    }
}

fn with_shape(f: &GridFunction, z: Vec<Complex64>) -> Result<GridFunction> {
    match f.samples() {
        Samples::Real(_) => GridFunction::real(f.grid(), z.into_iter().map(|v| v.re).collect()),
        Samples::Complex(_) => GridFunction::complex(f.grid(), z),
    }
}

fn magnitude(f: &GridFunction, values: Vec<f64>) -> Result<GridFunction> {
    GridFunction::real(f.grid(), values)
}

/// `Hf` via the multiplier `-i sign(k)` (zero at DC and Nyquist). Real input
/// gives real output.
pub fn hilbert_transform(f: &GridFunction) -> Result<GridFunction> {
    let n = f.len();
    let sp = Spectral::new(n);
    let mut c = sp.forward(&f.to_complex());
    for (k, z) in c.iter_mut().enumerate() {
        *z *= hilbert_multiplier(k, n);
    }
    with_shape(f, sp.inverse(&c))
}

/// `Cf(x) = max_{0 <= K <= N/2} |Σ_{|k| <= K} f̂(k) e^{2πikx}|`, accumulated one
/// frequency shell at a time; the Nyquist mode enters once, in the last shell.
pub fn carleson(f: &GridFunction) -> Result<GridFunction> {
    let n = f.len();
    let sp = Spectral::new(n);
    let c = sp.forward(&f.to_complex());
    let tw = twiddles(n);
    let out = par::map(n, |j| {
        let mut s = c[0];
        let mut best = s.norm();
        for k in 1..n / 2 {
            s += c[k] * tw[(k * j) % n] + c[n - k] * tw[(n - (k * j) % n) % n];
            best = best.max(s.norm());
        }
        s += c[n / 2] * tw[(n / 2 * j) % n];
        best.max(s.norm())
    });
    magnitude(f, out)
}

/// `max_{α ∈ freqs} |H(e^{2πiαx} f)|` per cell.
pub fn modulated_sup(f: &GridFunction, freqs: &[i64]) -> Result<GridFunction> {
    if freqs.is_empty() {
        return Err(Error::invalid("modulation set must be nonempty"));
    }
    let n = f.len();
    let sp = Spectral::new(n);
    let c = sp.forward(&f.to_complex());
    let out = par::max_fold(
        freqs.len(),
        n,
        || vec![Complex64::new(0.0, 0.0); n],
        |t, buf, acc| {
            let shift = freqs[t].rem_euclid(n as i64) as usize;
            for (k, z) in buf.iter_mut().enumerate() {
                *z = c[(k + n - shift) % n] * hilbert_multiplier(k, n);
            }
            sp.inverse_in_place(buf);
            for (a, z) in acc.iter_mut().zip(buf.iter()) {
                let v = z.norm();
                if v > *a {
                    *a = v;
                }
            }
        },
    );
    magnitude(f, out)
}

/// All integer frequencies `-N/2..=N/2`.
pub fn all_frequencies(n: usize) -> Vec<i64> {
    let h = (n / 2) as i64;
    (-h..=h).collect()
}

/// `max_{1 <= n <= N} |Σ_{m<n} f̂_W(m) w_m(x)|` in Walsh–Paley order.
pub fn walsh_carleson(f: &GridFunction) -> Result<GridFunction> {
    let values = f.require_real()?;
    let n = values.len();
    let bits = n.trailing_zeros();
    let c = walsh::coefficients(values);
    let out = par::map(n, |j| {
        let r = walsh::bit_reverse(j, bits);
        let mut s = 0.0f64;
        let mut best = 0.0f64;
        for (m, cm) in c.iter().enumerate() {
            if (m & r).count_ones() % 2 == 0 {
                s += cm;
            } else {
                s -= cm;
            }
            best = best.max(s.abs());
        }
        best
    });
    magnitude(f, out)
}

/// `λ_0 = base`, `λ_{j+1} = ceil(θ λ_j)`, all `<= max`.
pub fn lacunary_sequence(theta: f64, base: i64, max: i64) -> Result<Vec<i64>> {
    if !(theta > 1.0 && theta.is_finite()) || base < 1 {
        return Err(Error::validation(format!(
            "lacunary sequence needs theta > 1 and base >= 1 (got {theta}, {base})"
        )));
    }
    let mut out = Vec::new();
    let mut l = base;
    while l <= max {
        out.push(l);
        l = ((theta * l as f64).ceil() as i64).max(l + 1);
    }
    if out.is_empty() {
        return Err(Error::validation(format!("base {base} exceeds the largest frequency {max}")));
    }
    Ok(out)
}

/// Checks that `seq` is strictly increasing with `λ_{j+1} >= θ λ_j`.
pub fn check_lacunary(seq: &[i64], theta: f64) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::validation("lacunary sequence is empty"));
    }
    if !(theta > 1.0) {
        return Err(Error::validation(format!("lacunarity ratio {theta} must exceed 1")));
    }
    for w in seq.windows(2) {
        if w[1] <= w[0] || (w[1] as f64) < theta * w[0] as f64 {
            return Err(Error::validation(format!(
                "{} -> {} violates lacunarity ratio {theta}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// `max_{λ ∈ Λ} |H(e^{2πiλx} f)|`.
pub fn lacunary_carleson(f: &GridFunction, seq: &[i64], theta: f64) -> Result<GridFunction> {
    check_lacunary(seq, theta)?;
    modulated_sup(f, seq)
}

/// Piecewise-constant frequency multiplier: `levels[i]` on
/// `cuts[i-1] <= k < cuts[i]` (signed frequencies, Nyquist as `+N/2`).
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierBV {
    pub cuts: Vec<i64>,
    pub levels: Vec<f64>,
}

impl MultiplierBV {
    pub fn new(cuts: Vec<i64>, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != cuts.len() + 1 {
            return Err(Error::invalid("a multiplier needs one more level than cuts"));
        }
        if cuts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("multiplier cuts must be strictly increasing"));
        }
        if levels.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("multiplier levels must be finite"));
        }
        Ok(Self { cuts, levels })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            cuts: Vec::new(),
            levels: vec![c],
        }
    }

    #[inline]
    pub fn value(&self, k: i64) -> f64 {
        self.levels[self.cuts.partition_point(|&c| c <= k)]
    }

    /// `sup |m| + total variation`.
    pub fn bv_norm(&self) -> f64 {
        let sup = self.levels.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tv: f64 = self.levels.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        sup + tv
    }

    pub fn normalized(&self) -> Self {
        let b = self.bv_norm();
        if b <= 1.0 || b == 0.0 {
            return self.clone();
        }
        Self {
            cuts: self.cuts.clone(),
            levels: self.levels.iter().map(|v| v / b).collect(),
        }
    }

    /// Random multiplier with 1 to 4 cuts inside `[-N/2, N/2]`, normalised.
    pub fn random(rng: &mut impl Rng, n: usize) -> Self {
        let h = (n / 2) as i64;
        let count = rng.random_range(1..=4usize);
        let mut cuts: Vec<i64> = (0..count).map(|_| rng.random_range(-h + 1..=h)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let levels = (0..=cuts.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self { cuts, levels }.normalized()
    }
}

/// Deterministic family of `count` random normalised multipliers.
pub fn random_bv_family(count: usize, seed: u64, n: usize) -> Vec<MultiplierBV> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| MultiplierBV::random(&mut rng, n)).collect()
}

/// `max_{m ∈ family} |(m f̂)^∨|`.
pub fn bv_maximal_multiplier(f: &GridFunction, family: &[MultiplierBV]) -> Result<GridFunction> {
    if family.is_empty() {
        return Err(Error::invalid("multiplier family must be nonempty"));
    }
    for (i, m) in family.iter().enumerate() {
        if m.bv_norm() > 1.0 + 1e-12 {
            return Err(Error::validation(format!(
                "multiplier {i} has bv norm {} > 1",
                m.bv_norm()
            )));
        }
    }
    let n = f.len();
    let sp = Spectral::new(n);
    let c = sp.forward(&f.to_complex());
    let out = par::max_fold(
        family.len(),
        n,
        || vec![Complex64::new(0.0, 0.0); n],
        |t, buf, acc| {
            for (k, z) in buf.iter_mut().enumerate() {
                *z = c[k] * family[t].value(signed_frequency(k, n));
            }
            sp.inverse_in_place(buf);
            for (a, z) in acc.iter_mut().zip(buf.iter()) {
                let v = z.norm();
                if v > *a {
                    *a = v;
                }
            }
        },
    );
    magnitude(f, out)
}

/// Every coefficient vector in `{-g..=g}^d`.
pub fn polynomial_lattice(d: usize, g: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-g..=g).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

/// `max_P |H(e^{iP(x)} f)|` over `P(x) = 2π Σ_{i=1..d} c_i x^i` with
/// coefficients from `{-g..=g}`; a lower bound for the supremum over all
/// real polynomials.
pub fn polynomial_carleson(f: &GridFunction, d: usize, g: i64) -> Result<GridFunction> {
    if d == 0 || g < 0 {
        return Err(Error::invalid("polynomial Carleson needs degree >= 1 and grid >= 0"));
    }
    let n = f.len();
    let grid = f.grid();
    let sp = Spectral::new(n);
    let fz = f.to_complex();
    let polys = polynomial_lattice(d, g);
    let out = par::max_fold(
        polys.len(),
        n,
        || (),
        |t, _, acc| {
            let coeffs = &polys[t];
            let modulated: Vec<Complex64> = (0..n)
                .map(|j| {
                    let x = grid.point(j);
                    let mut phase = 0.0;
                    let mut xp = 1.0;
                    for &c in coeffs {
                        xp *= x;
                        phase += c as f64 * xp;
                    }
                    fz[j] * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
                })
                .collect();
            let mut spec = sp.forward(&modulated);
            for (k, z) in spec.iter_mut().enumerate() {
                *z *= hilbert_multiplier(k, n);
            }
            sp.inverse_in_place(&mut spec);
            for (a, z) in acc.iter_mut().zip(&spec) {
                let v = z.norm();
                if v > *a {
                    *a = v;
                }
            }
        },
    );
    magnitude(f, out)
}

/// Per-cell `ℓ^q` norm of the magnitudes; `q = ∞` gives the pointwise max.
pub fn vector_lq(fs: &[GridFunction], q: f64) -> Result<GridFunction> {
    let first = fs.first().ok_or_else(|| Error::invalid("vector_lq needs at least one function"))?;
    if !(q >= 1.0) {
        return Err(Error::invalid(format!("q = {q} must be at least 1")));
    }
    for g in &fs[1..] {
        first.ensure_same_grid(g)?;
    }
    let mags: Vec<Vec<f64>> = fs.iter().map(GridFunction::abs).collect();
    Ok(GridFunction::real(first.grid(), lq_rows(&mags, q))?)
}

/// Per-index `ℓ^q` combination of equally long magnitude rows.
pub fn lq_rows(rows: &[Vec<f64>], q: f64) -> Vec<f64> {
    let n = rows[0].len();
    (0..n)
        .map(|i| {
            if q.is_infinite() {
                rows.iter().fold(0.0f64, |a, r| a.max(r[i]))
            } else if q == 2.0 {
                rows.iter().map(|r| r[i] * r[i]).sum::<f64>().sqrt()
            } else {
                rows.iter().map(|r| r[i].powf(q)).sum::<f64>().powf(1.0 / q)
            }
        })
        .collect()
}

/// An operator selected by name.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    Hilbert,
    Carleson,
    Walsh,
    Lacunary { theta: f64, base: i64 },
    BvMult { count: usize, seed: u64 },
    PolyCarleson { degree: usize, grid: i64 },
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::Hilbert => write!(f, "hilbert"),
            OperatorSpec::Carleson => write!(f, "carleson"),
            OperatorSpec::Walsh => write!(f, "walsh"),
            OperatorSpec::Lacunary { theta, base } => write!(f, "lacunary:{theta},{base}"),
            OperatorSpec::BvMult { count, seed } => write!(f, "bvmult:{count},{seed}"),
            OperatorSpec::PolyCarleson { degree, grid } => write!(f, "polycarleson:{degree},{grid}"),
        }
    }
}

impl OperatorSpec {
    /// Parses `hilbert`, `carleson`, `walsh`, `lacunary:θ,base`,
    /// `bvmult:K,seed` or `polycarleson:d,grid`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let bad = || Error::invalid(format!("unknown operator spec {spec:?}"));
        let (name, args) = match spec.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (spec, None),
        };
        let pair = |args: Option<&str>| -> Result<(String, String)> {
            let (a, b) = args.and_then(|s| s.split_once(',')).ok_or_else(bad)?;
            Ok((a.trim().to_string(), b.trim().to_string()))
        };
        match (name, args) {
            ("hilbert", None) => Ok(OperatorSpec::Hilbert),
            ("carleson", None) => Ok(OperatorSpec::Carleson),
            ("walsh", None) => Ok(OperatorSpec::Walsh),
            ("lacunary", a) => {
                let (t, b) = pair(a)?;
                let theta: f64 = t.parse().map_err(|_| bad())?;
                let base: i64 = b.parse().map_err(|_| bad())?;
                if !(theta > 1.0) || base < 1 {
                    return Err(Error::invalid(format!("lacunary needs theta > 1, base >= 1: {spec:?}")));
                }
                Ok(OperatorSpec::Lacunary { theta, base })
            }
            ("bvmult", a) => {
                let (k, s) = pair(a)?;
                let count: usize = k.parse().map_err(|_| bad())?;
                if count == 0 {
                    return Err(Error::invalid("bvmult needs at least one multiplier"));
                }
                Ok(OperatorSpec::BvMult {
                    count,
                    seed: s.parse().map_err(|_| bad())?,
                })
            }
            ("polycarleson", a) => {
                let (d, g) = pair(a)?;
                let degree: usize = d.parse().map_err(|_| bad())?;
                let grid: i64 = g.parse().map_err(|_| bad())?;
                if degree == 0 || grid < 0 {
                    return Err(Error::invalid(format!("polycarleson needs d >= 1, grid >= 0: {spec:?}")));
                }
                Ok(OperatorSpec::PolyCarleson { degree, grid })
            }
            _ => Err(bad()),
        }
    }

    /// `Tf`: signed for the Hilbert transform, a magnitude otherwise.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        match self {
            OperatorSpec::Hilbert => hilbert_transform(f),
            OperatorSpec::Carleson => carleson(f),
            OperatorSpec::Walsh => walsh_carleson(f),
            OperatorSpec::Lacunary { theta, base } => {
                let seq = lacunary_sequence(*theta, *base, (f.len() / 4).max(1) as i64)?;
                lacunary_carleson(f, &seq, *theta)
            }
            OperatorSpec::BvMult { count, seed } => {
                bv_maximal_multiplier(f, &random_bv_family(*count, *seed, f.len()))
            }
            OperatorSpec::PolyCarleson { degree, grid } => polynomial_carleson(f, *degree, *grid),
        }
    }

    /// `|Tf|` per cell.
    pub fn magnitude(&self, f: &GridFunction) -> Result<Vec<f64>> {
        Ok(self.apply(f)?.abs())
    }
}

/// `sup_λ λ |{|v| > λ}|^{1/r}` on the uniform probability grid.
pub fn weak_norm(values: &[f64], r: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, x)| x * ((i + 1) as f64 / n).powf(1.0 / r))
        .fold(0.0, f64::max)
}

/// `(mean |v|^r)^{1/r}`.
pub fn lr_norm(values: &[f64], r: f64) -> f64 {
    (values.iter().map(|x| x.abs().powf(r)).sum::<f64>() / values.len() as f64).powf(1.0 / r)
}

/// Weak-type growth of a maximally modulated operator.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OperatorProfile {
    pub name: String,
    pub r0: f64,
    /// `(r, ψ(r))` sorted by `r`, `ψ` nonincreasing.
    pub psi: Vec<(f64, f64)>,
    /// Kernel Hölder exponent.
    pub delta: f64,
}

impl OperatorProfile {
    /// Measures `ψ(r) = sup_f ||Tf||_{r,∞} / ||f||_r` over `corpus` at each
    /// `r` in `rs`, then replaces the table by its nonincreasing envelope.
    pub fn measure(
        op: &OperatorSpec,
        corpus: &[GridFunction],
        rs: &[f64],
        r0: f64,
    ) -> Result<Self> {
        if !(r0 > 1.0) {
            return Err(Error::invalid(format!("r0 = {r0} must exceed 1")));
        }
        let mut rs: Vec<f64> = rs.iter().copied().filter(|&r| r > 1.0 && r <= r0).collect();
        rs.sort_by(f64::total_cmp);
        if rs.is_empty() {
            return Err(Error::invalid("profile needs at least one r in (1, r0]"));
        }
        let outputs: Vec<(Vec<f64>, &GridFunction)> = corpus
            .iter()
            .map(|f| Ok((op.magnitude(f)?, f)))
            .collect::<Result<_>>()?;
        let mut psi: Vec<(f64, f64)> = rs
            .iter()
            .map(|&r| {
                let best = outputs
                    .iter()
                    .map(|(tf, f)| {
                        let d = lr_norm(&f.abs(), r);
                        if d > 0.0 {
                            weak_norm(tf, r) / d
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max);
                (r, best.max(f64::MIN_POSITIVE))
            })
            .collect();
        for i in (0..psi.len().saturating_sub(1)).rev() {
            psi[i].1 = psi[i].1.max(psi[i + 1].1);
        }
        Ok(Self {
            name: op.to_string(),
            r0,
            psi,
            delta: 1.0,
        })
    }

    /// `ψ(r)` from the table entry with the largest tabulated `r' <= r`
    /// (the first entry when `r` is below the table).
    pub fn psi_at(&self, r: f64) -> f64 {
        let i = self.psi.partition_point(|&(x, _)| x <= r);
        self.psi[i.saturating_sub(1)].1
    }
}
