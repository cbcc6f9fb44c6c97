//! Discrete Fourier transform on the torus grid.
//!
//! Convention: `f̂(k) = (1/N) Σ_j f_j e^{-2πikj/N}` and
//! `f_j = Σ_k f̂(k) e^{2πikj/N}`. Index `k > N/2` stands for the signed
//! frequency `k - N`; the Nyquist index `N/2` is reported as `+N/2`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse transforms for one length.
pub struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Normalised coefficients `f̂`.
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Samples from coefficients.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.inv.process(&mut buf);
        buf
    }

    /// In-place inverse transform.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
    }
}

/// Signed frequency of index `k` on a grid of `n` cells, Nyquist as `+n/2`.
#[inline]
pub fn signed_frequency(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// `e^{2πim/N}` for `m in 0..N`.
pub fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_convention() {
        let n = 16;
        let sp = Spectral::new(n);
        let tw = twiddles(n);
        // e^{2πi·3x}
        let f: Vec<Complex64> = (0..n).map(|j| tw[(3 * j) % n]).collect();
        let c = sp.forward(&f);
        for (k, z) in c.iter().enumerate() {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((z - Complex64::new(expect, 0.0)).norm() < 1e-14);
        }
        let back = sp.inverse(&c);
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(signed_frequency(8, 16), 8);
        assert_eq!(signed_frequency(9, 16), -7);
    }
}
