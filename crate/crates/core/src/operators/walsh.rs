//! Walsh–Paley system on `N = 2^J` cells.
//!
//! `w_m(j) = (-1)^{popcount(m & rev_J(j))}` where `rev_J` reverses the `J`
//! bits of the cell index; in this order the partial sums at `n = 2^k` are
//! conditional expectations onto dyadic intervals of length `2^{-k}`.

/// Reverses the low `bits` bits of `j`.
#[inline]
pub fn bit_reverse(j: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        j.reverse_bits() >> (usize::BITS - bits)
    }
}

/// `w_m(j)` as `±1.0`.
#[inline]
pub fn character(m: usize, j: usize, bits: u32) -> f64 {
    if (m & bit_reverse(j, bits)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// In-place unnormalised fast Walsh–Hadamard transform
/// `x[m] <- Σ_i x[i] (-1)^{popcount(m & i)}`.
pub fn fwht(x: &mut [f64]) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (x[i], x[i + h]);
                x[i] = a + b;
                x[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Walsh–Paley coefficients `f̂_W(m) = (1/N) Σ_j f_j w_m(j)`.
pub fn coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let bits = n.trailing_zeros();
    let mut x: Vec<f64> = (0..n).map(|i| values[bit_reverse(i, bits)]).collect();
    fwht(&mut x);
    let scale = 1.0 / n as f64;
    x.iter_mut().for_each(|v| *v *= scale);
    x
}

/// Samples from Walsh–Paley coefficients.
pub fn synthesize(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let bits = n.trailing_zeros();
    let mut x = coeffs.to_vec();
    fwht(&mut x);
    (0..n).map(|j| x[bit_reverse(j, bits)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_matches_definition() {
        let n = 32;
        let bits = 5;
        let f: Vec<f64> = (0..n).map(|j| ((j * 7 + 3) % 11) as f64 - 4.5).collect();
        let c = coefficients(&f);
        for m in 0..n {
            let direct: f64 = (0..n).map(|j| f[j] * character(m, j, bits)).sum::<f64>() / n as f64;
            assert!((c[m] - direct).abs() < 1e-12);
        }
        let back = synthesize(&c);
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn low_characters_are_coarse() {
        // w_1 is +1 on the left half, -1 on the right half.
        let row: Vec<f64> = (0..8).map(|j| character(1, j, 3)).collect();
        assert_eq!(row, vec![1., 1., 1., 1., -1., -1., -1., -1.]);
    }
}
