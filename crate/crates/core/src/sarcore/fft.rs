//! FFT helpers over row-major buffers.
//!
//! Convention everywhere in the crate: unscaled forward transform, `1/N` on
//! the inverse. Row and column passes run in parallel but each 1-D transform
//! is independent, so results do not depend on the thread count.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans of one length.
#[derive(Clone)]
pub struct FftPair {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|x| *x *= scale);
    }

    pub fn apply(&self, buf: &mut [Complex64], inverse: bool) {
        if inverse {
            self.inverse(buf)
        } else {
            self.forward(buf)
        }
    }
}

pub fn fft(buf: &mut [Complex64]) {
    FftPair::new(buf.len()).forward(buf);
}

pub fn ifft(buf: &mut [Complex64]) {
    FftPair::new(buf.len()).inverse(buf);
}

/// Transforms every row of a `n_rows x n_cols` buffer.
pub fn fft_rows(data: &mut [Complex64], n_cols: usize, inverse: bool) {
    if n_cols == 0 {
        return;
    }
    let plan = FftPair::new(n_cols);
    data.par_chunks_mut(n_cols).for_each(|row| plan.apply(row, inverse));
}

/// Transforms every column of a `n_rows x n_cols` buffer.
pub fn fft_cols(data: &mut [Complex64], n_rows: usize, n_cols: usize, inverse: bool) {
    if n_rows == 0 || n_cols == 0 {
        return;
    }
    let mut t = transpose(data, n_rows, n_cols);
    fft_rows(&mut t, n_rows, inverse);
    let back = transpose(&t, n_cols, n_rows);
    data.copy_from_slice(&back);
}

pub fn fft2(data: &mut [Complex64], n_rows: usize, n_cols: usize) {
    fft_rows(data, n_cols, false);
    fft_cols(data, n_rows, n_cols, false);
}

pub fn ifft2(data: &mut [Complex64], n_rows: usize, n_cols: usize) {
    fft_rows(data, n_cols, true);
    fft_cols(data, n_rows, n_cols, true);
}

pub fn transpose<T: Copy + Send + Sync>(data: &[T], n_rows: usize, n_cols: usize) -> Vec<T> {
    debug_assert_eq!(data.len(), n_rows * n_cols);
    let mut out = Vec::with_capacity(data.len());
    for c in 0..n_cols {
        out.extend((0..n_rows).map(|r| data[r * n_cols + c]));
    }
    out
}

pub fn next_pow2_at_least(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Signed frequency (Hz) of DFT bin `k` of an `n`-point transform sampled at
/// `rate`, in `[-rate/2, rate/2)`.
pub fn bin_frequency(k: usize, n: usize, rate: f64) -> f64 {
    let k = if k >= n.div_ceil(2) { k as f64 - n as f64 } else { k as f64 };
    let f = k * rate / n as f64;
    if f >= rate / 2.0 {
        f - rate
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(t, v)| {
                        v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn forward_matches_direct_dft() {
        let x = random(12, 1);
        let mut y = x.clone();
        fft(&mut y);
        for (a, b) in y.iter().zip(dft(&x)) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_2d() {
        let (r, c) = (12, 20);
        let x = random(r * c, 2);
        let mut y = x.clone();
        fft2(&mut y, r, c);
        ifft2(&mut y, r, c);
        let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum();
        let norm: f64 = x.iter().map(|a| a.norm_sqr()).sum();
        assert!((err / norm).sqrt() < 1e-6);
    }

    #[test]
    fn parseval_with_unscaled_forward() {
        let (r, c) = (9, 16);
        let x = random(r * c, 3);
        let mut y = x.clone();
        fft2(&mut y, r, c);
        let ex: f64 = x.iter().map(|a| a.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|a| a.norm_sqr()).sum::<f64>() / (r * c) as f64;
        assert!(((ex - ey) / ex).abs() < 1e-6);
    }

    #[test]
    fn bin_frequencies_are_signed() {
        assert_eq!(bin_frequency(0, 4, 4.0), 0.0);
        assert_eq!(bin_frequency(1, 4, 4.0), 1.0);
        assert_eq!(bin_frequency(2, 4, 4.0), -2.0);
        assert_eq!(bin_frequency(3, 4, 4.0), -1.0);
        assert_eq!(bin_frequency(2, 5, 5.0), 2.0);
        assert_eq!(bin_frequency(3, 5, 5.0), -2.0);
    }

    #[test]
    fn transpose_twice_is_identity() {
        let x: Vec<u32> = (0..15).collect();
        let t = transpose(&x, 3, 5);
        assert_eq!(t[1], 5);
        assert_eq!(transpose(&t, 5, 3), x);
    }
}
