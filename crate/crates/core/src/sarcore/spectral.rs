//! Assignment of DFT bins to contiguous, equal-width sub-bands.
//!
//! The processed band `[center - bw/2, center + bw/2)` is split into
//! `n_bands` equal intervals. Bins outside the processed band (the guard
//! region between the band edges and the folding frequency opposite the
//! centre) are folded into the nearest outer band, so every bin belongs to
//! exactly one band and the bands always partition the full spectrum.

use crate::error::{Result, SarError};
use crate::sarcore::fft::bin_frequency;

#[derive(Debug, Clone, PartialEq)]
pub struct BandPartition {
    /// Band index of every DFT bin, in natural FFT order.
    pub assignment: Vec<usize>,
    /// `n_bands + 1` ascending edges of the processed band (Hz).
    pub band_edges_hz: Vec<f64>,
    pub sample_rate_hz: f64,
}

impl BandPartition {
    pub fn new(
        n_bins: usize,
        sample_rate_hz: f64,
        center_hz: f64,
        bandwidth_hz: f64,
        n_bands: usize,
    ) -> Result<Self> {
        if n_bands == 0 || n_bands > n_bins {
            return Err(SarError::InvalidArgument(format!(
                "cannot split {n_bins} bins into {n_bands} bands"
            )));
        }
        if !(bandwidth_hz > 0.0 && bandwidth_hz <= sample_rate_hz * (1.0 + 1e-12)) {
            return Err(SarError::InvalidArgument(format!(
                "processed bandwidth {bandwidth_hz} Hz outside (0, {sample_rate_hz}]"
            )));
        }
        let width = bandwidth_hz / n_bands as f64;
        let assignment = (0..n_bins)
            .map(|k| {
                let d = wrap_frequency(bin_frequency(k, n_bins, sample_rate_hz) - center_hz, sample_rate_hz);
                let pos = ((d + bandwidth_hz / 2.0) / width + 1e-9).floor();
                pos.clamp(0.0, (n_bands - 1) as f64) as usize
            })
            .collect();
        let band_edges_hz = (0..=n_bands)
            .map(|i| center_hz - bandwidth_hz / 2.0 + i as f64 * width)
            .collect();
        Ok(BandPartition {
            assignment,
            band_edges_hz,
            sample_rate_hz,
        })
    }

    pub fn n_bands(&self) -> usize {
        self.band_edges_hz.len() - 1
    }

    pub fn band_centers_hz(&self) -> Vec<f64> {
        self.band_edges_hz.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Indicator mask over bins for one band.
    pub fn mask(&self, band: usize) -> Vec<bool> {
        self.assignment.iter().map(|&b| b == band).collect()
    }
}

/// Energy-apportioning weights `w[band][bin]` for the same bands as
/// [`BandPartition`], treating every bin as an interval one bin wide: a bin
/// straddling a band edge is shared in proportion to its overlap. Guard
/// regions extend the outer bands to the folding frequency, so the weights of
/// every bin sum to one.
pub fn fractional_band_weights(
    n_bins: usize,
    sample_rate_hz: f64,
    center_hz: f64,
    bandwidth_hz: f64,
    n_bands: usize,
) -> Result<Vec<Vec<f64>>> {
    BandPartition::new(n_bins, sample_rate_hz, center_hz, bandwidth_hz, n_bands)?;
    let half = sample_rate_hz / 2.0;
    let df = sample_rate_hz / n_bins as f64;
    let width = bandwidth_hz / n_bands as f64;
    // band intervals relative to the centre, outer ones reaching the fold
    let lo = |b: usize| if b == 0 { -half } else { -bandwidth_hz / 2.0 + b as f64 * width };
    let hi = |b: usize| if b + 1 == n_bands { half } else { -bandwidth_hz / 2.0 + (b + 1) as f64 * width };
    let mut w = vec![vec![0.0; n_bins]; n_bands];
    for k in 0..n_bins {
        let d = wrap_frequency(bin_frequency(k, n_bins, sample_rate_hz) - center_hz, sample_rate_hz);
        let (a, b) = (d - df / 2.0, d + df / 2.0);
        // split the bin interval where it crosses the fold
        let mut pieces = vec![(a.max(-half), b.min(half))];
        if a < -half {
            pieces.push((a + sample_rate_hz, half));
        }
        if b > half {
            pieces.push((-half, b - sample_rate_hz));
        }
        for (pa, pb) in pieces {
            for (band, wb) in w.iter_mut().enumerate() {
                let overlap = pb.min(hi(band)) - pa.max(lo(band));
                if overlap > 0.0 {
                    wb[k] += overlap / df;
                }
            }
        }
    }
    Ok(w)
}

/// Maps a frequency into `[-rate/2, rate/2)`.
pub fn wrap_frequency(f: f64, rate: f64) -> f64 {
    (f + rate / 2.0).rem_euclid(rate) - rate / 2.0
}
