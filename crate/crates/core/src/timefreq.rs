//! Local 2-D spectral analysis of a scatterer's range/Doppler behaviour.
//!
//! A square patch is transformed with a 2-D FFT and its power is integrated
//! over a grid of range-frequency by Doppler bands. Range bands cover the
//! chirp bandwidth around baseband, Doppler bands the processed bandwidth
//! around the centroid. In the default disjoint tiling the bands partition
//! the patch spectrum exactly (a bin straddling a band edge is shared by
//! overlap), so energies sum to the patch energy.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SarError};
use crate::sarcore::fft::{bin_frequency, fft2};
use crate::sarcore::spectral::{fractional_band_weights, wrap_frequency, BandPartition};
use crate::sarcore::{widen, SlcImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandTiling {
    #[default]
    Disjoint,
    /// Hann-weighted bands with 50% overlap.
    HannOverlap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrogramConfig {
    pub n_range_bands: usize,
    pub n_azimuth_bands: usize,
    pub doppler_centroid_hz: f64,
    pub tiling: BandTiling,
}

impl SpectrogramConfig {
    pub fn new(n_range_bands: usize, n_azimuth_bands: usize) -> Self {
        SpectrogramConfig {
            n_range_bands,
            n_azimuth_bands,
            doppler_centroid_hz: 0.0,
            tiling: BandTiling::Disjoint,
        }
    }
}

/// Band energies of one patch, `energies[r * n_azimuth_bands + d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub n_range_bands: usize,
    pub n_azimuth_bands: usize,
    pub energies: Vec<f64>,
    pub range_band_centers_hz: Vec<f64>,
    pub azimuth_band_centers_hz: Vec<f64>,
    /// `(row, col)` of the patch's first sample.
    pub origin: (usize, usize),
    pub patch_size: usize,
}

impl Spectrogram {
    pub fn get(&self, range_band: usize, azimuth_band: usize) -> f64 {
        self.energies[range_band * self.n_azimuth_bands + azimuth_band]
    }

    pub fn total(&self) -> f64 {
        self.energies.iter().sum()
    }
}

/// Marginal energy profiles of a spectrogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub range_profile: Vec<f64>,
    pub azimuth_profile: Vec<f64>,
}

/// Spectral flatness of a non-negative profile: geometric over arithmetic
/// mean, 1 for a flat profile, 0 if any entry is zero.
pub fn flatness(profile: &[f64]) -> f64 {
    if profile.is_empty() {
        return 0.0;
    }
    let mean = profile.iter().sum::<f64>() / profile.len() as f64;
    if profile.iter().any(|&p| p <= 0.0) || mean <= 0.0 {
        return 0.0;
    }
    let log_mean = profile.iter().map(|p| p.ln()).sum::<f64>() / profile.len() as f64;
    (log_mean.exp() / mean).min(1.0)
}

pub fn spectrogram(
    slc: &SlcImage,
    origin: (usize, usize),
    patch_size: usize,
    n_range_bands: usize,
    n_azimuth_bands: usize,
) -> Result<Spectrogram> {
    spectrogram_with(slc, origin, patch_size, &SpectrogramConfig::new(n_range_bands, n_azimuth_bands))
}

/// Per-bin weights of `n` bands across `[center - bw/2, center + bw/2]`.
fn band_weights(
    n_bins: usize,
    rate: f64,
    center: f64,
    bw: f64,
    n: usize,
    tiling: BandTiling,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    match tiling {
        BandTiling::Disjoint => {
            let centers = BandPartition::new(n_bins, rate, center, bw, n)?.band_centers_hz();
            Ok((fractional_band_weights(n_bins, rate, center, bw, n)?, centers))
        }
        BandTiling::HannOverlap => {
            if n == 0 || n > n_bins {
                return Err(SarError::InvalidArgument(format!("cannot split {n_bins} bins into {n} bands")));
            }
            if !(bw > 0.0 && bw <= rate * (1.0 + 1e-12)) {
                return Err(SarError::InvalidArgument(format!("bandwidth {bw} Hz outside (0, {rate}]")));
            }
            let width = 2.0 * bw / (n + 1) as f64;
            let w = (0..n)
                .map(|b| {
                    let lo = -bw / 2.0 + b as f64 * width / 2.0;
                    (0..n_bins)
                        .map(|k| {
                            let d = wrap_frequency(bin_frequency(k, n_bins, rate) - center, rate);
                            let x = (d - lo) / width;
                            if (0.0..1.0).contains(&x) {
                                0.5 - 0.5 * (2.0 * PI * x).cos()
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            let centers = (0..n).map(|b| center - bw / 2.0 + (b as f64 + 1.0) * width / 2.0).collect();
            Ok((w, centers))
        }
    }
}

pub fn spectrogram_with(
    slc: &SlcImage,
    origin: (usize, usize),
    patch_size: usize,
    cfg: &SpectrogramConfig,
) -> Result<Spectrogram> {
    let (n_az, n_rg) = slc.image.dims();
    let (r0, c0) = origin;
    if patch_size == 0 || r0 + patch_size > n_az || c0 + patch_size > n_rg {
        return Err(SarError::InvalidArgument(format!(
            "patch {patch_size}x{patch_size} at ({r0}, {c0}) exceeds image {n_az}x{n_rg}"
        )));
    }
    let p = &slc.params;
    let prf = p.prf_hz;
    if !(cfg.doppler_centroid_hz > -prf / 2.0 && cfg.doppler_centroid_hz <= prf / 2.0) {
        return Err(SarError::InvalidArgument(format!(
            "centroid {} Hz outside (-PRF/2, PRF/2]",
            cfg.doppler_centroid_hz
        )));
    }
    let (rw, range_centers) = band_weights(
        patch_size,
        p.range_sample_rate_hz,
        0.0,
        p.chirp_bandwidth_hz.min(p.range_sample_rate_hz),
        cfg.n_range_bands,
        cfg.tiling,
    )?;
    let (aw, doppler_centers) = band_weights(
        patch_size,
        prf,
        cfg.doppler_centroid_hz,
        p.processed_doppler_bandwidth().min(prf),
        cfg.n_azimuth_bands,
        cfg.tiling,
    )?;

    let mut buf: Vec<Complex64> = (0..patch_size)
        .flat_map(|i| slc.image.row(r0 + i)[c0..c0 + patch_size].iter().map(|&s| widen(s)))
        .collect();
    fft2(&mut buf, patch_size, patch_size);
    let n = (patch_size * patch_size) as f64;
    let power: Vec<f64> = buf.iter().map(|x| x.norm_sqr() / n).collect();

    // contract azimuth bins first, then range bins
    let per_doppler: Vec<Vec<f64>> = aw
        .iter()
        .map(|w| {
            (0..patch_size)
                .map(|j| (0..patch_size).map(|k| w[k] * power[k * patch_size + j]).sum())
                .collect()
        })
        .collect();
    let mut energies = Vec::with_capacity(cfg.n_range_bands * cfg.n_azimuth_bands);
    for wr in &rw {
        for pd in &per_doppler {
            energies.push(wr.iter().zip(pd).map(|(a, b)| a * b).sum());
        }
    }
    Ok(Spectrogram {
        n_range_bands: cfg.n_range_bands,
        n_azimuth_bands: cfg.n_azimuth_bands,
        energies,
        range_band_centers_hz: range_centers,
        azimuth_band_centers_hz: doppler_centers,
        origin,
        patch_size,
    })
}

pub fn project(s: &Spectrogram) -> Projection {
    let range_profile = (0..s.n_range_bands)
        .map(|r| (0..s.n_azimuth_bands).map(|d| s.get(r, d)).sum())
        .collect();
    let azimuth_profile = (0..s.n_azimuth_bands)
        .map(|d| (0..s.n_range_bands).map(|r| s.get(r, d)).sum())
        .collect();
    Projection {
        range_profile,
        azimuth_profile,
    }
}

/// `(range_flatness, azimuth_flatness)` of the marginal profiles.
pub fn behavior_descriptor(s: &Spectrogram) -> Result<(f64, f64)> {
    if !(s.total() > 0.0) {
        return Err(SarError::ZeroEnergy { index: None });
    }
    let proj = project(s);
    Ok((flatness(&proj.range_profile), flatness(&proj.azimuth_profile)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sarcore::{ComplexImage, SensorParams};
    use num_complex::Complex32;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noise_slc(n: usize, seed: u64) -> SlcImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Normal::new(0.0, 1.0).unwrap();
        let s = (0..n * n).map(|_| Complex32::new(g.sample(&mut rng), g.sample(&mut rng))).collect();
        SlcImage::new(ComplexImage::new(n, n, s).unwrap(), SensorParams::desk_scale()).unwrap()
    }

    fn patch_energy(slc: &SlcImage, o: (usize, usize), n: usize) -> f64 {
        (0..n)
            .flat_map(|i| slc.image.row(o.0 + i)[o.1..o.1 + n].iter().map(|s| s.norm_sqr() as f64))
            .sum()
    }

    #[test]
    fn disjoint_bands_conserve_energy() {
        let slc = noise_slc(48, 1);
        for (nr, nd) in [(1, 1), (3, 3), (4, 2)] {
            let s = spectrogram(&slc, (5, 7), 32, nr, nd).unwrap();
            assert_eq!(s.energies.len(), nr * nd);
            let e = patch_energy(&slc, (5, 7), 32);
            assert!((s.total() / e - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_marginals() {
        let slc = noise_slc(32, 2);
        let s = spectrogram(&slc, (0, 0), 32, 3, 4).unwrap();
        let p = project(&s);
        assert_eq!(p.range_profile.len(), 3);
        assert_eq!(p.azimuth_profile.len(), 4);
        let a: f64 = p.range_profile.iter().sum();
        let b: f64 = p.azimuth_profile.iter().sum();
        assert!((a - s.total()).abs() < 1e-9 * a);
        assert!((b - s.total()).abs() < 1e-9 * b);
    }

    #[test]
    fn flatness_extremes() {
        assert!((flatness(&[2.0, 2.0, 2.0]) - 1.0).abs() < 1e-12);
        assert_eq!(flatness(&[1.0, 0.0, 1.0]), 0.0);
        let f = flatness(&[1.0, 4.0]);
        assert!((f - 2.0 / 2.5).abs() < 1e-12);
    }

    #[test]
    fn gain_scales_energies_and_keeps_descriptor() {
        let slc = noise_slc(32, 3);
        let big = slc.with_image(slc.image.scaled(7.5));
        let a = spectrogram(&slc, (0, 0), 32, 3, 3).unwrap();
        let b = spectrogram(&big, (0, 0), 32, 3, 3).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            assert!((y / x - 56.25).abs() < 1e-4);
        }
        let (r0, a0) = behavior_descriptor(&a).unwrap();
        let (r1, a1) = behavior_descriptor(&b).unwrap();
        assert!((r0 - r1).abs() < 1e-9 && (a0 - a1).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&r0) && (0.0..=1.0).contains(&a0));
    }

    #[test]
    fn flatness_hand_value() {
        assert!((flatness(&[0.5, 0.25, 0.25]) - 0.9449).abs() < 1e-4);
    }

    #[test]
    fn circular_shift_keeps_energies() {
        let slc = noise_slc(32, 6);
        let n = 32;
        let rolled: Vec<Complex32> = (0..n * n)
            .map(|i| {
                let (r, c) = (i / n, i % n);
                slc.image.get((r + 5) % n, (c + 11) % n)
            })
            .collect();
        let sh = slc.with_image(ComplexImage::new(n, n, rolled).unwrap());
        let a = spectrogram(&slc, (0, 0), n, 3, 3).unwrap();
        let b = spectrogram(&sh, (0, 0), n, 3, 3).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            assert!((x - y).abs() < 1e-9 * x);
        }
    }

    #[test]
    fn hann_overlap_covers_interior() {
        let slc = noise_slc(32, 4);
        let mut cfg = SpectrogramConfig::new(3, 3);
        cfg.tiling = BandTiling::HannOverlap;
        let s = spectrogram_with(&slc, (0, 0), 32, &cfg).unwrap();
        assert!(s.energies.iter().all(|&e| e > 0.0));
        let e = patch_energy(&slc, (0, 0), 32);
        assert!(s.total() < e);
    }

    #[test]
    fn bad_patch_rejected() {
        let slc = noise_slc(16, 5);
        assert!(spectrogram(&slc, (1, 0), 16, 3, 3).is_err());
        assert!(spectrogram(&slc, (0, 0), 0, 3, 3).is_err());
        assert!(spectrogram(&slc, (0, 0), 4, 5, 3).is_err());
        let zero = SlcImage::new(ComplexImage::zeros(8, 8), SensorParams::desk_scale()).unwrap();
        let s = spectrogram(&zero, (0, 0), 8, 2, 2).unwrap();
        assert!(s.energies.iter().all(|&e| e == 0.0));
        assert!(behavior_descriptor(&s).is_err());
    }
}
