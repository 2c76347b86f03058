//! Doppler sub-aperture decomposition.
//!
//! The azimuth spectrum of every range column is split into `N` equal,
//! contiguous bands spanning the processed Doppler bandwidth around the
//! centroid, and each band is transformed back on the full grid. With the
//! default rectangular bands the looks sum exactly to the input.

use std::f64::consts::PI;

use num_complex::{Complex32, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SarError};
use crate::render::{percentile, stretch, RgbImage};
use crate::sarcore::fft::{bin_frequency, fft_cols};
use crate::sarcore::spectral::{wrap_frequency, BandPartition};
use crate::sarcore::{widen, ComplexImage, SensorParams, SlcImage};

/// Below this normalised spectral resultant the centroid is not measurable
/// and the estimate falls back to zero Doppler.
pub const CENTROID_MIN_COHERENCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LookWeighting {
    /// Exact spectral partition.
    #[default]
    Rect,
    /// Hann taper across each band; bins outside the processed band are dropped.
    Hann,
}

impl std::str::FromStr for LookWeighting {
    type Err = SarError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" => Ok(LookWeighting::Rect),
            "hann" => Ok(LookWeighting::Hann),
            other => Err(SarError::InvalidArgument(format!("unknown look weighting '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubLookConfig {
    pub n_looks: usize,
    pub centroid_hz: f64,
    /// Processed Doppler bandwidth; defaults to the illuminated bandwidth.
    pub bandwidth_hz: Option<f64>,
    pub weighting: LookWeighting,
}

impl SubLookConfig {
    pub fn new(n_looks: usize, centroid_hz: f64) -> Self {
        SubLookConfig {
            n_looks,
            centroid_hz,
            bandwidth_hz: None,
            weighting: LookWeighting::Rect,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubLookStack {
    pub looks: Vec<ComplexImage>,
    pub band_edges_hz: Vec<f64>,
    pub centroid_hz: f64,
    pub source_params: SensorParams,
}

impl SubLookStack {
    pub fn n_looks(&self) -> usize {
        self.looks.len()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.looks.iter().map(ComplexImage::energy).collect()
    }
}

fn column_spectra(img: &ComplexImage) -> Vec<Complex64> {
    let (n_az, n_rg) = img.dims();
    let mut buf: Vec<Complex64> = img.samples().iter().map(|&s| widen(s)).collect();
    fft_cols(&mut buf, n_az, n_rg, false);
    buf
}

/// Circular centroid of the mean azimuth power spectrum, in `(-PRF/2, PRF/2]`.
pub fn estimate_doppler_centroid(slc: &SlcImage) -> Result<f64> {
    let (n_az, n_rg) = slc.image.dims();
    if n_az < 8 {
        return Err(SarError::InvalidArgument(format!(
            "centroid estimation needs >= 8 azimuth samples, got {n_az}"
        )));
    }
    let spec = column_spectra(&slc.image);
    let power: Vec<f64> = (0..n_az)
        .map(|k| spec[k * n_rg..(k + 1) * n_rg].iter().map(|x| x.norm_sqr()).sum::<f64>())
        .collect();
    let total: f64 = power.iter().sum();
    if !(total > 0.0) {
        return Err(SarError::ZeroEnergy { index: None });
    }
    let resultant: Complex64 = power
        .iter()
        .enumerate()
        .map(|(k, &p)| Complex64::from_polar(p, 2.0 * PI * k as f64 / n_az as f64))
        .sum();
    if resultant.norm() / total < CENTROID_MIN_COHERENCE {
        return Ok(0.0);
    }
    Ok(resultant.arg() / (2.0 * PI) * slc.params.prf_hz + 0.0)
}

/// Sub-look decomposition with rectangular bands over the illuminated
/// Doppler bandwidth.
pub fn sublook_decompose(slc: &SlcImage, n_looks: usize, centroid_hz: f64) -> Result<SubLookStack> {
    sublook_decompose_with(slc, &SubLookConfig::new(n_looks, centroid_hz))
}

pub fn sublook_decompose_with(slc: &SlcImage, cfg: &SubLookConfig) -> Result<SubLookStack> {
    let (n_az, n_rg) = slc.image.dims();
    let prf = slc.params.prf_hz;
    if cfg.n_looks < 2 {
        return Err(SarError::InvalidArgument(format!("need at least 2 looks, got {}", cfg.n_looks)));
    }
    if cfg.n_looks > n_az {
        return Err(SarError::InvalidArgument(format!(
            "{} looks exceed {n_az} azimuth samples",
            cfg.n_looks
        )));
    }
    if !(cfg.centroid_hz > -prf / 2.0 && cfg.centroid_hz <= prf / 2.0) {
        return Err(SarError::InvalidArgument(format!(
            "centroid {} Hz outside (-PRF/2, PRF/2]",
            cfg.centroid_hz
        )));
    }
    let bandwidth = cfg
        .bandwidth_hz
        .unwrap_or_else(|| slc.params.processed_doppler_bandwidth().min(prf));
    let partition = BandPartition::new(n_az, prf, cfg.centroid_hz, bandwidth, cfg.n_looks)?;
    let spec = column_spectra(&slc.image);
    let width = bandwidth / cfg.n_looks as f64;

    let mut looks = Vec::with_capacity(cfg.n_looks);
    for band in 0..cfg.n_looks {
        let weights: Vec<f64> = (0..n_az)
            .map(|k| match cfg.weighting {
                LookWeighting::Rect => f64::from(u8::from(partition.assignment[k] == band)),
                LookWeighting::Hann => {
                    let d = wrap_frequency(bin_frequency(k, n_az, prf) - cfg.centroid_hz, prf);
                    let x = (d - (partition.band_edges_hz[band] - cfg.centroid_hz)) / width;
                    if (0.0..1.0).contains(&x) {
                        0.5 - 0.5 * (2.0 * PI * x).cos()
                    } else {
                        0.0
                    }
                }
            })
            .collect();
        let mut buf = spec.clone();
        for (k, row) in buf.chunks_mut(n_rg).enumerate() {
            let w = weights[k];
            row.iter_mut().for_each(|x| *x *= w);
        }
        fft_cols(&mut buf, n_az, n_rg, true);
        let samples = buf.iter().map(|c| Complex32::new(c.re as f32, c.im as f32)).collect();
        looks.push(ComplexImage::new(n_az, n_rg, samples)?);
    }
    Ok(SubLookStack {
        looks,
        band_edges_hz: partition.band_edges_hz,
        centroid_hz: cfg.centroid_hz,
        source_params: slc.params,
    })
}

/// Pseudo-colour composite of a three-look stack: look magnitudes as R, G, B,
/// jointly stretched between the 1st and 99th percentile of all magnitudes.
pub fn sublook_rgb(stack: &SubLookStack) -> Result<RgbImage> {
    if stack.n_looks() != 3 {
        return Err(SarError::InvalidArgument(format!(
            "RGB composite needs exactly 3 looks, got {}",
            stack.n_looks()
        )));
    }
    let (n_az, n_rg) = stack.looks[0].dims();
    let mags: Vec<Vec<f32>> = stack
        .looks
        .iter()
        .map(|l| l.samples().iter().map(|s| s.norm()).collect())
        .collect();
    let pooled: Vec<f32> = mags.iter().flatten().copied().collect();
    let lo = percentile(&pooled, 1.0);
    let hi = percentile(&pooled, 99.0);
    let pixels = (0..n_az * n_rg)
        .map(|i| [0, 1, 2].map(|c| stretch(mags[c][i], lo, hi)))
        .collect();
    Ok(RgbImage {
        height: n_az,
        width: n_rg,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noise_slc(n_az: usize, n_rg: usize, seed: u64) -> SlcImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, 1.0).unwrap();
        let s = (0..n_az * n_rg)
            .map(|_| Complex32::new(n.sample(&mut rng), n.sample(&mut rng)))
            .collect();
        SlcImage::new(ComplexImage::new(n_az, n_rg, s).unwrap(), SensorParams::desk_scale()).unwrap()
    }

    fn rel_rms(a: &ComplexImage, b: &ComplexImage) -> f64 {
        let num: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm_sqr() as f64).sum();
        (num / b.energy()).sqrt()
    }

    fn sum_looks(stack: &SubLookStack) -> ComplexImage {
        let (n_az, n_rg) = stack.looks[0].dims();
        let mut acc = vec![Complex32::new(0.0, 0.0); n_az * n_rg];
        for l in &stack.looks {
            acc.iter_mut().zip(l.samples()).for_each(|(a, b)| *a += b);
        }
        ComplexImage::new(n_az, n_rg, acc).unwrap()
    }

    #[test]
    fn rect_looks_partition_the_image() {
        let slc = noise_slc(64, 16, 1);
        for n in [2, 3, 5] {
            let stack = sublook_decompose(&slc, n, 12.5).unwrap();
            assert!(rel_rms(&sum_looks(&stack), &slc.image) < 1e-6);
            let e: f64 = stack.energies().iter().sum();
            assert!((e / slc.image.energy() - 1.0).abs() < 1e-6);
            assert_eq!(stack.band_edges_hz.len(), n + 1);
            assert!(stack.band_edges_hz.windows(2).all(|w| w[1] > w[0]));
            let span = stack.band_edges_hz[n] - stack.band_edges_hz[0];
            assert!((span - slc.params.processed_doppler_bandwidth()).abs() < 1e-9);
        }
    }

    #[test]
    fn full_band_shift_permutes_looks() {
        let slc = noise_slc(60, 8, 2);
        let prf = slc.params.prf_hz;
        let mut cfg = SubLookConfig::new(3, 0.0);
        cfg.bandwidth_hz = Some(prf);
        let base = sublook_decompose_with(&slc, &cfg).unwrap();
        // shift the spectrum up by one band (20 of 60 bins)
        let (n_az, n_rg) = slc.image.dims();
        let shifted: Vec<Complex32> = (0..n_az * n_rg)
            .map(|i| {
                let k = i / n_rg;
                let ph = Complex64::from_polar(1.0, 2.0 * PI * (20 * k) as f64 / n_az as f64);
                let v = widen(slc.image.samples()[i]) * ph;
                Complex32::new(v.re as f32, v.im as f32)
            })
            .collect();
        let sh = slc.with_image(ComplexImage::new(n_az, n_rg, shifted).unwrap());
        let moved = sublook_decompose_with(&sh, &cfg).unwrap();
        let e0 = base.energies();
        let e1 = moved.energies();
        for b in 0..3 {
            assert!((e1[(b + 1) % 3] / e0[b] - 1.0).abs() < 1e-5, "{e0:?} {e1:?}");
        }
    }

    #[test]
    fn hann_weighting_loses_energy_only() {
        let slc = noise_slc(64, 16, 3);
        let mut cfg = SubLookConfig::new(3, 0.0);
        cfg.weighting = LookWeighting::Hann;
        let stack = sublook_decompose_with(&slc, &cfg).unwrap();
        let ratio = stack.energies().iter().sum::<f64>() / slc.image.energy();
        assert!(ratio > 0.1 && ratio < 1.0, "{ratio}");
    }

    #[test]
    fn argument_errors() {
        let slc = noise_slc(8, 4, 4);
        assert!(sublook_decompose(&slc, 1, 0.0).is_err());
        assert!(sublook_decompose(&slc, 9, 0.0).is_err());
        assert!(sublook_decompose(&slc, 3, 100.5).is_err());
        assert!(estimate_doppler_centroid(&noise_slc(7, 4, 1)).is_err());
        let zero = SlcImage::new(ComplexImage::zeros(16, 4), SensorParams::desk_scale()).unwrap();
        assert!(matches!(estimate_doppler_centroid(&zero), Err(SarError::ZeroEnergy { .. })));
    }

    #[test]
    fn centroid_tracks_spectral_shift() {
        // narrow-band signal centred on +PRF/4 over a few columns
        let p = SensorParams::desk_scale();
        let n_az = 64;
        let s: Vec<Complex32> = (0..n_az * 2)
            .map(|i| {
                let k = (i / 2) as f64;
                let env = (-((k - 32.0) / 10.0).powi(2)).exp();
                let v = Complex64::from_polar(env, 2.0 * PI * 0.25 * k);
                Complex32::new(v.re as f32, v.im as f32)
            })
            .collect();
        let slc = SlcImage::new(ComplexImage::new(n_az, 2, s).unwrap(), p).unwrap();
        let c = estimate_doppler_centroid(&slc).unwrap();
        assert!((c - p.prf_hz / 4.0).abs() < p.prf_hz / 100.0, "{c}");
    }

    #[test]
    fn white_noise_centroid_near_zero() {
        let prf = SensorParams::desk_scale().prf_hz;
        for seed in 0..5 {
            let c = estimate_doppler_centroid(&noise_slc(4096, 8, seed)).unwrap();
            assert!(c.abs() <= prf / 20.0, "seed {seed}: {c}");
        }
    }

    #[test]
    fn rgb_requires_three_looks_and_zero_maps_to_zero() {
        let zero = SlcImage::new(ComplexImage::zeros(16, 4), SensorParams::desk_scale()).unwrap();
        let stack = sublook_decompose(&zero, 3, 0.0).unwrap();
        let rgb = sublook_rgb(&stack).unwrap();
        assert!(rgb.pixels.iter().all(|p| *p == [0.0; 3]));
        let two = sublook_decompose(&zero, 2, 0.0).unwrap();
        assert!(sublook_rgb(&two).is_err());
    }
}
