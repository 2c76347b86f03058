//! Core domain types shared by every processing layer: acquisition
//! parameters, complex image containers, windows, FFT helpers and file I/O.

pub mod fft;
pub mod io;
pub mod spectral;
pub mod tensor;
pub mod window;

use num_complex::{Complex32, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SarError};

/// Widens a stored sample to double precision for processing.
#[inline]
pub fn widen(s: Complex32) -> Complex64 {
    Complex64::new(s.re as f64, s.im as f64)
}

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ratio of the -3 dB two-way illumination beamwidth to `λ / La`.
///
/// The illuminated synthetic aperture and the processed Doppler bandwidth are
/// both taken at this beamwidth, which puts the rect-window azimuth IRW at
/// `La / 2`.
pub const BEAMWIDTH_FACTOR: f64 = 0.886;

/// Acquisition physics for a zero-squint stripmap collection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    pub carrier_freq_hz: f64,
    pub chirp_bandwidth_hz: f64,
    pub pulse_duration_s: f64,
    pub range_sample_rate_hz: f64,
    pub prf_hz: f64,
    pub platform_velocity_mps: f64,
    pub antenna_length_m: f64,
    pub center_slant_range_m: f64,
    pub incidence_angle_deg: f64,
}

impl SensorParams {
    /// X-band desk-scale defaults: 9.6 GHz, 100 MHz chirp of 10 us, 150 m/s
    /// platform, 2 m antenna, 10 km slant range.
    pub fn desk_scale() -> Self {
        SensorParams {
            carrier_freq_hz: 9.6e9,
            chirp_bandwidth_hz: 100e6,
            pulse_duration_s: 10e-6,
            range_sample_rate_hz: 120e6,
            prf_hz: 200.0,
            platform_velocity_mps: 150.0,
            antenna_length_m: 2.0,
            center_slant_range_m: 10_000.0,
            incidence_angle_deg: 45.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("chirp_bandwidth_hz", self.chirp_bandwidth_hz),
            ("pulse_duration_s", self.pulse_duration_s),
            ("range_sample_rate_hz", self.range_sample_rate_hz),
            ("prf_hz", self.prf_hz),
            ("platform_velocity_mps", self.platform_velocity_mps),
            ("antenna_length_m", self.antenna_length_m),
            ("center_slant_range_m", self.center_slant_range_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SarError::InvalidSensorParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.incidence_angle_deg > 0.0 && self.incidence_angle_deg < 90.0) {
            return Err(SarError::InvalidSensorParams(format!(
                "incidence_angle_deg must lie in (0, 90), got {}",
                self.incidence_angle_deg
            )));
        }
        if self.range_sample_rate_hz < 1.1 * self.chirp_bandwidth_hz {
            return Err(SarError::InvalidSensorParams(format!(
                "range_sample_rate_hz {} below 1.1 x chirp bandwidth {}",
                self.range_sample_rate_hz, self.chirp_bandwidth_hz
            )));
        }
        if self.prf_hz < 1.1 * self.doppler_bandwidth() {
            return Err(SarError::InvalidSensorParams(format!(
                "prf_hz {} below 1.1 x Doppler bandwidth {}",
                self.prf_hz,
                self.doppler_bandwidth()
            )));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    /// Full null-to-null Doppler bandwidth `2 v / La`.
    pub fn doppler_bandwidth(&self) -> f64 {
        2.0 * self.platform_velocity_mps / self.antenna_length_m
    }

    /// Doppler bandwidth spanned by the illuminated (-3 dB) aperture.
    pub fn processed_doppler_bandwidth(&self) -> f64 {
        BEAMWIDTH_FACTOR * self.doppler_bandwidth()
    }

    pub fn chirp_rate(&self) -> f64 {
        self.chirp_bandwidth_hz / self.pulse_duration_s
    }

    pub fn range_spacing(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.range_sample_rate_hz)
    }

    pub fn azimuth_spacing(&self) -> f64 {
        self.platform_velocity_mps / self.prf_hz
    }

    /// Number of fast-time samples spanned by one transmitted pulse.
    pub fn chirp_samples(&self) -> usize {
        (self.pulse_duration_s * self.range_sample_rate_hz).round() as usize
    }

    /// Along-track length of the illuminated synthetic aperture at `r0`.
    pub fn synthetic_aperture_length(&self, r0: f64) -> f64 {
        BEAMWIDTH_FACTOR * self.wavelength() * r0 / self.antenna_length_m
    }

    pub fn aperture_time(&self, r0: f64) -> f64 {
        self.synthetic_aperture_length(r0) / self.platform_velocity_mps
    }

    /// Nominal rect-window slant-range IRW `0.886 c / (2B)`.
    pub fn nominal_range_irw(&self) -> f64 {
        0.886 * SPEED_OF_LIGHT / (2.0 * self.chirp_bandwidth_hz)
    }

    /// Nominal rect-window azimuth IRW `La / 2`.
    pub fn nominal_azimuth_irw(&self) -> f64 {
        self.antenna_length_m / 2.0
    }
}

/// Row-major (azimuth-major) 2-D array of single-precision complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    n_azimuth: usize,
    n_range: usize,
    samples: Vec<Complex32>,
}

impl ComplexImage {
    pub fn new(n_azimuth: usize, n_range: usize, samples: Vec<Complex32>) -> Result<Self> {
        if n_azimuth.checked_mul(n_range) != Some(samples.len()) {
            return Err(SarError::DimensionMismatch(format!(
                "{n_azimuth} x {n_range} does not match {} samples",
                samples.len()
            )));
        }
        if let Some(index) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(SarError::NonFiniteSample { index });
        }
        Ok(ComplexImage {
            n_azimuth,
            n_range,
            samples,
        })
    }

    pub fn zeros(n_azimuth: usize, n_range: usize) -> Self {
        ComplexImage {
            n_azimuth,
            n_range,
            samples: vec![Complex32::new(0.0, 0.0); n_azimuth * n_range],
        }
    }

    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }

    pub fn n_range(&self) -> usize {
        self.n_range
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_azimuth, self.n_range)
    }

    pub fn samples(&self) -> &[Complex32] {
        &self.samples
    }

    /// Mutable access for in-place processing. Writers re-check finiteness.
    pub fn samples_mut(&mut self) -> &mut [Complex32] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex32> {
        self.samples
    }

    #[inline]
    pub fn get(&self, az: usize, rg: usize) -> Complex32 {
        self.samples[az * self.n_range + rg]
    }

    pub fn row(&self, az: usize) -> &[Complex32] {
        &self.samples[az * self.n_range..(az + 1) * self.n_range]
    }

    /// Sum of squared magnitudes, accumulated in f64.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr() as f64).sum()
    }

    /// Element-wise scaled copy.
    pub fn scaled(&self, gain: f32) -> ComplexImage {
        ComplexImage {
            n_azimuth: self.n_azimuth,
            n_range: self.n_range,
            samples: self.samples.iter().map(|s| s * gain).collect(),
        }
    }
}

/// Focused single-look complex image with its acquisition metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SlcImage {
    pub image: ComplexImage,
    pub params: SensorParams,
    pub azimuth_spacing_m: f64,
    pub range_spacing_m: f64,
}

impl SlcImage {
    /// Builds an SLC whose pixel spacings follow from `params`.
    pub fn new(image: ComplexImage, params: SensorParams) -> Result<Self> {
        params.validate()?;
        Ok(SlcImage {
            image,
            azimuth_spacing_m: params.azimuth_spacing(),
            range_spacing_m: params.range_spacing(),
            params,
        })
    }

    /// Builds an SLC from explicit spacings, checking them against `params`.
    pub fn from_parts(
        image: ComplexImage,
        params: SensorParams,
        azimuth_spacing_m: f64,
        range_spacing_m: f64,
    ) -> Result<Self> {
        params.validate()?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
        if !close(range_spacing_m, params.range_spacing()) {
            return Err(SarError::MetadataMismatch(format!(
                "range_spacing_m {range_spacing_m} inconsistent with sample rate ({})",
                params.range_spacing()
            )));
        }
        if !close(azimuth_spacing_m, params.azimuth_spacing()) {
            return Err(SarError::MetadataMismatch(format!(
                "azimuth_spacing_m {azimuth_spacing_m} inconsistent with v/PRF ({})",
                params.azimuth_spacing()
            )));
        }
        Ok(SlcImage {
            image,
            params,
            azimuth_spacing_m,
            range_spacing_m,
        })
    }

    pub fn grid(&self) -> ImageGrid {
        ImageGrid::new(&self.params, self.image.n_azimuth, self.image.n_range)
    }

    /// Same metadata, different samples.
    pub fn with_image(&self, image: ComplexImage) -> SlcImage {
        SlcImage {
            image,
            params: self.params,
            azimuth_spacing_m: self.azimuth_spacing_m,
            range_spacing_m: self.range_spacing_m,
        }
    }
}

/// Mapping between pixel indices and scene coordinates.
///
/// Grids are centred: row `n_azimuth / 2` sits at along-track position 0 and
/// column `n_range / 2` at `center_slant_range_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGrid {
    pub n_azimuth: usize,
    pub n_range: usize,
    pub azimuth_spacing_m: f64,
    pub range_spacing_m: f64,
    pub center_slant_range_m: f64,
}

impl ImageGrid {
    pub fn new(params: &SensorParams, n_azimuth: usize, n_range: usize) -> Self {
        ImageGrid {
            n_azimuth,
            n_range,
            azimuth_spacing_m: params.azimuth_spacing(),
            range_spacing_m: params.range_spacing(),
            center_slant_range_m: params.center_slant_range_m,
        }
    }

    pub fn center_row(&self) -> usize {
        self.n_azimuth / 2
    }

    pub fn center_col(&self) -> usize {
        self.n_range / 2
    }

    pub fn azimuth_of_row(&self, row: usize) -> f64 {
        (row as f64 - self.center_row() as f64) * self.azimuth_spacing_m
    }

    pub fn range_of_col(&self, col: usize) -> f64 {
        self.center_slant_range_m + (col as f64 - self.center_col() as f64) * self.range_spacing_m
    }

    /// Fractional row index of an along-track position.
    pub fn row_of_azimuth(&self, azimuth_m: f64) -> f64 {
        self.center_row() as f64 + azimuth_m / self.azimuth_spacing_m
    }

    /// Fractional column index of a slant range.
    pub fn col_of_range(&self, slant_range_m: f64) -> f64 {
        self.center_col() as f64 + (slant_range_m - self.center_slant_range_m) / self.range_spacing_m
    }

    /// Nearest pixel to a scene position, if it lies on the grid.
    pub fn pixel_of(&self, azimuth_m: f64, slant_range_m: f64) -> Option<(usize, usize)> {
        let r = self.row_of_azimuth(azimuth_m).round();
        let c = self.col_of_range(slant_range_m).round();
        if r < 0.0 || c < 0.0 || r >= self.n_azimuth as f64 || c >= self.n_range as f64 {
            None
        } else {
            Some((r as usize, c as usize))
        }
    }
}

/// Four co-registered polarimetric channels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadPolImage {
    pub hh: SlcImage,
    pub hv: SlcImage,
    pub vh: SlcImage,
    pub vv: SlcImage,
    pub reciprocal: bool,
}

impl QuadPolImage {
    pub fn new(hh: SlcImage, hv: SlcImage, vh: SlcImage, vv: SlcImage, reciprocal: bool) -> Result<Self> {
        for (name, ch) in [("hv", &hv), ("vh", &vh), ("vv", &vv)] {
            if ch.image.dims() != hh.image.dims() {
                return Err(SarError::DimensionMismatch(format!(
                    "channel {name} is {:?}, hh is {:?}",
                    ch.image.dims(),
                    hh.image.dims()
                )));
            }
            if ch.params != hh.params
                || ch.azimuth_spacing_m != hh.azimuth_spacing_m
                || ch.range_spacing_m != hh.range_spacing_m
            {
                return Err(SarError::MetadataMismatch(format!(
                    "channel {name} metadata differs from hh"
                )));
            }
        }
        if reciprocal {
            let scale = hv
                .image
                .samples()
                .iter()
                .chain(vh.image.samples())
                .fold(0.0f32, |m, s| m.max(s.norm()));
            for (i, (a, b)) in hv.image.samples().iter().zip(vh.image.samples()).enumerate() {
                let tol = 1e-6 * a.norm().max(b.norm()).max(1e-6 * scale);
                if (a - b).norm() > tol {
                    return Err(SarError::InvalidArgument(format!(
                        "reciprocity violated at sample {i}: hv != vh"
                    )));
                }
            }
        }
        Ok(QuadPolImage {
            hh,
            hv,
            vh,
            vv,
            reciprocal,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.hh.image.dims()
    }
}
