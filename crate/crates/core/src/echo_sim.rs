//! Baseband raw-echo simulation for zero-squint stripmap SAR.
//!
//! Each pulse is a linear FM chirp; every point scatterer contributes a
//! delayed chirp with carrier phase `-4 pi R(eta) / lambda` while it lies
//! inside the -3 dB illuminated aperture. There is no antenna pattern
//! weighting and no spreading loss, so a unit scatterer produces unit-modulus
//! raw samples.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::{Complex32, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Result, SarError};
use crate::sarcore::fft::{bin_frequency, fft_cols, fft_rows};
use crate::sarcore::io::{self, read_slc_with_meta};
use crate::sarcore::{ComplexImage, ImageGrid, SensorParams, SlcImage, SPEED_OF_LIGHT};

/// Maximum range migration (in range cells) tolerated by focusing without
/// migration correction.
pub const MIGRATION_LIMIT_CELLS: f64 = 0.5;

/// Frequency/aspect dependence of a point scatterer's reflectivity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anisotropy {
    #[default]
    Isotropic,
    /// Responds only to Doppler frequencies (viewing angles) in `[f_lo, f_hi]`.
    DopplerBand { f_lo_hz: f64, f_hi_hz: f64 },
    /// Responds only to baseband range frequencies in `[f_lo, f_hi]`.
    RangeBand { f_lo_hz: f64, f_hi_hz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTarget {
    pub slant_range_m: f64,
    pub azimuth_m: f64,
    pub reflectivity: Complex64,
    #[serde(default)]
    pub anisotropy: Anisotropy,
}

impl PointTarget {
    pub fn isotropic(slant_range_m: f64, azimuth_m: f64, reflectivity: Complex64) -> Self {
        PointTarget {
            slant_range_m,
            azimuth_m,
            reflectivity,
            anisotropy: Anisotropy::Isotropic,
        }
    }
}

/// Bridge-like scatterer whose direct, double and triple bounce returns
/// appear as three parallel lines in range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultipathTarget {
    pub deck_slant_range_m: f64,
    pub azimuth_m: f64,
    pub height_m: f64,
    /// Single, double and triple bounce reflectivities.
    pub bounce_reflectivities: [Complex64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Target {
    Point(PointTarget),
    Multipath(MultipathTarget),
}

impl From<PointTarget> for Target {
    fn from(t: PointTarget) -> Self {
        Target::Point(t)
    }
}

impl From<MultipathTarget> for Target {
    fn from(t: MultipathTarget) -> Self {
        Target::Multipath(t)
    }
}

/// Imaged scene window centred on (`center_slant_range_m`, azimuth 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneExtent {
    pub range_window_m: f64,
    pub azimuth_window_m: f64,
}

impl SceneExtent {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_window_m.is_finite() && self.range_window_m > 0.0)
            || !(self.azimuth_window_m.is_finite() && self.azimuth_window_m >= 0.0)
        {
            return Err(SarError::InvalidArgument(format!("invalid scene extent {self:?}")));
        }
        Ok(())
    }
}

/// Raw echo matrix: rows are pulses (slow time), columns fast-time samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RawData {
    pub data: ComplexImage,
    pub params: SensorParams,
    pub extent: SceneExtent,
}

impl RawData {
    pub fn grid(&self) -> ImageGrid {
        ImageGrid::new(&self.params, self.data.n_azimuth(), self.data.n_range())
    }

    pub fn with_data(&self, data: ComplexImage) -> RawData {
        RawData {
            data,
            params: self.params,
            extent: self.extent,
        }
    }
}

/// Pulse/sample grid covering the extent plus the full illuminated aperture
/// of edge targets (azimuth) and the chirp length (range).
pub fn raw_grid(params: &SensorParams, extent: &SceneExtent) -> ImageGrid {
    let far = params.center_slant_range_m + extent.range_window_m / 2.0;
    let half_az = extent.azimuth_window_m / 2.0 + params.synthetic_aperture_length(far) / 2.0;
    let half_rg = extent.range_window_m / 2.0 + SPEED_OF_LIGHT * params.pulse_duration_s / 4.0;
    let n_az = 2 * (half_az / params.azimuth_spacing()).ceil() as usize + 1;
    let n_rg = 2 * (half_rg / params.range_spacing()).ceil() as usize + 1;
    ImageGrid::new(params, n_az, n_rg)
}

/// Slant ranges of the direct, double and triple bounce returns.
///
/// First-order layover model: each extra bounce off the water adds
/// `height * cos(incidence)` of path.
pub fn multipath_ranges(t: &MultipathTarget, params: &SensorParams) -> [f64; 3] {
    let delta = t.height_m * params.incidence_angle_deg.to_radians().cos();
    let r1 = t.deck_slant_range_m;
    [r1, r1 + delta, r1 + 2.0 * delta]
}

#[derive(Debug, Clone, Copy)]
struct Scatterer {
    slant_range_m: f64,
    azimuth_m: f64,
    reflectivity: Complex64,
    anisotropy: Anisotropy,
}

fn scatterers(targets: &[Target], params: &SensorParams) -> Vec<Scatterer> {
    let mut out = Vec::new();
    for t in targets {
        match t {
            Target::Point(p) => out.push(Scatterer {
                slant_range_m: p.slant_range_m,
                azimuth_m: p.azimuth_m,
                reflectivity: p.reflectivity,
                anisotropy: p.anisotropy,
            }),
            Target::Multipath(m) => {
                for (r, refl) in multipath_ranges(m, params).into_iter().zip(m.bounce_reflectivities) {
                    out.push(Scatterer {
                        slant_range_m: r,
                        azimuth_m: m.azimuth_m,
                        reflectivity: refl,
                        anisotropy: Anisotropy::Isotropic,
                    });
                }
            }
        }
    }
    out
}

/// Checks target parameters and that every scatterer lies inside the extent.
pub fn validate_targets(targets: &[Target], params: &SensorParams, extent: &SceneExtent) -> Result<()> {
    let half_b = params.chirp_bandwidth_hz / 2.0;
    let half_d = params.processed_doppler_bandwidth() / 2.0;
    for (i, t) in targets.iter().enumerate() {
        match t {
            Target::Point(p) => {
                if !(p.slant_range_m > 0.0) || !p.azimuth_m.is_finite() {
                    return Err(SarError::InvalidTarget(format!("target {i}: bad position")));
                }
                if !(p.reflectivity.re.is_finite() && p.reflectivity.im.is_finite()) {
                    return Err(SarError::InvalidTarget(format!("target {i}: non-finite reflectivity")));
                }
                let band = match p.anisotropy {
                    Anisotropy::Isotropic => None,
                    Anisotropy::DopplerBand { f_lo_hz, f_hi_hz } => Some((f_lo_hz, f_hi_hz, half_d, "Doppler")),
                    Anisotropy::RangeBand { f_lo_hz, f_hi_hz } => Some((f_lo_hz, f_hi_hz, half_b, "range")),
                };
                if let Some((lo, hi, half, axis)) = band {
                    let tol = 1e-9 * half;
                    if !(lo < hi) || lo < -half - tol || hi > half + tol {
                        return Err(SarError::InvalidTarget(format!(
                            "target {i}: {axis} band [{lo}, {hi}] must be ascending and within +/-{half}"
                        )));
                    }
                }
            }
            Target::Multipath(m) => {
                if !(m.deck_slant_range_m > 0.0 && m.height_m > 0.0) || !m.azimuth_m.is_finite() {
                    return Err(SarError::InvalidTarget(format!(
                        "multipath target {i}: deck range and height must be > 0"
                    )));
                }
            }
        }
    }
    for (i, s) in scatterers(targets, params).iter().enumerate() {
        let dr = (s.slant_range_m - params.center_slant_range_m).abs();
        if dr > extent.range_window_m / 2.0 || s.azimuth_m.abs() > extent.azimuth_window_m / 2.0 {
            return Err(SarError::TargetOutsideExtent(format!(
                "scatterer {i} at (range {:.3} m, azimuth {:.3} m)",
                s.slant_range_m, s.azimuth_m
            )));
        }
    }
    Ok(())
}

/// Range migration of a scatterer at `r0`, in range cells, between closest
/// approach and the edge of its illuminated aperture.
pub fn gate_migration_cells(params: &SensorParams, r0: f64) -> f64 {
    if params.platform_velocity_mps == 0.0 {
        return 0.0;
    }
    let v = params.platform_velocity_mps;
    let eta_edge = params.aperture_time(r0) / 2.0;
    ((r0 * r0 + v * v * eta_edge * eta_edge).sqrt() - r0) / params.range_spacing()
}

/// Largest range migration over all scatterers, in range cells.
pub fn migration_check(targets: &[Target], params: &SensorParams, _extent: &SceneExtent) -> f64 {
    scatterers(targets, params)
        .iter()
        .map(|s| gate_migration_cells(params, s.slant_range_m))
        .fold(0.0, f64::max)
}

fn add_scatterer_row(
    row: &mut [Complex64],
    pulse: usize,
    s: &Scatterer,
    params: &SensorParams,
    grid: &ImageGrid,
) {
    let dx = grid.azimuth_of_row(pulse) - s.azimuth_m;
    if dx.abs() > params.synthetic_aperture_length(s.slant_range_m) / 2.0 {
        return;
    }
    let range = (s.slant_range_m * s.slant_range_m + dx * dx).sqrt();
    let delay = 2.0 * range / SPEED_OF_LIGHT;
    let tau = params.pulse_duration_s;
    let kr = params.chirp_rate();
    let carrier = s.reflectivity * Complex64::from_polar(1.0, -4.0 * PI * range / params.wavelength());
    let center = grid.col_of_range(range);
    let half = tau * params.range_sample_rate_hz / 2.0;
    let lo = (center - half - 1.0).floor().max(0.0) as usize;
    let hi = ((center + half + 1.0).ceil().max(0.0) as usize).min(grid.n_range);
    for (j, out) in row.iter_mut().enumerate().take(hi).skip(lo) {
        let u = 2.0 * grid.range_of_col(j) / SPEED_OF_LIGHT - delay;
        if u >= -tau / 2.0 && u < tau / 2.0 {
            *out += carrier * Complex64::from_polar(1.0, PI * kr * u * u);
        }
    }
}

fn band_filter(buf: &mut [Complex64], grid: &ImageGrid, params: &SensorParams, anisotropy: Anisotropy) {
    let (n_az, n_rg) = (grid.n_azimuth, grid.n_range);
    match anisotropy {
        Anisotropy::Isotropic => {}
        Anisotropy::DopplerBand { f_lo_hz, f_hi_hz } => {
            fft_cols(buf, n_az, n_rg, false);
            for k in 0..n_az {
                let f = bin_frequency(k, n_az, params.prf_hz);
                if f < f_lo_hz || f > f_hi_hz {
                    buf[k * n_rg..(k + 1) * n_rg].fill(Complex64::new(0.0, 0.0));
                }
            }
            fft_cols(buf, n_az, n_rg, true);
        }
        Anisotropy::RangeBand { f_lo_hz, f_hi_hz } => {
            fft_rows(buf, n_rg, false);
            let keep: Vec<bool> = (0..n_rg)
                .map(|j| {
                    let f = bin_frequency(j, n_rg, params.range_sample_rate_hz);
                    f >= f_lo_hz && f <= f_hi_hz
                })
                .collect();
            buf.par_chunks_mut(n_rg).for_each(|row| {
                for (x, &k) in row.iter_mut().zip(&keep) {
                    if !k {
                        *x = Complex64::new(0.0, 0.0);
                    }
                }
            });
            fft_rows(buf, n_rg, true);
        }
    }
}

/// Simulates the demodulated raw echoes of `targets`.
pub fn simulate_raw(targets: &[Target], params: &SensorParams, extent: &SceneExtent) -> Result<RawData> {
    params.validate()?;
    extent.validate()?;
    validate_targets(targets, params, extent)?;
    let migration = migration_check(targets, params, extent);
    if migration > MIGRATION_LIMIT_CELLS {
        return Err(SarError::MigrationExceeded {
            cells: migration,
            limit: MIGRATION_LIMIT_CELLS,
        });
    }
    let grid = raw_grid(params, extent);
    let (n_az, n_rg) = (grid.n_azimuth, grid.n_range);
    let mut acc = vec![Complex64::new(0.0, 0.0); n_az * n_rg];
    for s in scatterers(targets, params) {
        if s.anisotropy == Anisotropy::Isotropic {
            acc.par_chunks_mut(n_rg)
                .enumerate()
                .for_each(|(k, row)| add_scatterer_row(row, k, &s, params, &grid));
        } else {
            let mut own = vec![Complex64::new(0.0, 0.0); n_az * n_rg];
            own.par_chunks_mut(n_rg)
                .enumerate()
                .for_each(|(k, row)| add_scatterer_row(row, k, &s, params, &grid));
            band_filter(&mut own, &grid, params, s.anisotropy);
            acc.par_iter_mut().zip(&own).for_each(|(a, b)| *a += b);
        }
    }
    let samples = acc.iter().map(|c| Complex32::new(c.re as f32, c.im as f32)).collect();
    Ok(RawData {
        data: ComplexImage::new(n_az, n_rg, samples)?,
        params: *params,
        extent: *extent,
    })
}

/// Adds white circular Gaussian noise of total variance `sigma^2` per sample,
/// drawn sequentially from a seeded ChaCha8 stream.
pub fn add_noise(raw: &RawData, sigma: f64, seed: u64) -> Result<RawData> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(SarError::InvalidArgument(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(raw.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma / 2f64.sqrt()).expect("finite sigma");
    let mut data = raw.data.clone();
    for s in data.samples_mut() {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *s += Complex32::new(re as f32, im as f32);
    }
    Ok(raw.with_data(data))
}

pub fn write_raw(raw: &RawData, path: &Path, extra: &Map<String, Value>) -> Result<()> {
    let as_slc = SlcImage::new(raw.data.clone(), raw.params)?;
    let mut meta = extra.clone();
    meta.insert("product".into(), "raw".into());
    meta.insert("range_window_m".into(), raw.extent.range_window_m.into());
    meta.insert("azimuth_window_m".into(), raw.extent.azimuth_window_m.into());
    io::write_slc_with(&as_slc, path, &meta)
}

pub fn read_raw(path: &Path) -> Result<RawData> {
    let (slc, meta) = read_slc_with_meta(path)?;
    if meta.get("product").and_then(Value::as_str) != Some("raw") {
        return Err(SarError::MalformedMetadata("sidecar lacks \"product\": \"raw\"".into()));
    }
    let key = |k: &str| -> Result<f64> {
        meta.get(k)
            .and_then(Value::as_f64)
            .ok_or_else(|| SarError::MalformedMetadata(format!("missing numeric key '{k}'")))
    };
    let extent = SceneExtent {
        range_window_m: key("range_window_m")?,
        azimuth_window_m: key("azimuth_window_m")?,
    };
    extent.validate()?;
    let grid = raw_grid(&slc.params, &extent);
    if (grid.n_azimuth, grid.n_range) != slc.image.dims() {
        return Err(SarError::MetadataMismatch(format!(
            "raw dims {:?} do not match extent grid {:?}",
            slc.image.dims(),
            (grid.n_azimuth, grid.n_range)
        )));
    }
    Ok(RawData {
        data: slc.image,
        params: slc.params,
        extent,
    })
}
