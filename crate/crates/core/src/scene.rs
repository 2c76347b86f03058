//! Scene description files.
//!
//! A scene is a JSON object:
//!
//! ```json
//! {
//!   "sensor": { "carrier_freq_hz": 9.6e9, "chirp_bandwidth_hz": 1e8, ... },
//!   "extent": { "range_window_m": 60.0, "azimuth_window_m": 40.0 },
//!   "targets": [
//!     { "type": "point", "slant_range_m": 10000.0, "azimuth_m": 0.0,
//!       "reflectivity": [1.0, 0.0],
//!       "anisotropy": { "kind": "doppler_band", "f_lo_hz": 11.0, "f_hi_hz": 33.0 },
//!       "scattering": { "hh": [1, 0], "hv": [0, 0], "vh": [0, 0], "vv": [-1, 0] } },
//!     { "type": "multipath", "deck_slant_range_m": 10000.0, "azimuth_m": 5.0,
//!       "height_m": 4.0, "bounce_reflectivities": [[1, 0], [0.7, 0], [0.4, 0]] }
//!   ],
//!   "noise_sigma": 0.0,
//!   "seed": 7
//! }
//! ```
//!
//! Complex numbers are `[re, im]`. `anisotropy` defaults to isotropic and
//! `scattering` to a surface (`HH = VV = 1`); the scattering matrix scales
//! the reflectivity when a single polarimetric channel is simulated.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::echo_sim::{add_noise, simulate_raw, validate_targets, RawData, SceneExtent, Target};
use crate::error::{Result, SarError};
use crate::sarcore::SensorParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Hh,
    Hv,
    Vh,
    Vv,
}

impl std::str::FromStr for Channel {
    type Err = SarError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hh" => Ok(Channel::Hh),
            "hv" => Ok(Channel::Hv),
            "vh" => Ok(Channel::Vh),
            "vv" => Ok(Channel::Vv),
            other => Err(SarError::InvalidArgument(format!("unknown channel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringMatrix {
    pub hh: Complex64,
    pub hv: Complex64,
    pub vh: Complex64,
    pub vv: Complex64,
}

impl Default for ScatteringMatrix {
    fn default() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        ScatteringMatrix {
            hh: one,
            hv: zero,
            vh: zero,
            vv: one,
        }
    }
}

impl ScatteringMatrix {
    pub fn channel(&self, c: Channel) -> Complex64 {
        match c {
            Channel::Hh => self.hh,
            Channel::Hv => self.hv,
            Channel::Vh => self.vh,
            Channel::Vv => self.vv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneTarget {
    #[serde(flatten)]
    pub target: Target,
    #[serde(default)]
    pub scattering: ScatteringMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub sensor: SensorParams,
    pub extent: SceneExtent,
    pub targets: Vec<SceneTarget>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SceneSpec =
            serde_json::from_str(text).map_err(|e| SarError::InvalidArgument(format!("scene file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SarError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        self.extent.validate()?;
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(SarError::InvalidArgument(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        for (i, t) in self.targets.iter().enumerate() {
            let s = &t.scattering;
            if [s.hh, s.hv, s.vh, s.vv].iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(SarError::InvalidTarget(format!("target {i}: non-finite scattering matrix")));
            }
        }
        validate_targets(&self.plain_targets(), &self.sensor, &self.extent)
    }

    pub fn plain_targets(&self) -> Vec<Target> {
        self.targets.iter().map(|t| t.target).collect()
    }

    /// Targets with reflectivities scaled by one scattering-matrix entry.
    pub fn channel_targets(&self, channel: Channel) -> Vec<Target> {
        self.targets
            .iter()
            .map(|t| {
                let g = t.scattering.channel(channel);
                match t.target {
                    Target::Point(mut p) => {
                        p.reflectivity *= g;
                        Target::Point(p)
                    }
                    Target::Multipath(mut m) => {
                        m.bounce_reflectivities.iter_mut().for_each(|r| *r *= g);
                        Target::Multipath(m)
                    }
                }
            })
            .collect()
    }

    /// Raw echoes plus seeded noise; `channel` selects a polarimetric view.
    /// Each channel draws its noise from `seed + channel index` (HH = 0).
    pub fn simulate(&self, channel: Option<Channel>) -> Result<RawData> {
        let targets = match channel {
            Some(c) => self.channel_targets(c),
            None => self.plain_targets(),
        };
        let raw = simulate_raw(&targets, &self.sensor, &self.extent)?;
        let offset = channel.map_or(0, |c| c as u64);
        add_noise(&raw, self.noise_sigma, self.seed.wrapping_add(offset))
    }
}
