#![allow(dead_code)]

use num_complex::Complex64;
use sarlayers::echo_sim::{simulate_raw, Anisotropy, PointTarget, SceneExtent, Target};
use sarlayers::focus::focus;
use sarlayers::sarcore::window::WindowKind;
use sarlayers::{SensorParams, SlcImage};

pub fn desk() -> SensorParams {
    SensorParams::desk_scale()
}

pub fn extent() -> SceneExtent {
    SceneExtent {
        range_window_m: 60.0,
        azimuth_window_m: 40.0,
    }
}

pub fn point(anisotropy: Anisotropy) -> Target {
    PointTarget {
        slant_range_m: desk().center_slant_range_m,
        azimuth_m: 0.0,
        reflectivity: Complex64::new(1.0, 0.0),
        anisotropy,
    }
    .into()
}

/// Upper third of the processed Doppler band.
pub fn upper_doppler_third(p: &SensorParams) -> Anisotropy {
    let b = p.processed_doppler_bandwidth();
    Anisotropy::DopplerBand {
        f_lo_hz: b / 6.0,
        f_hi_hz: b / 2.0,
    }
}

pub fn focused(targets: &[Target], ext: &SceneExtent, window: WindowKind) -> SlcImage {
    let raw = simulate_raw(targets, &desk(), ext).expect("simulate");
    focus(&raw, window).expect("focus")
}

/// Patch origin centring a `size` patch on pixel `(r, c)`.
pub fn centred(r: usize, c: usize, size: usize) -> (usize, usize) {
    (r - size / 2, c - size / 2)
}
