//! Polarimetric feature synthesis: Pauli powers, multilooked coherency,
//! Cloude-Pottier H/A/alpha with zone labels, orientation angle and the
//! nearest positive semi-definite projection.
//!
//! The scattering vector is the reciprocal Pauli vector
//! `k = [HH + VV, HH - VV, 2 HV] / sqrt(2)` with `HV = (HV + VH) / 2`.

mod herm;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use herm::{Eigen3, Herm3};

use crate::error::{Result, SarError};
use crate::render::{percentile, stretch, RgbImage};
use crate::sarcore::{widen, QuadPolImage};

/// Entries within this distance of a zone boundary count as on it.
pub const ZONE_TIE_TOLERANCE: f64 = 2e-12;
/// Hermitian tolerance accepted by [`psd_project`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;
/// Negative eigenvalues down to `-PSD_TOLERANCE * trace` count as round-off.
pub const PSD_TOLERANCE: f64 = 1e-9;

pub fn scattering_vector(hh: Complex64, hv: Complex64, vh: Complex64, vv: Complex64) -> [Complex64; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (hv + vh) * 0.5;
    [(hh + vv) * s, (hh - vv) * s, x * (2.0 * s)]
}

fn pixel_vector(qp: &QuadPolImage, i: usize) -> [Complex64; 3] {
    scattering_vector(
        widen(qp.hh.image.samples()[i]),
        widen(qp.hv.image.samples()[i]),
        widen(qp.vh.image.samples()[i]),
        widen(qp.vv.image.samples()[i]),
    )
}

/// Raw Pauli powers per pixel: R = |HH-VV|^2, G = 2|HV|^2, B = |HH+VV|^2.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliPowers {
    pub n_azimuth: usize,
    pub n_range: usize,
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    pub b: Vec<f64>,
}

impl PauliPowers {
    /// Display composite, each channel stretched between its own 1st and
    /// 99th percentile.
    pub fn to_rgb(&self) -> RgbImage {
        let chans = [&self.r, &self.g, &self.b].map(|c| c.iter().map(|&v| v as f32).collect::<Vec<f32>>());
        let bounds = chans.each_ref().map(|c| (percentile(c, 1.0), percentile(c, 99.0)));
        let pixels = (0..self.n_azimuth * self.n_range)
            .map(|i| [0, 1, 2].map(|c| stretch(chans[c][i], bounds[c].0, bounds[c].1)))
            .collect();
        RgbImage {
            height: self.n_azimuth,
            width: self.n_range,
            pixels,
        }
    }
}

pub fn pauli_powers(hh: Complex64, hv: Complex64, vh: Complex64, vv: Complex64) -> [f64; 3] {
    let x = (hv + vh) * 0.5;
    [(hh - vv).norm_sqr(), 2.0 * x.norm_sqr(), (hh + vv).norm_sqr()]
}

pub fn pauli_rgb(qp: &QuadPolImage) -> PauliPowers {
    let (n_az, n_rg) = qp.dims();
    let n = n_az * n_rg;
    let px: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            pauli_powers(
                widen(qp.hh.image.samples()[i]),
                widen(qp.hv.image.samples()[i]),
                widen(qp.vh.image.samples()[i]),
                widen(qp.vv.image.samples()[i]),
            )
        })
        .collect();
    PauliPowers {
        n_azimuth: n_az,
        n_range: n_rg,
        r: px.iter().map(|p| p[0]).collect(),
        g: px.iter().map(|p| p[1]).collect(),
        b: px.iter().map(|p| p[2]).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherencyImage {
    pub n_azimuth: usize,
    pub n_range: usize,
    pub t: Vec<Herm3>,
    /// `(w_az, w_rg)` boxcar size.
    pub look_window: (usize, usize),
}

/// Plane order of the coherency tensor layout.
pub const COHERENCY_PLANES: [&str; 9] = [
    "T11", "T22", "T33", "ReT12", "ImT12", "ReT13", "ImT13", "ReT23", "ImT23",
];

impl CoherencyImage {
    pub fn get(&self, az: usize, rg: usize) -> &Herm3 {
        &self.t[az * self.n_range + rg]
    }

    /// Nine real planes in [`COHERENCY_PLANES`] order, plane-major.
    pub fn to_planes(&self) -> Vec<f64> {
        let n = self.t.len();
        let mut out = vec![0.0; 9 * n];
        for (i, m) in self.t.iter().enumerate() {
            let vals = [
                m.0[0][0].re,
                m.0[1][1].re,
                m.0[2][2].re,
                m.0[0][1].re,
                m.0[0][1].im,
                m.0[0][2].re,
                m.0[0][2].im,
                m.0[1][2].re,
                m.0[1][2].im,
            ];
            for (p, v) in vals.into_iter().enumerate() {
                out[p * n + i] = v;
            }
        }
        out
    }

    pub fn from_planes(
        n_azimuth: usize,
        n_range: usize,
        planes: &[f64],
        look_window: (usize, usize),
    ) -> Result<Self> {
        let n = n_azimuth * n_range;
        if planes.len() != 9 * n {
            return Err(SarError::DimensionMismatch(format!(
                "expected {} coherency values, found {}",
                9 * n,
                planes.len()
            )));
        }
        let t = (0..n)
            .map(|i| {
                let v = |p: usize| planes[p * n + i];
                let mut m = Herm3::from_diag([v(0), v(1), v(2)]);
                for (r, c, pr, pi) in [(0, 1, 3, 4), (0, 2, 5, 6), (1, 2, 7, 8)] {
                    m.0[r][c] = Complex64::new(v(pr), v(pi));
                    m.0[c][r] = m.0[r][c].conj();
                }
                m
            })
            .collect();
        Ok(CoherencyImage {
            n_azimuth,
            n_range,
            t,
            look_window,
        })
    }
}

/// Boxcar multilooked coherency `<k k^H>`; edge pixels average over the
/// part of the window inside the image.
pub fn coherency(qp: &QuadPolImage, window: (usize, usize)) -> Result<CoherencyImage> {
    let (n_az, n_rg) = qp.dims();
    let (w_az, w_rg) = window;
    if w_az == 0 || w_rg == 0 || w_az % 2 == 0 || w_rg % 2 == 0 {
        return Err(SarError::InvalidArgument(format!(
            "look window {w_az}x{w_rg} must be odd-sized and >= 1"
        )));
    }
    if w_az > n_az || w_rg > n_rg {
        return Err(SarError::InvalidArgument(format!(
            "look window {w_az}x{w_rg} larger than image {n_az}x{n_rg}"
        )));
    }
    let (h_az, h_rg) = (w_az / 2, w_rg / 2);
    let outer: Vec<Herm3> = (0..n_az * n_rg).map(|i| Herm3::outer(&pixel_vector(qp, i))).collect();
    // range pass, then azimuth pass; fixed summation order per pixel
    let rows: Vec<Herm3> = (0..n_az * n_rg)
        .into_par_iter()
        .map(|i| {
            let (r, c) = (i / n_rg, i % n_rg);
            let (lo, hi) = (c.saturating_sub(h_rg), (c + h_rg).min(n_rg - 1));
            (lo..=hi).fold(Herm3::zero(), |acc, j| acc + outer[r * n_rg + j])
        })
        .collect();
    let t = (0..n_az * n_rg)
        .into_par_iter()
        .map(|i| {
            let (r, c) = (i / n_rg, i % n_rg);
            let (lo, hi) = (r.saturating_sub(h_az), (r + h_az).min(n_az - 1));
            let (clo, chi) = (c.saturating_sub(h_rg), (c + h_rg).min(n_rg - 1));
            let count = ((hi - lo + 1) * (chi - clo + 1)) as f64;
            (lo..=hi).fold(Herm3::zero(), |acc, k| acc + rows[k * n_rg + c]) * (1.0 / count)
        })
        .collect();
    Ok(CoherencyImage {
        n_azimuth: n_az,
        n_range: n_rg,
        t,
        look_window: window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HAlpha {
    pub entropy: f64,
    pub anisotropy: f64,
    pub alpha_deg: f64,
    pub zone: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HAlphaImage {
    pub n_azimuth: usize,
    pub n_range: usize,
    pub pixels: Vec<HAlpha>,
}

/// Cloude-Pottier parameters of one coherency matrix. A zero-trace matrix
/// maps to all zeros in zone 9.
pub fn h_alpha_pixel(t: &Herm3) -> Result<HAlpha> {
    let trace = t.trace();
    if trace <= 0.0 {
        if trace < 0.0 {
            return Err(SarError::InvalidArgument(format!("negative coherency trace {trace}")));
        }
        return Ok(HAlpha {
            entropy: 0.0,
            anisotropy: 0.0,
            alpha_deg: 0.0,
            zone: 9,
        });
    }
    let e = t.eigh();
    if e.values[2] < -PSD_TOLERANCE * trace {
        return Err(SarError::InvalidArgument(format!(
            "coherency matrix not PSD: eigenvalue {} at trace {trace}",
            e.values[2]
        )));
    }
    let lam = e.values.map(|l| l.max(0.0));
    let sum: f64 = lam.iter().sum();
    let mut entropy = 0.0;
    let mut alpha = 0.0;
    for (l, v) in lam.iter().zip(&e.vectors) {
        let p = l / sum;
        if p > 0.0 {
            entropy -= p * p.ln() / 3f64.ln();
        }
        alpha += p * v[0].norm().min(1.0).acos().to_degrees();
    }
    let minor = lam[1] + lam[2];
    let anisotropy = if minor > 1e-12 * sum {
        ((lam[1] - lam[2]) / minor).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let entropy = entropy.clamp(0.0, 1.0);
    let alpha_deg = alpha.clamp(0.0, 90.0);
    Ok(HAlpha {
        entropy,
        anisotropy,
        alpha_deg,
        zone: classify_zone(entropy, alpha_deg),
    })
}

pub fn h_alpha(cov: &CoherencyImage) -> Result<HAlphaImage> {
    let pixels = cov.t.par_iter().map(h_alpha_pixel).collect::<Result<Vec<_>>>()?;
    Ok(HAlphaImage {
        n_azimuth: cov.n_azimuth,
        n_range: cov.n_range,
        pixels,
    })
}

/// Cloude-Pottier zone 1..9. Entropy splits at 0.5 and 0.9; alpha splits at
/// 55/40 (high), 50/40 (medium) and 47.5/42.5 (low entropy). Boundaries
/// belong to the lower zone index.
pub fn classify_zone(entropy: f64, alpha_deg: f64) -> u8 {
    let at_least = |x: f64, edge: f64| x >= edge - ZONE_TIE_TOLERANCE;
    let (base, hi, lo) = if at_least(entropy, 0.9) {
        (1, 55.0, 40.0)
    } else if at_least(entropy, 0.5) {
        (4, 50.0, 40.0)
    } else {
        (7, 47.5, 42.5)
    };
    if at_least(alpha_deg, hi) {
        base
    } else if at_least(alpha_deg, lo) {
        base + 1
    } else {
        base + 2
    }
}

/// Polarisation orientation angle in degrees, in `(-45, 45]`.
pub fn orientation_angle_pixel(t: &Herm3) -> f64 {
    let num = 2.0 * t.0[1][2].re;
    let den = t.0[1][1].re - t.0[2][2].re;
    if num.hypot(den) <= 1e-12 * t.trace().abs() || (num == 0.0 && den == 0.0) {
        return 0.0;
    }
    let theta = 0.25 * num.atan2(den).to_degrees();
    if theta <= -45.0 {
        theta + 90.0
    } else {
        theta + 0.0
    }
}

pub fn orientation_angle(cov: &CoherencyImage) -> Vec<f64> {
    cov.t.par_iter().map(orientation_angle_pixel).collect()
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
/// PSD inputs are returned unchanged.
pub fn psd_project(t: &Herm3) -> Result<Herm3> {
    let defect = t.hermitian_defect();
    if !(defect <= HERMITIAN_TOLERANCE) {
        return Err(SarError::NotHermitian(defect));
    }
    let e = t.eigh();
    if e.values[2] >= 0.0 {
        return Ok(*t);
    }
    Ok(Herm3::from_eigen(e.values.map(|l| l.max(0.0)), &e.vectors))
}

pub fn psd_project_image(cov: &CoherencyImage) -> Result<CoherencyImage> {
    let t = cov.t.par_iter().map(psd_project).collect::<Result<Vec<_>>>()?;
    Ok(CoherencyImage { t, ..cov.clone() })
}
