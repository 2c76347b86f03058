//! Matched-filter image formation and impulse-response metrology.
//!
//! Range and azimuth references are normalised to unit energy, so a unit
//! scatterer focuses to a peak of `sqrt(N_range_replica * N_azimuth_replica)`.
//! No range-cell migration correction is applied; azimuth compression refuses
//! geometries whose migration exceeds [`MIGRATION_LIMIT_CELLS`].

use std::f64::consts::PI;

use num_complex::{Complex32, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::echo_sim::{
    gate_migration_cells, multipath_ranges, raw_grid, Anisotropy, RawData, SceneExtent, Target,
    MIGRATION_LIMIT_CELLS,
};
use crate::error::{Result, SarError};
use crate::sarcore::fft::{next_pow2_at_least, transpose, FftPair};
use crate::sarcore::window::{window, WindowKind};
use crate::sarcore::{widen, ComplexImage, SensorParams, SlcImage, SPEED_OF_LIGHT};

/// Half-width (cells) of the neighbourhood used for IRW and PSLR.
pub const METROLOGY_HALF_WIDTH: usize = 20;
/// Zero-padding factor for peak interpolation.
pub const INTERPOLATION_FACTOR: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusReport {
    pub peak_position: (usize, usize),
    pub peak_magnitude: f64,
    pub range_irw_m: f64,
    pub azimuth_irw_m: f64,
    /// Worse of the two axis PSLRs.
    pub pslr_db: f64,
    pub range_pslr_db: f64,
    pub azimuth_pslr_db: f64,
}

/// Unit-energy range replica, centred on sample `len / 2`.
pub fn range_replica(params: &SensorParams, kind: WindowKind) -> Result<Vec<Complex64>> {
    let n = params.chirp_samples();
    let w = window(kind, n)?;
    let c = n / 2;
    let kr = params.chirp_rate();
    let h: Vec<Complex64> = (0..n)
        .map(|k| {
            let u = (k as f64 - c as f64) / params.range_sample_rate_hz;
            Complex64::from_polar(w[k], PI * kr * u * u)
        })
        .collect();
    Ok(normalize(h))
}

/// Unit-energy azimuth reference for the range gate at `r0`, carrying the
/// residual phase `-4 pi (R(eta) - r0) / lambda` over the illuminated aperture.
pub fn azimuth_reference(params: &SensorParams, r0: f64, kind: WindowKind) -> Result<Vec<Complex64>> {
    let dx = params.azimuth_spacing();
    let half = (params.synthetic_aperture_length(r0) / 2.0 / dx + 1e-9).floor() as usize;
    let n = 2 * half + 1;
    let w = window(kind, n)?;
    let lambda = params.wavelength();
    let h: Vec<Complex64> = (0..n)
        .map(|k| {
            let x = (k as f64 - half as f64) * dx;
            let excess = (r0 * r0 + x * x).sqrt() - r0;
            Complex64::from_polar(w[k], -4.0 * PI * excess / lambda)
        })
        .collect();
    Ok(normalize(h))
}

fn normalize(mut h: Vec<Complex64>) -> Vec<Complex64> {
    let e: f64 = h.iter().map(|x| x.norm_sqr()).sum();
    if e > 0.0 {
        let s = 1.0 / e.sqrt();
        h.iter_mut().for_each(|x| *x *= s);
    }
    h
}

/// Linear correlation of `signal` with `replica` (replica centre at index
/// `replica.len() / 2`), evaluated through a zero-padded FFT of length `m`.
/// Output sample `j` is the match for a replica centred on input sample `j`.
fn correlate(signal: &[Complex64], replica_spectrum: &[Complex64], plan: &FftPair) -> Vec<Complex64> {
    let m = plan.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..signal.len()].copy_from_slice(signal);
    plan.forward(&mut buf);
    for (x, h) in buf.iter_mut().zip(replica_spectrum) {
        *x *= h.conj();
    }
    plan.inverse(&mut buf);
    buf.truncate(signal.len());
    buf
}

fn replica_spectrum(replica: &[Complex64], plan: &FftPair) -> Vec<Complex64> {
    let m = plan.len();
    let c = replica.len() / 2;
    let mut g = vec![Complex64::new(0.0, 0.0); m];
    for (k, h) in replica.iter().enumerate() {
        g[(k + m - c) % m] = *h;
    }
    plan.forward(&mut g);
    g
}

fn to_f32(v: &[Complex64]) -> Vec<Complex32> {
    v.iter().map(|c| Complex32::new(c.re as f32, c.im as f32)).collect()
}

/// Frequency-domain matched filtering of every pulse with the chirp replica.
pub fn range_compress(raw: &RawData, kind: WindowKind) -> Result<RawData> {
    raw.params.validate()?;
    let (n_az, n_rg) = raw.data.dims();
    let n_rep = raw.params.chirp_samples();
    if n_rep > n_rg {
        return Err(SarError::ChirpTooLong {
            chirp: n_rep,
            window: n_rg,
        });
    }
    let replica = range_replica(&raw.params, kind)?;
    let plan = FftPair::new(next_pow2_at_least(n_rg + n_rep - 1));
    let spectrum = replica_spectrum(&replica, &plan);
    let mut out = vec![Complex32::new(0.0, 0.0); n_az * n_rg];
    out.par_chunks_mut(n_rg).enumerate().for_each(|(k, dst)| {
        let row: Vec<Complex64> = raw.data.row(k).iter().map(|&s| widen(s)).collect();
        dst.copy_from_slice(&to_f32(&correlate(&row, &spectrum, &plan)));
    });
    Ok(raw.with_data(ComplexImage::new(n_az, n_rg, out)?))
}

/// Azimuth matched filtering of every range gate with its own hyperbolic
/// reference.
pub fn azimuth_compress(rc: &RawData, kind: WindowKind) -> Result<SlcImage> {
    rc.params.validate()?;
    let grid = rc.grid();
    let (n_az, n_rg) = rc.data.dims();
    let far = grid.range_of_col(n_rg.saturating_sub(1));
    let cells = gate_migration_cells(&rc.params, far);
    if cells > MIGRATION_LIMIT_CELLS {
        return Err(SarError::MigrationExceeded {
            cells,
            limit: MIGRATION_LIMIT_CELLS,
        });
    }
    let longest = azimuth_reference(&rc.params, far.max(grid.range_of_col(0)), kind)?.len();
    let plan = FftPair::new(next_pow2_at_least(n_az + longest - 1));
    let columns = transpose(rc.data.samples(), n_az, n_rg);
    let focused: Vec<Vec<Complex32>> = (0..n_rg)
        .into_par_iter()
        .map(|j| -> Result<Vec<Complex32>> {
            let reference = azimuth_reference(&rc.params, grid.range_of_col(j), kind)?;
            let spectrum = replica_spectrum(&reference, &plan);
            let col: Vec<Complex64> = columns[j * n_az..(j + 1) * n_az].iter().map(|&s| widen(s)).collect();
            Ok(to_f32(&correlate(&col, &spectrum, &plan)))
        })
        .collect::<Result<_>>()?;
    let flat: Vec<Complex32> = focused.into_iter().flatten().collect();
    let samples = transpose(&flat, n_rg, n_az);
    SlcImage::new(ComplexImage::new(n_az, n_rg, samples)?, rc.params)
}

/// Range then azimuth compression with the same window.
pub fn focus(raw: &RawData, kind: WindowKind) -> Result<SlcImage> {
    azimuth_compress(&range_compress(raw, kind)?, kind)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Band-limited impulse kernel: the inverse transform of a flat band
/// `[f_lo, f_hi]`, scaled by the fraction of the full band it occupies.
fn band_kernel(dt: f64, f_lo: f64, f_hi: f64, full: f64) -> Complex64 {
    let bw = f_hi - f_lo;
    let mid = 0.5 * (f_hi + f_lo);
    Complex64::from_polar(bw / full * sinc(bw * dt), 2.0 * PI * mid * dt)
}

/// Fast analytic image of `targets`: separable sinc responses at the
/// true positions with phase `-4 pi R0 / lambda`, scaled to the gain of the
/// unit-energy matched filters.
pub fn ideal_psf(targets: &[Target], params: &SensorParams, extent: &SceneExtent) -> Result<SlcImage> {
    params.validate()?;
    extent.validate()?;
    let grid = raw_grid(params, extent);
    let (n_az, n_rg) = (grid.n_azimuth, grid.n_range);
    let mut acc = vec![Complex64::new(0.0, 0.0); n_az * n_rg];
    let b = params.chirp_bandwidth_hz;
    let bd = params.processed_doppler_bandwidth();
    let mut points = Vec::new();
    for t in targets {
        match t {
            Target::Point(p) => points.push((p.slant_range_m, p.azimuth_m, p.reflectivity, p.anisotropy)),
            Target::Multipath(m) => {
                for (r, refl) in multipath_ranges(m, params).into_iter().zip(m.bounce_reflectivities) {
                    points.push((r, m.azimuth_m, refl, Anisotropy::Isotropic));
                }
            }
        }
    }
    for (r0, az, refl, anisotropy) in points {
        if (r0 - params.center_slant_range_m).abs() > extent.range_window_m / 2.0
            || az.abs() > extent.azimuth_window_m / 2.0
        {
            return Err(SarError::TargetOutsideExtent(format!("(range {r0} m, azimuth {az} m)")));
        }
        let (rlo, rhi) = match anisotropy {
            Anisotropy::RangeBand { f_lo_hz, f_hi_hz } => (f_lo_hz, f_hi_hz),
            _ => (-b / 2.0, b / 2.0),
        };
        let (dlo, dhi) = match anisotropy {
            Anisotropy::DopplerBand { f_lo_hz, f_hi_hz } => (f_lo_hz, f_hi_hz),
            _ => (-bd / 2.0, bd / 2.0),
        };
        let n_a = azimuth_reference(params, r0, WindowKind::Rect)?.len();
        let gain = ((params.chirp_samples() * n_a) as f64).sqrt();
        let phase = refl * Complex64::from_polar(gain, -4.0 * PI * r0 / params.wavelength());
        let rk: Vec<Complex64> = (0..n_rg)
            .map(|j| band_kernel(2.0 * (grid.range_of_col(j) - r0) / SPEED_OF_LIGHT, rlo, rhi, b))
            .collect();
        let v = params.platform_velocity_mps;
        acc.par_chunks_mut(n_rg).enumerate().for_each(|(k, row)| {
            let ak = phase * band_kernel((grid.azimuth_of_row(k) - az) / v, dlo, dhi, bd);
            for (x, r) in row.iter_mut().zip(&rk) {
                *x += ak * r;
            }
        });
    }
    SlcImage::new(ComplexImage::new(n_az, n_rg, to_f32(&acc))?, *params)
}

struct AxisMetrics {
    irw_cells: f64,
    pslr_db: f64,
    peak: f64,
}

/// Zero-padded FFT interpolation of a short cut, returning magnitudes over
/// the non-wrapped span `[0, (n - 1) * factor]`.
fn interpolate_cut(cut: &[Complex64], factor: usize) -> Vec<f64> {
    let n = cut.len();
    let m = n * factor;
    let mut spec = cut.to_vec();
    FftPair::new(n).forward(&mut spec);
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    let pos = n.div_ceil(2);
    padded[..pos].copy_from_slice(&spec[..pos]);
    let neg = n - pos;
    padded[m - neg..].copy_from_slice(&spec[pos..]);
    if n % 2 == 0 {
        // split the Nyquist bin symmetrically
        let nyq = spec[n / 2] * 0.5;
        padded[n / 2] = nyq;
        padded[m - n / 2] = nyq;
    }
    FftPair::new(m).inverse(&mut padded);
    padded
        .iter()
        .take((n - 1) * factor + 1)
        .map(|x| x.norm() * factor as f64)
        .collect()
}

fn axis_metrics(cut: &[Complex64]) -> Result<AxisMetrics> {
    let f = INTERPOLATION_FACTOR;
    let mag = interpolate_cut(cut, f);
    let centre = (cut.len() / 2) * f;
    // local maximum nearest the centre sample
    let search = f;
    let (ipk, peak) = mag
        .iter()
        .enumerate()
        .skip(centre - search)
        .take(2 * search + 1)
        .fold((centre, f64::MIN), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    if !(peak > 0.0) {
        return Err(SarError::NoDominantPeak);
    }
    let thr = peak / 2f64.sqrt();
    let left = (0..ipk).rev().find(|&i| mag[i] < thr).ok_or(SarError::NoDominantPeak)?;
    let right = (ipk + 1..mag.len()).find(|&i| mag[i] < thr).ok_or(SarError::NoDominantPeak)?;
    let cross = |a: usize, b: usize| a as f64 + (thr - mag[a]) / (mag[b] - mag[a]) * (b as f64 - a as f64);
    let xl = cross(left, left + 1);
    let xr = cross(right - 1, right);
    let irw_cells = (xr - xl) / f as f64;

    // mainlobe extends to the first local minimum on each side
    let mut lo = ipk;
    while lo > 0 && mag[lo - 1] <= mag[lo] {
        lo -= 1;
    }
    let mut hi = ipk;
    while hi + 1 < mag.len() && mag[hi + 1] <= mag[hi] {
        hi += 1;
    }
    let side = mag[..lo].iter().chain(&mag[hi + 1..]).fold(0.0f64, |m, &v| m.max(v));
    let pslr_db = if side > 0.0 {
        20.0 * (side / peak).log10()
    } else {
        f64::NEG_INFINITY
    };
    Ok(AxisMetrics {
        irw_cells,
        pslr_db,
        peak,
    })
}

/// Measures IRW (-3 dB width) and PSLR of the response nearest `approx_peak`.
pub fn measure_response(img: &SlcImage, approx_peak: (usize, usize)) -> Result<FocusReport> {
    let (n_az, n_rg) = img.image.dims();
    let (a0, r0) = approx_peak;
    if a0 >= n_az || r0 >= n_rg {
        return Err(SarError::InvalidArgument(format!(
            "approximate peak {approx_peak:?} outside {n_az}x{n_rg} image"
        )));
    }
    // refine to the strongest pixel within +/-2 cells
    let mut best = (a0, r0);
    let mut best_v = -1.0f32;
    for a in a0.saturating_sub(2)..(a0 + 3).min(n_az) {
        for r in r0.saturating_sub(2)..(r0 + 3).min(n_rg) {
            let v = img.image.get(a, r).norm();
            if v > best_v {
                best_v = v;
                best = (a, r);
            }
        }
    }
    let h = METROLOGY_HALF_WIDTH;
    let (pa, pr) = best;
    if pa < h || pr < h || pa + h >= n_az || pr + h >= n_rg {
        return Err(SarError::PeakOnBorder(format!(
            "peak {best:?} needs {h} cells of context in a {n_az}x{n_rg} image"
        )));
    }
    let range_cut: Vec<Complex64> = (pr - h..=pr + h).map(|r| widen(img.image.get(pa, r))).collect();
    let az_cut: Vec<Complex64> = (pa - h..=pa + h).map(|a| widen(img.image.get(a, pr))).collect();
    let rm = axis_metrics(&range_cut)?;
    let am = axis_metrics(&az_cut)?;
    Ok(FocusReport {
        peak_position: best,
        peak_magnitude: rm.peak.max(am.peak),
        range_irw_m: rm.irw_cells * img.range_spacing_m,
        azimuth_irw_m: am.irw_cells * img.azimuth_spacing_m,
        pslr_db: rm.pslr_db.max(am.pslr_db),
        range_pslr_db: rm.pslr_db,
        azimuth_pslr_db: am.pslr_db,
    })
}

/// Pixel with the largest magnitude (first in scan order on ties).
pub fn argmax(img: &ComplexImage) -> (usize, usize) {
    let mut best = 0usize;
    let mut best_v = f32::MIN;
    for (i, s) in img.samples().iter().enumerate() {
        let v = s.norm_sqr();
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    (best / img.n_range(), best % img.n_range())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo_sim::{simulate_raw, PointTarget};

    fn extent() -> SceneExtent {
        SceneExtent {
            range_window_m: 60.0,
            azimuth_window_m: 40.0,
        }
    }

    fn unit(r: f64, a: f64) -> Target {
        PointTarget::isotropic(r, a, Complex64::new(1.0, 0.0)).into()
    }

    /// Direct O(n*m) correlation, independent of the FFT path.
    fn direct_correlation(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        let c = h.len() / 2;
        (0..x.len())
            .map(|j| {
                h.iter()
                    .enumerate()
                    .filter_map(|(k, hk)| {
                        let m = j as isize + k as isize - c as isize;
                        (m >= 0 && (m as usize) < x.len()).then(|| x[m as usize] * hk.conj())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn fft_correlation_matches_direct() {
        let x: Vec<Complex64> = (0..50).map(|i| Complex64::new((i as f64).sin(), (0.3 * i as f64).cos())).collect();
        let h: Vec<Complex64> = (0..9).map(|i| Complex64::from_polar(1.0, 0.2 * (i * i) as f64)).collect();
        let plan = FftPair::new(next_pow2_at_least(50 + 9 - 1));
        let fast = correlate(&x, &replica_spectrum(&h, &plan), &plan);
        for (a, b) in fast.iter().zip(direct_correlation(&x, &h)) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn matched_filter_energy_relation() {
        // a unit impulse through a unit-energy replica keeps unit energy
        let p = SensorParams::desk_scale();
        let h = range_replica(&p, WindowKind::Rect).unwrap();
        let n = 4000;
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[2000] = Complex64::new(1.0, 0.0);
        let plan = FftPair::new(next_pow2_at_least(n + h.len() - 1));
        let y = correlate(&x, &replica_spectrum(&h, &plan), &plan);
        let e: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        assert!((e - 1.0).abs() < 1e-6, "{e}");
        let eh: f64 = h.iter().map(|v| v.norm_sqr()).sum();
        assert!((eh - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_raw_stays_zero() {
        let p = SensorParams::desk_scale();
        let raw = simulate_raw(&[], &p, &extent()).unwrap();
        let rc = range_compress(&raw, WindowKind::Rect).unwrap();
        assert!(rc.data.samples().iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn chirp_longer_than_window_rejected() {
        let p = SensorParams::desk_scale();
        let raw = RawData {
            data: ComplexImage::zeros(4, 100),
            params: p,
            extent: extent(),
        };
        assert!(matches!(range_compress(&raw, WindowKind::Rect), Err(SarError::ChirpTooLong { .. })));
    }

    #[test]
    fn point_target_focuses_at_truth() {
        let p = SensorParams::desk_scale();
        let raw = simulate_raw(&[unit(10_000.0, 0.0)], &p, &extent()).unwrap();
        let slc = focus(&raw, WindowKind::Rect).unwrap();
        let g = slc.grid();
        let (a, r) = argmax(&slc.image);
        assert!((a as isize - g.center_row() as isize).abs() <= 1);
        assert!((r as isize - g.center_col() as isize).abs() <= 1);
        let n_a = azimuth_reference(&p, 10_000.0, WindowKind::Rect).unwrap().len();
        let expected = ((p.chirp_samples() * n_a) as f64).sqrt();
        let got = slc.image.get(a, r).norm() as f64;
        assert!((got / expected - 1.0).abs() < 0.01, "{got} vs {expected}");
        // carrier phase at closest approach is retained
        let want = (-4.0 * PI * 10_000.0 / p.wavelength()).rem_euclid(2.0 * PI);
        let d = (slc.image.get(a, r).arg() as f64 - want).rem_euclid(2.0 * PI);
        assert!(d.min(2.0 * PI - d) < 0.05, "phase error {d}");
    }

    #[test]
    fn two_targets_ten_cells_apart() {
        let p = SensorParams::desk_scale();
        let dx = 10.0 * p.azimuth_spacing();
        let raw = simulate_raw(&[unit(10_000.0, -dx / 2.0), unit(10_000.0, dx / 2.0)], &p, &extent()).unwrap();
        let slc = focus(&raw, WindowKind::Rect).unwrap();
        let g = slc.grid();
        let col = g.center_col();
        let mags: Vec<f32> = (0..g.n_azimuth).map(|k| slc.image.get(k, col).norm()).collect();
        let r1 = g.row_of_azimuth(-dx / 2.0).round() as usize;
        let r2 = g.row_of_azimuth(dx / 2.0).round() as usize;
        assert_eq!(r2 - r1, 10);
        for r in [r1, r2] {
            assert!(mags[r] > mags[r - 1] && mags[r] > mags[r + 1]);
        }
        let mid = mags[(r1 + r2) / 2];
        assert!(mid < 0.3 * mags[r1]);
    }

    #[test]
    fn migration_bound_enforced_at_focus() {
        let mut p = SensorParams::desk_scale();
        p.antenna_length_m = 0.5;
        p.prf_hz = 700.0;
        let raw = RawData {
            data: ComplexImage::zeros(64, 1400),
            params: p,
            extent: extent(),
        };
        let err = azimuth_compress(&raw, WindowKind::Rect).unwrap_err();
        assert!(err.is_physics_bound());
    }

    #[test]
    fn ideal_psf_basics() {
        let p = SensorParams::desk_scale();
        let empty = ideal_psf(&[], &p, &extent()).unwrap();
        assert!(empty.image.samples().iter().all(|s| s.norm() == 0.0));
        let one = ideal_psf(&[unit(10_000.0, 0.0)], &p, &extent()).unwrap();
        let g = one.grid();
        assert_eq!(argmax(&one.image), (g.center_row(), g.center_col()));
    }

    fn sinc_image(w: f64, n: usize, centre: (usize, usize)) -> SlcImage {
        let samples = (0..n * n)
            .map(|i| {
                let (a, r) = ((i / n) as f64 - centre.0 as f64, (i % n) as f64 - centre.1 as f64);
                Complex32::new((sinc(a / w) * sinc(r / w)) as f32, 0.0)
            })
            .collect();
        SlcImage::new(ComplexImage::new(n, n, samples).unwrap(), SensorParams::desk_scale()).unwrap()
    }

    #[test]
    fn sinc_width_measured() {
        let w = 3.0;
        let img = sinc_image(w, 64, (32, 30));
        let rep = measure_response(&img, (32, 30)).unwrap();
        let want_r = 0.886 * w * img.range_spacing_m;
        let want_a = 0.886 * w * img.azimuth_spacing_m;
        assert!((rep.range_irw_m / want_r - 1.0).abs() < 0.01, "{rep:?}");
        assert!((rep.azimuth_irw_m / want_a - 1.0).abs() < 0.01, "{rep:?}");
        assert!((rep.range_pslr_db + 13.26).abs() < 0.3, "{rep:?}");
    }

    #[test]
    fn irw_translation_invariant() {
        let a = measure_response(&sinc_image(2.5, 64, (30, 30)), (30, 30)).unwrap();
        let b = measure_response(&sinc_image(2.5, 64, (33, 27)), (33, 27)).unwrap();
        assert!((a.range_irw_m - b.range_irw_m).abs() < 1e-9);
        assert!((a.azimuth_irw_m - b.azimuth_irw_m).abs() < 1e-9);
    }

    #[test]
    fn flat_image_has_no_peak() {
        let p = SensorParams::desk_scale();
        let img = SlcImage::new(
            ComplexImage::new(50, 50, vec![Complex32::new(1.0, 0.0); 2500]).unwrap(),
            p,
        )
        .unwrap();
        assert!(matches!(measure_response(&img, (25, 25)), Err(SarError::NoDominantPeak)));
    }

    #[test]
    fn border_peak_rejected() {
        let img = sinc_image(2.0, 64, (5, 32));
        assert!(matches!(measure_response(&img, (5, 32)), Err(SarError::PeakOnBorder(_))));
    }
}
