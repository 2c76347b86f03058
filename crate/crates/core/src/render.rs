//! Display composites: percentile stretch and 8-bit RGB PNG export.

use std::path::Path;

use crate::error::{Result, SarError};

/// Three-channel real image, row-major with rows along azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<[f32; 3]>,
}

impl RgbImage {
    pub fn zeros(height: usize, width: usize) -> Self {
        RgbImage {
            height,
            width,
            pixels: vec![[0.0; 3]; height * width],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> [f32; 3] {
        self.pixels[row * self.width + col]
    }

    /// 8-bit quantisation of values clipped to `[0, 1]`.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|p| p.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8))
            .collect()
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let w = u32::try_from(self.width).map_err(|_| SarError::InvalidArgument("image too wide".into()))?;
        let h = u32::try_from(self.height).map_err(|_| SarError::InvalidArgument("image too tall".into()))?;
        image::save_buffer_with_format(path, &self.to_rgb8(), w, h, image::ColorType::Rgb8, image::ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => SarError::Io {
                    path: path.to_path_buf(),
                    source: io,
                },
                other => SarError::InvalidArgument(other.to_string()),
            })
    }
}

/// Linear-interpolated percentile (`q` in `[0, 100]`) of a sample.
pub fn percentile(values: &[f32], q: f64) -> f32 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f32::total_cmp);
    let pos = q.clamp(0.0, 100.0) / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let t = (pos - lo as f64) as f32;
    v[lo] + (v[hi] - v[lo]) * t
}

/// Maps `[lo, hi]` onto `[0, 1]` with clipping; a degenerate range maps to 0.
pub fn stretch(v: f32, lo: f32, hi: f32) -> f32 {
    if hi > lo {
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v: Vec<f32> = (0..101).map(|i| i as f32).collect();
        assert_eq!(percentile(&v, 1.0), 1.0);
        assert_eq!(percentile(&v, 99.0), 99.0);
        assert_eq!(percentile(&[0.0, 10.0], 50.0), 5.0);
    }

    #[test]
    fn stretch_clips() {
        assert_eq!(stretch(5.0, 0.0, 2.0), 1.0);
        assert_eq!(stretch(-1.0, 0.0, 2.0), 0.0);
        assert_eq!(stretch(1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn png_is_rgb8() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        let mut img = RgbImage::zeros(2, 3);
        img.pixels[1] = [1.0, 0.5, 0.0];
        img.write_png(&p).unwrap();
        let back = image::open(&p).unwrap().to_rgb8();
        assert_eq!(back.dimensions(), (3, 2));
        assert_eq!(back.get_pixel(1, 0).0, [255, 128, 0]);
    }
}
