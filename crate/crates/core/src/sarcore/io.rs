//! SLC1 binary container with a JSON sidecar.
//!
//! Layout: magic `SLC1`, `u32` LE `n_azimuth`, `u32` LE `n_range`, then
//! `n_azimuth * n_range` interleaved little-endian `f32` (re, im) pairs in
//! azimuth-major order. Metadata lives in `<path>.meta`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex32;
use serde_json::{Map, Value};

use crate::error::{Result, SarError};
use crate::sarcore::{ComplexImage, SensorParams, SlcImage};

pub const SLC_MAGIC: &[u8; 4] = b"SLC1";
pub const HEADER_LEN: usize = 12;

/// `<path>.meta`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn encode_complex(image: &ComplexImage) -> Result<Vec<u8>> {
    if let Some(index) = image
        .samples()
        .iter()
        .position(|s| !(s.re.is_finite() && s.im.is_finite()))
    {
        return Err(SarError::NonFiniteSample { index });
    }
    let n_az = u32::try_from(image.n_azimuth())
        .map_err(|_| SarError::InvalidArgument("n_azimuth exceeds u32".into()))?;
    let n_rg = u32::try_from(image.n_range())
        .map_err(|_| SarError::InvalidArgument("n_range exceeds u32".into()))?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * image.samples().len());
    buf.extend_from_slice(SLC_MAGIC);
    buf.extend_from_slice(&n_az.to_le_bytes());
    buf.extend_from_slice(&n_rg.to_le_bytes());
    for s in image.samples() {
        buf.extend_from_slice(&s.re.to_le_bytes());
        buf.extend_from_slice(&s.im.to_le_bytes());
    }
    Ok(buf)
}

pub fn decode_complex(bytes: &[u8]) -> Result<ComplexImage> {
    if bytes.len() < HEADER_LEN {
        return Err(SarError::MalformedHeader(format!(
            "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != SLC_MAGIC {
        return Err(SarError::MalformedHeader("bad magic, expected SLC1".into()));
    }
    let n_az = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let n_rg = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = (n_az as u64) * (n_rg as u64) * 8;
    let found = (bytes.len() - HEADER_LEN) as u64;
    if expected != found {
        return Err(SarError::PayloadSizeMismatch { expected, found });
    }
    let samples = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes(c[..4].try_into().unwrap()),
                f32::from_le_bytes(c[4..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexImage::new(n_az, n_rg, samples)
}

/// Sidecar object for an SLC-like product.
pub fn slc_sidecar(img: &SlcImage) -> Map<String, Value> {
    let mut map = match serde_json::to_value(img.params) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("SensorParams serializes to an object"),
    };
    map.insert("azimuth_spacing_m".into(), img.azimuth_spacing_m.into());
    map.insert("range_spacing_m".into(), img.range_spacing_m.into());
    map
}

pub fn write_json(path: &Path, map: &Map<String, Value>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(map)
        .map_err(|e| SarError::MalformedMetadata(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| SarError::io(path, e))
}

pub fn read_json(path: &Path) -> Result<Map<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| SarError::io(path, e))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(SarError::MalformedMetadata(format!(
            "{}: top level must be an object",
            path.display()
        ))),
        Err(e) => Err(SarError::MalformedMetadata(format!("{}: {e}", path.display()))),
    }
}

pub fn write_slc(img: &SlcImage, path: &Path) -> Result<()> {
    write_slc_with(img, path, &Map::new())
}

/// Writes an SLC with additional sidecar keys (product tags, provenance).
pub fn write_slc_with(img: &SlcImage, path: &Path, extra: &Map<String, Value>) -> Result<()> {
    let payload = encode_complex(&img.image)?;
    let mut meta = slc_sidecar(img);
    for (k, v) in extra {
        meta.insert(k.clone(), v.clone());
    }
    fs::write(path, payload).map_err(|e| SarError::io(path, e))?;
    write_json(&sidecar_path(path), &meta)
}

pub fn read_slc(path: &Path) -> Result<SlcImage> {
    read_slc_with_meta(path).map(|(img, _)| img)
}

/// Reads an SLC and also returns the full sidecar object.
pub fn read_slc_with_meta(path: &Path) -> Result<(SlcImage, Map<String, Value>)> {
    let bytes = fs::read(path).map_err(|e| SarError::io(path, e))?;
    let meta = read_json(&sidecar_path(path))?;
    let image = decode_complex(&bytes)?;
    let params: SensorParams = serde_json::from_value(Value::Object(meta.clone()))
        .map_err(|e| SarError::MalformedMetadata(e.to_string()))?;
    params.validate()?;
    let spacing = |key: &str| -> Result<f64> {
        meta.get(key)
            .and_then(Value::as_f64)
            .ok_or_else(|| SarError::MalformedMetadata(format!("missing numeric key '{key}'")))
    };
    let slc = SlcImage::from_parts(
        image,
        params,
        spacing("azimuth_spacing_m")?,
        spacing("range_spacing_m")?,
    )?;
    Ok((slc, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn slc(n_az: usize, n_rg: usize, samples: Vec<Complex32>) -> SlcImage {
        SlcImage::new(
            ComplexImage::new(n_az, n_rg, samples).unwrap(),
            SensorParams::desk_scale(),
        )
        .unwrap()
    }

    #[test]
    fn zero_image_payload_layout() {
        let img = slc(2, 2, vec![Complex32::new(0.0, 0.0); 4]);
        let bytes = encode_complex(&img.image).unwrap();
        assert_eq!(bytes.len(), 12 + 32);
        assert_eq!(&bytes[..4], b"SLC1");
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert!(bytes[12..].iter().all(|&b| b == 0));
    }

    #[test]
    fn round_trip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.slc");
        let q = dir.path().join("b.slc");
        let img = slc(
            2,
            3,
            (0..6).map(|i| Complex32::new(i as f32 * 0.1, -(i as f32))).collect(),
        );
        write_slc(&img, &p).unwrap();
        write_slc(&img, &q).unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap());
        assert_eq!(fs::read(sidecar_path(&p)).unwrap(), fs::read(sidecar_path(&q)).unwrap());
        assert_eq!(read_slc(&p).unwrap(), img);
    }

    #[test]
    fn truncated_payload_detected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.slc");
        write_slc(&slc(2, 2, vec![Complex32::new(1.0, 2.0); 4]), &p).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes.pop();
        fs::write(&p, bytes).unwrap();
        let err = read_slc(&p).unwrap_err();
        assert!(err.to_string().contains("payload size mismatch"), "{err}");
    }

    #[test]
    fn invalid_prf_in_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.slc");
        write_slc(&slc(1, 1, vec![Complex32::new(1.0, 0.0)]), &p).unwrap();
        let mut meta = read_json(&sidecar_path(&p)).unwrap();
        meta.insert("prf_hz".into(), (-5.0).into());
        write_json(&sidecar_path(&p), &meta).unwrap();
        let err = read_slc(&p).unwrap_err();
        assert!(err.to_string().contains("invalid SensorParams"), "{err}");
    }

    #[test]
    fn missing_sidecar_and_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.slc");
        write_slc(&slc(1, 1, vec![Complex32::new(1.0, 0.0)]), &p).unwrap();
        fs::remove_file(sidecar_path(&p)).unwrap();
        assert!(matches!(read_slc(&p), Err(SarError::Io { .. })));
        assert!(matches!(decode_complex(b"SLC2\0\0\0\0\0\0\0\0"), Err(SarError::MalformedHeader(_))));
        assert!(matches!(decode_complex(b"SLC"), Err(SarError::MalformedHeader(_))));
    }

    #[test]
    fn non_finite_payload_rejected_with_index() {
        let mut bytes = encode_complex(&ComplexImage::zeros(1, 3)).unwrap();
        bytes[12 + 8 * 2 + 4..12 + 8 * 2 + 8].copy_from_slice(&f32::INFINITY.to_le_bytes());
        match decode_complex(&bytes) {
            Err(SarError::NonFiniteSample { index }) => assert_eq!(index, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nan_sample_blocks_write() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nan.slc");
        let mut img = slc(2, 2, vec![Complex32::new(0.0, 0.0); 4]);
        img.image.samples_mut()[1].re = f32::NAN;
        assert!(matches!(write_slc(&img, &p), Err(SarError::NonFiniteSample { index: 1 })));
        assert!(!p.exists());
        assert!(!sidecar_path(&p).exists());
    }

    #[test]
    fn spacing_mismatch_in_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.slc");
        write_slc(&slc(1, 1, vec![Complex32::new(1.0, 0.0)]), &p).unwrap();
        let mut meta = read_json(&sidecar_path(&p)).unwrap();
        meta.insert("range_spacing_m".into(), 2.0.into());
        write_json(&sidecar_path(&p), &meta).unwrap();
        assert!(matches!(read_slc(&p), Err(SarError::MetadataMismatch(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn write_read_is_bit_exact(
            n_az in 1usize..6,
            n_rg in 1usize..6,
            seed in proptest::collection::vec((-1e6f32..1e6f32, -1e6f32..1e6f32), 36)
        ) {
            let samples: Vec<Complex32> = seed.iter().take(n_az * n_rg).map(|&(a, b)| Complex32::new(a, b)).collect();
            let img = slc(n_az, n_rg, samples);
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("p.slc");
            write_slc(&img, &p).unwrap();
            let back = read_slc(&p).unwrap();
            for (a, b) in img.image.samples().iter().zip(back.image.samples()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
            prop_assert_eq!(back.params, img.params);
        }
    }
}
