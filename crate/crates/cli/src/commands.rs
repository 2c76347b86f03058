//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use sarlayers::echo_sim::{migration_check, read_raw, write_raw};
use sarlayers::focus::{argmax, focus, measure_response};
use sarlayers::physclust::{build_features, kmeans};
use sarlayers::polarimetry::{
    coherency, h_alpha, orientation_angle, pauli_rgb, psd_project_image, CoherencyImage, COHERENCY_PLANES,
};
use sarlayers::sarcore::io::{read_slc, write_slc_with};
use sarlayers::sarcore::tensor::{read_tensor, write_tensor, Tensor};
use sarlayers::scene::SceneSpec;
use sarlayers::sublook::{estimate_doppler_centroid, sublook_decompose_with, sublook_rgb, SubLookConfig};
use sarlayers::timefreq::{spectrogram_with, BandTiling, Spectrogram, SpectrogramConfig};
use sarlayers::{QuadPolImage, Result, SarError, SlcImage};

use crate::provenance::Provenance;
use crate::{Command, QuadArgs};

pub fn run(cmd: Command, argv: Vec<String>) -> Result<()> {
    let mut prov = Provenance::new(argv);
    match cmd {
        Command::Simulate {
            scene,
            out,
            channel,
            seed,
        } => {
            prov.input(&scene)?;
            let mut spec = SceneSpec::load(&scene)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let cells = migration_check(&spec.plain_targets(), &spec.sensor, &spec.extent);
            println!("migration_check_cells: {cells:.6}");
            let raw = spec.simulate(channel)?;
            let mut extra = prov.extras();
            extra.insert("seed".into(), spec.seed.into());
            extra.insert("noise_sigma".into(), spec.noise_sigma.into());
            if let Some(c) = channel {
                extra.insert("channel".into(), json!(c));
            }
            write_raw(&raw, &out, &extra)?;
            log::info!("wrote raw {:?} to {}", raw.data.dims(), out.display());
        }
        Command::Focus {
            raw,
            out,
            window,
            report,
        } => {
            prov.input(&raw)?;
            let data = read_raw(&raw)?;
            let slc = focus(&data, window)?;
            let mut extra = prov.extras();
            extra.insert("product".into(), "slc".into());
            extra.insert("window".into(), json!(window));
            if report {
                let r = measure_response(&slc, argmax(&slc.image))?;
                println!("{}", serde_json::to_string_pretty(&r).expect("report serialises"));
                extra.insert("focus_report".into(), json!(r));
            }
            write_slc_with(&slc, &out, &extra)?;
        }
        Command::Sublook {
            slc,
            out_prefix,
            looks,
            centroid,
            weighting,
            rgb,
        } => {
            prov.input(&slc)?;
            let img = read_slc(&slc)?;
            let centroid = match centroid {
                Some(c) => c,
                None => estimate_doppler_centroid(&img)?,
            };
            let mut cfg = SubLookConfig::new(looks, centroid);
            cfg.weighting = weighting;
            let stack = sublook_decompose_with(&img, &cfg)?;
            if rgb.is_some() && looks != 3 {
                return Err(SarError::InvalidArgument("--rgb needs exactly 3 looks".into()));
            }
            let total = img.image.energy();
            println!("centroid_hz: {centroid:.6}");
            for (i, look) in stack.looks.iter().enumerate() {
                let path = look_path(&out_prefix, i + 1);
                let mut extra = prov.extras();
                extra.insert("product".into(), "sublook".into());
                extra.insert("look".into(), (i + 1).into());
                extra.insert("n_looks".into(), looks.into());
                extra.insert("centroid_hz".into(), centroid.into());
                extra.insert("band_edges_hz".into(), json!(stack.band_edges_hz));
                write_slc_with(&img.with_image(look.clone()), &path, &extra)?;
                let frac = if total > 0.0 { look.energy() / total } else { 0.0 };
                println!("look {}: energy_fraction {frac:.6} -> {}", i + 1, path.display());
            }
            if let Some(png) = rgb {
                sublook_rgb(&stack)?.write_png(&png)?;
                prov.write_sidecar(&png, product("sublook_rgb"))?;
            }
        }
        Command::Spectrogram {
            slc,
            out,
            origin,
            patch,
            bands,
            overlap,
            centroid,
        } => {
            prov.input(&slc)?;
            let img = read_slc(&slc)?;
            let origins = if origin.is_empty() {
                vec![centred_origin(&img, patch)?]
            } else {
                origin
            };
            let mut cfg = SpectrogramConfig::new(bands.0, bands.1);
            cfg.doppler_centroid_hz = centroid;
            if overlap {
                cfg.tiling = BandTiling::HannOverlap;
            }
            let specs = origins
                .iter()
                .map(|&o| spectrogram_with(&img, o, patch, &cfg))
                .collect::<Result<Vec<_>>>()?;
            let data = specs.iter().flat_map(|s| s.energies.iter().map(|&e| e as f32)).collect();
            let t = Tensor::new(vec![specs.len(), bands.0, bands.1], data)?
                .with_meta("product", "spectrogram")
                .with_meta("axes", json!(["patch", "range_band", "azimuth_band"]))
                .with_meta("range_band_centers_hz", json!(specs[0].range_band_centers_hz))
                .with_meta("azimuth_band_centers_hz", json!(specs[0].azimuth_band_centers_hz))
                .with_meta("origins", json!(origins))
                .with_meta("patch_size", patch)
                .with_meta("tiling", json!(cfg.tiling));
            write_tensor(&with_prov(t, &prov), &out)?;
        }
        Command::Pauli { quad, out, png } => {
            let qp = read_quad(&quad, &mut prov)?;
            let p = pauli_rgb(&qp);
            let data = p.r.iter().chain(&p.g).chain(&p.b).map(|&v| v as f32).collect();
            let t = Tensor::new(vec![3, p.n_azimuth, p.n_range], data)?
                .with_meta("product", "pauli")
                .with_meta("planes", json!(["|HH-VV|^2", "2|HV|^2", "|HH+VV|^2"]));
            write_tensor(&with_prov(t, &prov), &out)?;
            if let Some(png) = png {
                p.to_rgb().write_png(&png)?;
                prov.write_sidecar(&png, product("pauli_rgb"))?;
            }
        }
        Command::Coherency { quad, out, window } => {
            let qp = read_quad(&quad, &mut prov)?;
            let c = coherency(&qp, window)?;
            write_coherency(&c, &out, &prov)?;
        }
        Command::Halpha { coherency, out } => {
            let c = read_coherency(&coherency, &mut prov)?;
            let ha = h_alpha(&c)?;
            let n = ha.pixels.len();
            let mut data = vec![0.0f32; 4 * n];
            let mut counts = [0usize; 9];
            for (i, p) in ha.pixels.iter().enumerate() {
                data[i] = p.entropy as f32;
                data[n + i] = p.anisotropy as f32;
                data[2 * n + i] = p.alpha_deg as f32;
                data[3 * n + i] = f32::from(p.zone);
                counts[usize::from(p.zone) - 1] += 1;
            }
            println!("zone_counts: {counts:?}");
            let t = Tensor::new(vec![4, ha.n_azimuth, ha.n_range], data)?
                .with_meta("product", "h_alpha")
                .with_meta("planes", json!(["entropy", "anisotropy", "alpha_deg", "zone"]))
                .with_meta("zone_counts", json!(counts));
            write_tensor(&with_prov(t, &prov), &out)?;
        }
        Command::Poa { coherency, out } => {
            let c = read_coherency(&coherency, &mut prov)?;
            let theta = orientation_angle(&c);
            let t = Tensor::new(vec![c.n_azimuth, c.n_range], theta.iter().map(|&v| v as f32).collect())?
                .with_meta("product", "orientation_angle_deg");
            write_tensor(&with_prov(t, &prov), &out)?;
        }
        Command::Psdfix { coherency, out } => {
            let c = read_coherency(&coherency, &mut prov)?;
            let fixed = psd_project_image(&c)?;
            let changed = c.t.iter().zip(&fixed.t).filter(|(a, b)| a != b).count();
            println!("pixels_projected: {changed}");
            write_coherency(&fixed, &out, &prov)?;
        }
        Command::Cluster {
            spectrogram,
            k,
            seed,
            max_iter,
            assignments,
            centroids,
        } => {
            prov.input(&spectrogram)?;
            let specs = read_spectrograms(&spectrogram)?;
            let feats = build_features(&specs)?;
            let model = kmeans(&feats, k, seed, max_iter)?;
            let text: String = model.assignments.iter().map(|a| format!("{a}\n")).collect();
            fs::write(&assignments, text).map_err(|e| SarError::Io {
                path: assignments.clone(),
                source: e,
            })?;
            let mut extra = product("cluster_assignments");
            extra.insert("k".into(), k.into());
            extra.insert("seed".into(), seed.into());
            prov.write_sidecar(&assignments, extra)?;
            let t = Tensor::new(vec![k, model.dim], model.centroids.iter().map(|&v| v as f32).collect())?
                .with_meta("product", "cluster_centroids")
                .with_meta("k", k)
                .with_meta("seed", seed)
                .with_meta("inertia", model.inertia)
                .with_meta("iterations", model.iterations);
            write_tensor(&with_prov(t, &prov), &centroids)?;
            println!("inertia: {:.9}", model.inertia);
            println!("iterations: {}", model.iterations);
        }
    }
    Ok(())
}

fn product(name: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("product".into(), name.into());
    m
}

fn with_prov(mut t: Tensor, prov: &Provenance) -> Tensor {
    t.meta.extend(prov.extras());
    t
}

pub fn look_path(prefix: &Path, look: usize) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(format!("_look{look}.slc"));
    PathBuf::from(name)
}

fn centred_origin(img: &SlcImage, patch: usize) -> Result<(usize, usize)> {
    let (n_az, n_rg) = img.image.dims();
    if patch == 0 || patch > n_az || patch > n_rg {
        return Err(SarError::InvalidArgument(format!(
            "patch {patch} does not fit image {n_az}x{n_rg}"
        )));
    }
    let (r, c) = argmax(&img.image);
    let clamp = |x: usize, n: usize| x.saturating_sub(patch / 2).min(n - patch);
    Ok((clamp(r, n_az), clamp(c, n_rg)))
}

fn read_quad(q: &QuadArgs, prov: &mut Provenance) -> Result<QuadPolImage> {
    let mut ch = |p: &Path| -> Result<SlcImage> {
        prov.input(p)?;
        read_slc(p)
    };
    let (hh, hv, vh, vv) = (ch(&q.hh)?, ch(&q.hv)?, ch(&q.vh)?, ch(&q.vv)?);
    QuadPolImage::new(hh, hv, vh, vv, q.reciprocal)
}

fn write_coherency(c: &CoherencyImage, out: &Path, prov: &Provenance) -> Result<()> {
    let data = c.to_planes().iter().map(|&v| v as f32).collect();
    let t = Tensor::new(vec![9, c.n_azimuth, c.n_range], data)?
        .with_meta("product", "coherency")
        .with_meta("planes", json!(COHERENCY_PLANES))
        .with_meta("look_window", json!([c.look_window.0, c.look_window.1]));
    write_tensor(&with_prov(t, prov), out)
}

fn read_coherency(path: &Path, prov: &mut Provenance) -> Result<CoherencyImage> {
    prov.input(path)?;
    let t = read_tensor(path)?;
    if t.meta.get("product").and_then(Value::as_str) != Some("coherency") || t.shape.len() != 3 || t.shape[0] != 9
    {
        return Err(SarError::MalformedMetadata(format!(
            "{} is not a 9-plane coherency tensor",
            path.display()
        )));
    }
    let window = t
        .meta
        .get("look_window")
        .and_then(|v| serde_json::from_value::<(usize, usize)>(v.clone()).ok())
        .unwrap_or((1, 1));
    let planes: Vec<f64> = t.data.iter().map(|&v| f64::from(v)).collect();
    CoherencyImage::from_planes(t.shape[1], t.shape[2], &planes, window)
}

fn read_spectrograms(path: &Path) -> Result<Vec<Spectrogram>> {
    let t = read_tensor(path)?;
    if t.shape.len() != 3 {
        return Err(SarError::MalformedMetadata(format!(
            "spectrogram tensor must be [patches, range_bands, azimuth_bands], got {:?}",
            t.shape
        )));
    }
    let (n, nr, na) = (t.shape[0], t.shape[1], t.shape[2]);
    let centers = |key: &str, len: usize| -> Vec<f64> {
        t.meta
            .get(key)
            .and_then(|v| serde_json::from_value(v.clone()).ok())
            .unwrap_or_else(|| vec![0.0; len])
    };
    let patch_size = t.meta.get("patch_size").and_then(Value::as_u64).unwrap_or(0) as usize;
    let origins: Vec<(usize, usize)> = t
        .meta
        .get("origins")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or_else(|| vec![(0, 0); n]);
    Ok((0..n)
        .map(|i| Spectrogram {
            n_range_bands: nr,
            n_azimuth_bands: na,
            energies: t.data[i * nr * na..(i + 1) * nr * na].iter().map(|&v| f64::from(v)).collect(),
            range_band_centers_hz: centers("range_band_centers_hz", nr),
            azimuth_band_centers_hz: centers("azimuth_band_centers_hz", na),
            origin: origins.get(i).copied().unwrap_or((0, 0)),
            patch_size,
        })
        .collect())
}
