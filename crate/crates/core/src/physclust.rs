//! Unsupervised grouping of spectrogram scattering patterns.
//!
//! Each spectrogram becomes a unit-norm feature row (band energies
//! normalised to unit sum, then the range and azimuth flatness), and rows
//! are clustered by seeded k-means++ / Lloyd iterations under squared
//! Euclidean distance.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SarError};
use crate::timefreq::{behavior_descriptor, Spectrogram};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub n_samples: usize,
    pub dim: usize,
    /// Row-major, every row of unit Euclidean norm.
    pub data: Vec<f64>,
}

impl FeatureMatrix {
    /// Normalises rows of a raw matrix; zero or non-finite rows are rejected.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_samples = rows.len();
        let dim = rows.first().map_or(0, Vec::len);
        if n_samples == 0 || dim == 0 {
            return Err(SarError::InvalidArgument("empty feature matrix".into()));
        }
        let mut data = Vec::with_capacity(n_samples * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(SarError::DimensionMismatch(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(SarError::NonFiniteSample { index: i });
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(SarError::ZeroEnergy { index: Some(i) });
            }
            data.extend(row.iter().map(|v| v / norm));
        }
        Ok(FeatureMatrix { n_samples, dim, data })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

pub fn build_features(specs: &[Spectrogram]) -> Result<FeatureMatrix> {
    let Some(first) = specs.first() else {
        return Err(SarError::InvalidArgument("no spectrograms".into()));
    };
    let shape = (first.n_range_bands, first.n_azimuth_bands);
    let rows = specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if (s.n_range_bands, s.n_azimuth_bands) != shape {
                return Err(SarError::DimensionMismatch(format!(
                    "spectrogram {i} has {}x{} bands, expected {}x{}",
                    s.n_range_bands, s.n_azimuth_bands, shape.0, shape.1
                )));
            }
            let total = s.total();
            let (fr, fa) = behavior_descriptor(s).map_err(|_| SarError::ZeroEnergy { index: Some(i) })?;
            let mut row: Vec<f64> = s.energies.iter().map(|e| e / total).collect();
            row.extend([fr, fa]);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::from_rows(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub dim: usize,
    /// `k x dim`, row-major.
    pub centroids: Vec<f64>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after every assignment step.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

impl ClusterModel {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid (lowest index on ties) and its squared distance.
fn nearest(x: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    centroids
        .chunks(dim)
        .enumerate()
        .fold((0, f64::INFINITY), |best, (c, m)| {
            let d = sq_dist(x, m);
            if d < best.1 {
                (c, d)
            } else {
                best
            }
        })
}

fn assign(feats: &FeatureMatrix, centroids: &[f64]) -> (Vec<usize>, Vec<f64>) {
    (0..feats.n_samples)
        .into_par_iter()
        .map(|i| nearest(feats.row(i), centroids, feats.dim))
        .unzip()
}

fn kmeans_pp(feats: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = feats.n_samples;
    let mut centroids = Vec::with_capacity(k * feats.dim);
    centroids.extend_from_slice(feats.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(feats.row(i), &centroids)).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > u && *d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let row = feats.row(pick).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(feats.row(i), &row));
        }
        centroids.extend(row);
    }
    centroids
}

/// Seeded k-means++ initialisation followed by Lloyd iterations until the
/// assignment stops changing or `max_iter` updates have run. An empty
/// cluster is re-seeded at the sample farthest from its centroid.
pub fn kmeans(feats: &FeatureMatrix, k: usize, seed: u64, max_iter: usize) -> Result<ClusterModel> {
    let (n, dim) = (feats.n_samples, feats.dim);
    if k == 0 || k > n {
        return Err(SarError::InvalidArgument(format!("k = {k} must be in 1..={n}")));
    }
    if max_iter == 0 {
        return Err(SarError::InvalidArgument("max_iter must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp(feats, k, &mut rng);
    let (mut labels, mut dists) = assign(feats, &centroids);
    let mut trace = vec![dists.iter().sum()];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            sums[c * dim..(c + 1) * dim]
                .iter_mut()
                .zip(feats.row(i))
                .for_each(|(s, x)| *s += x);
        }
        let mut taken = vec![false; n];
        for c in 0..k {
            let dst = &mut centroids[c * dim..(c + 1) * dim];
            if counts[c] > 0 {
                dst.iter_mut()
                    .zip(&sums[c * dim..(c + 1) * dim])
                    .for_each(|(m, s)| *m = s / counts[c] as f64);
            } else {
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .fold((0, f64::NEG_INFINITY), |b, i| if dists[i] > b.1 { (i, dists[i]) } else { b })
                    .0;
                taken[far] = true;
                dst.copy_from_slice(feats.row(far));
            }
        }
        let (new_labels, new_dists) = assign(feats, &centroids);
        trace.push(new_dists.iter().sum());
        let done = new_labels == labels;
        labels = new_labels;
        dists = new_dists;
        if done {
            break;
        }
    }
    Ok(ClusterModel {
        k,
        dim,
        centroids,
        assignments: labels,
        inertia: *trace.last().expect("non-empty trace"),
        inertia_trace: trace,
        iterations,
        seed,
    })
}

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index; 1.0 when both labelings are trivially identical
/// partitions (zero denominator).
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(SarError::DimensionMismatch(format!(
            "label lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(SarError::InvalidArgument("ARI needs at least 2 samples".into()));
    }
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&v| pairs(v)).sum();
    let sa: f64 = rows.values().map(|&v| pairs(v)).sum();
    let sb: f64 = cols.values().map(|&v| pairs(v)).sum();
    let expected = sa * sb / pairs(a.len() as u64);
    let max = 0.5 * (sa + sb);
    if max - expected == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
