//! Periodic spectral weighting windows.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SarError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Rect,
    Hann,
    Hamming,
}

impl FromStr for WindowKind {
    type Err = SarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" | "rectangular" => Ok(WindowKind::Rect),
            "hann" => Ok(WindowKind::Hann),
            "hamming" => Ok(WindowKind::Hamming),
            other => Err(SarError::InvalidArgument(format!("unknown window '{other}'"))),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Rect => "rect",
            WindowKind::Hann => "hann",
            WindowKind::Hamming => "hamming",
        })
    }
}

/// Window coefficients using the periodic convention (denominator `n`).
pub fn window(kind: WindowKind, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(SarError::InvalidArgument("window length must be >= 1".into()));
    }
    let cos_term = |k: usize| (2.0 * PI * k as f64 / n as f64).cos();
    Ok(match kind {
        WindowKind::Rect => vec![1.0; n],
        WindowKind::Hann => (0..n).map(|k| 0.5 - 0.5 * cos_term(k)).collect(),
        WindowKind::Hamming => (0..n).map(|k| 0.54 - 0.46 * cos_term(k)).collect(),
    })
}
