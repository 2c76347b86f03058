//! Explainable, model-based SAR feature layers.
//!
//! The crate turns acquisition physics into verifiable feature products:
//!
//! * [`echo_sim`] simulates stripmap raw echoes of point and multipath targets,
//! * [`focus`] forms an SLC by matched filtering and measures the impulse response,
//! * [`sublook`] splits the Doppler spectrum into sub-apertures,
//! * [`timefreq`] computes range-frequency x Doppler spectrograms,
//! * [`polarimetry`] provides Pauli, coherency, H/A/alpha, orientation angle and
//!   PSD projection,
//! * [`physclust`] clusters spectrogram patterns with seeded k-means.
//!
//! Shared containers, windows, FFT helpers and file formats live in [`sarcore`].

pub mod echo_sim;
pub mod error;
pub mod focus;
pub mod physclust;
pub mod polarimetry;
pub mod render;
pub mod sarcore;
pub mod scene;
pub mod sublook;
pub mod timefreq;

pub use error::{Result, SarError};
pub use sarcore::{ComplexImage, ImageGrid, QuadPolImage, SensorParams, SlcImage};
