//! `sarlayers` command-line pipelines.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 physics-bound
//! violation, 64 usage error.

mod commands;
mod provenance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sarlayers::sarcore::window::WindowKind;
use sarlayers::scene::Channel;
use sarlayers::sublook::LookWeighting;
use sarlayers::SarError;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_PHYSICS: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "sarlayers", version, about = "Explainable SAR feature layers")]
pub struct Cli {
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate raw echoes of a scene file.
    Simulate {
        scene: PathBuf,
        out: PathBuf,
        /// Polarimetric channel to simulate (scales by the scattering matrix).
        #[arg(long)]
        channel: Option<Channel>,
        /// Overrides the scene's noise seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Focus raw echoes into an SLC by matched filtering.
    Focus {
        raw: PathBuf,
        out: PathBuf,
        #[arg(long, default_value = "rect")]
        window: WindowKind,
        /// Print impulse-response metrics of the brightest target.
        #[arg(long)]
        report: bool,
    },
    /// Split an SLC into Doppler sub-looks.
    Sublook {
        slc: PathBuf,
        /// Looks are written to `<out_prefix>_look<i>.slc`.
        out_prefix: PathBuf,
        #[arg(long, default_value_t = 3)]
        looks: usize,
        /// Doppler centroid in Hz; estimated from the data when omitted.
        #[arg(long, allow_hyphen_values = true)]
        centroid: Option<f64>,
        #[arg(long, default_value = "rect")]
        weighting: LookWeighting,
        /// Write a three-look pseudo-colour PNG.
        #[arg(long)]
        rgb: Option<PathBuf>,
    },
    /// Range-frequency x Doppler band energies of square patches.
    Spectrogram {
        slc: PathBuf,
        out: PathBuf,
        /// Patch origin `ROW,COL`; repeatable. Defaults to a patch centred on
        /// the brightest pixel.
        #[arg(long, value_parser = parse_pair)]
        origin: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 64)]
        patch: usize,
        /// Band counts `RANGE,AZIMUTH`.
        #[arg(long, default_value = "3,3", value_parser = parse_pair)]
        bands: (usize, usize),
        /// Hann-weighted bands with 50% overlap instead of a partition.
        #[arg(long)]
        overlap: bool,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        centroid: f64,
    },
    /// Raw Pauli powers (R = |HH-VV|^2, G = 2|HV|^2, B = |HH+VV|^2).
    Pauli {
        #[command(flatten)]
        quad: QuadArgs,
        out: PathBuf,
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Boxcar-multilooked coherency matrices as a 9-plane tensor.
    Coherency {
        #[command(flatten)]
        quad: QuadArgs,
        out: PathBuf,
        /// Look window `AZ,RG` (odd sizes).
        #[arg(long, default_value = "5,5", value_parser = parse_pair)]
        window: (usize, usize),
    },
    /// Entropy, anisotropy, alpha and zone from a coherency tensor.
    Halpha { coherency: PathBuf, out: PathBuf },
    /// Polarisation orientation angle from a coherency tensor.
    Poa { coherency: PathBuf, out: PathBuf },
    /// Nearest positive semi-definite coherency tensor.
    Psdfix { coherency: PathBuf, out: PathBuf },
    /// Seeded k-means over spectrogram features.
    Cluster {
        spectrogram: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// One cluster id per line.
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        centroids: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long)]
    pub hh: PathBuf,
    #[arg(long)]
    pub hv: PathBuf,
    #[arg(long)]
    pub vh: PathBuf,
    #[arg(long)]
    pub vv: PathBuf,
    /// Require HV == VH.
    #[arg(long)]
    pub reciprocal: bool,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected A,B, got '{s}'"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("'{x}': {e}"));
    Ok((p(a)?, p(b)?))
}

fn exit_code(e: &SarError) -> u8 {
    if e.is_physics_bound() {
        EXIT_PHYSICS
    } else {
        EXIT_VALIDATION
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .init();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        log::warn!("thread pool already initialised: {e}");
    }
    match commands::run(cli.command, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
