//! Channel-adaptive multisine waveform design for RF energy harvesting.
//!
//! A multi-antenna transmitter sends a sum of `N` evenly spaced sinewaves
//! over a multipath channel into a rectenna (antenna + diode rectifier).
//! Because the rectifier is nonlinear, the harvested DC current depends on
//! the waveform shape, not just on the received RF power. This crate
//! provides:
//!
//! - [`channel`]: random multipath channels from a power-delay profile and
//!   their per-sinewave, per-antenna frequency response,
//! - [`waveform`]: multisine waveforms, received spectra and time-domain
//!   synthesis,
//! - [`harvester`]: the diode Taylor model and the `z_DC` metric (analytic
//!   and time-domain routes),
//! - [`optimizer`]: closed-form optimal phases and the iterative
//!   posynomial amplitude solver,
//! - [`baselines`]: uniform, matched-filter and strongest-sinewave
//!   reference waveforms,
//! - [`rectifier`]: a time-domain single-diode rectifier simulation for
//!   circuit-level validation,
//! - [`experiment`]: a seeded Monte-Carlo sweep harness with CSV output,
//!   driving everything above (also exposed through the `wpt` binary).

// Validation guards use negated comparisons (`!(x > 0.0)`) so NaN inputs
// are rejected along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod channel;
pub mod experiment;
pub mod harvester;
pub mod optimizer;
pub mod rectifier;
pub mod waveform;

pub use channel::{
    ArrayGeometry, FrequencyGrid, FrequencyResponse, MultipathChannel, MultipathTap,
    PowerDelayProfile,
};
pub use harvester::{DiodeParameters, HarvesterModel};
pub use optimizer::{IterationTrace, Monomial, PosynomialObjective};
pub use waveform::{MultisineWaveform, ReceivedSpectrum};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Matrix/grid dimensions of two arguments do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A configuration file could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
