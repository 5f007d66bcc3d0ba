//! Reference waveforms the optimized design is compared against.
//!
//! - `uniform`: in-phase, equal amplitude on every tone and antenna; needs
//!   no channel knowledge.
//! - `mf` (matched filter): conjugate phases, amplitudes proportional to
//!   the channel magnitudes under a global power normalization.
//! - `strongest`: all power on the tone with the largest channel energy,
//!   spatially matched across antennas; optimal under the linear
//!   (second-order only) harvester model.

use ndarray::Array2;

use crate::channel::FrequencyResponse;
use crate::waveform::MultisineWaveform;
use crate::{Error, Result};

/// In-phase waveform with uniform power allocation: `phi = 0` and
/// `s[n, m] = sqrt(2 P / (N M))`, so the transmit power is exactly `P`.
pub fn uniform_waveform(h: &FrequencyResponse, power: f64) -> Result<MultisineWaveform> {
    let (n, m) = (h.num_sinewaves(), h.num_antennas());
    if !(power >= 0.0) {
        return Err(Error::InvalidInput(format!("power must be non-negative, got {power}")));
    }
    let amp = (2.0 * power / (n * m) as f64).sqrt();
    MultisineWaveform::new(
        Array2::from_elem((n, m), amp),
        Array2::zeros((n, m)),
        *h.grid(),
    )
}

/// Matched-filter waveform: `phi[n, m] = -arg h[n, m]` and amplitudes
/// proportional to `|h[n, m]|`, normalized globally to transmit power `P`.
pub fn matched_filter_waveform(h: &FrequencyResponse, power: f64) -> Result<MultisineWaveform> {
    let magnitudes = h.magnitudes();
    let norm_sq: f64 = magnitudes.iter().map(|a| a * a).sum();
    if !(norm_sq > 0.0) {
        return Err(Error::InvalidInput("all-zero channel".into()));
    }
    let scale = (2.0 * power / norm_sq).sqrt();
    let phases = h.gains().mapv(|g| -g.arg());
    MultisineWaveform::new(magnitudes.mapv(|a| a * scale), phases, *h.grid())
}

/// All power on the tone with the largest channel energy
/// `sum_m |h[n, m]|^2` (ties break to the lowest index), spatially matched
/// on that tone, matched-filter phases everywhere.
pub fn strongest_sinewave_waveform(
    h: &FrequencyResponse,
    power: f64,
) -> Result<MultisineWaveform> {
    let magnitudes = h.magnitudes();
    let tone_energy: Vec<f64> = magnitudes
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|a| a * a).sum())
        .collect();
    let (best, &energy) = tone_energy
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.partial_cmp(b).unwrap().then(j.cmp(i)))
        .expect("response has at least one sinewave");
    if !(energy > 0.0) {
        return Err(Error::InvalidInput("all-zero channel".into()));
    }
    let scale = (2.0 * power / energy).sqrt();
    let mut amplitudes = Array2::zeros(magnitudes.dim());
    for m in 0..h.num_antennas() {
        amplitudes[[best, m]] = magnitudes[[best, m]] * scale;
    }
    let phases = h.gains().mapv(|g| -g.arg());
    MultisineWaveform::new(amplitudes, phases, *h.grid())
}
