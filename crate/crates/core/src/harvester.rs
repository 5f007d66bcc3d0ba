//! Rectenna model: diode Taylor coefficients and the DC-current metric.
//!
//! The received signal `y(t)` drives a diode rectifier through a matched
//! antenna (`v_in = y * sqrt(R_ant)`). Expanding the diode exponential
//! around a fixed operating voltage and truncating at fourth order gives
//! the DC proxy
//!
//! `z_DC = k2 * R_ant * E{y^2} + k4 * R_ant^2 * E{y^4}`,
//!
//! which [`z_dc_analytic`] evaluates term-by-term in the frequency domain
//! and [`z_dc_time_domain`] re-derives by averaging synthesized samples
//! over one exact signal period. The two routes are independent and agree
//! to numerical precision; keeping both guards the frequency-domain
//! bookkeeping.

use num_complex::Complex64;

use crate::channel::FrequencyResponse;
use crate::waveform::MultisineWaveform;
use crate::{Error, Result};

/// Shockley diode constants: `i_d = i_s (exp(v_d / (n v_t)) - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize)]
pub struct DiodeParameters {
    /// Reverse-bias saturation current (amperes).
    pub saturation_current: f64,
    /// Ideality factor (dimensionless, >= 1).
    pub ideality: f64,
    /// Thermal voltage (volts).
    pub thermal_voltage: f64,
}

impl Default for DiodeParameters {
    /// Constants chosen so that at a zero operating point the fourth-order
    /// expansion has k2 ~ 0.0034 and k4 ~ 0.3829.
    fn default() -> Self {
        Self {
            saturation_current: 5.03e-6,
            ideality: 1.0,
            thermal_voltage: 0.0272,
        }
    }
}

impl DiodeParameters {
    /// Diode current at forward voltage `v_d`.
    pub fn current(&self, v_d: f64) -> f64 {
        let nvt = self.ideality * self.thermal_voltage;
        self.saturation_current * ((v_d / nvt).exp() - 1.0)
    }
}

/// Taylor coefficients of the diode current around operating voltage `a`:
/// `k_0 = i_s (exp(a / (n v_t)) - 1)` and
/// `k_i = i_s exp(a / (n v_t)) / (i! (n v_t)^i)` for `i >= 1`.
pub fn taylor_coefficients(diode: &DiodeParameters, a: f64, max_order: usize) -> Vec<f64> {
    let nvt = diode.ideality * diode.thermal_voltage;
    let bias = (a / nvt).exp();
    let mut coefficients = Vec::with_capacity(max_order + 1);
    coefficients.push(diode.saturation_current * (bias - 1.0));
    let mut factorial = 1.0;
    let mut nvt_pow = 1.0;
    for i in 1..=max_order {
        factorial *= i as f64;
        nvt_pow *= nvt;
        coefficients.push(diode.saturation_current * bias / (factorial * nvt_pow));
    }
    coefficients
}

/// Harvester description: diode expansion around a fixed operating point
/// plus the matched antenna resistance. The operating point is a per-run
/// input; no outer iteration updates it.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvesterModel {
    /// Diode behind the coefficients; `None` when k2/k4 were injected
    /// directly.
    pub diode: Option<DiodeParameters>,
    /// Taylor expansion voltage `a` (volts).
    pub operating_point: f64,
    /// Antenna (and, under perfect matching, rectifier input) resistance
    /// in ohms.
    pub antenna_resistance: f64,
    coefficients: [f64; 5],
}

impl HarvesterModel {
    /// Model with coefficients derived from the diode law at `a`.
    pub fn from_diode(diode: DiodeParameters, a: f64, antenna_resistance: f64) -> Result<Self> {
        if !(antenna_resistance > 0.0) {
            return Err(Error::InvalidInput("antenna resistance must be positive".into()));
        }
        if !(diode.saturation_current > 0.0)
            || !(diode.ideality >= 1.0)
            || !(diode.thermal_voltage > 0.0)
        {
            return Err(Error::InvalidInput(format!("bad diode constants: {diode:?}")));
        }
        let k = taylor_coefficients(&diode, a, 4);
        Ok(Self {
            diode: Some(diode),
            operating_point: a,
            antenna_resistance,
            coefficients: [k[0], k[1], k[2], k[3], k[4]],
        })
    }

    /// Model with k2 and k4 injected directly, bypassing the diode law.
    pub fn from_coefficients(k2: f64, k4: f64, antenna_resistance: f64) -> Result<Self> {
        if !(antenna_resistance > 0.0) {
            return Err(Error::InvalidInput("antenna resistance must be positive".into()));
        }
        if !(k2 >= 0.0) || !(k4 >= 0.0) {
            return Err(Error::InvalidInput("k2 and k4 must be non-negative".into()));
        }
        Ok(Self {
            diode: None,
            operating_point: 0.0,
            antenna_resistance,
            coefficients: [0.0, 0.0, k2, 0.0, k4],
        })
    }

    pub fn k(&self, order: usize) -> f64 {
        self.coefficients[order]
    }

    pub fn k2(&self) -> f64 {
        self.coefficients[2]
    }

    pub fn k4(&self) -> f64 {
        self.coefficients[4]
    }
}

impl Default for HarvesterModel {
    /// Default diode at operating point 0 with a 50 ohm antenna.
    fn default() -> Self {
        Self::from_diode(DiodeParameters::default(), 0.0, 50.0).expect("defaults are valid")
    }
}

/// Complex per-tone, per-antenna contributions `s[n,m] e^{j phi[n,m]} h[n,m]`
/// (magnitude `s * A`, angle `psi = phi + psi_bar`).
fn weighted_gains(w: &MultisineWaveform, h: &FrequencyResponse) -> Result<Vec<Vec<Complex64>>> {
    if w.amplitudes.dim() != (h.num_sinewaves(), h.num_antennas()) {
        return Err(Error::DimensionMismatch(format!(
            "waveform is {:?} but channel response is {:?}",
            w.amplitudes.dim(),
            (h.num_sinewaves(), h.num_antennas())
        )));
    }
    Ok((0..w.num_sinewaves())
        .map(|n| (0..w.num_antennas()).map(|m| w.weight(n, m) * h.gain(n, m)).collect())
        .collect())
}

/// Frequency-domain evaluation of the DC metric.
///
/// Second order: `(k2/2) R sum_n sum_{m0,m1} s s A A cos(psi_{n,m0} - psi_{n,m1})`.
/// Fourth order: `(3 k4/8) R^2` times the sum over all index quadruples
/// with `n0 + n1 = n2 + n3` (enumerated as `(n0, n1, n2)` with
/// `n3 = n0 + n1 - n2` when in range) and all antenna quadruples of
/// `prod s A * cos(psi_{n0,m0} + psi_{n1,m1} - psi_{n2,m2} - psi_{n3,m3})`.
/// Each cosine is evaluated as the real part of the product of the
/// weighted-gain phasors.
pub fn z_dc_analytic(
    w: &MultisineWaveform,
    h: &FrequencyResponse,
    model: &HarvesterModel,
) -> Result<f64> {
    let wg = weighted_gains(w, h)?;
    let n_tones = w.num_sinewaves();
    let n_ant = w.num_antennas();
    let r = model.antenna_resistance;

    let mut second = 0.0;
    for row in &wg {
        for m0 in 0..n_ant {
            for m1 in 0..n_ant {
                second += (row[m0] * row[m1].conj()).re;
            }
        }
    }

    let mut fourth = 0.0;
    for n0 in 0..n_tones {
        for n1 in 0..n_tones {
            let sum = n0 + n1;
            for n2 in 0..n_tones {
                let Some(n3) = sum.checked_sub(n2).filter(|&n3| n3 < n_tones) else {
                    continue;
                };
                for p0 in &wg[n0] {
                    for p1 in &wg[n1] {
                        let p01 = p0 * p1;
                        for p2 in &wg[n2] {
                            let p012 = p01 * p2.conj();
                            for p3 in &wg[n3] {
                                fourth += (p012 * p3.conj()).re;
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(model.k2() / 2.0 * r * second + 3.0 * model.k4() / 8.0 * r * r * fourth)
}

/// Time-domain evaluation of the DC metric: synthesize `y(t)` over one
/// exact period `2 pi / dw` and average `y^2` and `y^4` numerically.
///
/// Requires the grid base frequency to be a positive integer multiple of
/// the spacing so the composite signal is exactly periodic;
/// `samples_per_period` counts samples across that full period and must
/// out-resolve the fourth harmonic of the highest tone for the average to
/// be exact.
pub fn z_dc_time_domain(
    w: &MultisineWaveform,
    h: &FrequencyResponse,
    model: &HarvesterModel,
    samples_per_period: usize,
) -> Result<f64> {
    let ratio = w.grid.base / w.grid.spacing;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * k.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "grid base must be a positive integer multiple of the spacing (w0/dw = {ratio})"
        )));
    }
    if samples_per_period == 0 {
        return Err(Error::InvalidInput("samples_per_period must be positive".into()));
    }
    let spectrum = w.received_spectrum(h)?;
    let period = 2.0 * std::f64::consts::PI / w.grid.spacing;
    let mut mean_sq = 0.0;
    let mut mean_quad = 0.0;
    for j in 0..samples_per_period {
        let y = spectrum.sample(j as f64 * period / samples_per_period as f64);
        let y2 = y * y;
        mean_sq += y2;
        mean_quad += y2 * y2;
    }
    mean_sq /= samples_per_period as f64;
    mean_quad /= samples_per_period as f64;
    let r = model.antenna_resistance;
    Ok(model.k2() * r * mean_sq + model.k4() * r * r * mean_quad)
}

/// Harvested power under the linear conversion-efficiency model
/// `E = zeta * E{y^2}`, which ignores the diode's fourth-order term. Kept
/// for contrast experiments: maximizing it concentrates all transmit
/// power on the single strongest sinewave.
pub fn linear_model_power(
    w: &MultisineWaveform,
    h: &FrequencyResponse,
    zeta: f64,
) -> Result<f64> {
    Ok(zeta * w.received_spectrum(h)?.average_power())
}
