//! Multipath channel generation and frequency response.
//!
//! Channels are tapped delay lines: `L` paths with amplitude `alpha_l`,
//! delay `tau_l`, phase `xi_l` and direction of departure `theta_l`. Taps
//! are drawn i.i.d. circularly symmetric complex Gaussian with per-tap
//! variance taken from a power-delay profile. All transmit antennas share
//! the same taps (narrowband balanced array); only the per-antenna ULA
//! phase shift differs.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::{Error, Result, SPEED_OF_LIGHT};

/// Transmit power (watts) at which `rx_power_dbm` is calibrated.
///
/// The in-phase uniform baseline with unit-sum amplitude weights carries
/// exactly 0.5 W, so the link budget scalar folded into the power-delay
/// profile is expressed relative to this reference.
pub const REFERENCE_TX_POWER: f64 = 0.5;

/// Transmit antenna array layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrayType {
    UniformLinear,
}

/// Geometry of the transmit array.
#[derive(Debug, Clone, Copy)]
pub struct ArrayGeometry {
    /// Number of transmit antennas (>= 1).
    pub num_antennas: usize,
    /// Inter-element spacing in meters (> 0).
    pub element_spacing: f64,
    pub array_type: ArrayType,
}

impl ArrayGeometry {
    /// Uniform linear array with the given element count and spacing.
    pub fn ula(num_antennas: usize, element_spacing: f64) -> Result<Self> {
        if num_antennas < 1 {
            return Err(Error::InvalidInput("array needs at least one antenna".into()));
        }
        if !(element_spacing > 0.0) {
            return Err(Error::InvalidInput(format!(
                "element spacing must be positive, got {element_spacing}"
            )));
        }
        Ok(Self {
            num_antennas,
            element_spacing,
            array_type: ArrayType::UniformLinear,
        })
    }

    /// ULA with half-wavelength spacing at the given carrier frequency.
    pub fn half_wavelength(num_antennas: usize, carrier_hz: f64) -> Result<Self> {
        Self::ula(num_antennas, SPEED_OF_LIGHT / carrier_hz / 2.0)
    }
}

/// One multipath component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipathTap {
    /// Linear amplitude `alpha_l` (>= 0).
    pub gain: f64,
    /// Delay `tau_l` in seconds (>= 0).
    pub delay: f64,
    /// Phase `xi_l` in radians.
    pub phase: f64,
    /// Direction of departure `theta_l` in radians, measured from the
    /// array axis.
    pub departure_angle: f64,
}

/// One entry of a power-delay profile.
#[derive(Debug, Clone, Copy)]
pub struct PdpEntry {
    /// Tap delay in seconds.
    pub delay: f64,
    /// Average tap power (linear).
    pub power: f64,
    /// Fixed departure angle; drawn uniform on `[0, 2*pi)` when `None`.
    pub departure_angle: Option<f64>,
}

/// Average power per multipath delay, defining the channel's frequency
/// selectivity. Tap powers are the variances of the complex Gaussian tap
/// draws in [`MultipathChannel::generate`].
#[derive(Debug, Clone)]
pub struct PowerDelayProfile {
    entries: Vec<PdpEntry>,
}

#[derive(Debug, Deserialize)]
struct PdpFile {
    delays_ns: Vec<f64>,
    powers_db: Vec<f64>,
    rx_power_dbm: f64,
    departure_angles_rad: Option<Vec<f64>>,
}

impl PowerDelayProfile {
    /// Profile from explicit per-tap linear powers (no rescaling).
    pub fn from_linear(entries: Vec<PdpEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("power delay profile has no taps".into()));
        }
        for pair in entries.windows(2) {
            if pair[1].delay <= pair[0].delay {
                return Err(Error::InvalidInput(format!(
                    "tap delays must be strictly increasing ({} then {})",
                    pair[0].delay, pair[1].delay
                )));
            }
        }
        if let Some(bad) = entries.iter().find(|e| !(e.power >= 0.0) || e.delay < 0.0) {
            return Err(Error::InvalidInput(format!(
                "tap (delay {}, power {}) must have delay >= 0 and power >= 0",
                bad.delay, bad.power
            )));
        }
        Ok(Self { entries })
    }

    /// Profile from a tap table in (ns, dB) with the link budget folded in:
    /// linear powers are rescaled so their sum equals the channel gain that
    /// yields an average received power of `rx_power_dbm` at the reference
    /// transmit power [`REFERENCE_TX_POWER`].
    pub fn from_db_table(
        delays_ns: &[f64],
        powers_db: &[f64],
        rx_power_dbm: f64,
        departure_angles: Option<&[f64]>,
    ) -> Result<Self> {
        if delays_ns.len() != powers_db.len() {
            return Err(Error::InvalidInput(format!(
                "{} delays but {} powers",
                delays_ns.len(),
                powers_db.len()
            )));
        }
        if let Some(angles) = departure_angles {
            if angles.len() != delays_ns.len() {
                return Err(Error::InvalidInput(format!(
                    "{} delays but {} departure angles",
                    delays_ns.len(),
                    angles.len()
                )));
            }
        }
        let linear: Vec<f64> = powers_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
        let sum: f64 = linear.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidInput("total tap power must be positive".into()));
        }
        let rx_watts = 10f64.powf((rx_power_dbm - 30.0) / 10.0);
        let total = rx_watts / REFERENCE_TX_POWER;
        let entries = delays_ns
            .iter()
            .zip(&linear)
            .enumerate()
            .map(|(l, (&d, &p))| PdpEntry {
                delay: d * 1e-9,
                power: p / sum * total,
                departure_angle: departure_angles.map(|a| a[l]),
            })
            .collect();
        Self::from_linear(entries)
    }

    /// Parse a profile from TOML with fields `delays_ns`, `powers_db`,
    /// `rx_power_dbm` and optional `departure_angles_rad`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: PdpFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("pdp file: {e}")))?;
        Self::from_db_table(
            &file.delays_ns,
            &file.powers_db,
            file.rx_power_dbm,
            file.departure_angles_rad.as_deref(),
        )
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Default profile: 18 taps at 10 ns spacing decaying 1 dB per tap,
    /// scaled to a -12 dBm average received power. A stand-in for indoor
    /// NLOS office profiles with comparable delay spread ("model-B
    /// substitute"); swap in a measured table via [`Self::from_db_table`]
    /// to change it.
    pub fn model_b_substitute() -> Self {
        let delays_ns: Vec<f64> = (0..18).map(|l| 10.0 * l as f64).collect();
        let powers_db: Vec<f64> = (0..18).map(|l| -(l as f64)).collect();
        Self::from_db_table(&delays_ns, &powers_db, -12.0, None)
            .expect("builtin profile is valid")
    }

    pub fn entries(&self) -> &[PdpEntry] {
        &self.entries
    }

    /// Sum of average tap powers (the channel's mean power gain).
    pub fn total_power(&self) -> f64 {
        self.entries.iter().map(|e| e.power).sum()
    }
}

impl Default for PowerDelayProfile {
    fn default() -> Self {
        Self::model_b_substitute()
    }
}

/// Evenly spaced sinewave frequencies `w_n = w_0 + n * dw` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    /// Lowest sinewave frequency `w_0` (rad/s).
    pub base: f64,
    /// Spacing `dw` (rad/s, > 0).
    pub spacing: f64,
    /// Number of sinewaves `N` (>= 1).
    pub count: usize,
}

impl FrequencyGrid {
    pub fn new(base: f64, spacing: f64, count: usize) -> Result<Self> {
        if count < 1 {
            return Err(Error::InvalidInput("grid needs at least one sinewave".into()));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self { base, spacing, count })
    }

    /// `N` tones centered on `center_hz`, spaced `bandwidth_hz / N` apart.
    pub fn centered(center_hz: f64, bandwidth_hz: f64, count: usize) -> Result<Self> {
        if count < 1 {
            return Err(Error::InvalidInput("grid needs at least one sinewave".into()));
        }
        let spacing = 2.0 * PI * bandwidth_hz / count as f64;
        let base = 2.0 * PI * center_hz - (count as f64 - 1.0) / 2.0 * spacing;
        Self::new(base, spacing, count)
    }

    /// Frequency of the n-th sinewave (rad/s).
    pub fn frequency(&self, n: usize) -> f64 {
        self.base + n as f64 * self.spacing
    }

    /// Wavelength of the n-th sinewave (meters).
    pub fn wavelength(&self, n: usize) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.frequency(n)
    }

    /// Same tone spacing and count, re-centered on `center_hz`.
    pub fn recentered(&self, center_hz: f64) -> Self {
        Self {
            base: 2.0 * PI * center_hz - (self.count as f64 - 1.0) / 2.0 * self.spacing,
            spacing: self.spacing,
            count: self.count,
        }
    }
}

/// A realized multipath channel (one tap per profile entry).
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    taps: Vec<MultipathTap>,
    seed: u64,
}

impl MultipathChannel {
    /// Channel from explicit taps (for tests and replays).
    pub fn from_taps(taps: Vec<MultipathTap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidInput("channel needs at least one tap".into()));
        }
        Ok(Self { taps, seed: 0 })
    }

    /// Draw one channel realization from the profile.
    ///
    /// Each tap is an independent circularly symmetric complex Gaussian
    /// with variance equal to the entry's average power; `gain` and
    /// `phase` store its polar form. Departure angles are uniform on
    /// `[0, 2*pi)` unless fixed in the profile. Deterministic in `seed`.
    pub fn generate(pdp: &PowerDelayProfile, seed: u64) -> Result<Self> {
        if pdp.entries.is_empty() {
            return Err(Error::InvalidInput("power delay profile has no taps".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let taps = pdp
            .entries
            .iter()
            .map(|entry| {
                let sigma = (entry.power / 2.0).sqrt();
                let re: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
                let im: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
                let departure_angle = match entry.departure_angle {
                    Some(theta) => theta,
                    None => rng.random::<f64>() * 2.0 * PI,
                };
                MultipathTap {
                    gain: re.hypot(im),
                    delay: entry.delay,
                    phase: im.atan2(re),
                    departure_angle,
                }
            })
            .collect();
        Ok(Self { taps, seed })
    }

    pub fn taps(&self) -> &[MultipathTap] {
        &self.taps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sum of squared tap gains of this realization.
    pub fn power(&self) -> f64 {
        self.taps.iter().map(|t| t.gain * t.gain).sum()
    }

    /// Complex frequency response `h[n, m]` on the given grid and array.
    ///
    /// `h[n, m] = sum_l alpha_l * exp(j(-w_n tau_l + delta(n, m, l) + xi_l))`
    /// with the ULA phase shift `delta` from [`ula_phase_shift`].
    pub fn frequency_response(
        &self,
        grid: &FrequencyGrid,
        array: &ArrayGeometry,
    ) -> FrequencyResponse {
        let gains = Array2::from_shape_fn((grid.count, array.num_antennas), |(n, m)| {
            let w_n = grid.frequency(n);
            let lambda_n = grid.wavelength(n);
            self.taps
                .iter()
                .map(|tap| {
                    let shift = ula_phase_shift(
                        m + 1,
                        lambda_n,
                        tap.departure_angle,
                        array.element_spacing,
                    );
                    Complex64::from_polar(tap.gain, -w_n * tap.delay + shift + tap.phase)
                })
                .sum()
        });
        FrequencyResponse { gains, grid: *grid }
    }

    /// Reproducibility dump: a seed header plus one
    /// `alpha tau xi theta` line per tap in fixed decimal.
    pub fn to_text(&self) -> String {
        let mut out = format!("# channel seed={} taps={}\n", self.seed, self.taps.len());
        for tap in &self.taps {
            writeln!(
                out,
                "{:.15} {:.15} {:.15} {:.15}",
                tap.gain, tap.delay, tap.phase, tap.departure_angle
            )
            .expect("string write");
        }
        out
    }
}

/// Phase shift of antenna `m` (1-based) relative to the first antenna for
/// a uniform linear array: `2*pi*(m-1)*(d/lambda)*cos(theta)`. Zero for
/// the first antenna by convention.
pub fn ula_phase_shift(
    antenna_index: usize,
    wavelength: f64,
    departure_angle: f64,
    spacing: f64,
) -> f64 {
    assert!(antenna_index >= 1, "antenna indices are 1-based");
    2.0 * PI * (antenna_index - 1) as f64 * (spacing / wavelength) * departure_angle.cos()
}

/// Channel frequency response: complex gains `h[n, m]` per sinewave `n`
/// and transmit antenna `m`, tied to the grid they were evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    gains: Array2<Complex64>,
    grid: FrequencyGrid,
}

impl FrequencyResponse {
    pub fn new(gains: Array2<Complex64>, grid: FrequencyGrid) -> Result<Self> {
        if gains.nrows() != grid.count {
            return Err(Error::DimensionMismatch(format!(
                "{} gain rows for a grid of {} sinewaves",
                gains.nrows(),
                grid.count
            )));
        }
        Ok(Self { gains, grid })
    }

    pub fn num_sinewaves(&self) -> usize {
        self.gains.nrows()
    }

    pub fn num_antennas(&self) -> usize {
        self.gains.ncols()
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn gain(&self, n: usize, m: usize) -> Complex64 {
        self.gains[[n, m]]
    }

    pub fn gains(&self) -> &Array2<Complex64> {
        &self.gains
    }

    /// Magnitude `A[n, m] = |h[n, m]|`.
    pub fn magnitude(&self, n: usize, m: usize) -> f64 {
        self.gains[[n, m]].norm()
    }

    /// All magnitudes as an `N x M` matrix.
    pub fn magnitudes(&self) -> Array2<f64> {
        self.gains.mapv(|h| h.norm())
    }

    /// Channel phase `psi_bar[n, m] = arg h[n, m]`.
    pub fn phase(&self, n: usize, m: usize) -> f64 {
        self.gains[[n, m]].arg()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_tap_pdp(power: f64) -> PowerDelayProfile {
        PowerDelayProfile::from_linear(vec![PdpEntry {
            delay: 0.0,
            power,
            departure_angle: None,
        }])
        .unwrap()
    }

    #[test]
    fn tap_variance_matches_pdp_power() {
        let pdp = single_tap_pdp(1.0);
        let n = 10_000;
        let mean_sq: f64 = (0..n)
            .map(|seed| {
                let tap = MultipathChannel::generate(&pdp, seed).unwrap().taps()[0];
                tap.gain * tap.gain
            })
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean_sq - 1.0).abs() < 0.05,
            "mean alpha^2 = {mean_sq}, expected 1 within 5%"
        );
    }

    #[test]
    fn zero_power_tap_is_exactly_zero() {
        let pdp = single_tap_pdp(0.0);
        let ch = MultipathChannel::generate(&pdp, 7).unwrap();
        assert_eq!(ch.taps()[0].gain, 0.0);
    }

    #[test]
    fn same_seed_same_channel() {
        let pdp = PowerDelayProfile::model_b_substitute();
        let a = MultipathChannel::generate(&pdp, 42).unwrap();
        let b = MultipathChannel::generate(&pdp, 42).unwrap();
        assert_eq!(a, b);
        let c = MultipathChannel::generate(&pdp, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn empty_pdp_rejected() {
        assert!(PowerDelayProfile::from_linear(vec![]).is_err());
    }

    #[test]
    fn non_increasing_delays_rejected() {
        let entries = vec![
            PdpEntry { delay: 1e-8, power: 1.0, departure_angle: None },
            PdpEntry { delay: 1e-8, power: 1.0, departure_angle: None },
        ];
        assert!(PowerDelayProfile::from_linear(entries).is_err());
    }

    #[test]
    fn ula_shift_first_antenna_is_zero() {
        assert_eq!(ula_phase_shift(1, 0.06, 1.234, 0.03), 0.0);
    }

    #[test]
    fn ula_shift_broadside_is_zero() {
        let lambda = 0.06;
        let shift = ula_phase_shift(2, lambda, PI / 2.0, lambda / 2.0);
        assert!(shift.abs() < 1e-15, "got {shift}");
    }

    #[test]
    fn ula_shift_endfire_half_wavelength() {
        let lambda = 0.06;
        let shift = ula_phase_shift(2, lambda, 0.0, lambda / 2.0);
        assert!((shift - PI).abs() < 1e-12, "got {shift}");
    }

    #[test]
    fn single_unit_tap_gives_identity_response() {
        let ch = MultipathChannel::from_taps(vec![MultipathTap {
            gain: 1.0,
            delay: 0.0,
            phase: 0.0,
            departure_angle: 0.3,
        }])
        .unwrap();
        let grid = FrequencyGrid::centered(5.18e9, 20e6, 8).unwrap();
        let array = ArrayGeometry::half_wavelength(1, 5.18e9).unwrap();
        let h = ch.frequency_response(&grid, &array);
        for n in 0..8 {
            let g = h.gain(n, 0);
            assert!((g.re - 1.0).abs() < 1e-12 && g.im.abs() < 1e-12, "h[{n}] = {g}");
        }
    }

    #[test]
    fn two_equal_taps_half_cycle_apart_cancel() {
        let grid = FrequencyGrid::new(2.0 * PI * 1e9, 2.0 * PI * 1e6, 4).unwrap();
        let n = 2;
        let tau = PI / grid.frequency(n);
        let ch = MultipathChannel::from_taps(vec![
            MultipathTap { gain: 1.0, delay: 0.0, phase: 0.0, departure_angle: 0.0 },
            MultipathTap { gain: 1.0, delay: tau, phase: 0.0, departure_angle: 0.0 },
        ])
        .unwrap();
        let array = ArrayGeometry::ula(1, 0.03).unwrap();
        let h = ch.frequency_response(&grid, &array);
        assert!(h.magnitude(n, 0) < 1e-9, "expected null, |h| = {}", h.magnitude(n, 0));
    }

    // Independent re-derivation of the response: plain loop over taps with
    // explicit cos/sin accumulation, no shared code with the implementation.
    fn brute_force_response(
        taps: &[MultipathTap],
        grid: &FrequencyGrid,
        array: &ArrayGeometry,
        n: usize,
        m: usize,
    ) -> Complex64 {
        let w = grid.base + n as f64 * grid.spacing;
        let lambda = 2.0 * PI * SPEED_OF_LIGHT / w;
        let mut re = 0.0;
        let mut im = 0.0;
        for tap in taps {
            let delta =
                2.0 * PI * m as f64 * array.element_spacing / lambda * tap.departure_angle.cos();
            let arg = -w * tap.delay + delta + tap.phase;
            re += tap.gain * arg.cos();
            im += tap.gain * arg.sin();
        }
        Complex64::new(re, im)
    }

    #[test]
    fn response_matches_brute_force_sum() {
        let pdp = PowerDelayProfile::from_linear(vec![
            PdpEntry { delay: 0.0, power: 0.5, departure_angle: None },
            PdpEntry { delay: 3e-8, power: 0.3, departure_angle: None },
            PdpEntry { delay: 9e-8, power: 0.2, departure_angle: None },
        ])
        .unwrap();
        let grid = FrequencyGrid::centered(5.18e9, 20e6, 6).unwrap();
        let array = ArrayGeometry::half_wavelength(3, 5.18e9).unwrap();
        for seed in 0..20 {
            let ch = MultipathChannel::generate(&pdp, seed).unwrap();
            let h = ch.frequency_response(&grid, &array);
            for n in 0..6 {
                for m in 0..3 {
                    let expect = brute_force_response(ch.taps(), &grid, &array, n, m);
                    let got = h.gain(n, m);
                    let err = (got - expect).norm() / expect.norm().max(1e-300);
                    assert!(err < 1e-12, "seed {seed} h[{n},{m}]: {got} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn single_tap_is_frequency_flat() {
        let pdp = single_tap_pdp(0.8);
        let ch = MultipathChannel::generate(&pdp, 3).unwrap();
        let grid = FrequencyGrid::centered(5.18e9, 20e6, 16).unwrap();
        let array = ArrayGeometry::ula(1, 0.029).unwrap();
        let h = ch.frequency_response(&grid, &array);
        let alpha = ch.taps()[0].gain;
        for n in 0..16 {
            assert!((h.magnitude(n, 0) - alpha).abs() < 1e-12 * alpha.max(1.0));
        }
    }

    #[test]
    fn response_is_linear_in_taps() {
        let grid = FrequencyGrid::centered(2.4e9, 10e6, 4).unwrap();
        let array = ArrayGeometry::half_wavelength(2, 2.4e9).unwrap();
        let a = vec![
            MultipathTap { gain: 0.7, delay: 0.0, phase: 0.4, departure_angle: 1.0 },
            MultipathTap { gain: 0.2, delay: 2e-8, phase: -0.9, departure_angle: 2.0 },
        ];
        let b = vec![MultipathTap { gain: 0.5, delay: 5e-8, phase: 2.2, departure_angle: 4.0 }];
        let mut both = a.clone();
        both.extend(b.clone());
        let ha = MultipathChannel::from_taps(a).unwrap().frequency_response(&grid, &array);
        let hb = MultipathChannel::from_taps(b).unwrap().frequency_response(&grid, &array);
        let hab = MultipathChannel::from_taps(both).unwrap().frequency_response(&grid, &array);
        for n in 0..4 {
            for m in 0..2 {
                let sum = ha.gain(n, m) + hb.gain(n, m);
                assert!((hab.gain(n, m) - sum).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn broadside_taps_identical_across_antennas() {
        let pdp = PowerDelayProfile::from_db_table(
            &[0.0, 10.0, 30.0],
            &[0.0, -3.0, -6.0],
            -12.0,
            Some(&[PI / 2.0, PI / 2.0, PI / 2.0]),
        )
        .unwrap();
        let ch = MultipathChannel::generate(&pdp, 11).unwrap();
        let grid = FrequencyGrid::centered(5.18e9, 20e6, 4).unwrap();
        let array = ArrayGeometry::half_wavelength(4, 5.18e9).unwrap();
        let h = ch.frequency_response(&grid, &array);
        for n in 0..4 {
            for m in 1..4 {
                assert!((h.gain(n, m) - h.gain(n, 0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn realized_power_averages_to_pdp_total() {
        let pdp = PowerDelayProfile::model_b_substitute();
        let total = pdp.total_power();
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|seed| MultipathChannel::generate(&pdp, seed).unwrap().power())
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean - total).abs() / total < 0.03,
            "mean realized power {mean} vs pdp total {total}"
        );
    }

    #[test]
    fn model_b_substitute_hits_link_budget() {
        let pdp = PowerDelayProfile::model_b_substitute();
        // -12 dBm at the 0.5 W reference transmit power.
        let expected = 10f64.powf((-12.0 - 30.0) / 10.0) / REFERENCE_TX_POWER;
        assert!((pdp.total_power() - expected).abs() < 1e-12 * expected);
        assert_eq!(pdp.entries().len(), 18);
    }

    #[test]
    fn pdp_toml_round_trip() {
        let text = r#"
            delays_ns = [0.0, 10.0, 20.0]
            powers_db = [0.0, -1.0, -2.0]
            rx_power_dbm = -12.0
        "#;
        let pdp = PowerDelayProfile::from_toml_str(text).unwrap();
        assert_eq!(pdp.entries().len(), 3);
        let expected = 10f64.powf(-4.2) / REFERENCE_TX_POWER;
        assert!((pdp.total_power() - expected).abs() < 1e-12);
        // dB ratios preserved by the rescale
        let ratio = pdp.entries()[1].power / pdp.entries()[0].power;
        assert!((ratio - 10f64.powf(-0.1)).abs() < 1e-12);

        assert!(PowerDelayProfile::from_toml_str("delays_ns = [0.0]").is_err());
    }

    #[test]
    fn channel_dump_has_header_and_tap_lines() {
        let pdp = single_tap_pdp(1.0);
        let ch = MultipathChannel::generate(&pdp, 99).unwrap();
        let text = ch.to_text();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# channel seed=99 taps=1");
        let fields: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
        assert_eq!(fields.len(), 4);
        let alpha: f64 = fields[0].parse().unwrap();
        assert!((alpha - ch.taps()[0].gain).abs() < 1e-12);
    }
}
