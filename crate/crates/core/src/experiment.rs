//! Seeded Monte-Carlo sweeps over (tone count, antenna count, waveform).
//!
//! One channel realization is drawn per trial index (seed = base seed +
//! index) and shared by every grid cell and waveform, so per-trial
//! comparisons are paired. Trials run on a worker pool; rows are sorted
//! deterministically before emission, so identical configurations produce
//! byte-identical CSV files.

use rayon::prelude::*;
use serde::Deserialize;
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines;
use crate::channel::{ArrayGeometry, FrequencyGrid, MultipathChannel, PowerDelayProfile};
use crate::harvester::{z_dc_analytic, DiodeParameters, HarvesterModel};
use crate::optimizer::{optimize_waveform, OptimizeOptions};
use crate::rectifier::{simulate_rectifier, RectifierCircuit};
use crate::waveform::MultisineWaveform;
use crate::{Error, Result};

/// Waveform construction strategies selectable in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformKind {
    Uniform,
    MatchedFilter,
    Optimized,
    Strongest,
}

impl WaveformKind {
    pub const ALL: [WaveformKind; 4] = [
        WaveformKind::Uniform,
        WaveformKind::MatchedFilter,
        WaveformKind::Optimized,
        WaveformKind::Strongest,
    ];
}

impl fmt::Display for WaveformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveformKind::Uniform => "uniform",
            WaveformKind::MatchedFilter => "mf",
            WaveformKind::Optimized => "opt",
            WaveformKind::Strongest => "strongest",
        })
    }
}

impl FromStr for WaveformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(WaveformKind::Uniform),
            "mf" => Ok(WaveformKind::MatchedFilter),
            "opt" => Ok(WaveformKind::Optimized),
            "strongest" => Ok(WaveformKind::Strongest),
            other => Err(Error::Config(format!(
                "unknown waveform '{other}' (expected uniform, mf, opt or strongest)"
            ))),
        }
    }
}

/// Everything a sweep needs. Defaults follow the reference scenario:
/// 20 MHz of bandwidth around 5.18 GHz, -12 dBm average received power,
/// 0.5 W transmit power, 100 realizations.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub tone_counts: Vec<usize>,
    pub antenna_counts: Vec<usize>,
    pub waveforms: Vec<WaveformKind>,
    /// Channel realizations per grid cell.
    pub trials: usize,
    /// Realization `r` uses seed `base_seed + r`.
    pub base_seed: u64,
    /// Transmit power budget (watts).
    pub power: f64,
    /// Total multisine bandwidth (Hz); tone spacing is bandwidth / N.
    pub bandwidth: f64,
    /// RF center frequency (Hz).
    pub center_frequency: f64,
    pub harvester: HarvesterModel,
    pub pdp: PowerDelayProfile,
    /// Also run the circuit-level rectifier per trial (slower).
    pub circuit_sim: bool,
    /// Carrier used by the circuit simulation. The diode law is
    /// memoryless, so rankings are carrier-independent; the default
    /// 100 MHz keeps step counts small. Set equal to `center_frequency`
    /// to simulate at the true carrier.
    pub sim_center_frequency: f64,
    pub optimizer: OptimizeOptions,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tone_counts: vec![1, 2, 4, 8, 16],
            antenna_counts: vec![1, 2, 4],
            waveforms: vec![
                WaveformKind::Uniform,
                WaveformKind::MatchedFilter,
                WaveformKind::Optimized,
            ],
            trials: 100,
            base_seed: 42,
            power: crate::channel::REFERENCE_TX_POWER,
            bandwidth: 20e6,
            center_frequency: 5.18e9,
            harvester: HarvesterModel::default(),
            pdp: PowerDelayProfile::default(),
            circuit_sim: false,
            sim_center_frequency: 100e6,
            optimizer: OptimizeOptions::default(),
            output: PathBuf::from("results.csv"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tone_counts.is_empty() || self.tone_counts.iter().any(|&n| n < 1) {
            return Err(Error::Config("tone counts must be a non-empty list of N >= 1".into()));
        }
        if self.antenna_counts.is_empty() || self.antenna_counts.iter().any(|&m| m < 1) {
            return Err(Error::Config("antenna counts must be a non-empty list of M >= 1".into()));
        }
        if self.waveforms.is_empty() {
            return Err(Error::Config("at least one waveform must be selected".into()));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(self.power > 0.0) {
            return Err(Error::Config(format!("power must be positive, got {}", self.power)));
        }
        if !(self.bandwidth > 0.0) || !(self.center_frequency > 0.0) {
            return Err(Error::Config("bandwidth and center frequency must be positive".into()));
        }
        let max_n = *self.tone_counts.iter().max().expect("non-empty");
        let span = self.bandwidth * (max_n as f64 - 1.0) / max_n as f64;
        if self.circuit_sim && self.sim_center_frequency <= span / 2.0 {
            return Err(Error::Config(format!(
                "simulation carrier {} Hz too low for a {span} Hz tone span",
                self.sim_center_frequency
            )));
        }
        Ok(())
    }
}

/// One (cell, waveform, realization) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub tone_count: usize,
    pub antenna_count: usize,
    pub waveform: WaveformKind,
    pub realization: usize,
    pub seed: u64,
    pub z_dc: f64,
    pub dc_power_sim: Option<f64>,
    /// Optimizer iterations (zero for closed-form baselines).
    pub iterations: usize,
    pub converged: bool,
}

/// Per-cell mean over realizations.
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub tone_count: usize,
    pub antenna_count: usize,
    pub waveform: WaveformKind,
    pub trials: usize,
    pub mean_z_dc: f64,
    pub mean_dc_power_sim: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResults {
    pub rows: Vec<TrialRow>,
    pub summaries: Vec<CellSummary>,
}

fn run_trial(config: &ExperimentConfig, realization: usize) -> Result<Vec<TrialRow>> {
    let seed = config.base_seed.wrapping_add(realization as u64);
    let channel = MultipathChannel::generate(&config.pdp, seed)?;
    let mut rows = Vec::new();
    for &n in &config.tone_counts {
        let grid = FrequencyGrid::centered(config.center_frequency, config.bandwidth, n)?;
        for &m in &config.antenna_counts {
            let array = ArrayGeometry::half_wavelength(m, config.center_frequency)?;
            let h = channel.frequency_response(&grid, &array);
            for &kind in &config.waveforms {
                let (waveform, iterations, converged) = match kind {
                    WaveformKind::Uniform => (baselines::uniform_waveform(&h, config.power)?, 0, true),
                    WaveformKind::MatchedFilter => {
                        (baselines::matched_filter_waveform(&h, config.power)?, 0, true)
                    }
                    WaveformKind::Strongest => {
                        (baselines::strongest_sinewave_waveform(&h, config.power)?, 0, true)
                    }
                    WaveformKind::Optimized => {
                        let solved = optimize_waveform(
                            &h,
                            &config.harvester,
                            config.power,
                            &config.optimizer,
                        )?;
                        (solved.waveform, solved.trace.iterations(), solved.converged)
                    }
                };
                let z_dc = z_dc_analytic(&waveform, &h, &config.harvester)?;
                let dc_power_sim = if config.circuit_sim {
                    Some(simulate_trial_rectifier(config, &waveform, &h)?)
                } else {
                    None
                };
                rows.push(TrialRow {
                    tone_count: n,
                    antenna_count: m,
                    waveform: kind,
                    realization,
                    seed,
                    z_dc,
                    dc_power_sim,
                    iterations,
                    converged,
                });
            }
        }
    }
    Ok(rows)
}

fn simulate_trial_rectifier(
    config: &ExperimentConfig,
    waveform: &MultisineWaveform,
    h: &crate::channel::FrequencyResponse,
) -> Result<f64> {
    let spectrum = waveform.received_spectrum(h)?.recentered(config.sim_center_frequency);
    let spacing_hz = spectrum.grid.spacing / (2.0 * std::f64::consts::PI);
    let circuit = RectifierCircuit::for_tone_spacing(spacing_hz)?;
    let w_max = spectrum.grid.frequency(spectrum.grid.count - 1);
    let dt = 2.0 * std::f64::consts::PI / w_max / 16.0;
    let duration = 1.6 * circuit.settle_time();
    let run = simulate_rectifier(&spectrum, &circuit, duration, dt)?;
    Ok(run.dc_power)
}

/// Run the full sweep. Trials are independent and dispatched to a worker
/// pool; output rows are sorted by (N, M, waveform order, realization).
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResults> {
    config.validate()?;
    let per_trial: Vec<Vec<TrialRow>> = (0..config.trials)
        .into_par_iter()
        .map(|realization| run_trial(config, realization))
        .collect::<Result<_>>()?;
    let mut rows: Vec<TrialRow> = per_trial.into_iter().flatten().collect();
    let order = |kind: WaveformKind| {
        config.waveforms.iter().position(|&k| k == kind).expect("kind comes from config")
    };
    rows.sort_by_key(|r| (r.tone_count, r.antenna_count, order(r.waveform), r.realization));

    let mut summaries: Vec<CellSummary> = Vec::new();
    for row in &rows {
        match summaries.last_mut() {
            Some(cell)
                if cell.tone_count == row.tone_count
                    && cell.antenna_count == row.antenna_count
                    && cell.waveform == row.waveform =>
            {
                cell.trials += 1;
                cell.mean_z_dc += row.z_dc;
                if let (Some(total), Some(dc)) = (cell.mean_dc_power_sim.as_mut(), row.dc_power_sim)
                {
                    *total += dc;
                }
            }
            _ => summaries.push(CellSummary {
                tone_count: row.tone_count,
                antenna_count: row.antenna_count,
                waveform: row.waveform,
                trials: 1,
                mean_z_dc: row.z_dc,
                mean_dc_power_sim: row.dc_power_sim,
            }),
        }
    }
    for cell in &mut summaries {
        cell.mean_z_dc /= cell.trials as f64;
        if let Some(total) = cell.mean_dc_power_sim.as_mut() {
            *total /= cell.trials as f64;
        }
    }
    Ok(SweepResults { rows, summaries })
}

/// Results as CSV text with columns
/// `N,M,waveform,realization,seed,z_dc,dc_power_sim,iterations,converged`.
/// Floats use the shortest representation that parses back exactly.
pub fn results_to_csv(results: &SweepResults) -> String {
    let mut out = String::from("N,M,waveform,realization,seed,z_dc,dc_power_sim,iterations,converged\n");
    for row in &results.rows {
        let dc = row.dc_power_sim.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.tone_count,
            row.antenna_count,
            row.waveform,
            row.realization,
            row.seed,
            row.z_dc,
            dc,
            row.iterations,
            row.converged
        ));
    }
    out
}

/// Write the per-trial rows to `path`.
pub fn emit_csv(results: &SweepResults, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(results_to_csv(results).as_bytes())?;
    Ok(())
}


// ---------------------------------------------------------------------------
// Config file support (TOML). File values override programmatic/CLI values.
// ---------------------------------------------------------------------------

/// Harvester settings as they appear in a config file. Either the diode
/// constants (`i_s`, `n`, `v_t`, `a`) or a direct `k2`/`k4` override may
/// be given.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarvesterOverrides {
    pub i_s: Option<f64>,
    pub n: Option<f64>,
    pub v_t: Option<f64>,
    pub a: Option<f64>,
    pub r_ant: Option<f64>,
    pub k2: Option<f64>,
    pub k4: Option<f64>,
}

impl HarvesterOverrides {
    pub fn resolve(&self) -> Result<HarvesterModel> {
        let r_ant = self.r_ant.unwrap_or(50.0);
        match (self.k2, self.k4) {
            (Some(k2), Some(k4)) => {
                if self.i_s.is_some() || self.n.is_some() || self.v_t.is_some() {
                    return Err(Error::Config(
                        "give either diode constants or k2/k4, not both".into(),
                    ));
                }
                HarvesterModel::from_coefficients(k2, k4, r_ant)
            }
            (None, None) => {
                let defaults = DiodeParameters::default();
                let diode = DiodeParameters {
                    saturation_current: self.i_s.unwrap_or(defaults.saturation_current),
                    ideality: self.n.unwrap_or(defaults.ideality),
                    thermal_voltage: self.v_t.unwrap_or(defaults.thermal_voltage),
                };
                HarvesterModel::from_diode(diode, self.a.unwrap_or(0.0), r_ant)
            }
            _ => Err(Error::Config("k2 and k4 must be given together".into())),
        }
    }
}

/// Sweep settings as they appear in a TOML config file; every field is
/// optional and overrides the corresponding [`ExperimentConfig`] value.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub n: Option<Vec<usize>>,
    pub m: Option<Vec<usize>>,
    pub waveforms: Option<Vec<String>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub power_dbm: Option<f64>,
    pub power_watts: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub center_hz: Option<f64>,
    pub circuit_sim: Option<bool>,
    pub sim_center_hz: Option<f64>,
    /// Run circuit simulations at the true carrier.
    pub full_rf: Option<bool>,
    pub out: Option<String>,
    /// Path to a power-delay-profile TOML file.
    pub pdp: Option<String>,
    pub harvester: Option<HarvesterOverrides>,
}

impl ConfigOverrides {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Apply the file's values on top of `config`. Returns the `full_rf`
    /// request so the caller can resolve it after all overrides.
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<Option<bool>> {
        if self.power_dbm.is_some() && self.power_watts.is_some() {
            return Err(Error::Config("give power_dbm or power_watts, not both".into()));
        }
        if let Some(n) = &self.n {
            config.tone_counts = n.clone();
        }
        if let Some(m) = &self.m {
            config.antenna_counts = m.clone();
        }
        if let Some(waveforms) = &self.waveforms {
            config.waveforms =
                waveforms.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let Some(seed) = self.seed {
            config.base_seed = seed;
        }
        if let Some(dbm) = self.power_dbm {
            config.power = 10f64.powf((dbm - 30.0) / 10.0);
        }
        if let Some(watts) = self.power_watts {
            config.power = watts;
        }
        if let Some(bandwidth) = self.bandwidth_hz {
            config.bandwidth = bandwidth;
        }
        if let Some(center) = self.center_hz {
            config.center_frequency = center;
        }
        if let Some(circuit_sim) = self.circuit_sim {
            config.circuit_sim = circuit_sim;
        }
        if let Some(sim_center) = self.sim_center_hz {
            config.sim_center_frequency = sim_center;
        }
        if let Some(out) = &self.out {
            config.output = PathBuf::from(out);
        }
        if let Some(pdp) = &self.pdp {
            config.pdp = PowerDelayProfile::from_path(Path::new(pdp))?;
        }
        if let Some(harvester) = &self.harvester {
            config.harvester = harvester.resolve()?;
        }
        Ok(self.full_rf)
    }
}

#[cfg(test)]
mod config_tests {
    use super::*;

    #[test]
    fn overrides_apply_on_top_of_defaults() {
        let text = r#"
            n = [1, 2]
            m = [1]
            waveforms = ["uniform", "opt"]
            trials = 7
            seed = 9
            power_dbm = 30.0
            bandwidth_hz = 10e6
            center_hz = 2.4e9

            [harvester]
            k2 = 0.004
            k4 = 0.4
        "#;
        let overrides = ConfigOverrides::from_toml_str(text).unwrap();
        let mut config = ExperimentConfig::default();
        let full_rf = overrides.apply(&mut config).unwrap();
        assert_eq!(full_rf, None);
        assert_eq!(config.tone_counts, vec![1, 2]);
        assert_eq!(config.trials, 7);
        assert_eq!(config.base_seed, 9);
        assert!((config.power - 1.0).abs() < 1e-12);
        assert_eq!(config.waveforms, vec![WaveformKind::Uniform, WaveformKind::Optimized]);
        assert_eq!(config.harvester.k2(), 0.004);
        assert!(config.harvester.diode.is_none());
    }

    #[test]
    fn malformed_config_reports_location() {
        let err = ConfigOverrides::from_toml_str("trials = \"many\"").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("line"), "no location in: {message}");
    }

    #[test]
    fn conflicting_power_fields_rejected() {
        let overrides = ConfigOverrides {
            power_dbm: Some(27.0),
            power_watts: Some(0.5),
            ..Default::default()
        };
        let mut config = ExperimentConfig::default();
        assert!(overrides.apply(&mut config).is_err());
    }

    #[test]
    fn harvester_requires_complete_coefficient_pair() {
        let bad = HarvesterOverrides { k2: Some(0.003), ..Default::default() };
        assert!(bad.resolve().is_err());
        let mixed = HarvesterOverrides {
            k2: Some(0.003),
            k4: Some(0.3),
            i_s: Some(1e-6),
            ..Default::default()
        };
        assert!(mixed.resolve().is_err());
    }
}
