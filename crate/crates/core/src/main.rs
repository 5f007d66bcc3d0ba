//! `wpt`: Monte-Carlo sweeps of multisine waveform designs for RF energy
//! harvesting. See `wpt --help` and the repository README.

use clap::Parser;
use std::path::PathBuf;

use wpt_waveform::experiment::{emit_csv, run_sweep, ConfigOverrides, ExperimentConfig};

/// Sweep waveform designs over (N sinewaves, M antennas) cells with
/// paired random channels and write per-trial results to CSV.
#[derive(Debug, Parser)]
#[command(name = "wpt", version)]
struct Args {
    /// TOML config file; its values override command-line flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sinewave counts, comma separated (default 1,2,4,8,16).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Antenna counts, comma separated (default 1,2,4).
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Waveforms to run: uniform, mf, opt, strongest (default uniform,mf,opt).
    #[arg(long, value_delimiter = ',')]
    waveforms: Option<Vec<String>>,
    /// Channel realizations per cell (default 100).
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; realization r uses seed + r (default 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Transmit power in dBm (default ~26.99 dBm = 0.5 W).
    #[arg(long)]
    power_dbm: Option<f64>,
    /// Also run the circuit-level rectifier simulation per trial.
    #[arg(long)]
    circuit_sim: bool,
    /// Run circuit simulations at the true carrier instead of the
    /// down-shifted 100 MHz default.
    #[arg(long)]
    full_rf: bool,
    /// Output CSV path (default results.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(args: &Args) -> wpt_waveform::Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    if let Some(n) = &args.n {
        config.tone_counts = n.clone();
    }
    if let Some(m) = &args.m {
        config.antenna_counts = m.clone();
    }
    if let Some(waveforms) = &args.waveforms {
        config.waveforms = waveforms
            .iter()
            .map(|s| s.parse())
            .collect::<wpt_waveform::Result<Vec<_>>>()?;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(dbm) = args.power_dbm {
        config.power = 10f64.powf((dbm - 30.0) / 10.0);
    }
    if args.circuit_sim {
        config.circuit_sim = true;
    }
    if let Some(out) = &args.out {
        config.output = out.clone();
    }
    let mut full_rf = args.full_rf;
    if let Some(path) = &args.config {
        if let Some(file_full_rf) = ConfigOverrides::from_path(path)?.apply(&mut config)? {
            full_rf = file_full_rf;
        }
    }
    if full_rf {
        config.sim_center_frequency = config.center_frequency;
    }
    Ok(config)
}

fn run(args: &Args) -> wpt_waveform::Result<()> {
    let config = build_config(args)?;
    let results = run_sweep(&config)?;
    emit_csv(&results, &config.output)?;
    println!(
        "{} rows over {} cells -> {}",
        results.rows.len(),
        results.summaries.len(),
        config.output.display()
    );
    for cell in &results.summaries {
        let circuit = cell
            .mean_dc_power_sim
            .map(|p| format!(" mean_dc_power_sim_w={p:.4e}"))
            .unwrap_or_default();
        println!(
            "N={} M={} {:<9} mean_z_dc_a={:.6e}{}",
            cell.tone_count, cell.antenna_count, cell.waveform.to_string(), cell.mean_z_dc, circuit
        );
    }
    Ok(())
}

fn main() {
    let args = Args::parse();
    if let Err(error) = run(&args) {
        eprintln!("error: {error}");
        std::process::exit(1);
    }
}
