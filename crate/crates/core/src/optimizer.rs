//! Waveform optimization: closed-form phases, iterative amplitudes.
//!
//! With conjugate phases every cosine in the DC metric equals one, so the
//! metric becomes a posynomial in the amplitudes. Maximizing a posynomial
//! under the transmit power constraint is nonconvex, but a weighted
//! AM-GM inequality bounds it from below by a single monomial, and a
//! monomial is maximized on the power sphere in closed form. Iterating
//!
//!   weights from the current iterate -> monomial bound -> closed-form max
//!
//! produces a nondecreasing objective sequence whose fixed points satisfy
//! the stationarity conditions of the original problem. The final iterate
//! is a local maximizer in general; global optimality is not guaranteed,
//! which is why small instances are cross-checked against exhaustive
//! search in the tests and multiple starts are available.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt::Write as _;

use crate::channel::FrequencyResponse;
use crate::harvester::HarvesterModel;
use crate::waveform::MultisineWaveform;
use crate::{Error, Result};

/// Globally optimal sinewave phases `phi*[n, m] = -arg h[n, m]`: they
/// rotate every per-tone, per-antenna contribution onto the real axis, so
/// all cosines in the DC metric reach their maximum of one simultaneously.
pub fn optimal_phases(h: &FrequencyResponse) -> Array2<f64> {
    h.gains().mapv(|g| -g.arg())
}

/// A positive-coefficient product term `c * prod_v s_v^{a_v}` over the
/// amplitude variables. Exponents are stored sparsely, sorted by variable
/// index; they are small integers for the raw DC-metric terms and reals
/// for the AM-GM aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Vec<(usize, f64)>,
}

impl Monomial {
    /// Value at the given flat amplitude vector.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        let mut product = self.coefficient;
        for &(v, a) in &self.exponents {
            let s = values[v];
            product *= if a.fract() == 0.0 && a.abs() < 16.0 {
                s.powi(a as i32)
            } else {
                s.powf(a)
            };
        }
        product
    }

    /// Sum of exponents (total degree).
    pub fn degree(&self) -> f64 {
        self.exponents.iter().map(|(_, a)| a).sum()
    }
}

/// The DC metric at optimal phases as a sum of monomials with positive
/// coefficients, over flat variable indices `v = n * M + m`.
#[derive(Debug, Clone)]
pub struct PosynomialObjective {
    pub terms: Vec<Monomial>,
    num_tones: usize,
    num_antennas: usize,
}

impl PosynomialObjective {
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_tones * self.num_antennas
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.num_tones, self.num_antennas)
    }

    /// Per-term values at the amplitude matrix.
    pub fn term_values(&self, s: &Array2<f64>) -> Vec<f64> {
        let flat = s.as_slice().expect("amplitude matrix is contiguous");
        self.terms.iter().map(|t| t.evaluate(flat)).collect()
    }
}

const NO_VAR: u32 = u32::MAX;

/// Build the posynomial form of the DC metric from the channel magnitude
/// matrix: one monomial per second-order pair `(n, m0, m1)` with
/// coefficient `(k2/2) R A[n,m0] A[n,m1]`, one per fourth-order tuple
/// (`n0 + n1 = n2 + n3`, all antenna quadruples) with coefficient
/// `(3 k4 / 8) R^2 prod A`, identical exponent maps merged by summing
/// coefficients. Variables whose channel magnitude is zero cannot raise
/// the metric and are excluded (their terms carry zero coefficients).
pub fn build_posynomial(
    magnitudes: &Array2<f64>,
    model: &HarvesterModel,
) -> PosynomialObjective {
    let (n_tones, n_ant) = magnitudes.dim();
    let var = |n: usize, m: usize| (n * n_ant + m) as u32;
    let r = model.antenna_resistance;
    let mut merged: HashMap<[u32; 4], f64> = HashMap::new();

    let c2 = model.k2() / 2.0 * r;
    if c2 > 0.0 {
        for n in 0..n_tones {
            for m0 in 0..n_ant {
                for m1 in 0..n_ant {
                    let coefficient = c2 * magnitudes[[n, m0]] * magnitudes[[n, m1]];
                    if coefficient > 0.0 {
                        let (v0, v1) = (var(n, m0).min(var(n, m1)), var(n, m0).max(var(n, m1)));
                        *merged.entry([v0, v1, NO_VAR, NO_VAR]).or_insert(0.0) += coefficient;
                    }
                }
            }
        }
    }

    let c4 = 3.0 * model.k4() / 8.0 * r * r;
    if c4 > 0.0 {
        for n0 in 0..n_tones {
            for n1 in 0..n_tones {
                let sum = n0 + n1;
                for n2 in 0..n_tones {
                    let Some(n3) = sum.checked_sub(n2).filter(|&n3| n3 < n_tones) else {
                        continue;
                    };
                    for m0 in 0..n_ant {
                        let a0 = c4 * magnitudes[[n0, m0]];
                        if a0 == 0.0 {
                            continue;
                        }
                        for m1 in 0..n_ant {
                            let a01 = a0 * magnitudes[[n1, m1]];
                            if a01 == 0.0 {
                                continue;
                            }
                            for m2 in 0..n_ant {
                                let a012 = a01 * magnitudes[[n2, m2]];
                                if a012 == 0.0 {
                                    continue;
                                }
                                for m3 in 0..n_ant {
                                    let coefficient = a012 * magnitudes[[n3, m3]];
                                    if coefficient > 0.0 {
                                        let mut key =
                                            [var(n0, m0), var(n1, m1), var(n2, m2), var(n3, m3)];
                                        key.sort_unstable();
                                        *merged.entry(key).or_insert(0.0) += coefficient;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Deterministic term order: sort by exponent key.
    let mut keyed: Vec<([u32; 4], f64)> = merged.into_iter().collect();
    keyed.sort_unstable_by_key(|(key, _)| *key);
    let terms = keyed
        .into_iter()
        .map(|(key, coefficient)| {
            let mut exponents: Vec<(usize, f64)> = Vec::with_capacity(4);
            for v in key.into_iter().filter(|&v| v != NO_VAR) {
                match exponents.last_mut() {
                    Some((last, a)) if *last == v as usize => *a += 1.0,
                    _ => exponents.push((v as usize, 1.0)),
                }
            }
            Monomial { coefficient, exponents }
        })
        .collect();

    PosynomialObjective { terms, num_tones: n_tones, num_antennas: n_ant }
}

/// Posynomial value `sum_k c_k prod s^a` at the amplitude matrix.
pub fn evaluate_posynomial(p: &PosynomialObjective, s: &Array2<f64>) -> f64 {
    p.term_values(s).iter().sum()
}

/// Weighted AM-GM lower bound of the posynomial: with weights
/// `gamma_k >= 0`, `sum gamma_k = 1`,
/// `sum_k g_k >= prod_k (g_k / gamma_k)^{gamma_k}`, a single monomial with
/// coefficient `prod (c_k / gamma_k)^{gamma_k}` and exponents
/// `sum_k gamma_k a_k`. Terms with zero weight are excluded.
pub fn amgm_lower_bound(p: &PosynomialObjective, gamma: &[f64]) -> Result<Monomial> {
    if gamma.len() != p.terms.len() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} terms",
            gamma.len(),
            p.terms.len()
        )));
    }
    if gamma.iter().any(|&g| !(g >= 0.0)) {
        return Err(Error::InvalidInput("weights must be non-negative".into()));
    }
    let total: f64 = gamma.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("weights must sum to 1, got {total}")));
    }

    let mut log_coefficient = 0.0;
    let mut combined = vec![0.0; p.num_vars()];
    for (term, &g) in p.terms.iter().zip(gamma) {
        if g == 0.0 {
            continue;
        }
        log_coefficient += g * (term.coefficient.ln() - g.ln());
        for &(v, a) in &term.exponents {
            combined[v] += g * a;
        }
    }
    let exponents = combined
        .into_iter()
        .enumerate()
        .filter(|&(_, a)| a > 0.0)
        .collect();
    Ok(Monomial { coefficient: log_coefficient.exp(), exponents })
}

/// Closed-form maximizer of a monomial with non-negative exponents under
/// the transmit power constraint `0.5 sum s_v^2 <= P`, `s >= 0`:
/// `s_v = sqrt(2 P a_v / sum_j a_j)` for `a_v > 0` and zero otherwise.
/// (Stationarity on the active constraint gives `s_v^2` proportional to
/// `a_v`; the objective is increasing in every variable so the constraint
/// binds.)
pub fn maximize_monomial_under_power(
    monomial: &Monomial,
    power: f64,
    num_vars: usize,
) -> Result<Vec<f64>> {
    if !(power > 0.0) {
        return Err(Error::InvalidInput(format!("power must be positive, got {power}")));
    }
    if monomial.exponents.iter().any(|&(_, a)| a < 0.0) {
        return Err(Error::InvalidInput("monomial exponents must be non-negative".into()));
    }
    let total = monomial.degree();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("monomial has no positive exponents".into()));
    }
    let mut s = vec![0.0; num_vars];
    for &(v, a) in &monomial.exponents {
        if v >= num_vars {
            return Err(Error::InvalidInput(format!(
                "variable {v} out of range for {num_vars} variables"
            )));
        }
        s[v] = (2.0 * power * a / total).sqrt();
    }
    Ok(s)
}

/// One step of the amplitude iteration.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub amplitudes: Array2<f64>,
    pub z_dc: f64,
    /// AM-GM weights `gamma_k = g_k / z_dc` evaluated at this iterate.
    pub weights: Vec<f64>,
}

/// Full history of an amplitude optimization run. The objective column is
/// nondecreasing: each iterate maximizes a lower bound that is tight at
/// its predecessor.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    /// Number of inner steps taken (excludes the initial point).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_z_dc(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.z_dc)
    }

    /// CSV export with columns `iter,z_dc,power,max_gamma`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,z_dc,power,max_gamma\n");
        for record in &self.records {
            let power = 0.5 * record.amplitudes.iter().map(|s| s * s).sum::<f64>();
            let max_gamma = record.weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            writeln!(out, "{},{},{},{}", record.iteration, record.z_dc, power, max_gamma)
                .expect("string write");
        }
        out
    }
}

/// Stopping parameters for [`optimize_amplitudes`].
#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    /// Relative objective change below which the iteration stops.
    pub tol: f64,
    /// Iteration cap; exceeding it flags the result as not converged.
    pub max_iter: usize,
    /// Number of starts for [`optimize_waveform`]; the first start is the
    /// matched filter, the rest are random feasible points.
    pub starts: usize,
    /// Seed for the random extra starts.
    pub start_seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 100, starts: 1, start_seed: 0 }
    }
}

/// Result of an amplitude optimization.
#[derive(Debug, Clone)]
pub struct AmplitudeSolution {
    pub amplitudes: Array2<f64>,
    pub trace: IterationTrace,
    /// False when the iteration cap was reached before the tolerance.
    pub converged: bool,
}

/// Iterate weight update, AM-GM bound and closed-form monomial maximizer
/// from `init` until the relative objective change drops below `tol` or
/// `max_iter` is reached. The initial point must be feasible and strictly
/// positive on every variable with nonzero channel magnitude; every
/// iterate after it sits exactly on the power sphere.
pub fn optimize_amplitudes(
    h: &FrequencyResponse,
    model: &HarvesterModel,
    power: f64,
    init: &Array2<f64>,
    options: &OptimizeOptions,
) -> Result<AmplitudeSolution> {
    let magnitudes = h.magnitudes();
    if init.dim() != magnitudes.dim() {
        return Err(Error::DimensionMismatch(format!(
            "init is {:?} but channel response is {:?}",
            init.dim(),
            magnitudes.dim()
        )));
    }
    let init_power = 0.5 * init.iter().map(|s| s * s).sum::<f64>();
    if init_power > power * (1.0 + 1e-9) {
        return Err(Error::InvalidInput(format!(
            "infeasible init: transmit power {init_power} exceeds budget {power}"
        )));
    }
    for ((n, m), &a) in magnitudes.indexed_iter() {
        if a > 0.0 && !(init[[n, m]] > 0.0) {
            return Err(Error::InvalidInput(format!(
                "init must be strictly positive on active variables; s[{n},{m}] = {}",
                init[[n, m]]
            )));
        }
    }
    let posynomial = build_posynomial(&magnitudes, model);
    if posynomial.terms.is_empty() {
        return Err(Error::InvalidInput(
            "objective has no terms (zero channel or zero k2 and k4)".into(),
        ));
    }

    // Zero-magnitude variables stay at zero.
    let mut s = Array2::from_shape_fn(init.dim(), |(n, m)| {
        if magnitudes[[n, m]] > 0.0 {
            init[[n, m]]
        } else {
            0.0
        }
    });

    let record = |s: &Array2<f64>, iteration: usize| {
        let values = posynomial.term_values(s);
        let z: f64 = values.iter().sum();
        let weights = values.iter().map(|g| g / z).collect();
        IterationRecord { iteration, amplitudes: s.clone(), z_dc: z, weights }
    };

    let mut trace = IterationTrace::default();
    trace.records.push(record(&s, 0));
    let mut converged = false;
    for iteration in 1..=options.max_iter {
        let previous = trace.records.last().expect("trace has the init record");
        let bound = amgm_lower_bound(&posynomial, &previous.weights)?;
        let flat = maximize_monomial_under_power(&bound, power, posynomial.num_vars())?;
        let z_prev = previous.z_dc;
        s = Array2::from_shape_vec(s.dim(), flat).expect("solver preserves dimensions");
        let next = record(&s, iteration);
        let step = (next.z_dc - z_prev) / z_prev.abs().max(f64::MIN_POSITIVE);
        trace.records.push(next);
        if step.abs() < options.tol {
            converged = true;
            break;
        }
    }
    Ok(AmplitudeSolution { amplitudes: s, trace, converged })
}

/// A fully optimized waveform: conjugate phases plus iterated amplitudes.
#[derive(Debug, Clone)]
pub struct OptimizedWaveform {
    pub waveform: MultisineWaveform,
    pub trace: IterationTrace,
    pub converged: bool,
}

/// Optimize both phases (closed form) and amplitudes (iteratively, from
/// the matched filter plus `options.starts - 1` random feasible starts,
/// keeping the best final objective).
pub fn optimize_waveform(
    h: &FrequencyResponse,
    model: &HarvesterModel,
    power: f64,
    options: &OptimizeOptions,
) -> Result<OptimizedWaveform> {
    let mf = crate::baselines::matched_filter_waveform(h, power)?;
    let mut best = optimize_amplitudes(h, model, power, &mf.amplitudes, options)?;
    if options.starts > 1 {
        let magnitudes = h.magnitudes();
        let mut rng = ChaCha8Rng::seed_from_u64(options.start_seed);
        for _ in 1..options.starts {
            let raw = Array2::from_shape_fn(magnitudes.dim(), |(n, m)| {
                if magnitudes[[n, m]] > 0.0 {
                    0.05 + 0.95 * rng.random::<f64>()
                } else {
                    0.0
                }
            });
            let norm = (0.5 * raw.iter().map(|s| s * s).sum::<f64>()).sqrt();
            let init = raw.mapv(|s| s * (power.sqrt() / norm));
            let candidate = optimize_amplitudes(h, model, power, &init, options)?;
            if candidate.trace.final_z_dc() > best.trace.final_z_dc() {
                best = candidate;
            }
        }
    }
    let waveform = MultisineWaveform::new(best.amplitudes, optimal_phases(h), *h.grid())?;
    Ok(OptimizedWaveform { waveform, trace: best.trace, converged: best.converged })
}
