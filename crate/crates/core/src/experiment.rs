//! End-to-end runs: one trajectory turned into a histogram, level statistics
//! and a temperature fit, and pump sweeps over independent trajectories.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dynamics::{run_mean_field, run_trajectory, RunSummary, SimParams, C64};
use crate::error::{Error, Result};
use crate::graph::{energy_unchecked, CouplingGraph};
use crate::oracle::SpectrumTable;
use crate::sampling::{
    fit_temperature, integrated_autocorrelation_time, per_energy_probabilities, read_spins_into, success_probability,
    EnergyHistogram, FitOptions, FitReport, LevelStat, TempFit, TieBreak,
};
use crate::seeds::{derive_seed, rng_from_seed, PERTURBATION_STREAM, TRAJECTORY_STREAM};
use crate::spins::{canonical_key, config_from_key};

/// Standard deviation of each quadrature of the mean-field starting point.
pub const MEAN_FIELD_PERTURBATION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExperimentOptions {
    pub fit: FitOptions,
    pub tie_break: TieBreak,
    /// Integrate the noiseless mean-field equations from a small random
    /// amplitude instead of a quantum trajectory from the vacuum.
    pub mean_field: bool,
}

/// Seed of the noise stream of run `index` under base seed `base`.
pub fn trajectory_seed(base: u64, index: u64) -> u64 {
    derive_seed(base, TRAJECTORY_STREAM, index)
}

/// Small Gaussian amplitudes used to leave the unstable vacuum in mean-field
/// runs.
pub fn mean_field_initial(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = rng_from_seed(derive_seed(seed, PERTURBATION_STREAM, 0));
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * MEAN_FIELD_PERTURBATION
        })
        .collect()
}

/// Everything one run produced. When integration fails part way, the
/// statistics cover the samples collected before the failure and `abort`
/// holds the error.
#[derive(Debug)]
pub struct Experiment {
    pub histogram: EnergyHistogram,
    /// Sampled Ising energy at every sample time.
    pub energies: Vec<f64>,
    pub levels: Vec<LevelStat>,
    pub fit: Result<TempFit>,
    /// `None` without an enumerated spectrum.
    pub success_probability: Option<f64>,
    /// Integrated autocorrelation time of the energy series, in time units.
    pub autocorrelation_time: Option<f64>,
    pub summary: Option<RunSummary>,
    pub abort: Option<Error>,
}

impl Experiment {
    pub fn samples(&self) -> u64 {
        self.histogram.total()
    }

    pub fn report(&self) -> Option<FitReport> {
        self.fit
            .as_ref()
            .ok()
            .map(|f| FitReport::new(f, self.autocorrelation_time, self.samples()))
    }

    /// Energy of the most visited canonical configuration.
    pub fn most_visited_energy(&self, g: &CouplingGraph) -> Option<f64> {
        self.histogram
            .most_visited()
            .map(|(key, _)| energy_unchecked(g, &config_from_key(key, g.n())))
    }
}

/// Level statistics from visited configurations only: every canonical
/// configuration is its own level of multiplicity 2. Used when the graph is
/// too large to enumerate; the per-configuration fit is unaffected.
pub fn visited_configuration_levels(hist: &EnergyHistogram, g: &CouplingGraph) -> Vec<LevelStat> {
    let total = hist.total() as f64;
    let mut out: Vec<LevelStat> = hist
        .counts()
        .iter()
        .map(|(&key, &count)| {
            let p = count as f64 / total;
            LevelStat {
                energy: energy_unchecked(g, &config_from_key(key, g.n())),
                multiplicity: 2,
                count,
                p_energy: p,
                p_per_config: p / 2.0,
            }
        })
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out
}

/// Runs one trajectory (or mean-field run) and analyses its samples.
/// `sink` sees every sample as it is produced.
pub fn run_experiment<F>(
    params: &SimParams,
    g: &CouplingGraph,
    spectrum: Option<&SpectrumTable>,
    opts: &ExperimentOptions,
    mut sink: F,
) -> Result<Experiment>
where
    F: FnMut(f64, &[C64]),
{
    if let Some(spec) = spectrum {
        if spec.graph_fingerprint() != g.fingerprint() {
            return Err(Error::GraphMismatch {
                expected: g.fingerprint(),
                found: spec.graph_fingerprint().to_string(),
            });
        }
    }
    let n = g.n();
    let mut histogram = EnergyHistogram::new(g)?;
    let mut energies = Vec::with_capacity(params.sample_count() as usize);
    let mut sigma = vec![0i8; n];
    let mut readout_error = None;
    let observer = |t: f64, alpha: &[C64]| {
        sink(t, alpha);
        if readout_error.is_some() {
            return;
        }
        match read_spins_into(alpha, opts.tie_break, &mut sigma) {
            Ok(()) => {
                histogram.accumulate_key(canonical_key(&sigma));
                energies.push(energy_unchecked(g, &sigma));
            }
            Err(e) => readout_error = Some(e),
        }
    };
    let run = if opts.mean_field {
        let mut p = params.clone();
        p.noise = false;
        run_mean_field(&p, g, &mean_field_initial(n, params.seed), observer)
    } else {
        run_trajectory(params, g, observer)
    };
    let (summary, abort) = match run {
        Ok(s) => (Some(s), None),
        Err(e @ Error::Aborted { .. }) => (None, Some(e)),
        Err(e) => return Err(e),
    };
    if let Some(e) = readout_error {
        return Err(e);
    }

    let (levels, success) = match spectrum {
        Some(spec) => (per_energy_probabilities(&histogram, spec)?, Some(success_probability(&histogram, spec)?)),
        None => (visited_configuration_levels(&histogram, g), None),
    };
    let fit = fit_temperature(&levels, &opts.fit);
    let autocorrelation_time = integrated_autocorrelation_time(&energies).map(|tau| tau * params.sample_interval);
    Ok(Experiment {
        histogram,
        energies,
        levels,
        fit,
        success_probability: success,
        autocorrelation_time,
        summary,
        abort,
    })
}

/// One point of a pump sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub index: usize,
    /// `G / G_th`.
    pub ratio: f64,
    pub pump: f64,
    pub seed: u64,
    pub outcome: Result<Experiment>,
}

/// Runs one independent trajectory per pump ratio on the current rayon pool.
/// Point `i` uses pump `ratios[i] * threshold` and seed
/// `trajectory_seed(base.seed, i)`, so results do not depend on scheduling.
pub fn sweep_pump(
    base: &SimParams,
    g: &CouplingGraph,
    spectrum: Option<&SpectrumTable>,
    threshold: f64,
    ratios: &[f64],
    opts: &ExperimentOptions,
) -> Vec<SweepPoint> {
    ratios
        .par_iter()
        .enumerate()
        .map(|(index, &ratio)| {
            let mut params = base.clone();
            params.pump = ratio * threshold;
            params.seed = trajectory_seed(base.seed, index as u64);
            let outcome = run_experiment(&params, g, spectrum, opts, |_, _| {});
            SweepPoint { index, ratio, pump: params.pump, seed: params.seed, outcome }
        })
        .collect()
}
