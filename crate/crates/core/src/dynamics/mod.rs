//! Gaussian quantum trajectories of N two-photon driven modes with
//! one-photon loss, two-photon loss and non-local (pair) loss encoding the
//! Ising couplings, under heterodyne unraveling of every decay channel.
//!
//! The state of a trajectory is the set of first moments `alpha_n = <a_n>`
//! and the connected second moments
//!
//! ```text
//! u_nm = <a_n a_m>  - alpha_n  alpha_m     (complex symmetric)
//! v_nm = <a_n^† a_m> - alpha_n^* alpha_m   (Hermitian)
//! ```
//!
//! Three families of jump operators act on the modes:
//!
//! | channel | operator                                   | count        |
//! |---------|--------------------------------------------|--------------|
//! | 1       | `sqrt(gamma - sum_k |J_ik|) a_i`            | `n`          |
//! | 2       | `sqrt(eta) a_i^2`                           | `n`          |
//! | 3       | `sqrt(|J_ij|) (a_i - sign(J_ij) a_j)`, i>j  | `n(n-1)/2`   |
//!
//! Each channel contributes one complex Wiener increment per step. Time is
//! measured in units of `1/gamma` when `gamma = 1`.

mod integrate;
mod model;
mod output;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use integrate::{
    run_mean_field, run_trajectory, step, mean_field_step, Integrator, RunSummary, SymmetryReport,
    BLOWUP_AMPLITUDE,
};
pub use model::{diffusion, drift, Model};
pub use output::{read_binary_trajectory, BinaryTrajectoryWriter, CsvTrajectoryWriter, BINARY_MAGIC, BINARY_VERSION};

pub type C64 = Complex64;

/// Which rate multiplies the channel-1 backaction term
/// `sum_j rate * (u_jn v_jm + u_jm v_jn)` of the second-moment equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum DampingIndex {
    /// Residual rate of the summed mode `j`, `gamma - sum_i |J_ij|`. This is
    /// the Ito correction implied by the channel-1 noise of the first moments.
    #[default]
    Summed,
    /// Residual rate of the row mode `n`, kept for A/B comparison.
    Row,
}

/// Physical rates and integration controls. Rates are in units of `gamma`'s
/// units, times in the inverse.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimParams {
    pub gamma: f64,
    pub eta: f64,
    /// Two-photon drive amplitude `G`.
    pub pump: f64,
    pub dt: f64,
    pub t_max: f64,
    pub sample_interval: f64,
    pub burn_in: f64,
    /// Seed of the trajectory noise stream.
    pub seed: u64,
    /// Draw quantum noise; `false` integrates the deterministic part only.
    pub noise: bool,
    pub damping_index: DampingIndex,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            eta: 0.1,
            pump: 0.0,
            dt: 1e-3,
            t_max: 5000.0,
            sample_interval: 0.1,
            burn_in: 100.0,
            seed: 0,
            noise: true,
            damping_index: DampingIndex::Summed,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma, self.eta, self.pump, self.dt, self.t_max, self.sample_interval, self.burn_in]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::param("simulation parameters must be finite"));
        }
        if self.gamma <= 0.0 {
            return Err(Error::param(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.eta < 0.0 {
            return Err(Error::param(format!("eta must be non-negative, got {}", self.eta)));
        }
        if self.pump < 0.0 {
            return Err(Error::param(format!("pump must be non-negative, got {}", self.pump)));
        }
        if !(self.dt > 0.0 && self.dt <= self.sample_interval && self.sample_interval <= self.t_max) {
            return Err(Error::param(format!(
                "need 0 < dt <= sample_interval <= t_max, got dt={} sample_interval={} t_max={}",
                self.dt, self.sample_interval, self.t_max
            )));
        }
        if !(self.burn_in >= 0.0 && self.burn_in < self.t_max) {
            return Err(Error::param(format!(
                "need 0 <= burn_in < t_max, got burn_in={} t_max={}",
                self.burn_in, self.t_max
            )));
        }
        Ok(())
    }

    /// Total step count, steps per sample and burn-in steps, all rounded to
    /// the nearest whole number of steps.
    pub fn step_counts(&self) -> (u64, u64, u64) {
        let steps = |t: f64| (t / self.dt).round() as u64;
        (steps(self.t_max), steps(self.sample_interval).max(1), steps(self.burn_in))
    }

    /// Number of samples a run emits: `floor((t_max - burn_in) / sample_interval)`.
    pub fn sample_count(&self) -> u64 {
        let (total, stride, burn) = self.step_counts();
        total.saturating_sub(burn) / stride
    }
}

/// First and second moments of a Gaussian state, matrices row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub alpha: Vec<C64>,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
    pub t: f64,
}

impl GaussianState {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    #[inline]
    pub fn u_at(&self, a: usize, b: usize) -> C64 {
        self.u[a * self.n() + b]
    }

    #[inline]
    pub fn v_at(&self, a: usize, b: usize) -> C64 {
        self.v[a * self.n() + b]
    }

    /// Coherent state with amplitudes `alpha` (all connected moments zero).
    pub fn coherent(alpha: Vec<C64>) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(Error::param("state needs at least one mode"));
        }
        Ok(Self { alpha, u: vec![C64::new(0.0, 0.0); n * n], v: vec![C64::new(0.0, 0.0); n * n], t: 0.0 })
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.iter().chain(&self.u).chain(&self.v).all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// The vacuum: all moments zero at `t = 0`.
pub fn init_vacuum(n: usize) -> Result<GaussianState> {
    GaussianState::coherent(vec![C64::new(0.0, 0.0); n])
}

/// Number of pair (channel 3) noise increments for `n` modes.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index of pair `(i, j)`, `i > j`, in the channel-3 noise vector.
#[inline]
pub fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i > j);
    i * (i - 1) / 2 + j
}

/// Complex Wiener increments for one step. Each `dZ = (dW_x + i dW_p)/sqrt(2)`
/// with independent real increments of variance `dt`, so `E|dZ|^2 = dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw {
    pub z1: Vec<C64>,
    pub z2: Vec<C64>,
    /// Pair increments ordered by [`pair_index`].
    pub z3: Vec<C64>,
}

impl NoiseDraw {
    pub fn zeros(n: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self { z1: vec![zero; n], z2: vec![zero; n], z3: vec![zero; pair_count(n)] }
    }

    pub fn sample<R: Rng + ?Sized>(n: usize, dt: f64, rng: &mut R) -> Self {
        let mut draw = Self::zeros(n);
        draw.resample(dt, rng);
        draw
    }

    /// Overwrites all increments in place: channel 1, then 2, then 3, real
    /// part before imaginary part.
    pub fn resample<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) {
        let scale = (0.5 * dt).sqrt();
        for z in self.z1.iter_mut().chain(self.z2.iter_mut()).chain(self.z3.iter_mut()) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = C64::new(scale * re, scale * im);
        }
    }

    pub(crate) fn check_dims(&self, n: usize) -> Result<()> {
        if self.z1.len() != n || self.z2.len() != n || self.z3.len() != pair_count(n) {
            return Err(Error::param(format!(
                "noise draw has dimensions ({}, {}, {}), expected ({n}, {n}, {})",
                self.z1.len(),
                self.z2.len(),
                self.z3.len(),
                pair_count(n)
            )));
        }
        Ok(())
    }
}

/// Increments of all moments; the drift returns rates per unit time, the
/// diffusion returns increments for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentIncrements {
    pub alpha: Vec<C64>,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
}

impl MomentIncrements {
    pub fn zeros(n: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self { alpha: vec![zero; n], u: vec![zero; n * n], v: vec![zero; n * n] }
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().chain(&self.u).chain(&self.v).all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Largest modulus over all entries.
    pub fn max_abs(&self) -> f64 {
        self.alpha.iter().chain(&self.u).chain(&self.v).fold(0.0, |m, z| m.max(z.norm()))
    }
}
