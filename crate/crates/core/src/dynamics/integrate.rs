//! Euler-Maruyama integration of single trajectories (Ito convention) and of
//! the noiseless mean-field equations.

use rand::Rng;

use super::model::Model;
use super::{init_vacuum, GaussianState, MomentIncrements, NoiseDraw, SimParams, C64};
use crate::error::{Error, Result};
use crate::graph::CouplingGraph;
use crate::seeds::rng_from_seed;

/// Any `|alpha_i|` above this aborts the integration.
pub const BLOWUP_AMPLITUDE: f64 = 1e6;

/// Size of the corrections applied by the per-step (anti)symmetrization,
/// relative to `max(1, max|u|, max|v|)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SymmetryReport {
    pub u_correction: f64,
    pub v_correction: f64,
    /// Largest `|Im v_nn|` before Hermitization (absolute).
    pub v_diag_imag: f64,
}

impl SymmetryReport {
    fn worst(self, other: Self) -> Self {
        Self {
            u_correction: self.u_correction.max(other.u_correction),
            v_correction: self.v_correction.max(other.v_correction),
            v_diag_imag: self.v_diag_imag.max(other.v_diag_imag),
        }
    }
}

/// Steps one trajectory of a fixed model.
#[derive(Debug, Clone)]
pub struct Integrator {
    model: Model,
    dt: f64,
    noise_enabled: bool,
    noise: NoiseDraw,
    det: MomentIncrements,
    sto: MomentIncrements,
    last: SymmetryReport,
    worst: SymmetryReport,
}

impl Integrator {
    pub fn new(params: &SimParams, g: &CouplingGraph) -> Result<Self> {
        let model = Model::new(params, g)?;
        let n = g.n();
        Ok(Self {
            model,
            dt: params.dt,
            noise_enabled: params.noise,
            noise: NoiseDraw::zeros(n),
            det: MomentIncrements::zeros(n),
            sto: MomentIncrements::zeros(n),
            last: SymmetryReport::default(),
            worst: SymmetryReport::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Symmetrization corrections of the most recent step.
    pub fn last_symmetry(&self) -> SymmetryReport {
        self.last
    }

    /// Largest corrections seen since construction.
    pub fn worst_symmetry(&self) -> SymmetryReport {
        self.worst
    }

    /// Advances `state` by one step, drawing fresh noise when enabled.
    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut GaussianState, rng: &mut R) -> Result<()> {
        if self.noise_enabled {
            self.noise.resample(self.dt, rng);
        }
        self.advance(state, self.noise_enabled)
    }

    /// Advances `state` by one step using a caller-supplied noise draw.
    pub fn step_with_noise(&mut self, state: &mut GaussianState, noise: &NoiseDraw) -> Result<()> {
        noise.check_dims(self.n())?;
        self.noise.clone_from(noise);
        self.advance(state, true)
    }

    fn advance(&mut self, state: &mut GaussianState, stochastic: bool) -> Result<()> {
        self.model.check_state(state)?;
        let n = self.n();
        let dt = self.dt;
        self.model.drift_into(state, &mut self.det);
        if stochastic {
            self.model.diffusion_into(state, &self.noise, &mut self.sto);
            for (x, (d, s)) in state.alpha.iter_mut().zip(self.det.alpha.iter().zip(&self.sto.alpha)) {
                *x += d * dt + s;
            }
            for (x, (d, s)) in state.u.iter_mut().zip(self.det.u.iter().zip(&self.sto.u)) {
                *x += d * dt + s;
            }
            for (x, (d, s)) in state.v.iter_mut().zip(self.det.v.iter().zip(&self.sto.v)) {
                *x += d * dt + s;
            }
        } else {
            for (x, d) in state.alpha.iter_mut().zip(&self.det.alpha) {
                *x += d * dt;
            }
            for (x, d) in state.u.iter_mut().zip(&self.det.u) {
                *x += d * dt;
            }
            for (x, d) in state.v.iter_mut().zip(&self.det.v) {
                *x += d * dt;
            }
        }
        state.t += dt;

        self.last = symmetrize(n, &mut state.u, &mut state.v);
        self.worst = self.worst.worst(self.last);
        check_health(state, dt)
    }

    /// One Euler step of the mean-field equations
    /// `d alpha_n/dt = -(gamma/2) alpha_n + G alpha_n^* - eta |alpha_n|^2 alpha_n + (1/2) sum_j J_nj alpha_j`.
    /// Second moments must be zero and stay zero.
    pub fn mean_field_step(&mut self, state: &mut GaussianState) -> Result<()> {
        self.model.check_state(state)?;
        if state.u.iter().chain(&state.v).any(|z| z.re != 0.0 || z.im != 0.0) {
            return Err(Error::param("mean-field stepping needs u = v = 0"));
        }
        // With u = v = 0 the drift of alpha reduces to the mean-field form.
        self.model.drift_into(state, &mut self.det);
        for (x, d) in state.alpha.iter_mut().zip(&self.det.alpha) {
            *x += d * self.dt;
        }
        state.t += self.dt;
        check_health(state, self.dt)
    }
}

/// Replaces `u` by `(u + u^T)/2` and `v` by `(v + v^†)/2`, returning the
/// size of the corrections.
fn symmetrize(n: usize, u: &mut [C64], v: &mut [C64]) -> SymmetryReport {
    let scale2 = u.iter().chain(v.iter()).fold(1.0f64, |m, z| m.max(z.norm_sqr()));
    let (mut du2, mut dv2, mut diag) = (0.0f64, 0.0f64, 0.0f64);
    for a in 0..n {
        let d = v[a * n + a];
        diag = diag.max(d.im.abs());
        v[a * n + a] = C64::new(d.re, 0.0);
        for b in (a + 1)..n {
            let (ab, ba) = (a * n + b, b * n + a);
            let su = (u[ab] + u[ba]) * 0.5;
            du2 = du2.max((u[ab] - su).norm_sqr());
            u[ab] = su;
            u[ba] = su;
            let hv = (v[ab] + v[ba].conj()) * 0.5;
            dv2 = dv2.max((v[ab] - hv).norm_sqr());
            v[ab] = hv;
            v[ba] = hv.conj();
        }
    }
    SymmetryReport {
        u_correction: (du2 / scale2).sqrt(),
        v_correction: (dv2 / scale2).sqrt(),
        v_diag_imag: diag,
    }
}

fn check_health(state: &GaussianState, dt: f64) -> Result<()> {
    if !state.is_finite() {
        return Err(Error::Blowup { t: state.t, dt, reason: "non-finite moment".into() });
    }
    let limit2 = BLOWUP_AMPLITUDE * BLOWUP_AMPLITUDE;
    if let Some((i, a)) = state.alpha.iter().enumerate().find(|(_, a)| a.norm_sqr() > limit2) {
        return Err(Error::Blowup {
            t: state.t,
            dt,
            reason: format!("|alpha_{i}| = {:.3e} exceeds {BLOWUP_AMPLITUDE:e}", a.norm()),
        });
    }
    Ok(())
}

/// One stochastic step with a freshly built integrator. Convenient for
/// one-off use; loops should keep an [`Integrator`].
pub fn step<R: Rng + ?Sized>(
    state: &GaussianState,
    params: &SimParams,
    g: &CouplingGraph,
    rng: &mut R,
) -> Result<GaussianState> {
    let mut it = Integrator::new(params, g)?;
    let mut next = state.clone();
    it.step(&mut next, rng)?;
    Ok(next)
}

pub fn mean_field_step(state: &GaussianState, params: &SimParams, g: &CouplingGraph) -> Result<GaussianState> {
    let mut it = Integrator::new(params, g)?;
    let mut next = state.clone();
    it.mean_field_step(&mut next)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub samples: u64,
    pub steps: u64,
    pub final_time: f64,
    pub symmetry: SymmetryReport,
}

/// Integrates one trajectory from the vacuum up to `t_max`, calling
/// `observer(t, alpha)` every `sample_interval` after `burn_in`.
///
/// On failure the error is [`Error::Aborted`] carrying the number of samples
/// already delivered.
pub fn run_trajectory<F>(params: &SimParams, g: &CouplingGraph, observer: F) -> Result<RunSummary>
where
    F: FnMut(f64, &[C64]),
{
    let mut it = Integrator::new(params, g)?;
    let mut state = init_vacuum(g.n())?;
    let mut rng = rng_from_seed(params.seed);
    drive(params, &mut state, observer, |s| it.step(s, &mut rng))
        .map(|(samples, steps)| RunSummary { samples, steps, final_time: state.t, symmetry: it.worst_symmetry() })
}

/// Integrates the mean-field equations from `initial` (second moments must be
/// zero), sampling exactly like [`run_trajectory`].
pub fn run_mean_field<F>(
    params: &SimParams,
    g: &CouplingGraph,
    initial: &[C64],
    observer: F,
) -> Result<RunSummary>
where
    F: FnMut(f64, &[C64]),
{
    let mut it = Integrator::new(params, g)?;
    if initial.len() != g.n() {
        return Err(Error::param("initial amplitudes do not match the graph size"));
    }
    let mut state = GaussianState::coherent(initial.to_vec())?;
    drive(params, &mut state, observer, |s| it.mean_field_step(s))
        .map(|(samples, steps)| RunSummary { samples, steps, final_time: state.t, symmetry: SymmetryReport::default() })
}

fn drive<F, S>(params: &SimParams, state: &mut GaussianState, mut observer: F, mut stepper: S) -> Result<(u64, u64)>
where
    F: FnMut(f64, &[C64]),
    S: FnMut(&mut GaussianState) -> Result<()>,
{
    let (total, stride, burn) = params.step_counts();
    let mut samples = 0;
    for k in 1..=total {
        if let Err(e) = stepper(state) {
            return Err(Error::Aborted { samples, source: Box::new(e) });
        }
        if k > burn && (k - burn) % stride == 0 {
            observer(k as f64 * params.dt, &state.alpha);
            samples += 1;
        }
    }
    Ok((samples, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_sk, threshold_pump};
    use crate::sampling::integrated_autocorrelation_time;

    fn single() -> CouplingGraph {
        CouplingGraph::uncoupled(1).unwrap()
    }

    #[test]
    fn undriven_vacuum_stays_exact() {
        let g = CouplingGraph::uncoupled(3).unwrap();
        let p = SimParams { pump: 0.0, eta: 0.0, seed: 3, ..Default::default() };
        let mut it = Integrator::new(&p, &g).unwrap();
        let mut rng = rng_from_seed(3);
        let mut s = init_vacuum(3).unwrap();
        for _ in 0..10_000 {
            it.step(&mut s, &mut rng).unwrap();
        }
        assert!(s.alpha.iter().chain(&s.u).chain(&s.v).all(|z| *z == C64::new(0.0, 0.0)));
    }

    /// Stationary connected moments of one undriven-loss mode without
    /// noise: `u (1 + 2v) = g (1 + 2v)` and `v + v^2 + u^2 = 2 g u` in units
    /// of `gamma`, solved by `u = g`, `v = (sqrt(1 + 4 g^2) - 1) / 2`.
    fn stationary(g: f64) -> (f64, f64) {
        (g, ((1.0 + 4.0 * g * g).sqrt() - 1.0) / 2.0)
    }

    fn relax(pump: f64, t: f64) -> GaussianState {
        let p = SimParams { pump, eta: 0.0, noise: false, ..Default::default() };
        let mut it = Integrator::new(&p, &single()).unwrap();
        let mut s = init_vacuum(1).unwrap();
        let mut rng = rng_from_seed(0);
        for _ in 0..(t / p.dt) as usize {
            it.step(&mut s, &mut rng).unwrap();
        }
        s
    }

    #[test]
    fn single_mode_relaxes_to_stationary_moments() {
        let s = relax(0.4, 60.0);
        let (u, v) = stationary(0.4);
        assert!((u - 0.4).abs() < 1e-15 && (v - 0.140_312_423_743_284_9).abs() < 1e-12);
        assert!((s.u[0] - C64::new(u, 0.0)).norm() < 1e-6, "{:?}", s.u[0]);
        assert!((s.v[0] - C64::new(v, 0.0)).norm() < 1e-6, "{:?}", s.v[0]);
    }

    #[test]
    fn conditional_moments_stay_bounded_above_threshold() {
        let s = relax(0.8, 60.0);
        let (u, v) = stationary(0.8);
        assert!((s.u[0].re - u).abs() < 1e-6 && (s.v[0].re - v).abs() < 1e-6);
    }

    #[test]
    fn amplitude_diverges_above_threshold_without_saturation() {
        let g = single();
        let run = |pump: f64| {
            let p = SimParams { pump, eta: 0.0, t_max: 300.0, burn_in: 0.0, seed: 5, ..Default::default() };
            run_trajectory(&p, &g, |_, _| {})
        };
        assert!(run(0.4).is_ok());
        match run(0.8) {
            Err(Error::Aborted { source, .. }) => assert!(matches!(*source, Error::Blowup { .. })),
            other => panic!("expected a blowup, got {other:?}"),
        }
    }

    #[test]
    fn mean_field_single_mode_fixed_point() {
        let p = SimParams { pump: 0.6, eta: 0.1, ..Default::default() };
        let mut it = Integrator::new(&p, &single()).unwrap();
        let mut s = GaussianState::coherent(vec![C64::new(0.05, 0.02)]).unwrap();
        for _ in 0..200_000 {
            it.mean_field_step(&mut s).unwrap();
        }
        assert!((s.alpha[0].norm_sqr() - (0.6 - 0.5) / 0.1).abs() < 1e-9);
        assert!(s.alpha[0].im.abs() < 1e-10);
        assert!(s.u.iter().chain(&s.v).all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn mean_field_below_threshold_decays() {
        let g = gen_sk(6, 0.1, 4).unwrap();
        let gth = threshold_pump(&g, 1.0).unwrap();
        let p = SimParams { pump: 0.5 * gth, t_max: 200.0, burn_in: 0.0, sample_interval: 200.0, ..Default::default() };
        let init: Vec<C64> = (0..6).map(|k| C64::new(1e-3 * (k as f64 - 2.5), 5e-4)).collect();
        let mut last = Vec::new();
        run_mean_field(&p, &g, &init, |_, a| last = a.to_vec()).unwrap();
        assert!(last.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-6);
    }

    #[test]
    fn mean_field_requires_zero_second_moments() {
        let mut it = Integrator::new(&SimParams::default(), &single()).unwrap();
        let mut s = init_vacuum(1).unwrap();
        s.v[0] = C64::new(0.1, 0.0);
        assert!(it.mean_field_step(&mut s).is_err());
    }

    #[test]
    fn sampling_schedule() {
        let p = SimParams { t_max: 10.0, sample_interval: 1.0, burn_in: 0.0, dt: 1e-2, ..Default::default() };
        let mut times = Vec::new();
        let r = run_trajectory(&p, &single(), |t, _| times.push(t)).unwrap();
        assert_eq!(r.samples, 10);
        assert_eq!(r.steps, 1000);
        assert!(times.iter().enumerate().all(|(k, t)| (t - (k + 1) as f64).abs() < 1e-9));
    }

    #[test]
    fn below_threshold_real_quadrature_averages_to_zero() {
        let g = gen_sk(3, 0.1, 6).unwrap();
        let gth = threshold_pump(&g, 1.0).unwrap();
        let p = SimParams { pump: 0.5 * gth, t_max: 2000.0, seed: 12, ..Default::default() };
        let mut xs = vec![Vec::new(); 3];
        run_trajectory(&p, &g, |_, a| {
            for (x, z) in xs.iter_mut().zip(a) {
                x.push(z.re);
            }
        })
        .unwrap();
        for x in xs {
            let k = x.len() as f64;
            let mean = x.iter().sum::<f64>() / k;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
            let tau = integrated_autocorrelation_time(&x).unwrap();
            let se = (var * tau / k).sqrt();
            assert!(mean.abs() < 3.0 * se, "mean {mean}, se {se}");
        }
    }
}
