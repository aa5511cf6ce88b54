//! Drift and diffusion of the Gaussian moments.
//!
//! The deterministic part is evaluated in matrix form. Every decay channel
//! contributes a noise term `A_n dZ + B_n dZ^*` to `alpha_n`, and the Ito
//! correction of the connected moments is
//!
//! ```text
//! du_nm -= sum_c (A_n B_m + A_m B_n) dt,    dv_nm -= sum_c (A_n^* A_m + B_n^* B_m) dt.
//! ```
//!
//! For channels whose coefficients `c_k` are linear in the mode operators
//! these sums collapse to `v^T K u + u K v` and `v K v + u^* K u`, with the
//! real symmetric kernel `K = sum_c c c^T`. One-photon and pair channels give
//! `gamma I - J`; the two-photon channel linearised around `alpha` adds
//! `diag(4 eta |alpha|^2)`.

use super::{pair_index, DampingIndex, GaussianState, MomentIncrements, NoiseDraw, SimParams, C64};
use crate::error::{Error, Result};
use crate::graph::{validate_rates, CouplingGraph};

/// One nonzero pair channel `sqrt(|J_ij|) (a_i - sign a_j)`.
#[derive(Debug, Clone, Copy)]
struct PairChannel {
    i: usize,
    j: usize,
    amp: f64,
    sign: f64,
    noise_index: usize,
}

/// Precomputed constants for one (parameters, graph) combination plus
/// scratch space for the matrix products.
#[derive(Debug, Clone)]
pub struct Model {
    n: usize,
    gamma: f64,
    eta: f64,
    pump: f64,
    damping_index: DampingIndex,
    j: Vec<f64>,
    /// Residual one-photon rates.
    rates: Vec<f64>,
    sqrt_rates: Vec<f64>,
    pairs: Vec<PairChannel>,
    kd: Vec<f64>,
    t1: Vec<C64>,
    p: Vec<C64>,
    q: Vec<C64>,
    cu: Vec<C64>,
    cv: Vec<C64>,
    c: Vec<C64>,
    d: Vec<C64>,
}

impl Model {
    pub fn new(params: &SimParams, g: &CouplingGraph) -> Result<Self> {
        params.validate()?;
        let rates = validate_rates(g, params.gamma)?;
        let n = g.n();
        let mut pairs = Vec::new();
        for i in 1..n {
            for j in 0..i {
                let x = g.get(i, j);
                if x != 0.0 {
                    pairs.push(PairChannel {
                        i,
                        j,
                        amp: x.abs().sqrt(),
                        sign: x.signum(),
                        noise_index: pair_index(i, j),
                    });
                }
            }
        }
        let zero = C64::new(0.0, 0.0);
        Ok(Self {
            n,
            gamma: params.gamma,
            eta: params.eta,
            pump: params.pump,
            damping_index: params.damping_index,
            j: g.matrix().to_vec(),
            sqrt_rates: rates.iter().map(|r| r.sqrt()).collect(),
            rates,
            pairs,
            kd: vec![0.0; n],
            t1: vec![zero; n * n],
            p: vec![zero; n * n],
            q: vec![zero; n * n],
            cu: vec![zero; n * n],
            cv: vec![zero; n * n],
            c: vec![zero; n],
            d: vec![zero; n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pump(&self) -> f64 {
        self.pump
    }

    pub(crate) fn check_state(&self, s: &GaussianState) -> Result<()> {
        let n = self.n;
        if s.alpha.len() != n || s.u.len() != n * n || s.v.len() != n * n {
            return Err(Error::param(format!(
                "state dimensions do not match the {n}-mode graph"
            )));
        }
        Ok(())
    }

    /// Deterministic rates `(d alpha, du, dv) / dt` written into `out`.
    ///
    /// Only the upper triangle of `du`, `dv` is evaluated; the lower one is
    /// mirrored (`du` symmetric, `dv` Hermitian).
    pub fn drift_into(&mut self, s: &GaussianState, out: &mut MomentIncrements) {
        let n = self.n;
        let (gamma, eta, pump) = (self.gamma, self.eta, self.pump);
        let (alpha, u, v) = (&s.alpha[..], &s.u[..], &s.v[..]);
        let j = &self.j[..];

        for a in 0..n {
            let al = alpha[a];
            let mut coupling = C64::new(0.0, 0.0);
            for b in 0..n {
                coupling += alpha[b] * j[b * n + a];
            }
            out.alpha[a] = al * (-0.5 * gamma) + al.conj() * pump
                - (al * al.norm_sqr() + al * v[a * n + a] * 2.0 + al.conj() * u[a * n + a]) * eta
                + coupling * 0.5;
        }

        // Backaction kernel K = diag(kd) - J.
        for a in 0..n {
            let extra = 4.0 * eta * alpha[a].norm_sqr();
            self.kd[a] = match self.damping_index {
                DampingIndex::Summed => gamma + extra,
                DampingIndex::Row => gamma - self.rates[a] + extra,
            };
        }

        // Coupling products: cu = u J, cv = v J, and by symmetry Ju = (uJ)^T,
        // Jv = (vJ)^†.
        mat_complex_real(n, u, j, &mut self.cu);
        mat_complex_real(n, v, j, &mut self.cv);
        // t1 = K u; p = v^T K u; q = u^* K u (upper rows only).
        for k in 0..n {
            for b in 0..n {
                self.t1[k * n + b] = u[k * n + b] * self.kd[k] - self.cu[b * n + k];
            }
        }
        zero(&mut self.p);
        for k in 0..n {
            let t1k = &self.t1[k * n..(k + 1) * n];
            for a in 0..n {
                let c = v[k * n + a];
                for (o, x) in self.p[a * n..(a + 1) * n].iter_mut().zip(t1k) {
                    *o += c * x;
                }
            }
        }
        zero(&mut self.q);
        for a in 0..n {
            for k in 0..n {
                let c = u[a * n + k].conj();
                let t1k = &self.t1[k * n + a..(k + 1) * n];
                for (o, x) in self.q[a * n + a..(a + 1) * n].iter_mut().zip(t1k) {
                    *o += c * x;
                }
            }
        }
        // t1 = K v; q += v K v (upper rows only).
        for k in 0..n {
            for b in 0..n {
                self.t1[k * n + b] = v[k * n + b] * self.kd[k] - self.cv[b * n + k].conj();
            }
        }
        for a in 0..n {
            for k in 0..n {
                let c = v[a * n + k];
                let t1k = &self.t1[k * n + a..(k + 1) * n];
                for (o, x) in self.q[a * n + a..(a + 1) * n].iter_mut().zip(t1k) {
                    *o += c * x;
                }
            }
        }

        for a in 0..n {
            let (ua, va) = (u[a * n + a], v[a * n + a]);
            let al2 = alpha[a] * alpha[a];
            let nal = alpha[a].norm_sqr();
            for b in a..n {
                let (ab, ba) = (a * n + b, b * n + a);
                let (ub, vb) = (u[b * n + b], v[b * n + b]);
                let bl2 = alpha[b] * alpha[b];
                let nbl = alpha[b].norm_sqr();
                let delta = if a == b { 1.0 } else { 0.0 };
                let (uab, vab, vba) = (u[ab], v[ab], v[ba]);

                let du = uab * (-gamma)
                    + (vab + vba + delta) * pump
                    - (ua * (vab + delta) + uab * va * 2.0 + al2 * (vab + delta) + uab * (2.0 * nal)) * eta
                    - (ub * vba + uab * vb * 2.0 + bl2 * vba + uab * (2.0 * nbl)) * eta
                    + (self.cu[ab] + self.cu[ba]) * 0.5
                    - (self.p[ab] + self.p[ba]);

                let dv = vab * (-gamma)
                    + (uab.conj() + uab) * pump
                    - (ua.conj() * uab + va * vab * 2.0 + vab * (2.0 * nal) + al2.conj() * uab) * eta
                    - (ub * uab.conj() + vb * vab * 2.0 + vab * (2.0 * nbl) + bl2 * uab.conj()) * eta
                    + (self.cv[ab] + self.cv[ba].conj()) * 0.5
                    - self.q[ab];

                out.u[ab] = du;
                out.u[ba] = du;
                out.v[ab] = dv;
                if a != b {
                    out.v[ba] = dv.conj();
                }
            }
        }

        if self.damping_index == DampingIndex::Row {
            // Channel 1 weighted by the row rate r_n instead of r_j. The
            // result is not symmetric; the integrator symmetrizes the state.
            for a in 0..n {
                let r = self.rates[a];
                for b in 0..n {
                    let mut acc_u = C64::new(0.0, 0.0);
                    let mut acc_v = C64::new(0.0, 0.0);
                    for k in 0..n {
                        acc_u += u[k * n + a] * v[k * n + b] + u[k * n + b] * v[k * n + a];
                        acc_v += v[a * n + k] * v[k * n + b] + u[k * n + a].conj() * u[k * n + b];
                    }
                    out.u[a * n + b] -= acc_u * r;
                    out.v[a * n + b] -= acc_v * r;
                }
            }
        }
    }

    /// Stochastic increments for the increments in `noise`, written into `out`.
    pub fn diffusion_into(&mut self, s: &GaussianState, noise: &NoiseDraw, out: &mut MomentIncrements) {
        let n = self.n;
        let (alpha, u, v) = (&s.alpha[..], &s.u[..], &s.v[..]);
        let two_sqrt_eta = 2.0 * self.eta.sqrt();

        // d alpha_a = sum_k v_ka c_k + u_ka d_k with all channels folded into
        // per-mode weights c, d.
        for k in 0..n {
            let (z1, z2) = (noise.z1[k], noise.z2[k]);
            self.c[k] = z1 * self.sqrt_rates[k] + alpha[k].conj() * z2 * two_sqrt_eta;
            self.d[k] = z1.conj() * self.sqrt_rates[k] + alpha[k] * z2.conj() * two_sqrt_eta;
        }
        for p in &self.pairs {
            let z3 = noise.z3[p.noise_index];
            let (zc, zd) = (z3 * p.amp, z3.conj() * p.amp);
            self.c[p.i] += zc;
            self.c[p.j] -= zc * p.sign;
            self.d[p.i] += zd;
            self.d[p.j] -= zd * p.sign;
        }
        zero(&mut out.alpha);
        for k in 0..n {
            let (ck, dk) = (self.c[k], self.d[k]);
            let (vk, uk) = (&v[k * n..(k + 1) * n], &u[k * n..(k + 1) * n]);
            for ((o, x), y) in out.alpha.iter_mut().zip(vk).zip(uk) {
                *o += x * ck + y * dk;
            }
        }

        if self.eta == 0.0 {
            zero(&mut out.u);
            zero(&mut out.v);
            return;
        }
        // w_kb = v_kb z_k, y_kb = u_kb z_k^*;
        // du_ab = sum_k v_ka w_kb + u_ka y_kb, dv_ab = sum_k u_ka^* w_kb + v_ka^* y_kb.
        for k in 0..n {
            let z = noise.z2[k] * two_sqrt_eta;
            let zc = z.conj();
            for b in 0..n {
                self.t1[k * n + b] = v[k * n + b] * z;
                self.p[k * n + b] = u[k * n + b] * zc;
            }
        }
        zero(&mut self.q);
        zero(&mut self.cu);
        for k in 0..n {
            let (wk, yk) = (&self.t1[k * n..(k + 1) * n], &self.p[k * n..(k + 1) * n]);
            for a in 0..n {
                let (va, ua) = (v[k * n + a], u[k * n + a]);
                let (vac, uac) = (va.conj(), ua.conj());
                let du = &mut self.cu[a * n + a..(a + 1) * n];
                let dv = &mut self.q[a * n + a..(a + 1) * n];
                for (((ou, ov), w), y) in du.iter_mut().zip(dv.iter_mut()).zip(&wk[a..]).zip(&yk[a..]) {
                    *ou += va * w + ua * y;
                    *ov += uac * w + vac * y;
                }
            }
        }
        for a in 0..n {
            for b in a..n {
                let (ab, ba) = (a * n + b, b * n + a);
                out.u[ab] = self.cu[ab];
                out.u[ba] = self.cu[ab];
                out.v[ab] = self.q[ab];
                if a != b {
                    out.v[ba] = self.q[ab].conj();
                }
            }
        }
    }
}

fn zero(x: &mut [C64]) {
    x.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
}

/// `out = x J` for complex `x` and real `J`, both `n x n` row-major.
fn mat_complex_real(n: usize, x: &[C64], j: &[f64], out: &mut [C64]) {
    for a in 0..n {
        let row = &mut out[a * n..(a + 1) * n];
        zero(row);
        for m in 0..n {
            let c = x[a * n + m];
            for (o, w) in row.iter_mut().zip(&j[m * n..(m + 1) * n]) {
                *o += c * *w;
            }
        }
    }
}

/// Deterministic rates of all moments (per unit time).
pub fn drift(state: &GaussianState, params: &SimParams, g: &CouplingGraph) -> Result<MomentIncrements> {
    let mut model = Model::new(params, g)?;
    model.check_state(state)?;
    let mut out = MomentIncrements::zeros(g.n());
    model.drift_into(state, &mut out);
    Ok(out)
}

/// Stochastic increments of all moments for one noise draw.
pub fn diffusion(
    state: &GaussianState,
    params: &SimParams,
    g: &CouplingGraph,
    noise: &NoiseDraw,
) -> Result<MomentIncrements> {
    let mut model = Model::new(params, g)?;
    model.check_state(state)?;
    noise.check_dims(g.n())?;
    let mut out = MomentIncrements::zeros(g.n());
    model.diffusion_into(state, noise, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::init_vacuum;
    use crate::graph::gen_sk;
    use rand::SeedableRng;

    fn single(pump: f64, eta: f64) -> (SimParams, CouplingGraph) {
        (SimParams { pump, eta, ..Default::default() }, CouplingGraph::uncoupled(1).unwrap())
    }

    #[test]
    fn undriven_vacuum_is_fixed() {
        let g = gen_sk(5, 0.1, 2).unwrap();
        let p = SimParams { pump: 0.0, ..Default::default() };
        assert!(drift(&init_vacuum(5).unwrap(), &p, &g).unwrap().is_zero());
    }

    #[test]
    fn driven_vacuum_only_squeezes() {
        let (p, g) = single(0.3, 0.1);
        let d = drift(&init_vacuum(1).unwrap(), &p, &g).unwrap();
        assert_eq!(d.alpha[0], C64::new(0.0, 0.0));
        assert_eq!(d.u[0], C64::new(0.3, 0.0));
        assert_eq!(d.v[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn diffusion_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let g = gen_sk(3, 0.1, 1).unwrap();
        let p = SimParams::default();
        let noise = NoiseDraw::sample(3, 1e-3, &mut rng);
        assert!(diffusion(&init_vacuum(3).unwrap(), &p, &g, &noise).unwrap().is_zero());

        let mut s = init_vacuum(3).unwrap();
        s.alpha = vec![C64::new(0.4, 0.1), C64::new(-0.2, 0.3), C64::new(1.0, 0.0)];
        s.u[1] = C64::new(0.1, 0.05);
        s.u[3] = s.u[1];
        s.v[0] = C64::new(0.2, 0.0);
        let p0 = SimParams { eta: 0.0, ..p.clone() };
        let d = diffusion(&s, &p0, &g, &noise).unwrap();
        assert!(d.u.iter().chain(&d.v).all(|z| *z == C64::new(0.0, 0.0)));
        assert!(d.alpha.iter().any(|z| z.norm() > 0.0));

        let (p1, g1) = single(0.2, 0.1);
        let z2 = C64::new(0.03, -0.02);
        let noise = NoiseDraw { z1: vec![C64::new(0.01, 0.02)], z2: vec![z2], z3: vec![] };
        let mut s = GaussianState::coherent(vec![C64::new(0.7, -0.4)]).unwrap();
        assert_eq!(diffusion(&s, &p1, &g1, &noise).unwrap().alpha[0], C64::new(0.0, 0.0));
        s.v[0] = C64::new(0.1, 0.0);
        let noise = NoiseDraw { z1: vec![C64::new(0.0, 0.0)], ..noise };
        let expected = s.alpha[0].conj() * z2 * (2.0 * 0.1f64.sqrt() * 0.1);
        assert!((diffusion(&s, &p1, &g1, &noise).unwrap().alpha[0] - expected).norm() < 1e-15);
    }

    #[test]
    fn zero_couplings_open_no_channel() {
        let g = CouplingGraph::from_upper(3, &[0.2, 0.0, -0.1], crate::graph::GraphKind::Custom, None).unwrap();
        let m = Model::new(&SimParams::default(), &g).unwrap();
        assert_eq!(m.pairs.len(), 2);
        assert!(m.pairs.iter().all(|p| p.amp > 0.0));
    }

    #[test]
    fn infeasible_graph_is_rejected() {
        let g = gen_sk(4, 2.0, 1).unwrap();
        assert!(matches!(Model::new(&SimParams::default(), &g), Err(Error::InfeasibleRates { .. })));
    }
}
