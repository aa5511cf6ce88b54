#![allow(dead_code)]

pub mod drift_oracle;

use ising_traj::{GaussianState, C64};
use rand::Rng;

/// Random state with Hermitian positive `v`, symmetric `u`, both of size
/// `scale`, and amplitudes of order one.
pub fn random_state<R: Rng>(n: usize, scale: f64, rng: &mut R) -> GaussianState {
    let mut c = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let alpha: Vec<C64> = (0..n).map(|_| c()).collect();
    let x: Vec<C64> = (0..n * n).map(|_| c() * scale).collect();
    let y: Vec<C64> = (0..n * n).map(|_| c() * scale).collect();
    let mut u = vec![C64::new(0.0, 0.0); n * n];
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            u[a * n + b] = y[a * n + b] + y[b * n + a];
            let mut s = C64::new(0.0, 0.0);
            for k in 0..n {
                s += x[k * n + a].conj() * x[k * n + b];
            }
            v[a * n + b] = s;
        }
        v[a * n + a].im = 0.0;
    }
    GaussianState { alpha, u, v, t: 0.0 }
}
