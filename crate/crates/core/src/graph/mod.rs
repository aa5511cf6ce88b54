//! Ising coupling matrices.
//!
//! `J` is stored dense and row-major. Couplings carry units of rate, the same
//! units as the one-photon loss rate `gamma`.

mod io;

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::seeds::rng_from_seed;
use crate::spins::validate_spins;

pub use io::{load_graph, read_graph, save_graph, write_graph};

/// Ensemble a coupling matrix was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum GraphKind {
    /// Sherrington-Kirkpatrick: Gaussian couplings.
    Sk,
    /// Complete graph with `+j0` / `-j0` couplings of random sign.
    K,
    Custom,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Sk => "SK",
            GraphKind::K => "K",
            GraphKind::Custom => "custom",
        })
    }
}

impl std::str::FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sk" => Ok(GraphKind::Sk),
            "k" => Ok(GraphKind::K),
            "custom" => Ok(GraphKind::Custom),
            _ => Err(Error::param(format!("unknown graph kind {s:?}"))),
        }
    }
}

/// Symmetric coupling matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGraph {
    n: usize,
    j: Vec<f64>,
    kind: GraphKind,
    seed: Option<u64>,
}

impl CouplingGraph {
    /// Builds a graph from a dense row-major matrix, checking exact symmetry,
    /// a zero diagonal and finite entries.
    pub fn from_matrix(n: usize, j: Vec<f64>, kind: GraphKind, seed: Option<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("graph needs at least one mode"));
        }
        if j.len() != n * n {
            return Err(Error::param(format!(
                "matrix has {} entries, expected {}",
                j.len(),
                n * n
            )));
        }
        for a in 0..n {
            if j[a * n + a] != 0.0 {
                return Err(Error::Validation(format!(
                    "nonzero diagonal entry J[{a}][{a}] = {}",
                    j[a * n + a]
                )));
            }
            for b in (a + 1)..n {
                let (x, y) = (j[a * n + b], j[b * n + a]);
                if !x.is_finite() || !y.is_finite() {
                    return Err(Error::Validation(format!("non-finite coupling J[{a}][{b}]")));
                }
                if x != y {
                    return Err(Error::Validation(format!(
                        "asymmetric couplings J[{a}][{b}] = {x} but J[{b}][{a}] = {y}"
                    )));
                }
            }
        }
        Ok(Self { n, j, kind, seed })
    }

    /// Builds a graph from its strict upper triangle, row by row.
    pub fn from_upper(n: usize, upper: &[f64], kind: GraphKind, seed: Option<u64>) -> Result<Self> {
        if upper.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::param("upper triangle has the wrong length"));
        }
        let mut j = vec![0.0; n * n];
        let mut it = upper.iter();
        for a in 0..n {
            for b in (a + 1)..n {
                let x = *it.next().unwrap();
                j[a * n + b] = x;
                j[b * n + a] = x;
            }
        }
        Self::from_matrix(n, j, kind, seed)
    }

    /// Graph with all couplings zero (independent modes).
    pub fn uncoupled(n: usize) -> Result<Self> {
        Self::from_matrix(n, vec![0.0; n * n], GraphKind::Custom, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.j[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.j[a * self.n..(a + 1) * self.n]
    }

    /// Row-major matrix entries.
    pub fn matrix(&self) -> &[f64] {
        &self.j
    }

    pub fn max_abs(&self) -> f64 {
        self.j.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `sum_k |J[a][k]|` for every row.
    pub fn row_abs_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|a| self.row(a).iter().map(|x| x.abs()).sum())
            .collect()
    }

    /// Copy with every coupling multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            j: self.j.iter().map(|x| x * factor).collect(),
            kind: self.kind,
            seed: self.seed,
        }
    }

    /// Applies a gauge transform `J -> S J S` for a diagonal sign matrix `S`.
    pub fn gauge_transformed(&self, signs: &[i8]) -> Self {
        let n = self.n;
        let mut j = self.j.clone();
        for a in 0..n {
            for b in 0..n {
                j[a * n + b] *= f64::from(signs[a] * signs[b]);
            }
        }
        Self { n, j, kind: self.kind, seed: self.seed }
    }

    /// Relabels modes: new mode `a` is old mode `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut j = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                j[a * n + b] = self.get(perm[a], perm[b]);
            }
        }
        Self { n, j, kind: self.kind, seed: self.seed }
    }

    /// Content hash of `n` and the coupling bits. Kind and seed are metadata
    /// and do not enter the hash.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        for x in &self.j {
            hasher.update(x.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .take(16)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Sherrington-Kirkpatrick instance: upper-triangle couplings i.i.d.
/// `N(0, std_dev^2)`, drawn row by row, mirrored below the diagonal.
pub fn gen_sk(n: usize, std_dev: f64, seed: u64) -> Result<CouplingGraph> {
    if n < 2 {
        return Err(Error::param(format!("SK graph needs n >= 2, got {n}")));
    }
    if !(std_dev > 0.0 && std_dev.is_finite()) {
        return Err(Error::param(format!("SK std_dev must be positive, got {std_dev}")));
    }
    let normal = Normal::new(0.0, std_dev).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let upper: Vec<f64> = (0..n * (n - 1) / 2).map(|_| normal.sample(&mut rng)).collect();
    CouplingGraph::from_upper(n, &upper, GraphKind::Sk, Some(seed))
}

/// K instance: every coupling is `+j0` or `-j0` with probability 1/2.
pub fn gen_k(n: usize, j0: f64, seed: u64) -> Result<CouplingGraph> {
    if n < 2 {
        return Err(Error::param(format!("K graph needs n >= 2, got {n}")));
    }
    if !(j0 > 0.0 && j0.is_finite()) {
        return Err(Error::param(format!("K coupling j0 must be positive, got {j0}")));
    }
    let mut rng = rng_from_seed(seed);
    let upper: Vec<f64> = (0..n * (n - 1) / 2)
        .map(|_| if rng.random::<bool>() { j0 } else { -j0 })
        .collect();
    CouplingGraph::from_upper(n, &upper, GraphKind::K, Some(seed))
}

/// Default SK standard deviation, `0.4 * gamma / n`.
pub fn default_sk_std(n: usize, gamma: f64) -> f64 {
    0.4 * gamma / n as f64
}

/// Default K coupling magnitude, `0.4 * gamma / (n - 1)`.
pub fn default_k_j0(n: usize, gamma: f64) -> f64 {
    0.4 * gamma / (n.max(2) - 1) as f64
}

/// Residual one-photon rates `gamma - sum_k |J[i][k]|`; errors on the most
/// negative one.
pub fn validate_rates(g: &CouplingGraph, gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param(format!("gamma must be positive, got {gamma}")));
    }
    let sums = g.row_abs_sums();
    let residual: Vec<f64> = sums.iter().map(|s| gamma - s).collect();
    let (worst, &min) = residual
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("graph has at least one mode");
    if min < 0.0 {
        let max_sum = sums.iter().copied().fold(0.0, f64::max);
        return Err(Error::InfeasibleRates {
            mode: worst,
            residual: min,
            max_rescale: gamma / max_sum,
        });
    }
    Ok(residual)
}

/// Rescales `g` uniformly so the largest row sum of `|J|` equals
/// `(1 - margin) * gamma`. Returns the scaled graph and the factor applied.
pub fn scale_to_feasibility(g: &CouplingGraph, gamma: f64, margin: f64) -> Result<(CouplingGraph, f64)> {
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::param(format!("margin must lie in [0, 1), got {margin}")));
    }
    let max_sum = g.row_abs_sums().into_iter().fold(0.0, f64::max);
    if max_sum == 0.0 {
        return Ok((g.clone(), 1.0));
    }
    let factor = (1.0 - margin) * gamma / max_sum;
    Ok((g.scaled(factor), factor))
}

/// Largest eigenvalue of `J`.
pub fn max_eigenvalue(g: &CouplingGraph) -> f64 {
    let m = DMatrix::from_row_slice(g.n, g.n, &g.j);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Oscillation threshold `(gamma - lambda_max) / 2`.
pub fn threshold_pump(g: &CouplingGraph, gamma: f64) -> Result<f64> {
    validate_rates(g, gamma)?;
    Ok((gamma - max_eigenvalue(g)) / 2.0)
}

/// `E = -(1/2) sum_ij J_ij s_i s_j`.
pub fn ising_energy(g: &CouplingGraph, sigma: &[i8]) -> Result<f64> {
    validate_spins(sigma, g.n)?;
    Ok(energy_unchecked(g, sigma))
}

pub(crate) fn energy_unchecked(g: &CouplingGraph, sigma: &[i8]) -> f64 {
    let n = g.n;
    let mut e = 0.0;
    for a in 0..n {
        let row = g.row(a);
        let mut field = 0.0;
        for b in (a + 1)..n {
            field += row[b] * f64::from(sigma[b]);
        }
        e -= f64::from(sigma[a]) * field;
    }
    e
}
