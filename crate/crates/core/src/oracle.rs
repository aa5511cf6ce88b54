//! Exhaustive reference for small instances: the full energy spectrum with
//! multiplicities, ground states and exact Boltzmann weights.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{energy_unchecked, CouplingGraph};
use crate::spins::{config_from_key, flip_all, format_config, validate_spins};

/// Enumeration refuses graphs with more modes than this.
pub const MAX_ENUMERATION_MODES: usize = 24;

/// Configurations per Gray-code block; each block starts from an exact energy.
const BLOCK_BITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLevel {
    pub energy: f64,
    /// Number of configurations (both members of every `{s, -s}` pair).
    pub multiplicity: u64,
    /// Canonical representative (`sigma[0] == +1`) of the lowest-index member.
    pub example: Vec<i8>,
}

/// Energy levels sorted ascending, plus a lookup from canonical configuration
/// to its level.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    n: usize,
    tol: f64,
    levels: Vec<EnergyLevel>,
    ground_states: Vec<Vec<i8>>,
    level_of: Vec<u32>,
    fingerprint: String,
}

impl SpectrumTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn levels(&self) -> &[EnergyLevel] {
        &self.levels
    }

    pub fn ground_energy(&self) -> f64 {
        self.levels[0].energy
    }

    /// Every configuration in the lowest level, including both flip partners.
    pub fn ground_states(&self) -> &[Vec<i8>] {
        &self.ground_states
    }

    /// Fingerprint of the graph this table was enumerated from.
    pub fn graph_fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Level index of the configuration with canonical key `key`.
    pub fn level_of_key(&self, key: u64) -> usize {
        self.level_of[(key >> 1) as usize] as usize
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }
}

/// Energy grouping tolerance used by default: `1e-9 * max|J|`.
pub fn default_tolerance(g: &CouplingGraph) -> f64 {
    1e-9 * g.max_abs()
}

/// Change of energy when spin `i` is flipped: `2 s_i sum_j J_ij s_j`.
pub fn delta_energy(g: &CouplingGraph, sigma: &[i8], i: usize) -> Result<f64> {
    validate_spins(sigma, g.n())?;
    if i >= g.n() {
        return Err(Error::param(format!("spin index {i} out of range for n = {}", g.n())));
    }
    Ok(delta_unchecked(g, sigma, i))
}

#[inline]
fn delta_unchecked(g: &CouplingGraph, sigma: &[i8], i: usize) -> f64 {
    let field: f64 = g
        .row(i)
        .iter()
        .zip(sigma)
        .map(|(j, &s)| j * f64::from(s))
        .sum();
    2.0 * f64::from(sigma[i]) * field
}

/// Energies of all canonical configurations, indexed by `key >> 1`.
pub(crate) fn canonical_energies(g: &CouplingGraph) -> Vec<f64> {
    let n = g.n();
    let count = 1usize << (n - 1);
    let block_bits = BLOCK_BITS.min(n - 1);
    let block = 1usize << block_bits;
    let mut energies = vec![0.0; count];
    energies
        .par_chunks_mut(block)
        .enumerate()
        .for_each(|(h, out)| {
            let high = (h << block_bits) as u64;
            let mut sigma = config_from_key(high << 1, n);
            let mut e = energy_unchecked(g, &sigma);
            out[0] = e;
            for k in 1..block {
                let mode = k.trailing_zeros() as usize + 1;
                e += delta_unchecked(g, &sigma, mode);
                sigma[mode] = -sigma[mode];
                let gray = k ^ (k >> 1);
                out[gray] = e;
            }
        });
    energies
}

/// Enumerates every configuration of `g` (`sigma[0] = +1` half, multiplicities
/// doubled) and groups energies that lie within `tol` of a level's lowest
/// energy.
pub fn enumerate_spectrum(g: &CouplingGraph, tol: f64) -> Result<SpectrumTable> {
    let n = g.n();
    if n > MAX_ENUMERATION_MODES {
        return Err(Error::TooLarge { n, limit: MAX_ENUMERATION_MODES });
    }
    if !(tol >= 0.0) {
        return Err(Error::param(format!("tolerance must be non-negative, got {tol}")));
    }
    Ok(group_levels(n, tol, &canonical_energies(g), g.fingerprint()))
}

pub(crate) fn group_levels(n: usize, tol: f64, energies: &[f64], fingerprint: String) -> SpectrumTable {
    let mut order: Vec<u32> = (0..energies.len() as u32).collect();
    order.par_sort_unstable_by(|&a, &b| {
        energies[a as usize]
            .total_cmp(&energies[b as usize])
            .then(a.cmp(&b))
    });

    let mut levels: Vec<EnergyLevel> = Vec::new();
    let mut level_of = vec![0u32; energies.len()];
    let mut start = f64::NEG_INFINITY;
    for &idx in &order {
        let e = energies[idx as usize];
        if levels.is_empty() || e - start > tol {
            start = e;
            levels.push(EnergyLevel {
                energy: e,
                multiplicity: 0,
                example: config_from_key(u64::from(idx) << 1, n),
            });
        }
        let last = levels.len() - 1;
        levels[last].multiplicity += 2;
        level_of[idx as usize] = last as u32;
    }

    let ground_states = order
        .iter()
        .take_while(|&&idx| level_of[idx as usize] == 0)
        .flat_map(|&idx| {
            let s = config_from_key(u64::from(idx) << 1, n);
            let flipped = flip_all(&s);
            [s, flipped]
        })
        .collect();

    SpectrumTable { n, tol, levels, ground_states, level_of, fingerprint }
}

/// Exact `P(E) = n(E) exp(-E/T) / Z`, one entry per level, as `(E, P)`.
pub fn boltzmann_exact(spec: &SpectrumTable, temperature: f64) -> Result<Vec<(f64, f64)>> {
    if !(temperature > 0.0) {
        return Err(Error::param(format!("temperature must be positive, got {temperature}")));
    }
    let logw: Vec<f64> = spec
        .levels
        .iter()
        .map(|l| (l.multiplicity as f64).ln() - l.energy / temperature)
        .collect();
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logw.iter().map(|w| (w - max).exp()).sum();
    Ok(spec
        .levels
        .iter()
        .zip(&logw)
        .map(|(l, w)| (l.energy, (w - max).exp() / z))
        .collect())
}

/// CSV with columns `energy,multiplicity,example_configuration`.
pub fn write_spectrum_csv<W: Write>(spec: &SpectrumTable, mut w: W) -> Result<()> {
    writeln!(w, "energy,multiplicity,example_configuration")?;
    for l in &spec.levels {
        writeln!(w, "{},{},{}", l.energy, l.multiplicity, format_config(&l.example))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_k, gen_sk, ising_energy, GraphKind};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn pair(c: f64) -> CouplingGraph {
        CouplingGraph::from_upper(2, &[c], GraphKind::Custom, None).unwrap()
    }

    /// Full recomputation of every configuration, no Gray code, no symmetry.
    fn naive_levels(g: &CouplingGraph, tol: f64) -> Vec<(f64, u64)> {
        let n = g.n();
        let mut e: Vec<f64> = (0..1u32 << n)
            .map(|bits| {
                let s: Vec<i8> = (0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
                ising_energy(g, &s).unwrap()
            })
            .collect();
        e.sort_by(f64::total_cmp);
        let mut out: Vec<(f64, u64)> = Vec::new();
        let mut start = f64::NEG_INFINITY;
        for x in e {
            if out.is_empty() || x - start > tol {
                start = x;
                out.push((x, 0));
            }
            out.last_mut().unwrap().1 += 1;
        }
        out
    }

    #[test]
    fn uncoupled_has_one_level() {
        let s = enumerate_spectrum(&CouplingGraph::uncoupled(3).unwrap(), 0.0).unwrap();
        assert_eq!(s.levels().len(), 1);
        assert_eq!(s.levels()[0].energy, 0.0);
        assert_eq!(s.levels()[0].multiplicity, 8);
        assert_eq!(s.ground_states().len(), 8);
    }

    #[test]
    fn two_spin_ferromagnet() {
        let s = enumerate_spectrum(&pair(0.3), 0.0).unwrap();
        let lv: Vec<(f64, u64)> = s.levels().iter().map(|l| (l.energy, l.multiplicity)).collect();
        assert_eq!(lv, vec![(-0.3, 2), (0.3, 2)]);
        assert_eq!(s.ground_energy(), -0.3);
        let mut gs = s.ground_states().to_vec();
        gs.sort();
        assert_eq!(gs, vec![vec![-1, -1], vec![1, 1]]);
    }

    #[test]
    fn sk_levels_are_all_pairs() {
        let g = gen_sk(10, 0.04, 42).unwrap();
        let s = enumerate_spectrum(&g, 0.0).unwrap();
        assert_eq!(s.levels().len(), 512);
        assert!(s.levels().iter().all(|l| l.multiplicity == 2));
        assert_eq!(s.total_multiplicity(), 1024);
    }

    #[test]
    fn k_levels_are_few_and_even() {
        let g = gen_k(10, 0.05, 3).unwrap();
        let s = enumerate_spectrum(&g, default_tolerance(&g)).unwrap();
        assert!(s.levels().len() < 40);
        assert_eq!(s.total_multiplicity(), 1024);
        assert!(s.levels().iter().all(|l| l.multiplicity % 2 == 0));
        for w in s.levels().windows(2) {
            assert!(w[1].energy > w[0].energy);
        }
    }

    #[test]
    fn refuses_large_graphs() {
        let g = CouplingGraph::uncoupled(25).unwrap();
        assert!(matches!(enumerate_spectrum(&g, 0.0), Err(Error::TooLarge { n: 25, limit: 24 })));
    }

    #[test]
    fn gray_code_matches_naive_recomputation() {
        for (seed, n) in [(1u64, 5usize), (2, 9), (3, 13), (4, 14)] {
            let g = gen_sk(n, 0.1, seed).unwrap();
            let fast = enumerate_spectrum(&g, 0.0).unwrap();
            let slow = naive_levels(&g, 1e-12);
            assert_eq!(fast.levels().len(), slow.len());
            for (l, (e, m)) in fast.levels().iter().zip(&slow) {
                assert_eq!(l.multiplicity, *m);
                assert!((l.energy - e).abs() < 1e-12);
                assert!((ising_energy(&g, &l.example).unwrap() - l.energy).abs() < 1e-12);
            }
        }
        let g = gen_k(12, 0.07, 8).unwrap();
        let fast = enumerate_spectrum(&g, default_tolerance(&g)).unwrap();
        let slow = naive_levels(&g, default_tolerance(&g));
        let a: Vec<u64> = fast.levels().iter().map(|l| l.multiplicity).collect();
        let b: Vec<u64> = slow.iter().map(|x| x.1).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn level_lookup_is_consistent() {
        let g = gen_sk(9, 0.1, 12).unwrap();
        let s = enumerate_spectrum(&g, 0.0).unwrap();
        for key in (0..256u64).map(|k| k << 1) {
            let sigma = config_from_key(key, 9);
            let l = &s.levels()[s.level_of_key(key)];
            assert!((ising_energy(&g, &sigma).unwrap() - l.energy).abs() < 1e-12);
        }
    }

    #[test]
    fn boltzmann_small_cases() {
        let single = enumerate_spectrum(&CouplingGraph::uncoupled(3).unwrap(), 0.0).unwrap();
        assert_eq!(boltzmann_exact(&single, 0.7).unwrap(), vec![(0.0, 1.0)]);

        let c = 0.3;
        let s = enumerate_spectrum(&pair(c), 0.0).unwrap();
        let hot = boltzmann_exact(&s, 1e9 * c).unwrap();
        assert!((hot[0].1 - 0.5).abs() < 1e-6 && (hot[1].1 - 0.5).abs() < 1e-6);
        let p = boltzmann_exact(&s, c).unwrap();
        assert!((p[0].1 / p[1].1 - 2f64.exp()).abs() < 1e-12);
        assert!(boltzmann_exact(&s, 0.0).is_err());
        assert!(boltzmann_exact(&s, -1.0).is_err());
    }

    #[test]
    fn boltzmann_normalized_and_ordered_per_configuration() {
        let g = gen_k(10, 0.05, 7).unwrap();
        let s = enumerate_spectrum(&g, default_tolerance(&g)).unwrap();
        for t in [0.01, 0.1, 1.0, 10.0] {
            let p = boltzmann_exact(&s, t).unwrap();
            let total: f64 = p.iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let per_config: Vec<f64> = p
                .iter()
                .zip(s.levels())
                .map(|(x, l)| x.1 / l.multiplicity as f64)
                .collect();
            for w in per_config.windows(2) {
                assert!(w[0] > w[1]);
            }
        }
    }

    #[test]
    fn delta_energy_cases() {
        assert_eq!(delta_energy(&CouplingGraph::uncoupled(3).unwrap(), &[1, 1, -1], 2).unwrap(), 0.0);
        assert_eq!(delta_energy(&pair(0.25), &[1, 1], 0).unwrap(), 0.5);
        assert!(delta_energy(&pair(0.25), &[1, 1], 2).is_err());
        assert!(delta_energy(&pair(0.25), &[1, 0], 0).is_err());

        let g = gen_sk(10, 0.1, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let s: Vec<i8> = (0..10).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let e0 = ising_energy(&g, &s).unwrap();
            for i in 0..10 {
                let mut f = s.clone();
                f[i] = -f[i];
                let full = ising_energy(&g, &f).unwrap() - e0;
                assert!((delta_energy(&g, &s, i).unwrap() - full).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectrum_csv_layout() {
        let s = enumerate_spectrum(&pair(0.5), 0.0).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&s, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "energy,multiplicity,example_configuration\n-0.5,2,++\n0.5,2,+-\n"
        );
    }

    fn multiset(s: &SpectrumTable) -> Vec<(f64, u64)> {
        s.levels().iter().map(|l| (l.energy, l.multiplicity)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn spectrum_invariant_under_gauge_and_permutation(
            seed in any::<u64>(),
            signs in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 8),
            perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(),
        ) {
            let g = gen_k(8, 0.05, seed).unwrap();
            let tol = default_tolerance(&g);
            let base = multiset(&enumerate_spectrum(&g, tol).unwrap());
            for h in [g.gauge_transformed(&signs), g.permuted(&perm)] {
                let other = multiset(&enumerate_spectrum(&h, tol).unwrap());
                prop_assert_eq!(base.len(), other.len());
                for (a, b) in base.iter().zip(&other) {
                    prop_assert_eq!(a.1, b.1);
                    prop_assert!((a.0 - b.0).abs() < 1e-12);
                }
            }
        }
    }
}
