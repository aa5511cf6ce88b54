use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::CouplingGraph;
use crate::oracle::SpectrumTable;
use crate::spins::{canonical_key, validate_spins, MAX_KEYED_MODES};

/// Visit counts per canonical configuration (`sigma[0] == +1`).
///
/// Merging adds counts, so histograms from independent runs on the same graph
/// can be reduced in any order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyHistogram {
    n: usize,
    fingerprint: String,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl EnergyHistogram {
    pub fn new(g: &CouplingGraph) -> Result<Self> {
        if g.n() > MAX_KEYED_MODES {
            return Err(Error::param(format!(
                "histograms support at most {MAX_KEYED_MODES} modes, got {}",
                g.n()
            )));
        }
        Ok(Self { n: g.n(), fingerprint: g.fingerprint(), counts: BTreeMap::new(), total: 0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph_fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Counts keyed by canonical key, ascending.
    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn count_of(&self, sigma: &[i8]) -> u64 {
        self.counts.get(&canonical_key(sigma)).copied().unwrap_or(0)
    }

    pub fn accumulate(&mut self, sigma: &[i8]) -> Result<()> {
        validate_spins(sigma, self.n)?;
        self.accumulate_key(canonical_key(sigma));
        Ok(())
    }

    pub(crate) fn accumulate_key(&mut self, key: u64) {
        *self.counts.entry(key).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &EnergyHistogram) -> Result<()> {
        if other.fingerprint != self.fingerprint {
            return Err(Error::GraphMismatch {
                expected: self.fingerprint.clone(),
                found: other.fingerprint.clone(),
            });
        }
        for (k, c) in &other.counts {
            *self.counts.entry(*k).or_insert(0) += c;
        }
        self.total += other.total;
        Ok(())
    }

    /// Canonical key with the most visits (smallest key on ties).
    pub fn most_visited(&self) -> Option<(u64, u64)> {
        self.counts
            .iter()
            .fold(None, |best: Option<(u64, u64)>, (&k, &c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((k, c)),
            })
    }
}

/// Occupancy of one energy level.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LevelStat {
    pub energy: f64,
    pub multiplicity: u64,
    pub count: u64,
    /// Fraction of samples at this energy.
    pub p_energy: f64,
    /// `p_energy / multiplicity`.
    pub p_per_config: f64,
}

fn check_same_graph(hist: &EnergyHistogram, spec: &SpectrumTable) -> Result<()> {
    if hist.fingerprint != spec.graph_fingerprint() {
        return Err(Error::GraphMismatch {
            expected: spec.graph_fingerprint().to_string(),
            found: hist.fingerprint.clone(),
        });
    }
    Ok(())
}

/// Aggregates a histogram onto the levels of `spec`, one entry per level in
/// ascending energy. Unvisited levels appear with zero counts.
pub fn per_energy_probabilities(hist: &EnergyHistogram, spec: &SpectrumTable) -> Result<Vec<LevelStat>> {
    check_same_graph(hist, spec)?;
    let mut counts = vec![0u64; spec.levels().len()];
    for (&key, &c) in &hist.counts {
        counts[spec.level_of_key(key)] += c;
    }
    let total = hist.total as f64;
    Ok(spec
        .levels()
        .iter()
        .zip(counts)
        .map(|(l, count)| {
            let p = if hist.total == 0 { 0.0 } else { count as f64 / total };
            LevelStat {
                energy: l.energy,
                multiplicity: l.multiplicity,
                count,
                p_energy: p,
                p_per_config: p / l.multiplicity as f64,
            }
        })
        .collect())
}

/// Fraction of samples in a ground-state configuration.
pub fn success_probability(hist: &EnergyHistogram, spec: &SpectrumTable) -> Result<f64> {
    check_same_graph(hist, spec)?;
    if hist.total == 0 {
        return Ok(0.0);
    }
    let ground: u64 = hist
        .counts
        .iter()
        .filter(|(&k, _)| spec.level_of_key(k) == 0)
        .map(|(_, c)| c)
        .sum();
    Ok(ground as f64 / hist.total as f64)
}
