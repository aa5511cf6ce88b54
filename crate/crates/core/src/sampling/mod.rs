//! From trajectory samples to Boltzmann statistics: spin readout, occupancy
//! histograms keyed by canonical configuration, per-energy probabilities and
//! the effective-temperature fit.

mod autocorr;
mod export;
mod fit;
mod histogram;

use crate::dynamics::C64;
use crate::error::{Error, Result};

pub use autocorr::integrated_autocorrelation_time;
pub use export::{read_histogram_csv, write_histogram_csv, FitReport};
pub use fit::{fit_temperature, weighted_line_fit, FitOptions, FitTarget, FitWeights, LineFit, TempFit, DEFAULT_MIN_COUNT};
pub use histogram::{per_energy_probabilities, success_probability, EnergyHistogram, LevelStat};

/// Spin assigned when `Re alpha_i` is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum TieBreak {
    #[default]
    Plus,
    Minus,
}

impl TieBreak {
    fn spin(self) -> i8 {
        match self {
            TieBreak::Plus => 1,
            TieBreak::Minus => -1,
        }
    }
}

/// One recorded spin configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSample {
    pub t: f64,
    pub sigma: Vec<i8>,
    pub energy: f64,
}

/// `sigma_i = sign(Re alpha_i)`, exact zeros resolved by `tie`.
pub fn read_spins(alpha: &[C64], tie: TieBreak) -> Result<Vec<i8>> {
    let mut out = vec![0; alpha.len()];
    read_spins_into(alpha, tie, &mut out)?;
    Ok(out)
}

pub fn read_spins_into(alpha: &[C64], tie: TieBreak, out: &mut [i8]) -> Result<()> {
    debug_assert_eq!(alpha.len(), out.len());
    for (i, (a, s)) in alpha.iter().zip(out.iter_mut()).enumerate() {
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::param(format!("alpha_{i} is not finite")));
        }
        *s = if a.re > 0.0 {
            1
        } else if a.re < 0.0 {
            -1
        } else {
            tie.spin()
        };
    }
    Ok(())
}
