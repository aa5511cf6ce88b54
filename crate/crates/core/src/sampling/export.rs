//! Histogram CSV (`energy,multiplicity,count,p_energy,p_per_config`) and the
//! fit report.

use std::io::{BufRead, Write};
use std::path::Path;

use super::fit::TempFit;
use super::histogram::LevelStat;
use crate::error::{Error, Result};

const HEADER: &str = "energy,multiplicity,count,p_energy,p_per_config";

pub fn write_histogram_csv<W: Write>(levels: &[LevelStat], mut w: W) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    for l in levels {
        writeln!(w, "{},{},{},{},{}", l.energy, l.multiplicity, l.count, l.p_energy, l.p_per_config)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a histogram CSV; `origin` labels error messages.
pub fn read_histogram_csv<R: BufRead>(reader: R, origin: &Path) -> Result<Vec<LevelStat>> {
    let err = |line: usize, message: String| Error::Parse { path: origin.to_path_buf(), line, message };
    let mut lines = reader.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim) != Some(HEADER) {
        return Err(err(1, format!("expected header {HEADER:?}")));
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(err(no, format!("expected 5 fields, found {}", f.len())));
        }
        let num = |i: usize, name: &str| f[i].parse::<f64>().map_err(|e| err(no, format!("field {name}: {e}")));
        let int = |i: usize, name: &str| f[i].parse::<u64>().map_err(|e| err(no, format!("field {name}: {e}")));
        out.push(LevelStat {
            energy: num(0, "energy")?,
            multiplicity: int(1, "multiplicity")?,
            count: int(2, "count")?,
            p_energy: num(3, "p_energy")?,
            p_per_config: num(4, "p_per_config")?,
        });
    }
    Ok(out)
}

/// Summary written next to every histogram. `autocorrelation_time` is the
/// integrated autocorrelation time of the sampled energy series in time
/// units (`1/gamma`), absent when the series is unavailable.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitReport {
    pub t_eff: f64,
    pub std_err: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub autocorrelation_time: Option<f64>,
    pub total_samples: u64,
}

impl FitReport {
    pub fn new(fit: &TempFit, autocorrelation_time: Option<f64>, total_samples: u64) -> Self {
        Self {
            t_eff: fit.t_eff,
            std_err: fit.std_err,
            r_squared: fit.r_squared,
            n_points: fit.n_points,
            autocorrelation_time,
            total_samples,
        }
    }
}
