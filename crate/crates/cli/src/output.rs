use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ising_traj::dynamics::{BinaryTrajectoryWriter, CsvTrajectoryWriter};
use ising_traj::{LevelStat, TempFit, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::SamplesFormat;
use crate::CliError;

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(CliError::io(format!("cannot create {}", parent.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(CliError::io(format!("cannot create {}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(CliError::io(format!("cannot write {}", path.display())))
}

/// Fit report: the fitted line on success, the reason otherwise.
pub fn fit_json(fit: &ising_traj::Result<TempFit>, autocorrelation_time: Option<f64>, total_samples: u64) -> Value {
    match fit {
        Ok(f) => json!({
            "t_eff": f.t_eff,
            "std_err": f.std_err,
            "r_squared": f.r_squared,
            "n_points": f.n_points,
            "autocorrelation_time": autocorrelation_time,
            "total_samples": total_samples,
            "slope": f.slope,
            "intercept": f.intercept,
        }),
        Err(e) => json!({
            "error": e.to_string(),
            "autocorrelation_time": autocorrelation_time,
            "total_samples": total_samples,
        }),
    }
}

/// Levels that entered the fit, with the fitted `ln P` for overlays.
pub fn line_rows(levels: &[LevelStat], fit: &TempFit, min_count: u64) -> Vec<(f64, f64, u64, f64)> {
    levels
        .iter()
        .filter(|l| l.count >= min_count.max(1))
        .map(|l| (l.energy, l.p_per_config.ln(), l.count, fit.intercept + fit.slope * l.energy))
        .collect()
}

pub enum SampleSink {
    None,
    Csv(CsvTrajectoryWriter<BufWriter<File>>, PathBuf),
    Binary(BinaryTrajectoryWriter<BufWriter<File>>, PathBuf),
}

impl SampleSink {
    pub fn open(format: SamplesFormat, dir: &Path, n: usize) -> Result<Self, CliError> {
        Ok(match format {
            SamplesFormat::None => SampleSink::None,
            SamplesFormat::Csv => {
                let path = dir.join("samples.csv");
                let w = CsvTrajectoryWriter::new(create(&path)?, n).map_err(CliError::io("cannot write samples"))?;
                SampleSink::Csv(w, path)
            }
            SamplesFormat::Binary => {
                let path = dir.join("samples.bin");
                let w = BinaryTrajectoryWriter::new(create(&path)?, n).map_err(CliError::io("cannot write samples"))?;
                SampleSink::Binary(w, path)
            }
        })
    }

    pub fn write(&mut self, t: f64, alpha: &[C64]) -> std::io::Result<()> {
        match self {
            SampleSink::None => Ok(()),
            SampleSink::Csv(w, _) => w.write_sample(t, alpha),
            SampleSink::Binary(w, _) => w.write_sample(t, alpha),
        }
    }

    /// Flushes and returns the file written, if any.
    pub fn finish(self) -> Result<Option<PathBuf>, CliError> {
        let io = CliError::io("cannot finish the sample stream");
        match self {
            SampleSink::None => Ok(None),
            SampleSink::Csv(w, p) => w.finish().map(|_| Some(p)).map_err(io),
            SampleSink::Binary(w, p) => w.finish().map(|_| Some(p)).map_err(io),
        }
    }
}
