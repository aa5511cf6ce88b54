use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ising_traj::dynamics::DampingIndex;
use ising_traj::sampling::{FitTarget, FitWeights, TieBreak};
use ising_traj::GraphKind;

#[derive(Debug, Parser)]
#[command(
    name = "ising-traj",
    version,
    about = "Gaussian quantum-trajectory sampler for optical Ising machines",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an SK or K coupling graph and report its threshold.
    GenerateGraph(GenerateArgs),
    /// Run one trajectory and fit the effective temperature.
    Simulate(SimulateArgs),
    /// Enumerate the energy spectrum of a small graph.
    Enumerate(EnumerateArgs),
    /// Refit an existing histogram CSV.
    Fit(FitCmdArgs),
    /// Effective temperature versus pump, one trajectory per point.
    SweepPump(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Sk,
    K,
}

impl From<KindArg> for GraphKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Sk => GraphKind::Sk,
            KindArg::K => GraphKind::K,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DampingArg {
    Summed,
    Row,
}

impl From<DampingArg> for DampingIndex {
    fn from(d: DampingArg) -> Self {
        match d {
            DampingArg::Summed => DampingIndex::Summed,
            DampingArg::Row => DampingIndex::Row,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    PerConfig,
    PerEnergy,
}

impl From<TargetArg> for FitTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::PerConfig => FitTarget::PerConfiguration,
            TargetArg::PerEnergy => FitTarget::PerEnergy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    Counts,
    Uniform,
}

impl From<WeightsArg> for FitWeights {
    fn from(w: WeightsArg) -> Self {
        match w {
            WeightsArg::Counts => FitWeights::Counts,
            WeightsArg::Uniform => FitWeights::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    Plus,
    Minus,
}

impl From<TieArg> for TieBreak {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Plus => TieBreak::Plus,
            TieArg::Minus => TieBreak::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplesFormat {
    None,
    Csv,
    Binary,
}

/// Key=value file whose keys are long flag names; flags given on the
/// command line take precedence.
#[derive(Debug, Clone, Args)]
pub struct ConfigArg {
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// Where the coupling graph comes from: a file, or a generator.
#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Graph file written by generate-graph.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["kind", "n", "std_dev", "j0", "graph_seed"])]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub n: Option<usize>,
    /// SK standard deviation [default: 0.4 gamma / n].
    #[arg(long)]
    pub std_dev: Option<f64>,
    /// K coupling magnitude [default: 0.4 gamma / (n - 1)].
    #[arg(long)]
    pub j0: Option<f64>,
    /// Generator seed; derived from --seed when absent.
    #[arg(long)]
    pub graph_seed: Option<u64>,
    /// Shrink an infeasible graph to 99% of the largest admissible scale.
    #[arg(long)]
    pub rescale_to_feasible: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PhysicsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 5000.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub sample_interval: f64,
    #[arg(long, default_value_t = 100.0)]
    pub burn_in: f64,
    /// Base seed of every random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Integrate without quantum noise.
    #[arg(long)]
    pub no_noise: bool,
    /// Noiseless mean-field equations from a small random amplitude.
    #[arg(long)]
    pub mean_field: bool,
    #[arg(long, value_enum, default_value_t = DampingArg::Summed)]
    pub damping_index: DampingArg,
    #[arg(long, value_enum, default_value_t = TieArg::Plus)]
    pub tie_break: TieArg,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Levels with fewer samples are left out of the fit.
    #[arg(long, default_value_t = 20)]
    pub min_count: u64,
    #[arg(long, value_enum, default_value_t = TargetArg::PerConfig)]
    pub fit_target: TargetArg,
    #[arg(long, value_enum, default_value_t = WeightsArg::Counts)]
    pub fit_weights: WeightsArg,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub std_dev: Option<f64>,
    #[arg(long)]
    pub j0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub graph_seed: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub rescale_to_feasible: bool,
    #[arg(long, short, default_value = "graph.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Pump as a multiple of the oscillation threshold.
    #[arg(long, conflicts_with = "pump")]
    pub pump_ratio: Option<f64>,
    /// Absolute pump amplitude G.
    #[arg(long)]
    pub pump: Option<f64>,
    /// Energy grouping tolerance for enumeration [default: automatic].
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum, default_value_t = SamplesFormat::None)]
    pub samples: SamplesFormat,
    #[arg(long, short, default_value = "run")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Spectrum CSV path; standard output when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitCmdArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, value_name = "FILE")]
    pub histogram: PathBuf,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Report path; standard output when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Pump ratios G/G_th: a comma list or `start:stop:step`.
    #[arg(long, value_parser = parse_ratios, default_value = "0.5,0.75,1,1.25,1.5")]
    pub ratios: Ratios,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Parallel trajectories [default: available cores].
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, short, default_value = "sweep")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ratios(pub Vec<f64>);

pub fn parse_ratios(s: &str) -> Result<Ratios, String> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad ratio {x:?}: {e}"));
    let values = if let [a, b, c] = s.split(':').collect::<Vec<_>>()[..] {
        let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
        if !(step > 0.0) || stop < start {
            return Err(format!("range {s:?} needs start <= stop and a positive step"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() || values.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(format!("ratios must be finite and non-negative: {s:?}"));
    }
    Ok(Ratios(values))
}
