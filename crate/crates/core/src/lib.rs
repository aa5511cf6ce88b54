//! Single Gaussian quantum-trajectory simulation of multi-mode optical Ising
//! machines: N two-photon driven modes whose non-local losses encode an Ising
//! coupling matrix. Spin configurations are read from the sign of each mode's
//! real quadrature along one long trajectory; their statistics follow a
//! Boltzmann law in the Ising energy with a pump-dependent temperature.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod oracle;
pub mod sampling;
pub mod seeds;
pub mod spins;

pub use dynamics::{init_vacuum, GaussianState, NoiseDraw, SimParams, C64};
pub use error::{Error, Result};
pub use graph::{CouplingGraph, GraphKind};
pub use oracle::SpectrumTable;
pub use experiment::{run_experiment, sweep_pump, Experiment, ExperimentOptions, SweepPoint};
pub use sampling::{EnergyHistogram, FitOptions, FitReport, LevelStat, TempFit};
