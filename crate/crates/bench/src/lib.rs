//! Criterion benchmarks for the trajectory and enumeration kernels; see `benches/`.
