//! Criterion benchmarks for the simulator kernels; see `benches/`.
