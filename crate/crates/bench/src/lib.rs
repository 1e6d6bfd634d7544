//! Benchmarks for the `isirl` kernels; see `benches/kernels.rs`.
