//! Criterion benchmarks for the numerical kernels of `ptwigner-core`; see
//! `benches/kernels.rs`.
