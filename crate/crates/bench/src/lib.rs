//! Criterion benchmarks for the pdflow kernels live in `benches/`.
