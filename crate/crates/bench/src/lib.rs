//! Criterion benchmarks for the shelfgaze kernels live in `benches/`.
