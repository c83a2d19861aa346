//! Criterion benchmarks for the statevector and density-matrix kernels; see `benches/`.
