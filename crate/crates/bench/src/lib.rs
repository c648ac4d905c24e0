//! Criterion benchmarks for the DISCA simulator live under `benches/`.
