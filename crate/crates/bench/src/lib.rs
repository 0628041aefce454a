//! Criterion benchmarks for the FRIA engine live under `benches/`.
