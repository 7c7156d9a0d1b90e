//! Criterion benchmarks for `ultracomp-core`; see `benches/`.
