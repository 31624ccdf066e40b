//! Criterion benchmarks for `aelim-core`; see `benches/`.
