//! Criterion benchmarks for `qlbn-core`; see `benches/`.
