//! Criterion benchmarks for `fewloc-core`; see `benches/`.
