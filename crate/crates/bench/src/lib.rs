//! Criterion benchmarks for `irs-sim`; see `benches/`.
