//! Criterion benchmarks for `regulim-core`; see `benches/`.
