//! Criterion benchmarks for the cellforge engines; see `benches/engines.rs`.
