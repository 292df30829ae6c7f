//! Criterion benchmarks for synthgraph live in `benches/`.
