//! Criterion benchmarks for the closed-form and Fock engines; see `benches/`.
