//! Benchmark-only crate; see `benches/prover.rs`.
