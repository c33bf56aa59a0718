//! The book under `book/`, compiled. Each chapter becomes a doc module,
//! so every `rust` snippet in the book runs as a doctest and a stale
//! example fails `cargo test --workspace` instead of misleading a reader.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/mapping-rules.md")]
pub mod mapping_rules {}

#[doc = include_str!("../../../book/src/sources-and-sampling.md")]
pub mod sources_and_sampling {}

#[doc = include_str!("../../../book/src/normalization-and-integration.md")]
pub mod normalization_and_integration {}

#[doc = include_str!("../../../book/src/strategies.md")]
pub mod strategies {}

#[doc = include_str!("../../../book/src/benchmarking.md")]
pub mod benchmarking {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
