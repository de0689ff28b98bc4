//! The narrative guide, compiled from the mdbook sources in `book/src/`.
//!
//! Each chapter is attached as module documentation so that every fenced
//! Rust snippet in the book runs under `cargo test --doc` and can never
//! drift out of sync with the crate.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/states-and-distances.md")]
pub mod states_and_distances {}

#[doc = include_str!("../../../book/src/generators-and-spectra.md")]
pub mod generators_and_spectra {}

#[doc = include_str!("../../../book/src/phase-covariant-model.md")]
pub mod phase_covariant_model {}

#[doc = include_str!("../../../book/src/entropy-production.md")]
pub mod entropy_production {}

#[doc = include_str!("../../../book/src/markovianity.md")]
pub mod markovianity {}

#[doc = include_str!("../../../book/src/cli-experiments.md")]
pub mod cli_experiments {}
