//! Every chapter of the guide as a module doc, so `cargo test` runs its
//! listings.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/trees.md")]
pub mod trees {}
#[doc = include_str!("src/model.md")]
pub mod model {}
#[doc = include_str!("src/solving.md")]
pub mod solving {}
#[doc = include_str!("src/warm-start.md")]
pub mod warm_start {}
#[doc = include_str!("src/data.md")]
pub mod data {}
#[doc = include_str!("src/cross-validation.md")]
pub mod cross_validation {}
#[doc = include_str!("src/configuration.md")]
pub mod configuration {}
#[doc = include_str!("src/cli.md")]
pub mod cli {}
#[doc = include_str!("src/matrix-dump.md")]
pub mod matrix_dump {}
