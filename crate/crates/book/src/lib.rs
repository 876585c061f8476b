//! Doc-test shim for the guide in `book/`.
//!
//! mdBook cannot run its own code listings, so every chapter is included
//! here as module documentation and `cargo test --doc` executes the Rust
//! snippets. One module per chapter keeps failures attributable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/trees.md")]
pub mod trees {}

#[doc = include_str!("../../../book/src/environments.md")]
pub mod environments {}

#[doc = include_str!("../../../book/src/classification.md")]
pub mod classification {}

#[doc = include_str!("../../../book/src/cascades.md")]
pub mod cascades {}

#[doc = include_str!("../../../book/src/walk.md")]
pub mod walk {}

#[doc = include_str!("../../../book/src/chaos.md")]
pub mod chaos {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
