// mdbook cannot run listings that depend on workspace crates, so each chapter
// is pulled in as the docs of an empty module and `cargo test --doc` runs
// every fenced Rust block against the real libraries. One module per chapter
// keeps failures traceable to their file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/tape.md")]
pub mod tape {}

#[doc = include_str!("../../../book/src/pooling.md")]
pub mod pooling {}

#[doc = include_str!("../../../book/src/generator.md")]
pub mod generator {}

#[doc = include_str!("../../../book/src/variety.md")]
pub mod variety {}

#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}

#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
