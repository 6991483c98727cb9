//! File formats, seeded experiments, run manifests and the `xpand` command
//! line, on top of `xpand-core`.

mod error;

pub mod cli;
pub mod experiments;
pub mod format;
pub mod manifest;
pub mod suites;

pub use error::{Error, Result};
pub use xpand_core as core;
