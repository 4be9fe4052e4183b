//! File formats, corpus loading and workflows around [`docforge_core`].
//!
//! The `docforge` binary is a thin wrapper over [`cli::run`].

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod io;
pub mod records;
pub mod stores;
pub mod workflows;

pub use error::{Error, Result};
