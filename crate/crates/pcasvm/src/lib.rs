//! File formats, configuration and the `pcasvm` command-line tool on top of
//! [`pcasvm_core`].

pub mod cli;
pub mod config;
mod error;
pub mod formats;
pub mod io;
pub mod run;

pub use error::{Error, Result};
