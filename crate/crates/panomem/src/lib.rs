//! File formats, run directories and the command-line front end for
//! [`panomem_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use config::RunConfig;
pub use error::{Error, Result};
