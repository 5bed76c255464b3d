//! File formats, experiment drivers and reproducible scenario runs on top
//! of `intriso-core`. The `intriso` binary is a thin command line over
//! these modules.

pub mod error;
pub mod experiments;
pub mod gen;
pub mod io;
pub mod rng;
pub mod scenario;
pub mod schema;

pub use error::{CliError, Result};
