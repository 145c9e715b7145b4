pub mod algebra;
pub mod classical;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod models;
pub mod quench;
pub mod spectra;

pub use error::{Error, Result};
