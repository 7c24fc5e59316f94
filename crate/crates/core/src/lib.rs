pub mod error;
pub mod fraccalc;

pub use error::{Error, Result};
pub mod analysis;
pub mod kernels;
pub mod oracle;
pub mod solver;
