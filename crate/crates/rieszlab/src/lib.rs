//! Numerical laboratory for jellium and uniform-electron-gas energies with
//! Riesz interactions |x|^{-s}.

pub mod analysis;
pub mod boxint;
pub mod decomposition;
pub mod error;
pub mod jellium;
pub mod kernel;
pub mod lattice;
pub mod potentials;
pub mod quad;
pub mod simplex;
pub mod special;
pub mod transport;

pub use error::{Error, Result};
pub use kernel::*;
