//! Continuous shearlet transform on periodic grids, with numerical checks of
//! the associated uncertainty inequalities.

pub mod error;
pub mod grid;
pub mod group;
pub mod interp;
pub mod quad;
pub mod specfun;
pub mod sum;
pub mod system;
pub mod transform;
pub mod verify;
pub mod config;
pub mod report;
pub mod cli;

pub use error::{Error, Result};
