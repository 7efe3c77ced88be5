//! Geometry of the L² metric on the space of Riemannian metrics over a
//! discretized flat torus.
//!
//! [`spd`] works at a single point, [`field`] on whole grids, and
//! [`completion`] with sequences of fields and their limits.

pub mod completion;
pub mod error;
pub mod field;
pub mod io;
pub mod quad;
pub mod spd;
pub mod sum;
pub mod tolerances;

pub use error::{Error, Result};
pub use spd::SymTensorPoint;
