//! Sharp constants and stability checks for trace inequalities on the sphere,
//! with finite-dimensional duality and kinetic-transport laboratories.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod duality;
pub mod error;
pub mod harmonic;
pub mod quad;
pub mod spectrum;
pub mod specfun;
pub mod transport;
pub mod weight;

pub use error::{Error, Result};
