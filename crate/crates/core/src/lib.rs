//! Numerics for constant σ₂ curvature metrics on 4-spheres with conical
//! singularities: elementary symmetric functions, the flat Schouten tensor
//! of a conformal factor, Gauss-Bonnet-Chern defects and the classification
//! of conic divisors, radial "football" solutions, and the level-set
//! quantities along them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conformal;
pub mod divisor;
pub mod error;
pub mod io;
pub mod levelset;
pub mod ode;
pub mod radial;
pub mod symfunc;
pub mod verify;

pub use error::{Error, Result};
