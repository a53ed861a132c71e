//! Numerical laboratory for type-II blow-up of the radial energy-critical
//! focusing wave equation `u_tt = Δu + u³` in four space dimensions.
//!
//! All kernels are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`, which is what the command line tool uses.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup_law;
pub mod coercivity;
pub mod error;
pub mod groundstate;
pub mod numerics;
pub mod profile;
pub mod report;
pub mod scalar;
pub mod spectral;
pub mod wave_sim;

pub use error::{Error, Result};
pub use scalar::{lit, Real};

pub type RadialGrid64 = numerics::RadialGrid<f64>;
pub type RadialFunction64 = numerics::RadialFunction<f64>;
