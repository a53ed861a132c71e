//! Shared numerical kernels: grids, adaptive ODE integration, quadrature,
//! bracketing root finders, Bessel functions and finite differences.

pub mod bessel;
pub mod fd;
pub mod grid;
pub mod ode;
pub mod quad;
pub mod radial;
pub mod roots;

pub use bessel::{bessel_j0_y0, bessel_j1_y1, bessel_k01_scaled, bessel_order1_with_derivs};
pub use grid::{Grading, RadialGrid};
pub use ode::{integrate, OdeOptions};
pub use quad::{gauss_legendre, integrate_panels, integrate_tail, quadrature, Rule};
pub use radial::{integrate_radial_ode, RadialFunction, SeriesLaunch, TailLaw};
pub use roots::{find_root, find_root_with, RootMethod};
