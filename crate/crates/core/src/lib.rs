//! Numerical laboratory for Wiener chaos calculus.
//!
//! Kernels live on uniform grids over `[0,1]^n` and are treated as exact
//! piecewise-constant elements of `L^2`, so isometry and product-formula
//! identities hold to rounding error. On top of the kernel layer sit a
//! finite chaos algebra (products, Malliavin operators, the Stein quantity
//! `G_X`), Brownian path evaluation of multiple integrals, the
//! Dambis–Dubins–Schwarz time change of discretized martingales, and a set
//! of reproducible Monte Carlo experiments that emit JSON reports.

pub mod chaos_algebra;
pub mod dds_timechange;
pub mod error;
pub mod experiments;
pub mod grid_kernels;
pub mod path_sim;

pub use chaos_algebra::{ChaosKernel, ChaosVector};
pub use error::{Error, Result};
pub use grid_kernels::{FactoredKernel, GridFunction, GridKernel, Limits, RankOnePower};
pub use path_sim::{RngStream, WienerPath};
