//! Parareal for time-fractional quasilinear subdiffusion.
//!
//! L1 discretization of the Caputo derivative in time, Chebyshev–Lobatto
//! collocation in space, semi-implicit coarse and fine propagators, the
//! parareal driver, analytic error-bound calculators and a benchmark harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod harness;
pub mod l1_time;
pub mod parareal;
pub mod problems;
pub mod spectral;
pub mod stepping;
pub mod sum;

pub use error::{Error, Result};
pub use l1_time::{FractionalOrder, FractionalWeights, TimeGrids};
pub use spectral::{SpectralOperator, StateVector};
pub use stepping::{ProblemSpec, Stepper};
