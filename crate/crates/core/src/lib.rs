//! Gas source localization with a physics-guided neural network surrogate.
//!
//! The crate is organized bottom-up:
//!
//! * [`fem`] solves the steady advection-diffusion problem with a point source
//!   on a structured P1 triangulation of the unit square and supplies the
//!   reference data.
//! * [`surrogate`] is the network `u(x; p) = psi(x) * N([x; p])` with analytic
//!   derivatives in `x` and `p`.
//! * [`trainer`] generates labeled data and fits the surrogate with an H1
//!   (value + gradient) loss.
//! * [`inverse`] recovers the source position from point measurements with a
//!   box-constrained limited-memory quasi-Newton method.
//! * [`harness`] is the experiment layer behind the `gsl-pgnn` binary.

pub mod error;
pub mod fem;
pub mod harness;
pub mod inverse;
pub mod io;
pub mod surrogate;
pub mod trainer;

mod geometry;
mod rng;

pub use error::{Error, Result};
pub use geometry::{Point, Rect};
