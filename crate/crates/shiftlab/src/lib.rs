//! Numerical toolkit for differential equations with a variable time shift.
//!
//! The central object is an analytic shift map `eta` whose fixed points sort
//! into contractive and expansive classes by the size of `|eta'|`. Around
//! expansive fixed points the library linearizes the shift (Koenigs
//! conjugacy), runs the Taylor coefficient recursions whose bounded/unbounded
//! dichotomy decides analyticity of solutions, solves the associated positive
//! integral eigenproblem, and cross-checks everything against direct
//! simulation by the method of steps.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability. The `shiftlab` binary exposes the same entry points as
//! subcommands for scripted use.

pub mod error;
pub mod koenigs;
pub mod kreigen;
pub mod nondegeneracy;
pub mod pantograph;
pub mod pipeline;
pub mod report;
pub mod series;
pub mod shiftmap;
pub mod stepsim;

pub use error::{Error, Result};
pub use series::TruncatedSeries;
pub use shiftmap::{PointClass, ShiftMap};
