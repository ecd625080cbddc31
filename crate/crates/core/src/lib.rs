//! A dense linear-programming solver built on the full-Newton-step infeasible
//! interior-point method with the algebraic transformation `ψ(t) = t²` of the
//! centering equation, together with tools that check the method's
//! convergence analysis numerically.
//!
//! * [`linalg`] dense vectors, matrices, Cholesky and null-space projection
//! * [`lp`] problem data, starting point and residual bookkeeping
//! * [`newton`] scaled iterate, proximity and search directions
//! * [`driver`] the iteration loop, ξ restarts and traces
//! * [`certify`] per-iteration bound audits and parameter conditions
//! * [`oracle`] instance generator and vertex-enumeration reference solver
//! * [`cli`] the `aet-iipm` command line

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
#[cfg(feature = "cli")]
pub mod cli;
pub mod driver;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod newton;
pub mod oracle;

pub use driver::{solve, Param, SolveReport, SolveStatus, SolverConfig};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use lp::LinearProgram;
