//! Newton-CG methods for nonconvex problems with Hölder continuous Hessians.
//!
//! Two drivers are provided: [`newton_cg_solve`] needs the Hölder data
//! `(H_ν, ν)` of the Hessian, and [`pf_newton_cg_solve`] estimates the
//! damping weight on the fly. Both reach an `ε_g`-approximate first-order
//! stationary point and, given `ε_H`, certify approximate second-order
//! stationarity with a randomized Lanczos oracle.

// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline_crn;
pub mod bench;
pub mod bounds;
pub mod capped_cg;
pub mod error;
pub mod linalg;
pub mod line_search;
pub mod meo;
pub mod newton_cg;
pub mod oracle;
pub mod parallel;
pub mod pf_newton_cg;
pub mod problems;
pub mod rng;
pub mod solve;
pub mod tridiag;

pub use error::{NcgError, Result};
pub use newton_cg::{newton_cg_solve, NcgParams};
pub use oracle::{HolderClass, ProblemOracle};
pub use pf_newton_cg::{pf_newton_cg_solve, PfParams};
pub use solve::{SolveResult, Status};
