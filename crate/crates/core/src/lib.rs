//! Restarted primal-dual first-order solver for conic programs over boxes, zero, nonnegative,
//! second-order, rotated second-order and exponential cones.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the `*F64` aliases below
//! cover the common case.

pub mod bench;
pub mod cones;
pub mod error;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod model;
pub mod scaling;
pub mod scalar;
pub mod solver;
pub mod termination;

pub use error::{PdcsError, Result};
pub use linalg::SparseMatrix;
pub use model::{Cone, ConeKind, ConicProgram, Solution};
pub use scalar::Scalar;
pub use solver::{solve, solve_with_observer, Progress, SolveReport, SolverParams};
pub use termination::{classify, compute_residuals, sgm, Residuals, Status};

pub type ConicProgramF64 = ConicProgram<f64>;
pub type SparseMatrixF64 = SparseMatrix<f64>;
pub type SolutionF64 = Solution<f64>;
pub type ResidualsF64 = Residuals<f64>;
pub type SolverParamsF64 = SolverParams<f64>;
pub type SolveReportF64 = SolveReport<f64>;
