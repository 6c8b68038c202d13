//! Semidefinite programming: a real block interior-point solver and a small
//! modeling layer for Hermitian matrix variables.

mod model;
mod problem;
mod solver;

pub use model::{HermExpr, HermVar, LinExpr, Model, ModelSolution, ScalarVar};
pub use problem::{SdpProblem, SymCoeffs};
pub use solver::{solve_sdp, solve_sdp_with, SdpOptions, SdpSolution, SdpStatus};
