//! Dense real and complex matrix kernels.

mod complex;
mod hermitian;
pub mod json;
pub mod real;

pub(crate) use complex::strides_of;
pub use complex::ComplexMatrix;
pub use hermitian::{
    eig_hermitian, polar_unitary, trace_norm_general, Eigen, HermitianMatrix, RootKind,
    HERMITICITY_TOL, PSD_TOL,
};
pub use real::RealMatrix;
