//! One-shot information measures smoothed with a pinned marginal.
//!
//! Classical measures are computed exactly as linear programs, quantum ones as
//! small dense semidefinite programs. The `protocols` module runs state
//! splitting and privacy amplification with exact error accounting.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod limits;
pub mod linalg;
pub mod lp;
pub mod probability;
pub mod protocols;
pub mod quantum;
pub mod random;
pub mod sdp;
pub mod spectrum;

pub use error::{Error, Result};
pub use limits::Caps;
pub use linalg::{ComplexMatrix, HermitianMatrix};
pub use probability::Distribution;
