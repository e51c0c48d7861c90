//! Over-the-air TDD reciprocity calibration for antenna arrays.
//!
//! The crate covers the whole chain used to study intra-array (self)
//! calibration:
//!
//! * [`model`]: RF impairments, calibration vectors and intra-array channels.
//! * [`airlink`]: group-based bidirectional pilot exchanges, coherent and
//!   spread over several coherence slots.
//! * [`stacking`]: the stacked homogeneous system `Y(P) f = n` and its
//!   identifiability count.
//! * [`estimators`]: constrained least squares, Argos, Rogalin, daisy chain,
//!   Avalanche and alternating maximum likelihood.
//! * [`crb`]: bilinear composites, Fisher information, constrained
//!   Cramér-Rao bounds and the orthogonal-complement matrix used to relate
//!   ML and LS.
//! * [`grouping`]: antenna grouping schemes and the optimal-grouping count.
//!
//! Antennas are always indexed so that every group occupies a contiguous
//! range; [`grouping::GroupScheme`] carries the permutation from physical
//! antenna positions to that ordering.

pub mod airlink;
pub mod crb;
mod error;
pub mod estimators;
pub mod grouping;
pub mod linalg;
pub mod model;
pub mod stacking;

pub use error::{CalError, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix (column-major).
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
