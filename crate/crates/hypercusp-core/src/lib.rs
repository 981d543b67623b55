//! Numerical Clifford analysis on upper half-space.
//!
//! Clifford arithmetic, Vahlen matrices acting by Möbius transformations,
//! finite-difference kernel tests for the Dirac/Weinstein family of operators,
//! truncated Eisenstein and Poincaré series, Bessel-K Fourier fits and a
//! Monte-Carlo Petersson product.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod clifford;
pub mod diffops;
pub mod fourier;
pub mod lattice_sum;
pub mod linalg;
pub mod petersson;
pub mod scalar;
pub mod special;
pub mod series;
pub mod sum;
pub mod tolerances;
pub mod vahlen;

mod par;

pub use clifford::{HalfSpacePoint, Multivector, Paravector};
pub use scalar::{Complex64, Scalar};
pub use vahlen::VahlenMatrix;
