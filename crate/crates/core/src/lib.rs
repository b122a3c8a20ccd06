//! Discovery and certification of conservation laws in quantum spin-chain
//! dynamics.
//!
//! The crate is `no_std` compatible (it needs `alloc`). The default `std`
//! feature only switches the dependencies to their `std` builds.
//!
//! Pipeline, bottom to top:
//!
//! - [`pauli`] and [`operator`]: symbolic Pauli strings, local bases and real
//!   Pauli sums.
//! - [`dynamics`]: dense closed (eigendecomposition) and open (adaptive
//!   Dormand–Prince) evolution, Pauli expectations and data matrices.
//! - [`models`]: the Z₂ lattice gauge model, the disordered XXZ chain,
//!   random product states and dephasing.
//! - [`shadow`]: randomized single-qubit measurements and the noise models
//!   built on them.
//! - [`spectral`]: centering, thresholded SVD, candidate extraction and
//!   sample planning.
//! - [`tester`]: Chebyshev-sampled robust interpolation and the promise test.
//! - [`oracle`]: exact ground truth (restricted commutant, dense null space).
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod data;
pub mod dynamics;
pub mod error;
mod linalg;
pub mod models;
pub mod operator;
pub mod oracle;
pub mod pauli;
pub mod rng;
pub mod shadow;
pub mod spectral;
pub mod tester;

mod prelude {
    pub(crate) use alloc::format;
    pub(crate) use alloc::string::{String, ToString};
    pub(crate) use alloc::vec;
    pub(crate) use alloc::vec::Vec;
    #[cfg(not(feature = "std"))]
    pub(crate) use num_traits::Float;
}

pub use data::DataMatrix;
pub use error::{Error, Result};
pub use operator::PauliSum;
pub use pauli::{Boundary, Pauli, PauliBasisSet, PauliString, Phase};

/// Largest qubit count for which dense `2^N × 2^N` matrices are built.
pub const DENSE_CAP: usize = 12;

/// Largest qubit count accepted by the density-matrix (Lindblad) path.
pub const LINDBLAD_CAP: usize = 8;

pub use num_complex::Complex64;
