//! A numerical laboratory for the one-dimensional surface growth model
//!
//! ```text
//! u_t + u_xxxx + (u_x²)_xx = 0   on the torus ℝ / Lℤ,  ∫u = 0.
//! ```
//!
//! The crate provides the biharmonic heat kernel and its periodization,
//! Fourier tools on the torus, an exponential pseudospectral solver, Duhamel
//! and Picard machinery for the localized equation satisfied by `w = u_x φ`,
//! mixed space-time norms, and the regularity diagnostics built on them.

pub mod checkpoint;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod exponent;
pub mod field;
pub mod jet;
pub mod kernel;
pub mod mild;
pub mod norm;
pub mod phi;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use exponent::{Criticality, Exponent, MixedExponents};
pub use field::{GridField, ParabolicCylinder, Region, Trajectory};
pub use norm::{mixed_norm, restrict, Patch};
pub use kernel::{periodized_kernel_spectral, KernelEval, Normalization};
pub use spectral::{SpectralField, Window};
