//! Structured pseudospectral abscissa and structured stability radius of
//! real matrices under sparse, bounded, energy-limited perturbations.
//!
//! The admissible perturbations of `A` are the real matrices supported on a
//! fixed set of entries, with optional per-entry bounds, and Frobenius norm at
//! most ε. [`abscissa::worst_case_perturbation`] finds the perturbation that
//! pushes the rightmost eigenvalue furthest right, and
//! [`radius::stability_radius`] finds the smallest ε for which that
//! eigenvalue reaches the imaginary axis.

pub mod abscissa;
pub mod cli;
pub mod error;
pub mod generators;
pub mod inner;
pub mod io;
pub mod linalg;
pub mod perturbation;
pub mod radius;
pub mod sampling;

pub use abscissa::{worst_case_perturbation, AbscissaOptions, AbscissaResult};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, EigenTriple};
pub use perturbation::{Edge, PerturbationStructure, SparsePerturbation};
pub use radius::{stability_radius, InitPolicy, RadiusOptions, RadiusResult};
