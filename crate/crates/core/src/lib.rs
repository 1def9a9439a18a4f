//! Geometry pre-processing for particle-based simulation.
//!
//! The pipeline turns a closed surface (2D polyline or 3D triangle mesh) into a
//! two-level narrow-band level-set field, removes features that cannot be
//! resolved at the chosen resolution, and relaxes a lattice of particles into a
//! body-fitted, isotropic distribution.
//!
//! ```text
//! geometry ──> levelset ──> cleaner ──> confinement ──> relaxation
//! ```

pub mod builtin;
pub mod cleaner;
pub mod config;
pub mod confinement;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod levelset;
pub mod pipeline;
pub mod relaxation;

pub use error::{Error, ErrorCategory, Result};

/// Position or displacement in `D` dimensions.
pub type Point<const D: usize> = nalgebra::SVector<f64, D>;
/// Vector quantity in `D` dimensions.
pub type Vector<const D: usize> = nalgebra::SVector<f64, D>;
