//! Matched asymptotic approximations for the mixed Poisson problem on a
//! junction of a thin plate and thin rods, together with the finite-element
//! machinery needed to build and verify them.
//!
//! Module layout follows the pipeline: planar geometry and meshing, planar
//! Poisson solves and Green functions, cross-section quantities, the rod
//! ODEs, the matching algebra, composite fields, an axisymmetric reference
//! solver and the experiment driver.

pub mod error;
pub mod quadrature;
pub mod sparse;

pub mod geometry;
pub mod poisson2d;
pub mod cross_section;
pub mod rod1d;
pub mod matching;
pub mod composite;
pub mod reference_axisym;
pub mod experiments;

pub use error::{Error, Result};
