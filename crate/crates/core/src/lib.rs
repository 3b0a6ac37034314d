//! Spectral laboratory for planar dumbbell domains.
//!
//! The crate builds two base polygons joined by a thin flared connector,
//! meshes the result with quality-bounded triangles, computes Dirichlet and
//! Neumann eigenpairs of the Laplacian with P1 finite elements and evaluates
//! localization diagnostics on the eigenfunctions: L² masses per region, hot
//! spots, nodal lines, connector decay and optimal obstacle placement.
//!
//! Everything here is `no_std` + `alloc`. File formats, the experiment runner
//! and parallel sweeps live in the companion `dumbbell-lab` crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is the NaN-rejecting form of a positivity check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod obstacle;
pub mod oracle;

pub use error::{Error, Result};
pub use geometry::{EdgeMarker, Point, PolygonDomain, Region};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
