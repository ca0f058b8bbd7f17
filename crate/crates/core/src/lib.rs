//! Cell-vertex central-upwind finite-volume solver for the coupled
//! shallow-water / passive-solute system on unstructured triangulations.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: triangulation input, dual (cell-vertex) grid construction, generators.
//! - [`state`]: conserved fields, desingularized primitive recovery, diagnostics.
//! - [`reconstruction`]: piecewise-linear topography, surface, discharge and
//!   concentration reconstruction with the positivity and max-min limiters.
//! - [`scheme`]: central-upwind edge fluxes with the blended dissipation parameter.
//! - [`sources`]: well-balanced bed slope, semi-implicit Manning friction, solute diffusion.
//! - [`boundary`]: ghost states for wall, inflow and outflow edges.
//! - [`timestepping`]: time-step restrictions, SSP-RK3 driver and run loop.
//! - [`bench`]: analytic oracles, error norms, built-in experiments, config files.
//!
//! Data-parallel kernels go through [`par`], which maps onto rayon when the
//! `parallel` feature is enabled and onto plain iterators otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod boundary;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod output;
pub mod par;
pub mod reconstruction;
pub mod scheme;
pub mod sources;
pub mod state;
pub mod timestepping;

pub use error::{Error, Result};
pub use geometry::Point;
pub use mesh::{build_dual, DualMesh, Triangulation};
pub use state::{FieldState, SchemeConfig, StepDiagnostics};
