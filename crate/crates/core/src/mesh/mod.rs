//! Primary triangulations and the cell-vertex dual grid built from them.

mod dual;
pub mod generate;
pub mod io;
mod quality;
mod triangulation;

pub use dual::{build_dual, DualCell, DualEdge, DualMesh, Face, FaceGeometry};
pub(crate) use dual::LSQ_DEGENERATE;
pub use generate::{GridPattern, RectDomain};
pub use quality::{mesh_quality_report, MeshQuality};
pub use triangulation::{NodeMarker, Triangulation};
