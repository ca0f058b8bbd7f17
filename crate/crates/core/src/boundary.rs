//! Ghost states on boundary edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{DualMesh, NodeMarker};
use crate::reconstruction::FaceState;

/// In config files a kind is either a bare name (`"wall"`, `"outflow"`) or a
/// table such as `{ kind = "inflow", w = 1.0, u = 0.5, v = 0.0, c = 0.0 }`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
#[serde(try_from = "KindRepr")]
pub enum BoundaryKind {
    /// Reflecting wall: normal velocity mirrored.
    #[default]
    Wall,
    /// Zero-gradient: the exterior copies the interior.
    Outflow,
    /// Prescribed surface level, velocity and concentration.
    Inflow { w: f64, u: f64, v: f64, c: f64 },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum KindRepr {
    Name(String),
    Table(KindTable),
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", deny_unknown_fields)]
enum KindTable {
    Wall,
    Outflow,
    Inflow { w: f64, u: f64, v: f64, c: f64 },
}

impl TryFrom<KindRepr> for BoundaryKind {
    type Error = String;

    fn try_from(r: KindRepr) -> std::result::Result<Self, String> {
        match r {
            KindRepr::Name(n) => match n.as_str() {
                "wall" => Ok(BoundaryKind::Wall),
                "outflow" => Ok(BoundaryKind::Outflow),
                "inflow" => Err("inflow needs a table with w, u, v and c".into()),
                other => Err(format!("unknown boundary kind `{other}`")),
            },
            KindRepr::Table(KindTable::Wall) => Ok(BoundaryKind::Wall),
            KindRepr::Table(KindTable::Outflow) => Ok(BoundaryKind::Outflow),
            KindRepr::Table(KindTable::Inflow { w, u, v, c }) => Ok(BoundaryKind::Inflow { w, u, v, c }),
        }
    }
}

/// Per-side boundary kinds for rectangular domains.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SideBoundaries {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

impl SideBoundaries {
    pub fn uniform(kind: BoundaryKind) -> Self {
        SideBoundaries { left: kind, right: kind, bottom: kind, top: kind }
    }

    /// Kind of the side an outward normal points through.
    pub fn by_normal(&self, n: Point) -> BoundaryKind {
        if n.x.abs() >= n.y.abs() {
            if n.x < 0.0 {
                self.left
            } else {
                self.right
            }
        } else if n.y < 0.0 {
            self.bottom
        } else {
            self.top
        }
    }
}

/// One kind per boundary edge, indexed by edge id (interior edges hold `None`).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPolicy {
    pub kinds: Vec<Option<BoundaryKind>>,
}

impl BoundaryPolicy {
    /// Assigns kinds from the outward normal of each boundary face.
    pub fn from_sides(mesh: &DualMesh, sides: &SideBoundaries) -> Self {
        Self::from_fn(mesh, |f| sides.by_normal(f.normal))
    }

    /// Assigns kinds from node markers; `inflow` edges take `inflow`.
    pub fn from_markers(mesh: &DualMesh, inflow: Option<BoundaryKind>) -> Result<Self> {
        let mut missing = false;
        let p = Self::from_fn(mesh, |f| match f.marker {
            Some(NodeMarker::Outflow) => BoundaryKind::Outflow,
            Some(NodeMarker::Inflow) => inflow.unwrap_or_else(|| {
                missing = true;
                BoundaryKind::Wall
            }),
            _ => BoundaryKind::Wall,
        });
        if missing {
            return Err(Error::Config("mesh has inflow markers but no inflow state is configured".into()));
        }
        Ok(p)
    }

    pub fn from_fn(mesh: &DualMesh, mut kind: impl FnMut(&crate::mesh::Face) -> BoundaryKind) -> Self {
        let kinds = mesh
            .edges
            .iter()
            .map(|e| match e.right {
                Some(_) => None,
                None => Some(kind(&mesh.faces[e.left])),
            })
            .collect();
        BoundaryPolicy { kinds }
    }

    pub fn has_inflow(&self) -> bool {
        self.kinds.iter().any(|k| matches!(k, Some(BoundaryKind::Inflow { .. })))
    }

    /// Checks that every inflow edge has a non-negative prescribed depth.
    pub fn validate(&self, mesh: &DualMesh, face_bed: &[f64]) -> Result<()> {
        for (e, k) in self.kinds.iter().enumerate() {
            if let Some(BoundaryKind::Inflow { w, .. }) = k {
                let f = mesh.edges[e].left;
                if *w < face_bed[f] {
                    return Err(Error::Config(format!(
                        "inflow level {w} lies below the bed {} on boundary edge {e}",
                        face_bed[f]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Exterior state on a boundary edge with outward unit normal `n` and midpoint bed `bed`.
#[inline]
pub fn ghost_state(inside: &FaceState, n: Point, bed: f64, kind: &BoundaryKind) -> FaceState {
    match *kind {
        BoundaryKind::Outflow => *inside,
        BoundaryKind::Wall => {
            // reflect the normal component, keep the tangential one
            let un = inside.u * n.x + inside.v * n.y;
            let u = inside.u - 2.0 * un * n.x;
            let v = inside.v - 2.0 * un * n.y;
            FaceState { h: inside.h, p: inside.h * u, q: inside.h * v, s: inside.s, u, v }
        }
        BoundaryKind::Inflow { w, u, v, c } => {
            let h = (w - bed).max(0.0);
            FaceState { h, p: h * u, q: h * v, s: h * c, u, v }
        }
    }
}
