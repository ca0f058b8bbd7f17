use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{twice_signed_area, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeMarker {
    Interior,
    Wall,
    Inflow,
    Outflow,
}

impl FromStr for NodeMarker {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "0" | "interior" => Ok(NodeMarker::Interior),
            "1" | "wall" => Ok(NodeMarker::Wall),
            "2" | "inflow" => Ok(NodeMarker::Inflow),
            "3" | "outflow" => Ok(NodeMarker::Outflow),
            other => Err(format!("unknown node marker `{other}`")),
        }
    }
}

impl fmt::Display for NodeMarker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeMarker::Interior => "interior",
            NodeMarker::Wall => "wall",
            NodeMarker::Inflow => "inflow",
            NodeMarker::Outflow => "outflow",
        };
        f.write_str(s)
    }
}

/// A conforming triangulation of a planar domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation {
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub markers: Vec<NodeMarker>,
}

impl Triangulation {
    /// Checks index ranges; geometric validity is checked by [`crate::mesh::build_dual`].
    pub fn new(nodes: Vec<Point>, triangles: Vec<[usize; 3]>, markers: Vec<NodeMarker>) -> Result<Self> {
        if markers.len() != nodes.len() {
            return Err(Error::Config(format!(
                "{} node markers for {} nodes",
                markers.len(),
                nodes.len()
            )));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &n in tri {
                if n >= nodes.len() {
                    return Err(Error::NodeIndexOutOfRange { triangle: t, node: n, count: nodes.len() });
                }
            }
        }
        Ok(Triangulation { nodes, triangles, markers })
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * twice_signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        Point::new((pa.x + pb.x + pc.x) / 3.0, (pa.y + pb.y + pc.y) / 3.0)
    }

    /// Total (unsigned) area of the triangulated domain.
    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t).abs()).sum()
    }
}
