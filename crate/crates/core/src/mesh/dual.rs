//! Cell-vertex dual grid.
//!
//! Each primary node owns one control volume obtained by joining the
//! centroids of the triangles around it. Boundary nodes are closed with the
//! two half boundary segments adjacent to the node, so the control volumes
//! tile the triangulated domain exactly.
//!
//! Every dual edge is stored once in [`DualMesh::edges`]; each cell sees it
//! through a [`Face`] carrying the cell-relative quantities (outward normal,
//! sub-triangle weight, center-to-edge distance).

use std::collections::HashMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::{polygon_area_centroid, Point};

use super::triangulation::{NodeMarker, Triangulation};

/// Relative tolerance (against the domain area) below which a triangle is degenerate.
const DEGENERATE_AREA: f64 = 1e-14;

/// Relative determinant below which neighbor offsets do not span the plane.
pub(crate) const LSQ_DEGENERATE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DualCell {
    /// Primary node this control volume surrounds.
    pub node: usize,
    /// Center of mass `C_j`.
    pub centroid: Point,
    pub area: f64,
    pub face_start: usize,
    pub face_end: usize,
}

impl DualCell {
    #[inline]
    pub fn faces(&self) -> Range<usize> {
        self.face_start..self.face_end
    }

    #[inline]
    pub fn face_count(&self) -> usize {
        self.face_end - self.face_start
    }
}

/// One cell's view of a dual edge.
#[derive(Clone, Debug)]
pub struct Face {
    pub cell: usize,
    pub edge: usize,
    /// Neighboring cell across the edge, `None` on the domain boundary.
    pub neighbor: Option<usize>,
    /// The neighbor's face on the same edge.
    pub twin: Option<usize>,
    pub length: f64,
    /// Unit normal pointing out of `cell`.
    pub normal: Point,
    pub midpoint: Point,
    /// Dual-vertex ids in counter-clockwise order around `cell`.
    pub vertices: [usize; 2],
    /// Area of the triangle (C_j, vertex 0, vertex 1).
    pub sub_area: f64,
    /// `sub_area / |D_j|`.
    pub mu: f64,
    /// Distance from `C_j` to the edge line.
    pub dist: f64,
    /// Distance between the projections of `C_j` and `C_jk` on the normal;
    /// `2 * dist` on boundary faces.
    pub proj_dist: f64,
    /// `N_jk - C_j`.
    pub mid_offset: Point,
    /// `vertex 0 - C_j`.
    pub vert_offset: Point,
    /// `C_jk - C_j`, zero on boundary faces.
    pub nb_offset: Point,
    /// Least-squares weight: the cell gradient over all edge neighbors is
    /// `sum_k lsq_weight_k (v_k - v_j)`. Zero on boundary faces.
    pub lsq_weight: Point,
    /// Boundary marker of the primary edge this face halves, if on the boundary.
    pub marker: Option<NodeMarker>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceGeometry {
    pub length: f64,
    pub normal: Point,
    pub midpoint: Point,
    pub mu: f64,
    pub dist: f64,
    pub proj_dist: f64,
}

/// A unique dual edge; `left` is the face whose normal is the edge normal.
#[derive(Clone, Debug)]
pub struct DualEdge {
    pub left: usize,
    pub right: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct DualMesh {
    pub cells: Vec<DualCell>,
    pub faces: Vec<Face>,
    pub edges: Vec<DualEdge>,
    /// Dual vertices: triangle centroids, boundary-edge midpoints and boundary nodes.
    pub vertices: Vec<Point>,
    /// `face_offsets[j]..face_offsets[j + 1]` are the faces of cell `j`.
    pub face_offsets: Vec<usize>,
    /// Global minimum of the center-to-edge distances.
    pub d_min: f64,
    pub domain_area: f64,
    pub triangulation: Triangulation,
}

impl DualMesh {
    #[inline]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn cell_faces(&self, j: usize) -> &[Face] {
        &self.faces[self.cells[j].faces()]
    }

    /// Quantities of face `k` of cell `j`.
    ///
    /// Panics if `k` is not a valid face index of the cell.
    pub fn geometry_of(&self, j: usize, k: usize) -> FaceGeometry {
        let f = &self.cell_faces(j)[k];
        FaceGeometry {
            length: f.length,
            normal: f.normal,
            midpoint: f.midpoint,
            mu: f.mu,
            dist: f.dist,
            proj_dist: f.proj_dist,
        }
    }

    pub fn is_boundary_cell(&self, j: usize) -> bool {
        self.cell_faces(j).iter().any(|f| f.neighbor.is_none())
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn mean_cell_area(&self) -> f64 {
        self.total_area() / self.cells.len() as f64
    }

    /// `max_j |D_j|^2`, the default desingularization parameter.
    pub fn max_area_squared(&self) -> f64 {
        let a = self.cells.iter().map(|c| c.area).fold(0.0, f64::max);
        a * a
    }
}

/// Triangles around a node, as `(triangle, a, b)` with `node -> a -> b` counter-clockwise.
type Fan = Vec<(usize, usize, usize)>;

/// Builds the cell-vertex dual of `tri`.
pub fn build_dual(tri: &Triangulation) -> Result<DualMesh> {
    let mut tri = tri.clone();
    let n_nodes = tri.nodes.len();

    let domain_area = tri.area();
    let tol = DEGENERATE_AREA * domain_area;
    for t in 0..tri.triangles.len() {
        let a = tri.signed_area(t);
        if a.abs() <= tol || !a.is_finite() {
            return Err(Error::DegenerateTriangle { index: t, area: a, tolerance: tol });
        }
        if a < 0.0 {
            tri.triangles[t].swap(1, 2);
        }
    }

    // edge multiplicities
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * tri.triangles.len());
    for t in &tri.triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            *edge_count.entry(key(a, b)).or_insert(0) += 1;
        }
    }
    let mut bad: Vec<_> = edge_count.iter().filter(|(_, &c)| c > 2).collect();
    bad.sort();
    if let Some((&(a, b), &c)) = bad.first() {
        return Err(Error::NonConformingEdge(a, b, c));
    }
    let is_boundary_edge = |a: usize, b: usize| edge_count.get(&key(a, b)) == Some(&1);

    // per-node fans
    let mut fans: Vec<Fan> = vec![Vec::new(); n_nodes];
    for (t, tr) in tri.triangles.iter().enumerate() {
        for i in 0..3 {
            fans[tr[i]].push((t, tr[(i + 1) % 3], tr[(i + 2) % 3]));
        }
    }
    let mut is_boundary_node = vec![false; n_nodes];
    for j in 0..n_nodes {
        if fans[j].is_empty() {
            return Err(Error::NonManifoldNode(j));
        }
        let (ordered, boundary) = order_fan(j, &fans[j])?;
        fans[j] = ordered;
        is_boundary_node[j] = boundary;
    }

    // dual vertices
    let mut vertices: Vec<Point> = (0..tri.triangles.len()).map(|t| tri.centroid(t)).collect();
    let mut midpoint_id: HashMap<(usize, usize), usize> = HashMap::new();
    let mut node_vertex: HashMap<usize, usize> = HashMap::new();
    for j in 0..n_nodes {
        if !is_boundary_node[j] {
            continue;
        }
        node_vertex.insert(j, vertices.len());
        vertices.push(tri.nodes[j]);
        let (_, a1, _) = fans[j][0];
        let (_, _, bm) = *fans[j].last().unwrap();
        for other in [a1, bm] {
            debug_assert!(is_boundary_edge(j, other));
            midpoint_id.entry(key(j, other)).or_insert_with(|| {
                vertices.push(tri.nodes[j].midpoint(tri.nodes[other]));
                vertices.len() - 1
            });
        }
    }

    // polygon of each cell: (vertex ids, per-face neighbor node or boundary primary edge)
    enum Side {
        Interior(usize),
        Boundary(usize, usize),
    }
    let mut cells = Vec::with_capacity(n_nodes);
    let mut faces: Vec<Face> = Vec::with_capacity(7 * n_nodes);
    let mut face_offsets = Vec::with_capacity(n_nodes + 1);
    face_offsets.push(0);
    let mut d_min = f64::INFINITY;

    for j in 0..n_nodes {
        let fan = &fans[j];
        let mut poly: Vec<usize> = Vec::with_capacity(fan.len() + 3);
        let mut sides: Vec<Side> = Vec::with_capacity(fan.len() + 3);
        if is_boundary_node[j] {
            let (_, a1, _) = fan[0];
            let (_, _, bm) = *fan.last().unwrap();
            poly.push(node_vertex[&j]);
            sides.push(Side::Boundary(j, a1));
            poly.push(midpoint_id[&key(j, a1)]);
            sides.push(Side::Interior(a1));
            for (i, &(t, _, b)) in fan.iter().enumerate() {
                poly.push(t);
                if i + 1 < fan.len() {
                    sides.push(Side::Interior(b));
                }
            }
            sides.push(Side::Interior(bm));
            poly.push(midpoint_id[&key(j, bm)]);
            sides.push(Side::Boundary(j, bm));
        } else {
            for &(t, _, b) in fan {
                poly.push(t);
                sides.push(Side::Interior(b));
            }
        }
        debug_assert_eq!(poly.len(), sides.len());

        let pts: Vec<Point> = poly.iter().map(|&v| vertices[v]).collect();
        let (area, centroid) = polygon_area_centroid(&pts);
        let start = faces.len();
        for (i, side) in sides.iter().enumerate() {
            let v0 = poly[i];
            let v1 = poly[(i + 1) % poly.len()];
            let (p1, p2) = (vertices[v0], vertices[v1]);
            let d = p2 - p1;
            let length = d.norm();
            let normal = Point::new(d.y / length, -d.x / length);
            let sub_area = 0.5 * (p1 - centroid).cross(p2 - centroid);
            let dist = 2.0 * sub_area / length;
            if dist <= 0.0 || !dist.is_finite() {
                return Err(Error::NonStarShapedCell { cell: j, face: i, distance: dist });
            }
            d_min = d_min.min(dist);
            let (neighbor, marker) = match *side {
                Side::Interior(nb) => (Some(nb), None),
                Side::Boundary(a, b) => (None, Some(edge_marker(&tri.markers, a, b))),
            };
            faces.push(Face {
                cell: j,
                edge: usize::MAX,
                neighbor,
                twin: None,
                length,
                normal,
                midpoint: p1.midpoint(p2),
                vertices: [v0, v1],
                sub_area,
                mu: sub_area / area,
                dist,
                proj_dist: 2.0 * dist,
                mid_offset: p1.midpoint(p2) - centroid,
                vert_offset: p1 - centroid,
                nb_offset: Point::ZERO,
                lsq_weight: Point::ZERO,
                marker,
            });
        }
        cells.push(DualCell { node: j, centroid, area, face_start: start, face_end: faces.len() });
        face_offsets.push(faces.len());
    }

    // pair interior faces into unique edges
    let mut edges: Vec<DualEdge> = Vec::new();
    let mut pending: HashMap<(usize, usize), usize> = HashMap::new();
    for f in 0..faces.len() {
        match faces[f].neighbor {
            None => {
                faces[f].edge = edges.len();
                edges.push(DualEdge { left: f, right: None });
            }
            Some(nb) => {
                let j = faces[f].cell;
                if let Some(g) = pending.remove(&key(j, nb)) {
                    let e = edges.len();
                    edges.push(DualEdge { left: g, right: Some(f) });
                    faces[f].edge = e;
                    faces[g].edge = e;
                    faces[f].twin = Some(g);
                    faces[g].twin = Some(f);
                } else {
                    pending.insert(key(j, nb), f);
                }
            }
        }
    }
    if let Some((&(a, b), _)) = pending.iter().min() {
        return Err(Error::NonConformingEdge(a, b, 1));
    }

    for f in 0..faces.len() {
        if let Some(nb) = faces[f].neighbor {
            let offset = cells[nb].centroid - cells[faces[f].cell].centroid;
            faces[f].nb_offset = offset;
            faces[f].proj_dist = offset.dot(faces[f].normal);
            if faces[f].proj_dist <= 0.0 {
                return Err(Error::NonStarShapedCell {
                    cell: faces[f].cell,
                    face: f - cells[faces[f].cell].face_start,
                    distance: faces[f].proj_dist,
                });
            }
        }
    }

    for c in &cells {
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for f in &faces[c.faces()] {
            let d = f.nb_offset;
            sxx += d.x * d.x;
            sxy += d.x * d.y;
            syy += d.y * d.y;
        }
        let det = sxx * syy - sxy * sxy;
        if !(det > LSQ_DEGENERATE * sxx * syy) {
            continue;
        }
        for f in &mut faces[c.faces()] {
            let d = f.nb_offset;
            f.lsq_weight = Point::new((syy * d.x - sxy * d.y) / det, (sxx * d.y - sxy * d.x) / det);
        }
    }

    Ok(DualMesh { cells, faces, edges, vertices, face_offsets, d_min, domain_area, triangulation: tri })
}

#[inline]
fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn edge_marker(markers: &[NodeMarker], a: usize, b: usize) -> NodeMarker {
    match (markers[a], markers[b]) {
        (NodeMarker::Interior, m) | (m, NodeMarker::Interior) => m,
        (m, _) => m,
    }
}

/// Orders the fan of `node` counter-clockwise; returns whether the node is on the boundary.
fn order_fan(node: usize, fan: &Fan) -> Result<(Fan, bool)> {
    let by_a: HashMap<usize, usize> = fan.iter().enumerate().map(|(i, &(_, a, _))| (a, i)).collect();
    if by_a.len() != fan.len() {
        return Err(Error::NonManifoldNode(node));
    }
    let bs: std::collections::HashSet<usize> = fan.iter().map(|&(_, _, b)| b).collect();
    let starts: Vec<usize> = (0..fan.len()).filter(|&i| !bs.contains(&fan[i].1)).collect();
    let (start, boundary) = match starts.len() {
        0 => (0, false),
        1 => (starts[0], true),
        _ => return Err(Error::NonManifoldNode(node)),
    };
    let mut ordered = Vec::with_capacity(fan.len());
    let mut cur = start;
    loop {
        ordered.push(fan[cur]);
        let b = fan[cur].2;
        match by_a.get(&b) {
            Some(&next) if next != start => cur = next,
            _ => break,
        }
        if ordered.len() > fan.len() {
            return Err(Error::NonManifoldNode(node));
        }
    }
    if ordered.len() != fan.len() {
        return Err(Error::NonManifoldNode(node));
    }
    Ok((ordered, boundary))
}
