//! Closed, oriented triangle meshes with halfedge connectivity.
//!
//! A [`TriMesh`] is an immutable snapshot: positions plus a shared
//! [`Topology`]. Moving vertices (as the flow does) produces a new mesh that
//! shares the connectivity tables through an `Arc`, so snapshots are cheap.
//!
//! Halfedges are implicit: halfedge `3 * f + k` starts at corner `k` of face
//! `f` and ends at corner `(k + 1) % 3`. Faces are counter-clockwise when seen
//! from outside, which makes the signed volume of the generator shapes
//! positive.

mod obj;
mod quality;

pub use obj::{load_obj, parse_obj, save_obj, write_obj, ObjError};
pub use quality::{mesh_quality, MeshQuality};

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Faces whose area falls below this fraction of the mean face area are
/// rejected as degenerate.
pub const DEGENERATE_FACE_RATIO: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("face {face} references vertex {vertex}, but only {count} positions exist")]
    IndexOutOfRange { face: usize, vertex: usize, count: usize },
    #[error("mesh has no faces")]
    Empty,
    #[error("edge ({a}, {b}) has {count} incident faces, expected 2")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("vertex {vertex} has a non-manifold neighbourhood (incident faces form {cycles} fans)")]
    NonManifoldVertex { vertex: usize, cycles: usize },
    #[error("vertex {vertex} is not referenced by any face")]
    UnreferencedVertex { vertex: usize },
    #[error("edge ({a}, {b}) is traversed in the same direction by two faces")]
    Unoriented { a: usize, b: usize },
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("component with Euler characteristic {chi} is not an orientable closed surface")]
    OddEulerCharacteristic { chi: i64 },
    #[error("position array length {got} does not match vertex count {expected}")]
    PositionCount { expected: usize, got: usize },
}

impl MeshError {
    /// True for every failure that stems from a missing, extra or
    /// mis-oriented neighbour rather than from bad coordinates.
    pub fn is_non_manifold(&self) -> bool {
        matches!(
            self,
            MeshError::NonManifoldEdge { .. }
                | MeshError::NonManifoldVertex { .. }
                | MeshError::UnreferencedVertex { .. }
        )
    }
}

/// Connectivity tables shared by every snapshot of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    faces: Vec<[usize; 3]>,
    twin: Vec<usize>,
    vertex_halfedge: Vec<usize>,
    /// Undirected edges as (smaller halfedge, larger halfedge).
    edges: Vec<(usize, usize)>,
    component: Vec<usize>,
    component_euler: Vec<i64>,
}

impl Topology {
    pub fn vertex_count(&self) -> usize {
        self.vertex_halfedge.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    #[inline]
    pub fn origin(&self, h: usize) -> usize {
        self.faces[h / 3][h % 3]
    }

    #[inline]
    pub fn dest(&self, h: usize) -> usize {
        self.faces[h / 3][(h + 1) % 3]
    }

    #[inline]
    pub fn next(&self, h: usize) -> usize {
        3 * (h / 3) + (h + 1) % 3
    }

    #[inline]
    pub fn prev(&self, h: usize) -> usize {
        3 * (h / 3) + (h + 2) % 3
    }

    #[inline]
    pub fn twin(&self, h: usize) -> usize {
        self.twin[h]
    }

    /// Corner opposite to halfedge `h` inside its face.
    #[inline]
    pub fn opposite_vertex(&self, h: usize) -> usize {
        self.faces[h / 3][(h + 2) % 3]
    }

    /// Iterates the undirected edges as (origin, destination) vertex pairs.
    pub fn edge_vertices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(h, _)| (self.origin(h), self.dest(h)))
    }

    /// Halfedge pairs, one entry per undirected edge.
    pub fn edge_halfedges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Outgoing halfedges of `v`, walking counter-clockwise around it.
    pub fn outgoing(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.vertex_halfedge[v];
        let mut current = Some(start);
        std::iter::from_fn(move || {
            let h = current?;
            let n = self.twin[self.prev(h)];
            current = if n == start { None } else { Some(n) };
            Some(h)
        })
    }

    /// One-ring neighbours of `v` in counter-clockwise order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.outgoing(v).map(move |h| self.dest(h))
    }

    pub fn valence(&self, v: usize) -> usize {
        self.outgoing(v).count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.component_euler.iter().sum()
    }

    pub fn component_count(&self) -> usize {
        self.component_euler.len()
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component[v]
    }

    /// Genus of a connected mesh; `None` when the mesh has several
    /// components.
    pub fn genus(&self) -> Option<i64> {
        match self.component_euler.as_slice() {
            [chi] => Some((2 - chi) / 2),
            _ => None,
        }
    }
}

/// Immutable snapshot of a closed oriented triangle mesh.
#[derive(Debug, Clone)]
pub struct TriMesh {
    positions: Vec<Vec3>,
    topology: Arc<Topology>,
}

impl TriMesh {
    /// Builds connectivity and validates the closed-manifold invariants.
    pub fn build(positions: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let topology = build_topology(positions.len(), faces)?;
        let mesh = TriMesh {
            positions,
            topology: Arc::new(topology),
        };
        mesh.check_faces()?;
        Ok(mesh)
    }

    /// Same connectivity, new coordinates. Only the position count is
    /// checked; degenerate geometry is reported by the consumers.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Result<Self, MeshError> {
        if positions.len() != self.positions.len() {
            return Err(MeshError::PositionCount {
                expected: self.positions.len(),
                got: positions.len(),
            });
        }
        Ok(TriMesh {
            positions,
            topology: Arc::clone(&self.topology),
        })
    }

    fn map_positions(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        TriMesh {
            positions: self.positions.iter().map(f).collect(),
            topology: Arc::clone(&self.topology),
        }
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        self.map_positions(|p| p + offset)
    }

    /// Homothety `x -> factor * x` about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        self.map_positions(|p| p * factor)
    }

    /// Applies `x -> rotation * x + offset`.
    pub fn transformed(&self, rotation: &Matrix3<f64>, offset: Vec3) -> Self {
        self.map_positions(|p| rotation * p + offset)
    }

    /// Reverses the orientation of every face.
    pub fn flipped(&self) -> Self {
        let faces = self.faces().iter().map(|&[a, b, c]| [a, c, b]).collect();
        let topology = build_topology(self.vertex_count(), faces).expect("reversing a valid mesh keeps it valid");
        TriMesh {
            positions: self.positions.clone(),
            topology: Arc::new(topology),
        }
    }

    /// Disjoint union of two meshes (vertex indices of `other` are shifted).
    pub fn merged(&self, other: &TriMesh) -> Result<Self, MeshError> {
        let offset = self.vertex_count();
        let mut positions = self.positions.clone();
        positions.extend_from_slice(&other.positions);
        let mut faces = self.faces().to_vec();
        faces.extend(other.faces().iter().map(|f| f.map(|i| i + offset)));
        TriMesh::build(positions, faces)
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.topology.faces
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn shares_topology(&self, other: &TriMesh) -> bool {
        Arc::ptr_eq(&self.topology, &other.topology)
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.topology.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.topology.edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.topology.euler_characteristic()
    }

    pub fn genus(&self) -> Option<i64> {
        self.topology.genus()
    }

    pub fn face_positions(&self, f: usize) -> [Vec3; 3] {
        self.faces()[f].map(|i| self.positions[i])
    }

    /// Twice the oriented area vector of face `f`.
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_positions(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.face_count()).map(|f| self.face_area(f)).sum()
    }

    /// Signed enclosed volume as a sum of origin cones.
    pub fn signed_volume(&self) -> f64 {
        self.faces()
            .iter()
            .map(|&[a, b, c]| {
                let (pa, pb, pc) = (self.positions[a], self.positions[b], self.positions[c]);
                pa.dot(&pb.cross(&pc))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Interior angles of face `f` at its three corners.
    pub fn face_angles(&self, f: usize) -> [f64; 3] {
        let p = self.face_positions(f);
        std::array::from_fn(|k| {
            let u = p[(k + 1) % 3] - p[k];
            let w = p[(k + 2) % 3] - p[k];
            u.cross(&w).norm().atan2(u.dot(&w))
        })
    }

    /// Angle defect `2π − Σ corner angles` per vertex.
    pub fn angle_defects(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.vertex_count()];
        for f in 0..self.face_count() {
            let angles = self.face_angles(f);
            for (k, &v) in self.faces()[f].iter().enumerate() {
                sums[v] += angles[k];
            }
        }
        sums.into_iter().map(|s| 2.0 * PI - s).collect()
    }

    /// Mean of the vertex positions.
    pub fn centroid(&self) -> Vec3 {
        self.positions.iter().sum::<Vec3>() / self.vertex_count() as f64
    }

    fn check_faces(&self) -> Result<(), MeshError> {
        let areas: Vec<f64> = (0..self.face_count()).map(|f| self.face_area(f)).collect();
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        match areas
            .iter()
            .enumerate()
            .find(|(_, &a)| !(a > DEGENERATE_FACE_RATIO * mean))
        {
            Some((face, &area)) => Err(MeshError::DegenerateFace { face, area }),
            None => Ok(()),
        }
    }
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.positions == other.positions && self.faces() == other.faces()
    }
}

fn build_topology(vertex_count: usize, faces: Vec<[usize; 3]>) -> Result<Topology, MeshError> {
    if faces.is_empty() {
        return Err(MeshError::Empty);
    }
    for (f, face) in faces.iter().enumerate() {
        if let Some(&v) = face.iter().find(|&&v| v >= vertex_count) {
            return Err(MeshError::IndexOutOfRange {
                face: f,
                vertex: v,
                count: vertex_count,
            });
        }
        if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
            return Err(MeshError::DegenerateFace { face: f, area: 0.0 });
        }
    }

    let halfedge_count = 3 * faces.len();
    let origin = |h: usize| faces[h / 3][h % 3];
    let dest = |h: usize| faces[h / 3][(h + 1) % 3];

    // Group halfedges by undirected edge; insertion order keeps the result
    // deterministic.
    let mut edge_index: HashMap<(usize, usize), usize> = HashMap::with_capacity(halfedge_count);
    let mut incident: Vec<Vec<usize>> = Vec::with_capacity(halfedge_count / 2);
    for h in 0..halfedge_count {
        let (a, b) = (origin(h), dest(h));
        let key = (a.min(b), a.max(b));
        let next_id = incident.len();
        let id = *edge_index.entry(key).or_insert(next_id);
        if id == next_id {
            incident.push(Vec::with_capacity(2));
        }
        incident[id].push(h);
    }

    let mut twin = vec![usize::MAX; halfedge_count];
    let mut edges = Vec::with_capacity(incident.len());
    for hs in &incident {
        let (a, b) = (origin(hs[0]), dest(hs[0]));
        if hs.len() != 2 {
            return Err(MeshError::NonManifoldEdge {
                a: a.min(b),
                b: a.max(b),
                count: hs.len(),
            });
        }
        let (h0, h1) = (hs[0], hs[1]);
        if origin(h0) == origin(h1) {
            return Err(MeshError::Unoriented { a, b });
        }
        twin[h0] = h1;
        twin[h1] = h0;
        edges.push((h0, h1));
    }

    let mut vertex_halfedge = vec![usize::MAX; vertex_count];
    let mut out_degree = vec![0usize; vertex_count];
    for h in 0..halfedge_count {
        let v = origin(h);
        if vertex_halfedge[v] == usize::MAX {
            vertex_halfedge[v] = h;
        }
        out_degree[v] += 1;
    }
    if let Some(v) = vertex_halfedge.iter().position(|&h| h == usize::MAX) {
        return Err(MeshError::UnreferencedVertex { vertex: v });
    }

    // A manifold vertex has all of its outgoing halfedges on one rotation
    // cycle.
    for v in 0..vertex_count {
        let start = vertex_halfedge[v];
        let mut h = start;
        let mut count = 0;
        loop {
            count += 1;
            h = twin[3 * (h / 3) + (h + 2) % 3];
            if h == start || count > out_degree[v] {
                break;
            }
        }
        if count != out_degree[v] {
            let cycles = if count < out_degree[v] { 2 } else { 1 };
            return Err(MeshError::NonManifoldVertex { vertex: v, cycles });
        }
    }

    // Connected components and their Euler characteristics.
    let mut parent: Vec<usize> = (0..vertex_count).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for face in &faces {
        for k in 1..3 {
            let (ra, rb) = (find(&mut parent, face[0]), find(&mut parent, face[k]));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut root_id: HashMap<usize, usize> = HashMap::new();
    let mut component = vec![0; vertex_count];
    for v in 0..vertex_count {
        let r = find(&mut parent, v);
        let next_id = root_id.len();
        component[v] = *root_id.entry(r).or_insert(next_id);
    }
    let mut component_euler = vec![0i64; root_id.len()];
    for v in 0..vertex_count {
        component_euler[component[v]] += 1;
    }
    for &(h, _) in &edges {
        component_euler[component[origin(h)]] -= 1;
    }
    for face in &faces {
        component_euler[component[face[0]]] += 1;
    }
    if let Some(&chi) = component_euler.iter().find(|&&chi| chi % 2 != 0 || chi > 2) {
        return Err(MeshError::OddEulerCharacteristic { chi });
    }

    Ok(Topology {
        faces,
        twin,
        vertex_halfedge,
        edges,
        component,
        component_euler,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tetrahedron() -> TriMesh {
        let s = 1.0 / (2.0 * 2f64.sqrt());
        let positions = vec![
            Vec3::new(s, s, s),
            Vec3::new(s, -s, -s),
            Vec3::new(-s, s, -s),
            Vec3::new(-s, -s, s),
        ];
        let faces = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        TriMesh::build(positions, faces).unwrap()
    }

    fn cube_faces() -> (Vec<Vec3>, Vec<[usize; 3]>) {
        let positions = (0..8)
            .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let faces = vec![
            [0, 2, 1],
            [1, 2, 3],
            [4, 5, 6],
            [5, 7, 6],
            [0, 1, 4],
            [1, 5, 4],
            [2, 6, 3],
            [3, 6, 7],
            [0, 4, 2],
            [2, 4, 6],
            [1, 3, 5],
            [3, 7, 5],
        ];
        (positions, faces)
    }

    #[test]
    fn tetrahedron_is_a_sphere() {
        let t = tetrahedron();
        assert_eq!(t.euler_characteristic(), 2);
        assert_eq!(t.genus(), Some(0));
        assert_eq!(t.edge_count(), 6);
        assert!(t.signed_volume() > 0.0);
        for v in 0..4 {
            assert_eq!(t.topology().valence(v), 3);
        }
    }

    #[test]
    fn cube_is_valid_and_outward() {
        let (p, f) = cube_faces();
        let cube = TriMesh::build(p, f).unwrap();
        assert_eq!(cube.euler_characteristic(), 2);
        assert!((cube.signed_volume() - 1.0).abs() < 1e-15);
        assert!((cube.total_area() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn open_cube_is_rejected() {
        let (p, mut f) = cube_faces();
        f.truncate(10);
        let err = TriMesh::build(p, f).unwrap_err();
        assert!(err.is_non_manifold(), "{err:?}");
    }

    #[test]
    fn inconsistent_orientation_is_rejected() {
        let (p, mut f) = cube_faces();
        f[0] = [0, 1, 2];
        let err = TriMesh::build(p, f).unwrap_err();
        assert!(matches!(err, MeshError::Unoriented { .. }), "{err:?}");
    }

    #[test]
    fn collinear_face_is_degenerate() {
        let t = tetrahedron();
        let mut p = t.positions().to_vec();
        // Put vertex 3 on the segment between 1 and 2 → faces through it vanish.
        p[0] = 0.5 * (p[1] + p[2]);
        let err = TriMesh::build(p, t.faces().to_vec()).unwrap_err();
        assert!(matches!(err, MeshError::DegenerateFace { .. }), "{err:?}");
    }

    #[test]
    fn bad_index_is_rejected() {
        let t = tetrahedron();
        let mut faces = t.faces().to_vec();
        faces[0][2] = 9;
        assert!(matches!(
            TriMesh::build(t.positions().to_vec(), faces),
            Err(MeshError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn bowtie_vertex_is_rejected() {
        // Two tetrahedra sharing a single vertex.
        let t = tetrahedron();
        let mut p = t.positions().to_vec();
        p.extend(t.positions()[1..].iter().map(|x| -x + 2.0 * t.positions()[0]));
        let mut faces = t.faces().to_vec();
        let map = |i: usize| if i == 0 { 0 } else { i + 3 };
        faces.extend(t.faces().iter().map(|f| [map(f[0]), map(f[2]), map(f[1])]));
        let err = TriMesh::build(p, faces).unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldVertex { .. }), "{err:?}");
    }

    #[test]
    fn flipping_negates_volume() {
        let t = tetrahedron();
        let f = t.flipped();
        assert!((t.signed_volume() + f.signed_volume()).abs() < 1e-15);
        assert_eq!(f.flipped().faces(), t.faces());
    }

    #[test]
    fn rotation_order_visits_each_neighbor_once() {
        let t = tetrahedron();
        let mut n: Vec<usize> = t.topology().neighbors(0).collect();
        n.sort();
        assert_eq!(n, vec![1, 2, 3]);
    }

    #[test]
    fn gauss_bonnet_on_tetrahedron() {
        let t = tetrahedron();
        let total: f64 = t.angle_defects().iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn build_is_deterministic() {
        let t = tetrahedron();
        let a = TriMesh::build(t.positions().to_vec(), t.faces().to_vec()).unwrap();
        let b = TriMesh::build(t.positions().to_vec(), t.faces().to_vec()).unwrap();
        assert_eq!(a.topology(), b.topology());
    }

    #[test]
    fn merged_components_keep_euler_sum() {
        let t = tetrahedron();
        let two = t.merged(&t.translated(Vec3::new(5.0, 0.0, 0.0))).unwrap();
        assert_eq!(two.topology().component_count(), 2);
        assert_eq!(two.euler_characteristic(), 4);
        assert_eq!(two.genus(), None);
    }
}
