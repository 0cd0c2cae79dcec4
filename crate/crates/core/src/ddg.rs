//! Discrete differential geometry on closed triangle meshes.
//!
//! Conventions used throughout the crate:
//!
//! * the Laplace–Beltrami operator is the cotangent Laplacian normalized by
//!   mixed Voronoi vertex areas, negative semidefinite;
//! * the mean-curvature vector is `H ν = −½ Δ f`, and the scalar `H` is its
//!   projection on the area-weighted vertex normal, so an outward-oriented
//!   unit sphere has `H = +1`;
//! * Gauss curvature is the angle defect divided by the vertex area, which
//!   makes `Σ K · area = 2πχ` hold to rounding error.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{TriMesh, Vec3};

/// Below this many items the per-element loops run serially.
pub(crate) const PAR_THRESHOLD: usize = 4096;

/// Brute-force diameter up to this many vertices.
pub const DIAMETER_BRUTE_FORCE_LIMIT: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdgError {
    #[error("cotangent weight in face {face} is not finite")]
    DegenerateCotan { face: usize },
    #[error("vertex normal at {vertex} vanishes")]
    DegenerateNormal { vertex: usize },
    #[error("field has {got} entries for {expected} vertices")]
    FieldLength { expected: usize, got: usize },
}

/// Maps `0..n` through `f`, in parallel for large `n`. Output order is the
/// index order either way.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Per-face quantities every operator is assembled from.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FaceGeometry {
    pub vertices: [usize; 3],
    pub points: [Vec3; 3],
    /// Cotangent of the interior angle at each corner.
    pub cot: [f64; 3],
    /// `(p1 − p0) × (p2 − p0)`, twice the oriented area vector.
    pub cross: Vec3,
    pub area: f64,
    /// Corner with an angle above π/2, if any.
    pub obtuse: Option<usize>,
}

impl FaceGeometry {
    pub fn new(mesh: &TriMesh, face: usize) -> Result<Self, DdgError> {
        let vertices = mesh.faces()[face];
        let points = vertices.map(|i| mesh.positions()[i]);
        let cross = (points[1] - points[0]).cross(&(points[2] - points[0]));
        let double_area = cross.norm();
        let mut cot = [0.0; 3];
        let mut obtuse = None;
        for k in 0..3 {
            let u = points[(k + 1) % 3] - points[k];
            let w = points[(k + 2) % 3] - points[k];
            let d = u.dot(&w);
            cot[k] = d / double_area;
            if d < 0.0 {
                obtuse = Some(k);
            }
        }
        if !cot.iter().all(|c| c.is_finite()) || double_area == 0.0 {
            return Err(DdgError::DegenerateCotan { face });
        }
        Ok(FaceGeometry {
            vertices,
            points,
            cot,
            cross,
            area: 0.5 * double_area,
            obtuse,
        })
    }

    /// Squared length of the edge opposite corner `k`.
    pub fn opposite_edge_sq(&self, k: usize) -> f64 {
        (self.points[(k + 2) % 3] - self.points[(k + 1) % 3]).norm_squared()
    }

    /// Mixed Voronoi area this face contributes to each of its corners.
    pub fn mixed_areas(&self) -> [f64; 3] {
        match self.obtuse {
            Some(o) => std::array::from_fn(|k| if k == o { 0.5 * self.area } else { 0.25 * self.area }),
            None => std::array::from_fn(|k| {
                // Edges k–(k+1) and k–(k+2) are opposite corners k+2 and k+1.
                let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                (self.opposite_edge_sq(l) * self.cot[l] + self.opposite_edge_sq(j) * self.cot[j]) / 8.0
            }),
        }
    }
}

pub(crate) fn face_geometries(mesh: &TriMesh) -> Result<Vec<FaceGeometry>, DdgError> {
    map_indexed(mesh.face_count(), |f| FaceGeometry::new(mesh, f))
        .into_iter()
        .collect()
}

/// Vertex areas, `Σ_j w_ij (x_j − x_i)` and unnormalized vertex normals.
pub(crate) struct VertexAccumulation {
    pub area: Vec<f64>,
    pub laplace_x: Vec<Vec3>,
    pub normal_sum: Vec<Vec3>,
}

pub(crate) fn accumulate(mesh: &TriMesh, faces: &[FaceGeometry]) -> VertexAccumulation {
    let n = mesh.vertex_count();
    let mut area = vec![0.0; n];
    let mut laplace_x = vec![Vec3::zeros(); n];
    let mut normal_sum = vec![Vec3::zeros(); n];
    for fg in faces {
        let mixed = fg.mixed_areas();
        for k in 0..3 {
            let v = fg.vertices[k];
            area[v] += mixed[k];
            normal_sum[v] += fg.cross;
            // Edge (k+1, k+2) is opposite corner k.
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let w = 0.5 * fg.cot[k];
            let e = fg.points[j] - fg.points[i];
            laplace_x[fg.vertices[i]] += w * e;
            laplace_x[fg.vertices[j]] -= w * e;
        }
    }
    VertexAccumulation {
        area,
        laplace_x,
        normal_sum,
    }
}

/// Pointwise curvature fields and global measures of one mesh snapshot.
#[derive(Debug, Clone)]
pub struct GeometryReport {
    /// Mixed Voronoi area per vertex (the discrete surface measure).
    pub vertex_area: Vec<f64>,
    /// Unit area-weighted vertex normal.
    pub normal: Vec<Vec3>,
    pub mean_curv: Vec<f64>,
    pub gauss_curv: Vec<f64>,
    /// `|A⁰|² = 2 (H² − K)` per vertex.
    pub tracefree_sq: Vec<f64>,
    pub area: f64,
    pub signed_volume: f64,
    pub diameter: f64,
    pub euler_characteristic: i64,
}

impl GeometryReport {
    pub fn vertex_count(&self) -> usize {
        self.vertex_area.len()
    }

    /// `|A|² = 4H² − 2K`, clamped at zero.
    pub fn second_fundamental_sq(&self, v: usize) -> f64 {
        (4.0 * self.mean_curv[v].powi(2) - 2.0 * self.gauss_curv[v]).max(0.0)
    }

    /// Vertex with the largest `|A|` and that value.
    pub fn max_curvature(&self) -> (usize, f64) {
        let (v, sq) = (0..self.vertex_count())
            .map(|v| (v, self.second_fundamental_sq(v)))
            .fold(
                (0, f64::NEG_INFINITY),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        (v, sq.sqrt())
    }

    pub fn max_abs_mean_curv(&self) -> f64 {
        self.mean_curv.iter().fold(0.0f64, |m, h| m.max(h.abs()))
    }

    pub fn max_tracefree_sq(&self) -> f64 {
        self.tracefree_sq.iter().fold(f64::NEG_INFINITY, |m, &a| m.max(a))
    }

    /// `Σ K · area`.
    pub fn total_gauss_curvature(&self) -> f64 {
        self.gauss_curv.iter().zip(&self.vertex_area).map(|(k, a)| k * a).sum()
    }
}

pub fn geometry_report(mesh: &TriMesh) -> Result<GeometryReport, DdgError> {
    let mut report = local_geometry_report(mesh)?;
    report.diameter = diameter(mesh);
    Ok(report)
}

/// [`geometry_report`] without the diameter, which is left as NaN. This
/// skips the only quadratic-cost quantity.
pub fn local_geometry_report(mesh: &TriMesh) -> Result<GeometryReport, DdgError> {
    let faces = face_geometries(mesh)?;
    let acc = accumulate(mesh, &faces);
    let defects = mesh.angle_defects();
    let n = mesh.vertex_count();

    let mut normal = Vec::with_capacity(n);
    for (v, ns) in acc.normal_sum.iter().enumerate() {
        let len = ns.norm();
        if !(len > 0.0) {
            return Err(DdgError::DegenerateNormal { vertex: v });
        }
        normal.push(ns / len);
    }
    let mean_curv: Vec<f64> = (0..n)
        .map(|v| -acc.laplace_x[v].dot(&normal[v]) / (2.0 * acc.area[v]))
        .collect();
    let gauss_curv: Vec<f64> = (0..n).map(|v| defects[v] / acc.area[v]).collect();
    let tracefree_sq = (0..n).map(|v| 2.0 * (mean_curv[v].powi(2) - gauss_curv[v])).collect();
    let area = faces.iter().map(|f| f.area).sum();

    Ok(GeometryReport {
        vertex_area: acc.area,
        normal,
        mean_curv,
        gauss_curv,
        tracefree_sq,
        area,
        signed_volume: mesh.signed_volume(),
        diameter: f64::NAN,
        euler_characteristic: mesh.euler_characteristic(),
    })
}

/// Unit area-weighted vertex normals.
pub fn vertex_normals(mesh: &TriMesh) -> Result<Vec<Vec3>, DdgError> {
    let mut sums = vec![Vec3::zeros(); mesh.vertex_count()];
    for f in 0..mesh.face_count() {
        let c = mesh.face_cross(f);
        for &v in &mesh.faces()[f] {
            sums[v] += c;
        }
    }
    sums.into_iter()
        .enumerate()
        .map(|(v, s)| {
            let len = s.norm();
            if len > 0.0 {
                Ok(s / len)
            } else {
                Err(DdgError::DegenerateNormal { vertex: v })
            }
        })
        .collect()
}

/// Mass-normalized cotangent Laplacian `(Δu)_i = (1/A_i) Σ_j w_ij (u_j − u_i)`.
pub fn cotan_laplacian_apply(mesh: &TriMesh, field: &[f64]) -> Result<Vec<f64>, DdgError> {
    if field.len() != mesh.vertex_count() {
        return Err(DdgError::FieldLength {
            expected: mesh.vertex_count(),
            got: field.len(),
        });
    }
    let faces = face_geometries(mesh)?;
    let mut area = vec![0.0; field.len()];
    let mut out = vec![0.0; field.len()];
    for fg in &faces {
        let mixed = fg.mixed_areas();
        for k in 0..3 {
            area[fg.vertices[k]] += mixed[k];
            let (i, j) = (fg.vertices[(k + 1) % 3], fg.vertices[(k + 2) % 3]);
            let w = 0.5 * fg.cot[k];
            let d = field[j] - field[i];
            out[i] += w * d;
            out[j] -= w * d;
        }
    }
    for (o, a) in out.iter_mut().zip(&area) {
        *o /= a;
    }
    Ok(out)
}

/// `Σ H² · area`.
pub fn willmore_energy(report: &GeometryReport) -> f64 {
    report
        .mean_curv
        .iter()
        .zip(&report.vertex_area)
        .map(|(h, a)| h * h * a)
        .sum()
}

/// `∫ |A⁰|² = Σ 2 (H² − K) · area`.
pub fn tracefree_energy(report: &GeometryReport) -> f64 {
    report
        .tracefree_sq
        .iter()
        .zip(&report.vertex_area)
        .map(|(t, a)| t * a)
        .sum()
}

/// Checks `W ≥ 4π − tol`; returned alongside every Willmore evaluation
/// in reports.
pub fn willmore_floor_holds(willmore: f64, tol: f64) -> bool {
    willmore >= 4.0 * PI - tol
}

/// Largest Euclidean distance between two vertices.
pub fn diameter(mesh: &TriMesh) -> f64 {
    let p = mesh.positions();
    if p.len() <= DIAMETER_BRUTE_FORCE_LIMIT {
        brute_force_diameter_sq(p).sqrt()
    } else {
        pruned_diameter_sq(p).sqrt()
    }
}

fn brute_force_diameter_sq(p: &[Vec3]) -> f64 {
    // Coordinate arrays and independent lanes let the inner loop vectorize.
    const LANES: usize = 8;
    let xs: Vec<f64> = p.iter().map(|q| q.x).collect();
    let ys: Vec<f64> = p.iter().map(|q| q.y).collect();
    let zs: Vec<f64> = p.iter().map(|q| q.z).collect();
    let mut lanes = [0.0f64; LANES];
    for i in 0..p.len() {
        let (x, y, z) = (xs[i], ys[i], zs[i]);
        let (tx, ty, tz) = (&xs[i + 1..], &ys[i + 1..], &zs[i + 1..]);
        let full = tx.len() / LANES * LANES;
        for c in (0..full).step_by(LANES) {
            for l in 0..LANES {
                let d = (tx[c + l] - x).powi(2) + (ty[c + l] - y).powi(2) + (tz[c + l] - z).powi(2);
                lanes[l] = if d > lanes[l] { d } else { lanes[l] };
            }
        }
        for j in full..tx.len() {
            let d = (tx[j] - x).powi(2) + (ty[j] - y).powi(2) + (tz[j] - z).powi(2);
            lanes[0] = lanes[0].max(d);
        }
    }
    lanes.into_iter().fold(0.0, f64::max)
}

const DIAMETER_LEAF: usize = 8;

struct BoxNode {
    min: Vec3,
    max: Vec3,
    range: (usize, usize),
    children: Option<(usize, usize)>,
}

fn build_boxes(p: &[Vec3], idx: &mut [usize], offset: usize, nodes: &mut Vec<BoxNode>) -> usize {
    let mut min = Vec3::repeat(f64::INFINITY);
    let mut max = Vec3::repeat(f64::NEG_INFINITY);
    for &i in idx.iter() {
        min = min.inf(&p[i]);
        max = max.sup(&p[i]);
    }
    let slot = nodes.len();
    nodes.push(BoxNode {
        min,
        max,
        range: (offset, offset + idx.len()),
        children: None,
    });
    if idx.len() > DIAMETER_LEAF {
        let axis = (max - min).imax();
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| p[a][axis].total_cmp(&p[b][axis]).then(a.cmp(&b)));
        let (lo, hi) = idx.split_at_mut(mid);
        let l = build_boxes(p, lo, offset, nodes);
        let r = build_boxes(p, hi, offset + mid, nodes);
        nodes[slot].children = Some((l, r));
    }
    slot
}

fn box_max_dist_sq(node: &BoxNode, x: &Vec3) -> f64 {
    (0..3)
        .map(|k| (x[k] - node.min[k]).abs().max((node.max[k] - x[k]).abs()).powi(2))
        .sum()
}

/// Exact farthest pair: a farthest-point query per vertex over a box tree,
/// pruned by the best distance so far, seeded with a double sweep.
fn pruned_diameter_sq(p: &[Vec3]) -> f64 {
    let farthest = |x: &Vec3| {
        p.iter()
            .enumerate()
            .map(|(i, q)| ((q - x).norm_squared(), i))
            .fold((0.0f64, 0), |m, c| if c.0 > m.0 { c } else { m })
    };
    let (_, a) = farthest(&p[0]);
    let (mut best, _) = farthest(&p[a]);

    let mut idx: Vec<usize> = (0..p.len()).collect();
    let mut nodes = Vec::new();
    build_boxes(p, &mut idx, 0, &mut nodes);
    let mut stack = Vec::new();
    for x in p {
        stack.push(0usize);
        while let Some(n) = stack.pop() {
            let node = &nodes[n];
            if box_max_dist_sq(node, x) <= best {
                continue;
            }
            match node.children {
                Some((l, r)) => stack.extend([l, r]),
                None => {
                    for &j in &idx[node.range.0..node.range.1] {
                        best = best.max((x - p[j]).norm_squared());
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{ellipsoid, icosphere, torus};

    /// Flat square grid glued to a reversed copy of itself along the
    /// boundary: a closed mesh whose interior vertices sit on a plane.
    pub(crate) fn double_covered_square(n: usize) -> TriMesh {
        let idx = |i: usize, j: usize| i * (n + 1) + j;
        let mut positions: Vec<Vec3> = (0..=n)
            .flat_map(|i| (0..=n).map(move |j| Vec3::new(j as f64 / n as f64, i as f64 / n as f64, 0.0)))
            .collect();
        let on_boundary = |i: usize, j: usize| i == 0 || j == 0 || i == n || j == n;
        // Back sheet duplicates interior vertices only.
        let mut back = vec![usize::MAX; (n + 1) * (n + 1)];
        for i in 0..=n {
            for j in 0..=n {
                back[idx(i, j)] = if on_boundary(i, j) {
                    idx(i, j)
                } else {
                    positions.push(positions[idx(i, j)]);
                    positions.len() - 1
                };
            }
        }
        let mut faces = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (a, b, c, d) = (idx(i, j), idx(i, j + 1), idx(i + 1, j + 1), idx(i + 1, j));
                // Split along b–d in the two corners where a–c would join
                // boundary vertices and be shared by both sheets.
                let tris = if on_boundary(i, j) && on_boundary(i + 1, j + 1) {
                    [[a, b, d], [b, c, d]]
                } else {
                    [[a, b, c], [a, c, d]]
                };
                for [x, y, z] in tris {
                    faces.push([x, y, z]);
                    faces.push([back[x], back[z], back[y]]);
                }
            }
        }
        TriMesh::build(positions, faces).unwrap()
    }

    #[test]
    fn linear_field_is_harmonic_on_flat_interior() {
        let n = 6;
        let m = double_covered_square(n);
        let x: Vec<f64> = m.positions().iter().map(|p| p.x).collect();
        let lap = cotan_laplacian_apply(&m, &x).unwrap();
        for i in 1..n {
            for j in 1..n {
                assert!(lap[i * (n + 1) + j].abs() < 1e-10);
            }
        }
        for v in (n + 1) * (n + 1)..m.vertex_count() {
            assert!(lap[v].abs() < 1e-10);
        }
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let m = icosphere(1.0, Vec3::zeros(), 2);
        let lap = cotan_laplacian_apply(&m, &vec![3.5; m.vertex_count()]).unwrap();
        assert!(lap.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn laplacian_rejects_wrong_length() {
        let m = icosphere(1.0, Vec3::zeros(), 0);
        assert!(matches!(
            cotan_laplacian_apply(&m, &[1.0]),
            Err(DdgError::FieldLength { .. })
        ));
    }

    #[test]
    fn degenerate_face_is_reported() {
        let m = icosphere(1.0, Vec3::zeros(), 1);
        let mut p = m.positions().to_vec();
        let [a, _, c] = m.faces()[0];
        p[c] = p[a];
        let bad = m.with_positions(p).unwrap();
        assert!(matches!(
            geometry_report(&bad),
            Err(DdgError::DegenerateCotan { face: 0 })
        ));
    }

    #[test]
    fn gauss_bonnet_and_tracefree_identity() {
        for m in [icosphere(1.0, Vec3::zeros(), 3), torus(2.0, 1.0, 32, 16).unwrap()] {
            let r = geometry_report(&m).unwrap();
            let chi = m.euler_characteristic() as f64;
            assert!((r.total_gauss_curvature() - 2.0 * PI * chi).abs() < 1e-9);
            let w = willmore_energy(&r);
            let t = tracefree_energy(&r);
            assert!((t - (2.0 * w - 4.0 * PI * chi)).abs() <= 1e-9 * w);
            let sum: f64 = r.vertex_area.iter().sum();
            assert!((sum - r.area).abs() <= 1e-9 * r.area);
            assert!(r.vertex_area.iter().all(|&a| a > 0.0));
        }
    }

    #[test]
    fn unit_sphere_values_and_orientation_reversal() {
        let m = icosphere(1.0, Vec3::zeros(), 4);
        let r = geometry_report(&m).unwrap();
        assert!((r.area / (4.0 * PI) - 1.0).abs() < 0.01);
        assert!((r.signed_volume / (4.0 * PI / 3.0) - 1.0).abs() < 0.01);
        assert!((r.diameter - 2.0).abs() < 1e-9);
        for v in 0..m.vertex_count() {
            assert!((r.mean_curv[v] - 1.0).abs() < 0.01, "H = {}", r.mean_curv[v]);
            assert!((r.gauss_curv[v] - 1.0).abs() < 0.02, "K = {}", r.gauss_curv[v]);
        }
        assert!((willmore_energy(&r) / (4.0 * PI) - 1.0).abs() < 0.01);

        let f = geometry_report(&m.flipped()).unwrap();
        assert!((f.signed_volume + r.signed_volume).abs() < 1e-12);
        assert!((f.area - r.area).abs() < 1e-12);
        for v in 0..m.vertex_count() {
            assert!((f.mean_curv[v] + r.mean_curv[v]).abs() < 1e-12);
        }
    }

    #[test]
    fn pruned_diameter_matches_brute_force() {
        let shapes = [
            torus(3.0, 1.2, 24, 12).unwrap().translated(Vec3::new(0.3, -2.0, 1.0)),
            icosphere(1.0, Vec3::zeros(), 3),
            ellipsoid(2.0, 1.0, 0.5, 2).unwrap(),
        ];
        for m in &shapes {
            let p = m.positions();
            assert_eq!(pruned_diameter_sq(p), brute_force_diameter_sq(p));
        }
    }

    #[test]
    fn diameter_is_translation_invariant_and_homogeneous() {
        let m = icosphere(1.0, Vec3::zeros(), 2);
        let d = diameter(&m);
        assert!((diameter(&m.translated(Vec3::new(10.0, -3.0, 2.0))) - d).abs() < 1e-12 * d);
        assert!((diameter(&m.scaled(3.0)) - 3.0 * d).abs() < 1e-14 * d);
    }
}
