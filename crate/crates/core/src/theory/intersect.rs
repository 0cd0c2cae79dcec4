//! Self-intersection test over face pairs that share no vertex, with a
//! bounding-volume hierarchy over face boxes.

use crate::mesh::{TriMesh, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&mut self, other: &Aabb) {
        self.min = self.min.inf(&other.min);
        self.max = self.max.sup(&other.max);
    }

    fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= other.max[k] && other.min[k] <= self.max[k])
    }

    fn extent(&self) -> f64 {
        (self.max - self.min).max()
    }
}

enum Node {
    Leaf { bounds: Aabb, faces: Vec<usize> },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

struct Bvh {
    nodes: Vec<Node>,
}

impl Bvh {
    fn build(boxes: &[Aabb], centroids: &[Vec3]) -> Self {
        let mut bvh = Bvh { nodes: Vec::new() };
        let mut faces: Vec<usize> = (0..boxes.len()).collect();
        bvh.split(boxes, centroids, &mut faces);
        bvh
    }

    /// Median split along the widest centroid axis; returns the node index.
    fn split(&mut self, boxes: &[Aabb], centroids: &[Vec3], faces: &mut [usize]) -> usize {
        let mut bounds = Aabb::empty();
        let mut spread = Aabb::empty();
        for &f in faces.iter() {
            bounds.merge(&boxes[f]);
            spread.grow(&centroids[f]);
        }
        if faces.len() <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                bounds,
                faces: faces.to_vec(),
            });
            return self.nodes.len() - 1;
        }
        let axis = (spread.max - spread.min).imax();
        let mid = faces.len() / 2;
        faces.select_nth_unstable_by(mid, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
        });
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf {
            bounds,
            faces: Vec::new(),
        });
        let (lo, hi) = faces.split_at_mut(mid);
        let left = self.split(boxes, centroids, lo);
        let right = self.split(boxes, centroids, hi);
        self.nodes[slot] = Node::Inner { bounds, left, right };
        slot
    }
}

/// First intersecting pair of faces sharing no vertex, as `(f, g)` with
/// `f < g`, or `None` for an embedded mesh. Pairs sharing a vertex are
/// never tested.
pub fn self_intersect(mesh: &TriMesh) -> Option<(usize, usize)> {
    let nf = mesh.face_count();
    let tris: Vec<[Vec3; 3]> = (0..nf).map(|f| mesh.face_positions(f)).collect();
    let boxes: Vec<Aabb> = tris
        .iter()
        .map(|t| {
            let mut b = Aabb::empty();
            t.iter().for_each(|p| b.grow(p));
            b
        })
        .collect();
    let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
    let bvh = Bvh::build(&boxes, &centroids);
    let faces = mesh.faces();

    let test = |f: usize, g: usize| -> Option<(usize, usize)> {
        if f == g || !boxes[f].overlaps(&boxes[g]) {
            return None;
        }
        if faces[f].iter().any(|v| faces[g].contains(v)) {
            return None;
        }
        triangles_intersect(&tris[f], &tris[g]).then(|| (f.min(g), f.max(g)))
    };

    let mut stack = vec![(0usize, 0usize)];
    let mut best: Option<(usize, usize)> = None;
    while let Some((a, b)) = stack.pop() {
        let (na, nb) = (&bvh.nodes[a], &bvh.nodes[b]);
        if !na.bounds().overlaps(nb.bounds()) {
            continue;
        }
        match (na, nb) {
            (Node::Leaf { faces: fa, .. }, Node::Leaf { faces: fb, .. }) => {
                for (i, &f) in fa.iter().enumerate() {
                    let start = if a == b { i + 1 } else { 0 };
                    for &g in &fb[start..] {
                        if let Some(hit) = test(f, g) {
                            best = Some(best.map_or(hit, |b| b.min(hit)));
                        }
                    }
                }
            }
            _ if a == b => {
                if let Node::Inner { left, right, .. } = *na {
                    stack.push((left, right));
                    stack.push((right, right));
                    stack.push((left, left));
                }
            }
            _ => {
                let split_a = match (na, nb) {
                    (Node::Inner { .. }, Node::Leaf { .. }) => true,
                    (Node::Leaf { .. }, Node::Inner { .. }) => false,
                    _ => na.bounds().extent() >= nb.bounds().extent(),
                };
                if split_a {
                    if let Node::Inner { left, right, .. } = *na {
                        stack.push((right, b));
                        stack.push((left, b));
                    }
                } else if let Node::Inner { left, right, .. } = *nb {
                    stack.push((a, right));
                    stack.push((a, left));
                }
            }
        }
    }
    best
}

fn orient2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_meet_2d(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let (d1, d2) = (orient2(p, q, r), orient2(p, q, s));
    let (d3, d4) = (orient2(r, s, p), orient2(r, s, q));
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0 && (d1 != 0.0 || d2 != 0.0 || d3 != 0.0 || d4 != 0.0)
}

fn point_in_tri_2d(p: [f64; 2], t: &[[f64; 2]; 3]) -> bool {
    let d = [orient2(t[0], t[1], p), orient2(t[1], t[2], p), orient2(t[2], t[0], p)];
    d.iter().all(|&x| x >= 0.0) || d.iter().all(|&x| x <= 0.0)
}

fn coplanar_overlap(a: &[Vec3; 3], b: &[Vec3; 3], normal: &Vec3) -> bool {
    // Project away the dominant normal axis.
    let drop = normal.iamax();
    let (i, j) = match drop {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let pa = a.map(|p| [p[i], p[j]]);
    let pb = b.map(|p| [p[i], p[j]]);
    for k in 0..3 {
        for l in 0..3 {
            if segments_meet_2d(pa[k], pa[(k + 1) % 3], pb[l], pb[(l + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_tri_2d(pa[0], &pb) || point_in_tri_2d(pb[0], &pa)
}

/// Whether the segment crosses the triangle; endpoints touching count.
fn segment_hits_triangle(p: &Vec3, q: &Vec3, t: &[Vec3; 3]) -> bool {
    let d = q - p;
    let (e1, e2) = (t[1] - t[0], t[2] - t[0]);
    let h = d.cross(&e2);
    let det = e1.dot(&h);
    if det == 0.0 {
        return false;
    }
    let s = p - t[0];
    let u = s.dot(&h) / det;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qv = s.cross(&e1);
    let v = d.dot(&qv) / det;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    let w = e2.dot(&qv) / det;
    (0.0..=1.0).contains(&w)
}

/// Triangle–triangle intersection: two non-coplanar triangles meet iff an
/// edge of one crosses the other.
pub fn triangles_intersect(a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    let na = (a[1] - a[0]).cross(&(a[2] - a[0]));
    let side = |p: &Vec3| na.dot(&(p - a[0]));
    let db = b.map(|p| side(&p));
    if db.iter().all(|&d| d > 0.0) || db.iter().all(|&d| d < 0.0) {
        return false;
    }
    if db.iter().all(|&d| d == 0.0) {
        return coplanar_overlap(a, b, &na);
    }
    (0..3).any(|k| segment_hits_triangle(&a[k], &a[(k + 1) % 3], b))
        || (0..3).any(|k| segment_hits_triangle(&b[k], &b[(k + 1) % 3], a))
}
