use super::TriMesh;

/// Edge-length and angle statistics of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQuality {
    pub min_edge: f64,
    pub mean_edge: f64,
    pub max_edge: f64,
    /// Smallest interior angle in radians.
    pub min_angle: f64,
    /// Aspect ratio is circumradius / (2 · inradius); 1 for equilateral faces.
    pub min_aspect: f64,
    pub mean_aspect: f64,
    pub max_aspect: f64,
}

pub fn mesh_quality(mesh: &TriMesh) -> MeshQuality {
    let p = mesh.positions();
    let (mut min_edge, mut max_edge, mut sum_edge) = (f64::INFINITY, 0.0f64, 0.0);
    for (a, b) in mesh.topology().edge_vertices() {
        let l = (p[a] - p[b]).norm();
        min_edge = min_edge.min(l);
        max_edge = max_edge.max(l);
        sum_edge += l;
    }

    let mut min_angle = f64::INFINITY;
    let (mut min_aspect, mut max_aspect, mut sum_aspect) = (f64::INFINITY, 0.0f64, 0.0);
    for f in 0..mesh.face_count() {
        for a in mesh.face_angles(f) {
            min_angle = min_angle.min(a);
        }
        let [x, y, z] = mesh.face_positions(f);
        let (a, b, c) = ((y - z).norm(), (z - x).norm(), (x - y).norm());
        let area = mesh.face_area(f);
        let s = 0.5 * (a + b + c);
        let inradius = area / s;
        let circumradius = a * b * c / (4.0 * area);
        let aspect = circumradius / (2.0 * inradius);
        min_aspect = min_aspect.min(aspect);
        max_aspect = max_aspect.max(aspect);
        sum_aspect += aspect;
    }

    MeshQuality {
        min_edge,
        mean_edge: sum_edge / mesh.edge_count() as f64,
        max_edge,
        min_angle,
        min_aspect,
        mean_aspect: sum_aspect / mesh.face_count() as f64,
        max_aspect,
    }
}
