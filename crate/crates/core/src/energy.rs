//! The energy `E = W + λ₁ Area + λ₂ Vol` of a mesh and its gradients.
//!
//! [`discrete_gradient`] differentiates the discrete energy exactly: a
//! forward pass assembles the per-vertex quantities of [`crate::ddg`], and a
//! reverse pass pushes adjoints back through vertex normals, cotangent
//! weights, mixed areas, face areas and cone volumes. The flow runs on this
//! gradient so that the energy decays up to time-stepping error only.

use rayon::prelude::*;
use thiserror::Error;

use crate::ddg::{self, DdgError, FaceGeometry, PAR_THRESHOLD};
use crate::mesh::{TriMesh, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error(transparent)]
    Geometry(#[from] DdgError),
    #[error("spontaneous curvature must be zero here, got {0}")]
    SpontaneousCurvature(f64),
}

/// Coefficients of the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Spontaneous curvature; only the analytic evaluator accepts nonzero
    /// values.
    pub h0: f64,
}

impl FlowParams {
    pub fn new(lambda1: f64, lambda2: f64) -> Self {
        FlowParams {
            lambda1,
            lambda2,
            h0: 0.0,
        }
    }

    fn require_flat(&self) -> Result<(), EnergyError> {
        if self.h0 != 0.0 {
            return Err(EnergyError::SpontaneousCurvature(self.h0));
        }
        Ok(())
    }
}

/// The three summands of the energy, evaluated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub willmore: f64,
    pub area: f64,
    pub volume: f64,
}

impl EnergyParts {
    pub fn total(&self, params: &FlowParams) -> f64 {
        self.willmore + params.lambda1 * self.area + params.lambda2 * self.volume
    }
}

/// An L²(μ) gradient: per-vertex vectors together with the vertex measure
/// that defines the norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub vectors: Vec<Vec3>,
    pub vertex_area: Vec<f64>,
    /// `Σ |g_v|² A_v`.
    pub norm_sq: f64,
}

impl GradientField {
    fn new(vectors: Vec<Vec3>, vertex_area: Vec<f64>) -> Self {
        let norm_sq = vectors
            .iter()
            .zip(&vertex_area)
            .map(|(g, a)| g.norm_squared() * a)
            .sum();
        GradientField {
            vectors,
            vertex_area,
            norm_sq,
        }
    }

    /// `Σ g_v · u_v A_v`, the L²(μ) pairing with a vector field.
    pub fn pair(&self, field: &[Vec3]) -> f64 {
        self.vectors
            .iter()
            .zip(field)
            .zip(&self.vertex_area)
            .map(|((g, u), a)| g.dot(u) * a)
            .sum()
    }

    /// `Σ g_v A_v`; zero for translation-invariant energies.
    pub fn net_force(&self) -> Vec3 {
        self.vectors.iter().zip(&self.vertex_area).map(|(g, a)| g * *a).sum()
    }

    /// The field `(g_v · n_v) n_v`.
    pub fn normal_projection(&self, normals: &[Vec3]) -> GradientField {
        let vectors = self.vectors.iter().zip(normals).map(|(g, n)| g.dot(n) * n).collect();
        GradientField::new(vectors, self.vertex_area.clone())
    }

    /// Share of `‖g‖²` carried by the normal components.
    pub fn normal_fraction(&self, normals: &[Vec3]) -> f64 {
        if self.norm_sq == 0.0 {
            return 1.0;
        }
        let normal: f64 = self
            .vectors
            .iter()
            .zip(normals)
            .zip(&self.vertex_area)
            .map(|((g, n), a)| g.dot(n).powi(2) * a)
            .sum();
        normal / self.norm_sq
    }

    /// L²(μ) distance to another field on the same mesh, relative to the
    /// norm of `other`.
    pub fn relative_distance(&self, other: &GradientField) -> f64 {
        let diff: f64 = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .zip(&self.vertex_area)
            .map(|((a, b), m)| (a - b).norm_squared() * m)
            .sum();
        (diff / other.norm_sq).sqrt()
    }
}

pub fn total_energy(mesh: &TriMesh, params: &FlowParams) -> Result<f64, EnergyError> {
    params.require_flat()?;
    Ok(energy_parts(mesh)?.total(params))
}

/// Willmore energy, area and volume without the per-vertex report.
pub fn energy_parts(mesh: &TriMesh) -> Result<EnergyParts, DdgError> {
    Ok(Forward::new(mesh)?.parts(mesh))
}

/// Per-vertex state of the forward pass.
struct Forward {
    faces: Vec<FaceGeometry>,
    area: Vec<f64>,
    laplace_x: Vec<Vec3>,
    normal_sum: Vec<Vec3>,
    normal_len: Vec<f64>,
    /// `q_v = (Σ w (x_j − x_i)) · n_v`, so that `H_v = −q_v / (2 A_v)`.
    q: Vec<f64>,
}

impl Forward {
    fn new(mesh: &TriMesh) -> Result<Self, DdgError> {
        let faces = ddg::face_geometries(mesh)?;
        let acc = ddg::accumulate(mesh, &faces);
        let mut normal_len = Vec::with_capacity(acc.area.len());
        let mut q = Vec::with_capacity(acc.area.len());
        for (v, (ns, lx)) in acc.normal_sum.iter().zip(&acc.laplace_x).enumerate() {
            let len = ns.norm();
            if !(len > 0.0) {
                return Err(DdgError::DegenerateNormal { vertex: v });
            }
            normal_len.push(len);
            q.push(lx.dot(ns) / len);
        }
        Ok(Forward {
            faces,
            area: acc.area,
            laplace_x: acc.laplace_x,
            normal_sum: acc.normal_sum,
            normal_len,
            q,
        })
    }

    fn parts(&self, mesh: &TriMesh) -> EnergyParts {
        let willmore = self.q.iter().zip(&self.area).map(|(q, a)| q * q / (4.0 * a)).sum();
        EnergyParts {
            willmore,
            area: self.faces.iter().map(|f| f.area).sum(),
            volume: mesh.signed_volume(),
        }
    }
}

/// Adjoints of the per-vertex intermediates.
struct VertexAdjoint {
    laplace_x: Vec3,
    normal_sum: Vec3,
    area: f64,
}

/// Euclidean derivative of the energy with respect to the three corners
/// of one face, given the vertex adjoints.
fn face_backprop(fg: &FaceGeometry, adj: [&VertexAdjoint; 3], params: &FlowParams) -> [Vec3; 3] {
    let p = fg.points;
    let c = fg.cross;
    let c_len = 2.0 * fg.area;
    let mut grad = [Vec3::zeros(); 3];
    let mut cross_bar = adj[0].normal_sum + adj[1].normal_sum + adj[2].normal_sum;
    let mut area_bar = params.lambda1;
    let mut cot_bar = [0.0; 3];
    let mut len_sq_bar = [0.0; 3];

    // Cotangent Laplacian of positions: corner k weights the opposite edge.
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let e = p[j] - p[i];
        let diff = adj[i].laplace_x - adj[j].laplace_x;
        cot_bar[k] += 0.5 * diff.dot(&e);
        let e_bar = 0.5 * fg.cot[k] * diff;
        grad[j] += e_bar;
        grad[i] -= e_bar;
    }

    match fg.obtuse {
        Some(o) => {
            for k in 0..3 {
                area_bar += adj[k].area * if k == o { 0.5 } else { 0.25 };
            }
        }
        None => {
            for m in 0..3 {
                let weight = (adj[(m + 1) % 3].area + adj[(m + 2) % 3].area) / 8.0;
                cot_bar[m] += weight * fg.opposite_edge_sq(m);
                len_sq_bar[m] += weight * fg.cot[m];
            }
        }
    }

    // cot_k = d_k / |c| with d_k = u_k · w_k.
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let (u, w) = (p[i] - p[k], p[j] - p[k]);
        let d_bar = cot_bar[k] / c_len;
        grad[i] += d_bar * w;
        grad[j] += d_bar * u;
        grad[k] -= d_bar * (u + w);
        cross_bar -= cot_bar[k] * fg.cot[k] / (c_len * c_len) * c;

        let e = p[j] - p[i];
        grad[j] += 2.0 * len_sq_bar[k] * e;
        grad[i] -= 2.0 * len_sq_bar[k] * e;
    }

    cross_bar += area_bar * c / (2.0 * c_len);
    let (e1, e2) = (p[1] - p[0], p[2] - p[0]);
    let g1 = e2.cross(&cross_bar);
    let g2 = cross_bar.cross(&e1);
    grad[1] += g1;
    grad[2] += g2;
    grad[0] -= g1 + g2;

    let l2 = params.lambda2 / 6.0;
    grad[0] += l2 * p[1].cross(&p[2]);
    grad[1] += l2 * p[2].cross(&p[0]);
    grad[2] += l2 * p[0].cross(&p[1]);
    grad
}

/// Energy parts and the exact L²(μ) gradient of the discrete energy in one
/// forward/reverse sweep.
pub fn energy_and_gradient(mesh: &TriMesh, params: &FlowParams) -> Result<(EnergyParts, GradientField), EnergyError> {
    params.require_flat()?;
    let fwd = Forward::new(mesh)?;
    let parts = fwd.parts(mesh);
    let n = mesh.vertex_count();

    let adjoint = |v: usize| {
        let (a, q, len) = (fwd.area[v], fwd.q[v], fwd.normal_len[v]);
        let nv = fwd.normal_sum[v] / len;
        let q_bar = q / (2.0 * a);
        let lx = fwd.laplace_x[v];
        VertexAdjoint {
            laplace_x: q_bar * nv,
            normal_sum: q_bar * (lx - lx.dot(&nv) * nv) / len,
            area: -q * q / (4.0 * a * a),
        }
    };
    let adj: Vec<VertexAdjoint> = ddg::map_indexed(n, adjoint);

    let backprop = |fg: &FaceGeometry| {
        let [a, b, c] = fg.vertices;
        face_backprop(fg, [&adj[a], &adj[b], &adj[c]], params)
    };
    let per_face: Vec<[Vec3; 3]> = if fwd.faces.len() >= PAR_THRESHOLD {
        fwd.faces.par_iter().map(backprop).collect()
    } else {
        fwd.faces.iter().map(backprop).collect()
    };

    // Serial scatter keeps the summation order fixed.
    let mut derivative = vec![Vec3::zeros(); n];
    for (fg, g) in fwd.faces.iter().zip(&per_face) {
        for k in 0..3 {
            derivative[fg.vertices[k]] += g[k];
        }
    }
    let vectors = derivative.iter().zip(&fwd.area).map(|(d, a)| d / *a).collect();
    Ok((parts, GradientField::new(vectors, fwd.area)))
}

/// Exact L²(μ) gradient of the discrete energy: the vertex derivative of
/// [`total_energy`] divided by the vertex area.
pub fn discrete_gradient(mesh: &TriMesh, params: &FlowParams) -> Result<GradientField, EnergyError> {
    energy_and_gradient(mesh, params).map(|(_, g)| g)
}

/// Which printed form of the analytic gradient to evaluate. The bracket
/// `B = ΔH + 2(H + H₀)(H² − H₀H − K) − a λ₁ H + s λ₂` is returned as the
/// field `−B ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HelfrichConvention {
    /// `a = 1`, `s = −1`, as in the first-variation formula.
    FirstVariation,
    /// `a = 1`, `s = +1`, as in the flow equation.
    FlowEquation,
    /// `a = 2`, `s = −1`: the form that agrees with the derivative of the
    /// energy under the crate's orientation convention.
    Variational,
}

impl HelfrichConvention {
    pub fn coefficients(self) -> (f64, f64) {
        match self {
            HelfrichConvention::FirstVariation => (1.0, -1.0),
            HelfrichConvention::FlowEquation => (1.0, 1.0),
            HelfrichConvention::Variational => (2.0, -1.0),
        }
    }
}

/// Pointwise analytic gradient and the bracket `B` per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct HelfrichField {
    pub gradient: GradientField,
    pub bracket: Vec<f64>,
}

pub fn evaluate_helfrich_gradient(
    mesh: &TriMesh,
    params: &FlowParams,
    convention: HelfrichConvention,
) -> Result<HelfrichField, EnergyError> {
    let report = ddg::geometry_report(mesh)?;
    let lap_h = ddg::cotan_laplacian_apply(mesh, &report.mean_curv)?;
    let (a, s) = convention.coefficients();
    let h0 = params.h0;
    let bracket: Vec<f64> = (0..mesh.vertex_count())
        .map(|v| {
            let (h, k) = (report.mean_curv[v], report.gauss_curv[v]);
            lap_h[v] + 2.0 * (h + h0) * (h * h - h0 * h - k) - a * params.lambda1 * h + s * params.lambda2
        })
        .collect();
    let vectors = bracket.iter().zip(&report.normal).map(|(b, n)| -b * n).collect();
    Ok(HelfrichField {
        gradient: GradientField::new(vectors, report.vertex_area),
        bracket,
    })
}

/// Both sides of `∫ grad · (f − p) dμ = 2 λ₁ Area + 3 λ₂ Vol`.
pub fn scaling_derivative_check(mesh: &TriMesh, params: &FlowParams, center: Vec3) -> Result<(f64, f64), EnergyError> {
    let (parts, grad) = energy_and_gradient(mesh, params)?;
    let offsets: Vec<Vec3> = mesh.positions().iter().map(|x| x - center).collect();
    let lhs = grad.pair(&offsets);
    let rhs = 2.0 * params.lambda1 * parts.area + 3.0 * params.lambda2 * parts.volume;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddg::{geometry_report, willmore_energy};
    use crate::shapes::{ellipsoid, icosphere, torus};
    use std::f64::consts::PI;

    fn fd_directional(mesh: &TriMesh, params: &FlowParams, dir: &[Vec3], h: f64) -> f64 {
        let shift = |s: f64| {
            let pos = mesh.positions().iter().zip(dir).map(|(x, u)| x + s * u).collect();
            total_energy(&mesh.with_positions(pos).unwrap(), params).unwrap()
        };
        (shift(h) - shift(-h)) / (2.0 * h)
    }

    fn wobble(n: usize, seed: u64) -> Vec<Vec3> {
        (0..n)
            .map(|i| {
                let t = (i as f64 + 1.0) * (seed as f64 + 0.618);
                Vec3::new((1.3 * t).sin(), (2.9 * t).cos(), (0.7 * t).sin() * (1.1 * t).cos())
            })
            .collect()
    }

    #[test]
    fn energy_matches_report() {
        let m = ellipsoid(1.5, 1.0, 0.8, 2).unwrap();
        let r = geometry_report(&m).unwrap();
        let parts = energy_parts(&m).unwrap();
        assert!((parts.willmore - willmore_energy(&r)).abs() < 1e-12 * parts.willmore);
        assert!((parts.area - r.area).abs() < 1e-12 * r.area);
        let p = FlowParams::new(0.0, 0.0);
        assert_eq!(total_energy(&m, &p).unwrap(), parts.willmore);
    }

    #[test]
    fn sphere_energies() {
        let m = icosphere(1.0, Vec3::zeros(), 4);
        let e = total_energy(&m, &FlowParams::new(1.0, 0.0)).unwrap();
        assert!((e / (8.0 * PI) - 1.0).abs() < 0.01);
        let e = total_energy(&m, &FlowParams::new(1.0, 1.0)).unwrap();
        assert!((e / (8.0 * PI + 4.0 * PI / 3.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn spontaneous_curvature_is_rejected_by_the_flow_energy() {
        let m = icosphere(1.0, Vec3::zeros(), 1);
        let p = FlowParams {
            h0: 0.5,
            ..FlowParams::new(1.0, 0.0)
        };
        assert!(matches!(
            total_energy(&m, &p),
            Err(EnergyError::SpontaneousCurvature(_))
        ));
        assert!(evaluate_helfrich_gradient(&m, &p, HelfrichConvention::Variational).is_ok());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let meshes = [ellipsoid(1.4, 1.0, 0.7, 1).unwrap(), torus(2.0, 0.8, 12, 8).unwrap()];
        for m in &meshes {
            for (l1, l2) in [(0.0, 0.0), (1.0, -2.0), (2.0, 1.0)] {
                let p = FlowParams::new(l1, l2);
                let g = discrete_gradient(m, &p).unwrap();
                for seed in 0..3 {
                    let dir = wobble(m.vertex_count(), seed);
                    let fd = fd_directional(m, &p, &dir, 1e-6);
                    let an = g.pair(&dir);
                    assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{fd} vs {an}");
                }
            }
        }
    }

    #[test]
    fn gradient_is_translation_invariant() {
        let m = ellipsoid(1.2, 1.0, 0.9, 2).unwrap();
        let p = FlowParams::new(1.0, 1.0);
        let g = discrete_gradient(&m, &p).unwrap();
        let t = discrete_gradient(&m.translated(Vec3::new(3.0, -1.0, 2.0)), &p).unwrap();
        for (a, b) in g.vectors.iter().zip(&t.vectors) {
            assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
        }
        assert!(g.net_force().norm() < 1e-8 * g.norm_sq.sqrt().max(1.0));
    }

    #[test]
    fn scaling_identity_holds_for_any_center() {
        let m = ellipsoid(1.3, 1.0, 0.8, 2).unwrap();
        let p = FlowParams::new(1.0, -2.0);
        for c in [Vec3::zeros(), Vec3::new(5.0, -2.0, 1.0)] {
            let (lhs, rhs) = scaling_derivative_check(&m, &p, c).unwrap();
            assert!((lhs - rhs).abs() < 1e-8 * rhs.abs());
        }
    }

    #[test]
    fn sphere_analytic_bracket_is_minus_lambda1_h() {
        let m = icosphere(1.0, Vec3::zeros(), 4);
        let f = evaluate_helfrich_gradient(&m, &FlowParams::new(1.0, 0.0), HelfrichConvention::FirstVariation).unwrap();
        let mean = f.bracket.iter().sum::<f64>() / f.bracket.len() as f64;
        assert!((mean + 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn variational_convention_agrees_with_discrete_gradient() {
        let m = ellipsoid(1.3, 1.0, 0.9, 4).unwrap();
        let p = FlowParams::new(1.0, 1.0);
        let discrete = discrete_gradient(&m, &p).unwrap();
        let dist = |c| {
            evaluate_helfrich_gradient(&m, &p, c)
                .unwrap()
                .gradient
                .relative_distance(&discrete)
        };
        let good = dist(HelfrichConvention::Variational);
        assert!(good < 0.05, "{good}");
        assert!(dist(HelfrichConvention::FlowEquation) > good);
        assert!(dist(HelfrichConvention::FirstVariation) > good);
    }
}
