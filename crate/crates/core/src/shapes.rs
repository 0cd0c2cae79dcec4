//! Deterministic generators for the test corpus.
//!
//! Surfaces of revolution are built from a profile in the `(r, z)`
//! half-plane traversed counter-clockwise, which makes the right-hand
//! normal of the profile the outward normal of the surface. Consecutive
//! rings are rotated by half an angular step so the strips triangulate into
//! near-isosceles faces.

use std::collections::HashMap;
use std::f64::consts::PI;

use thiserror::Error;

use crate::mesh::{MeshError, TriMesh, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),
    #[error("invalid parameter: {0}")]
    BadParams(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

const MAX_SUBDIV: u32 = 7;

/// Subdivided icosahedron projected onto a sphere. `subdiv` is clamped
/// to 7 (≈ 164k vertices).
pub fn icosphere(radius: f64, center: Vec3, subdiv: u32) -> TriMesh {
    let (positions, faces) = unit_icosphere(subdiv.min(MAX_SUBDIV));
    let positions = positions.into_iter().map(|p| p * radius + center).collect();
    TriMesh::build(positions, faces).expect("icosphere is a valid closed mesh")
}

fn unit_icosphere(subdiv: u32) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdiv {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, positions: &mut Vec<Vec3>| -> usize {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                positions.push(((positions[a] + positions[b]) * 0.5).normalize());
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut positions);
            let bc = midpoint(b, c, &mut positions);
            let ca = midpoint(c, a, &mut positions);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (positions, faces)
}

/// Axis-aligned ellipsoid with semi-axes `a, b, c`, centred at the origin.
pub fn ellipsoid(a: f64, b: f64, c: f64, subdiv: u32) -> Result<TriMesh, ShapeError> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(ShapeError::BadParams(format!(
            "semi-axes must be positive, got ({a}, {b}, {c})"
        )));
    }
    let (positions, faces) = unit_icosphere(subdiv.min(MAX_SUBDIV));
    let positions = positions
        .into_iter()
        .map(|p| Vec3::new(a * p.x, b * p.y, c * p.z))
        .collect();
    Ok(TriMesh::build(positions, faces)?)
}

/// Torus of revolution around the z axis with tube radius `r` and centre
/// circle radius `big_r`; `n_u` angular segments, `n_v` tube segments.
pub fn torus(big_r: f64, r: f64, n_u: usize, n_v: usize) -> Result<TriMesh, ShapeError> {
    if !(big_r > r && r > 0.0) {
        return Err(ShapeError::BadParams(format!(
            "need R > r > 0, got R = {big_r}, r = {r}"
        )));
    }
    let profile = circle_profile(big_r, r, n_v, n_u)?;
    revolve(&profile)
}

/// Closed circular profile of radius `r` centred at `(big_r, 0)`.
pub fn circle_profile(big_r: f64, r: f64, samples: usize, angular: usize) -> Result<RevolutionProfile, ShapeError> {
    let points = (0..samples)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / samples as f64;
            (big_r + r * phi.cos(), r * phi.sin())
        })
        .collect();
    RevolutionProfile::closed(points, angular)
}

/// Meridian half circle from the south to the north pole.
pub fn semicircle_profile(radius: f64, samples: usize, angular: usize) -> Result<RevolutionProfile, ShapeError> {
    let points = (0..=samples)
        .map(|i| {
            let phi = -PI / 2.0 + PI * i as f64 / samples as f64;
            if i == 0 || i == samples {
                (0.0, radius * phi.sin())
            } else {
                (radius * phi.cos(), radius * phi.sin())
            }
        })
        .collect();
    RevolutionProfile::polar(points, angular)
}

/// Red-blood-cell shape: the quartic Evans–Fung thickness profile
/// `z = ±½ R √(1 − ρ²) (c0 + c1 ρ² + c2 ρ⁴)`, `ρ = r / R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiconcaveParams {
    pub radius: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub profile_samples: usize,
    pub angular: usize,
}

impl Default for BiconcaveParams {
    /// Measured human erythrocyte coefficients (R = 3.91 µm), normalized to
    /// unit radius.
    fn default() -> Self {
        BiconcaveParams {
            radius: 1.0,
            c0: 0.81 / 3.91,
            c1: 7.83 / 3.91,
            c2: -4.39 / 3.91,
            profile_samples: 48,
            angular: 64,
        }
    }
}

pub fn biconcave(params: &BiconcaveParams) -> Result<TriMesh, ShapeError> {
    let BiconcaveParams {
        radius,
        c0,
        c1,
        c2,
        profile_samples,
        angular,
    } = *params;
    if !(radius > 0.0) || profile_samples < 4 {
        return Err(ShapeError::BadParams("radius must be positive and samples ≥ 4".into()));
    }
    let thickness = |rho2: f64| c0 + c1 * rho2 + c2 * rho2 * rho2;
    if (0..=100).any(|i| thickness(i as f64 / 100.0) <= 0.0) {
        return Err(ShapeError::DegenerateProfile(
            "thickness polynomial must stay positive on [0, 1]".into(),
        ));
    }
    // Parametrizing by φ with ρ = cos φ keeps the rim smooth.
    let points = (0..=profile_samples)
        .map(|i| {
            let phi = -PI / 2.0 + PI * i as f64 / profile_samples as f64;
            let rho = if i == 0 || i == profile_samples { 0.0 } else { phi.cos() };
            (radius * rho, 0.5 * radius * phi.sin() * thickness(rho * rho))
        })
        .collect();
    revolve(&RevolutionProfile::polar(points, angular)?)
}

/// Two round spheres joined through a small inverted catenoid neck.
///
/// The meridian leaves the first sphere at the cap angle `α` from its
/// north pole, turns back towards the axis along a connector whose
/// tangent angle is a cubic Hermite interpolant in arc length, meets the
/// catenoid `r = c cosh((z − z₀)/c)` with matching tangent and curvature,
/// and passes the neck at `z₀` inside the first sphere. The second half is
/// the mirror image in `z = z₀`. The profile tangent turns by `3π`, so the
/// surface is an immersed but not embedded sphere. Its Willmore energy
/// exceeds `8π` by about `18 c / R` at the default shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatenoidSpheresParams {
    /// Catenoid waist radius `c`.
    pub neck_scale: f64,
    /// Arc length of each connector.
    pub blend_width: f64,
    /// Polar angle `α` of the cap removed from each sphere.
    pub cap_angle: f64,
    pub sphere_radius: f64,
    /// Vertices per ring; also sets the ring spacing, which is about
    /// `2π max(r, c) / angular` along the meridian.
    pub angular: usize,
}

impl CatenoidSpheresParams {
    pub const DEFAULT_SPHERE_RADIUS: f64 = 2.0;
    pub const DEFAULT_ANGULAR: usize = 32;

    /// Near-optimal connector shape for the given neck and sphere radius:
    /// `α = 3 √(c/R)` and blend width `2.45 √(c R)`.
    pub fn new(neck_scale: f64, sphere_radius: f64) -> Self {
        CatenoidSpheresParams {
            neck_scale,
            blend_width: 2.45 * (neck_scale * sphere_radius).sqrt(),
            cap_angle: 3.0 * (neck_scale / sphere_radius).sqrt(),
            sphere_radius,
            angular: Self::DEFAULT_ANGULAR,
        }
    }

    fn validate(&self) -> Result<(), ShapeError> {
        let bad = |m: String| Err(ShapeError::BadParams(m));
        let (c, r) = (self.neck_scale, self.sphere_radius);
        if !(c > 0.0 && c.is_finite() && r > 0.0 && r.is_finite()) {
            return bad("neck_scale and sphere_radius must be positive".into());
        }
        if !(c < 0.25 * r) {
            return bad(format!("neck_scale {c} is not small against sphere_radius {r}"));
        }
        if !(self.blend_width > 0.0 && self.blend_width.is_finite()) {
            return bad("blend_width must be positive".into());
        }
        if !(self.cap_angle > 0.0 && self.cap_angle < PI / 2.0) {
            return bad("cap_angle must lie in (0, π/2)".into());
        }
        if self.angular < 8 {
            return bad("angular resolution must be at least 8".into());
        }
        Ok(())
    }
}

/// Tangent angle of the connector, `θ(u)` for `u ∈ [0, L]`.
#[derive(Debug, Clone, Copy)]
struct Connector {
    length: f64,
    theta0: f64,
    theta1: f64,
    kappa0: f64,
    kappa1: f64,
}

impl Connector {
    fn new(p: &CatenoidSpheresParams, beta: f64) -> Self {
        Connector {
            length: p.blend_width,
            theta0: PI - p.cap_angle,
            theta1: PI + beta,
            kappa0: 1.0 / p.sphere_radius,
            kappa1: beta.sin().powi(2) / p.neck_scale,
        }
    }

    fn theta(&self, u: f64) -> f64 {
        let l = self.length;
        let t = u / l;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.theta0
            + (t3 - 2.0 * t2 + t) * l * self.kappa0
            + (-2.0 * t3 + 3.0 * t2) * self.theta1
            + (t3 - t2) * l * self.kappa1
    }

    /// `(r, z)` relative to the start at `N + 1` equally spaced nodes, by
    /// cumulative Simpson quadrature of `(cos θ, sin θ)`.
    fn trace(&self, n: usize) -> Vec<(f64, f64)> {
        let h = self.length / n as f64;
        let mut out = Vec::with_capacity(n + 1);
        let (mut r, mut z) = (0.0, 0.0);
        out.push((r, z));
        for i in 0..n {
            let u = i as f64 * h;
            let [a, m, b] = [u, u + 0.5 * h, u + h].map(|x| self.theta(x));
            r += h / 6.0 * (a.cos() + 4.0 * m.cos() + b.cos());
            z += h / 6.0 * (a.sin() + 4.0 * m.sin() + b.sin());
            out.push((r, z));
        }
        out
    }
}

const CONNECTOR_NODES: usize = 4096;

/// Half meridian from the south pole of the first sphere to the neck, as
/// an arc-length parametrized curve.
struct HalfMeridian {
    radius: f64,
    neck: f64,
    sphere_len: f64,
    conn_len: f64,
    conn: Vec<(f64, f64)>,
    conn_start: (f64, f64),
    /// `asinh` parameter of the catenoid at the junction.
    w_junction: f64,
    /// Height of the waist.
    z_neck: f64,
}

impl HalfMeridian {
    fn new(p: &CatenoidSpheresParams) -> Result<Self, ShapeError> {
        let (c, big_r, alpha) = (p.neck_scale, p.sphere_radius, p.cap_angle);
        let start = (big_r * alpha.sin(), big_r * alpha.cos());
        // The connector must end at the catenoid radius c / sin β.
        let mismatch = |beta: f64| {
            let end = *Connector::new(p, beta).trace(CONNECTOR_NODES).last().expect("nodes");
            start.0 + end.0 - c / beta.sin()
        };
        let grid: Vec<f64> = (1..400).map(|i| i as f64 * (PI / 2.0) / 400.0).collect();
        let values: Vec<f64> = grid.iter().map(|&b| mismatch(b)).collect();
        let k = (0..grid.len() - 1)
            .find(|&i| values[i].signum() != values[i + 1].signum())
            .ok_or_else(|| {
                ShapeError::BadParams("connector cannot reach the catenoid; adjust blend_width or cap_angle".into())
            })?;
        let (mut lo, mut hi, mut f_lo) = (grid[k], grid[k + 1], values[k]);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let f = mismatch(mid);
            if f.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f;
            } else {
                hi = mid;
            }
        }
        let beta = 0.5 * (lo + hi);
        let conn = Connector::new(p, beta).trace(CONNECTOR_NODES);
        if let Some(&(r, _)) = conn.iter().find(|&&(r, _)| start.0 + r <= 0.5 * c) {
            return Err(ShapeError::DegenerateProfile(format!(
                "connector approaches the axis (r = {})",
                start.0 + r
            )));
        }
        let end = conn[conn.len() - 1];
        let w_junction = (1.0 / beta.sin()).acosh();
        let z_neck = start.1 + end.1 - c * w_junction;
        Ok(HalfMeridian {
            radius: big_r,
            neck: c,
            sphere_len: big_r * (PI - alpha),
            conn_len: p.blend_width,
            conn,
            conn_start: start,
            w_junction,
            z_neck,
        })
    }

    fn length(&self) -> f64 {
        self.sphere_len + self.conn_len + self.neck * self.w_junction.sinh()
    }

    fn at(&self, s: f64) -> (f64, f64) {
        if s <= self.sphere_len {
            let phi = s / self.radius;
            return (self.radius * phi.sin(), -self.radius * phi.cos());
        }
        let u = s - self.sphere_len;
        if u <= self.conn_len {
            let x = u / self.conn_len * CONNECTOR_NODES as f64;
            let i = (x.floor() as usize).min(CONNECTOR_NODES - 1);
            let w = x - i as f64;
            let (a, b) = (self.conn[i], self.conn[i + 1]);
            return (
                self.conn_start.0 + a.0 + w * (b.0 - a.0),
                self.conn_start.1 + a.1 + w * (b.1 - a.1),
            );
        }
        // Catenoid, parametrized by arc length from the waist.
        let c = self.neck;
        let sigma = (self.length() - s).max(0.0);
        let w = (sigma / c).asinh();
        (c * w.cosh(), self.z_neck + c * w)
    }
}

/// Meridian of [`catenoid_spheres`].
pub fn catenoid_spheres_profile(params: &CatenoidSpheresParams) -> Result<RevolutionProfile, ShapeError> {
    params.validate()?;
    let half = HalfMeridian::new(params)?;
    let (c, n) = (params.neck_scale, params.angular as f64);
    let total = half.length();
    // March with the local ring spacing; the first ring sits one neck
    // scale from the pole.
    let mut stations = vec![0.0, c.min(0.5 * total)];
    loop {
        let s = *stations.last().expect("nonempty");
        let r = half.at(s).0;
        let next = s + 2.0 * PI * r.max(c) / n;
        if next >= total {
            break;
        }
        stations.push(next);
    }
    // Stretch so the last station lands on the waist.
    let last = *stations.last().expect("nonempty");
    let stretch = if total - last < 0.5 * (total - stations[stations.len() - 2]) {
        stations.pop();
        total / *stations.last().expect("nonempty")
    } else {
        total / last
    };
    let mut points: Vec<(f64, f64)> = stations.iter().map(|&s| half.at(s * stretch)).collect();
    let z0 = half.z_neck;
    let mirrored: Vec<(f64, f64)> = points.iter().rev().skip(1).map(|&(r, z)| (r, 2.0 * z0 - z)).collect();
    points.extend(mirrored);
    RevolutionProfile::polar(points, params.angular)
}

/// Catenoid-spheres surface with the default sphere radius and cap angle.
pub fn catenoid_spheres(neck_scale: f64, blend_width: f64, resolution: usize) -> Result<TriMesh, ShapeError> {
    let params = CatenoidSpheresParams {
        blend_width,
        angular: resolution,
        ..CatenoidSpheresParams::new(neck_scale, CatenoidSpheresParams::DEFAULT_SPHERE_RADIUS)
    };
    catenoid_spheres_with(&params)
}

pub fn catenoid_spheres_with(params: &CatenoidSpheresParams) -> Result<TriMesh, ShapeError> {
    revolve(&catenoid_spheres_profile(params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Loop strictly inside `r > 0`; revolves to a torus.
    Closed,
    /// Arc whose first and last samples lie on the axis; revolves to a
    /// sphere with triangle fans at the poles.
    Polar,
}

/// Sampled meridian of a surface of revolution around the z axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RevolutionProfile {
    points: Vec<(f64, f64)>,
    kind: ProfileKind,
    angular: usize,
}

impl RevolutionProfile {
    pub fn closed(points: Vec<(f64, f64)>, angular: usize) -> Result<Self, ShapeError> {
        Self::new(points, ProfileKind::Closed, angular)
    }

    pub fn polar(points: Vec<(f64, f64)>, angular: usize) -> Result<Self, ShapeError> {
        Self::new(points, ProfileKind::Polar, angular)
    }

    fn new(points: Vec<(f64, f64)>, kind: ProfileKind, angular: usize) -> Result<Self, ShapeError> {
        let bad = |msg: String| Err(ShapeError::DegenerateProfile(msg));
        if angular < 3 {
            return bad(format!("angular resolution {angular} < 3"));
        }
        if points.len() < 3 {
            return bad(format!("{} samples are too few", points.len()));
        }
        if points.iter().any(|(r, z)| !r.is_finite() || !z.is_finite()) {
            return bad("non-finite sample".into());
        }
        let interior = match kind {
            ProfileKind::Closed => &points[..],
            ProfileKind::Polar => {
                let (first, last) = (points[0], points[points.len() - 1]);
                if first.0 != 0.0 || last.0 != 0.0 {
                    return bad("polar profile must start and end on the axis".into());
                }
                &points[1..points.len() - 1]
            }
        };
        if let Some((i, &(r, _))) = interior.iter().enumerate().find(|(_, p)| !(p.0 > 0.0)) {
            return bad(format!("sample {i} has r = {r} ≤ 0 away from the poles"));
        }
        let n = points.len();
        let segments = if kind == ProfileKind::Closed { n } else { n - 1 };
        for i in 0..segments {
            let (a, b) = (points[i], points[(i + 1) % n]);
            if a == b {
                return bad(format!("samples {i} and {} coincide", (i + 1) % n));
            }
        }
        Ok(RevolutionProfile { points, kind, angular })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn angular(&self) -> usize {
        self.angular
    }

    fn segment_directions(&self) -> Vec<(f64, f64)> {
        let n = self.points.len();
        let segments = if self.kind == ProfileKind::Closed { n } else { n - 1 };
        (0..segments)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                (b.0 - a.0, b.1 - a.1)
            })
            .collect()
    }

    /// Total rotation of the discrete tangent in units of π for polar
    /// arcs (index of the Gauss map of the profile, 1 for a meridian
    /// semicircle) and of 2π for closed loops.
    pub fn turning_number(&self) -> f64 {
        let dirs = self.segment_directions();
        let mut total = 0.0;
        let count = if self.kind == ProfileKind::Closed {
            dirs.len()
        } else {
            dirs.len() - 1
        };
        for i in 0..count {
            let (a, b) = (dirs[i], dirs[(i + 1) % dirs.len()]);
            total += (a.0 * b.1 - a.1 * b.0).atan2(a.0 * b.0 + a.1 * b.1);
        }
        match self.kind {
            ProfileKind::Closed => total / (2.0 * PI),
            // A polar arc leaves the south pole along +r and reaches the
            // north pole along −r; the perpendicular crossings of the axis
            // complete the rotation of the reflected closed curve.
            ProfileKind::Polar => {
                let first = dirs[0].1.atan2(dirs[0].0);
                let last = dirs[dirs.len() - 1].1.atan2(dirs[dirs.len() - 1].0);
                (total + first + (PI - last)) / PI
            }
        }
    }

    /// True when no two non-adjacent segments intersect.
    pub fn is_simple(&self) -> bool {
        let p = &self.points;
        let n = p.len();
        let segments = if self.kind == ProfileKind::Closed { n } else { n - 1 };
        for i in 0..segments {
            for j in i + 2..segments {
                if self.kind == ProfileKind::Closed && i == 0 && j == segments - 1 {
                    continue;
                }
                if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                    return false;
                }
            }
        }
        true
    }
}

fn segments_cross(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let (d1, d2) = (orient(a, b, c), orient(a, b, d));
    let (d3, d4) = (orient(c, d, a), orient(c, d, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Triangulates the surface swept by rotating `profile` about the z axis.
/// Self-crossing profiles are accepted and produce immersed surfaces.
pub fn revolve(profile: &RevolutionProfile) -> Result<TriMesh, ShapeError> {
    let n = profile.angular;
    let pts = &profile.points;
    let ring_samples: &[(f64, f64)] = match profile.kind {
        ProfileKind::Closed => pts,
        ProfileKind::Polar => &pts[1..pts.len() - 1],
    };
    let mut positions = Vec::with_capacity(ring_samples.len() * n + 2);
    for (i, &(r, z)) in ring_samples.iter().enumerate() {
        let offset = 0.5 * (i % 2) as f64;
        for k in 0..n {
            let theta = 2.0 * PI * (k as f64 + offset) / n as f64;
            positions.push(Vec3::new(r * theta.cos(), r * theta.sin(), z));
        }
    }
    let ring = |i: usize, k: usize| i * n + k % n;
    let mut faces = Vec::with_capacity(2 * n * (ring_samples.len() + 1));
    let strip = |a: usize, b: usize, faces: &mut Vec<[usize; 3]>| {
        // Ring b is rotated by +½ step relative to ring a unless a is the
        // shifted one.
        let a_shifted = !a.is_multiple_of(2) && b.is_multiple_of(2);
        for k in 0..n {
            if a_shifted {
                faces.push([ring(a, k), ring(a, k + 1), ring(b, k + 1)]);
                faces.push([ring(b, k), ring(a, k), ring(b, k + 1)]);
            } else {
                faces.push([ring(a, k), ring(a, k + 1), ring(b, k)]);
                faces.push([ring(b, k), ring(a, k + 1), ring(b, k + 1)]);
            }
        }
    };
    let rings = ring_samples.len();
    for i in 0..rings - 1 {
        strip(i, i + 1, &mut faces);
    }
    match profile.kind {
        ProfileKind::Closed => strip(rings - 1, 0, &mut faces),
        ProfileKind::Polar => {
            let south = positions.len();
            positions.push(Vec3::new(0.0, 0.0, pts[0].1));
            let north = positions.len();
            positions.push(Vec3::new(0.0, 0.0, pts[pts.len() - 1].1));
            for k in 0..n {
                faces.push([south, ring(0, k + 1), ring(0, k)]);
                faces.push([north, ring(rings - 1, k), ring(rings - 1, k + 1)]);
            }
        }
    }
    Ok(TriMesh::build(positions, faces)?)
}
