#![allow(dead_code)]

use helfrich_core::shapes::{biconcave, catenoid_spheres, ellipsoid, icosphere, torus, BiconcaveParams};
use helfrich_core::{TriMesh, Vec3};
use nalgebra::{Matrix3, Rotation3, Unit};

/// Every generator at a modest resolution.
pub fn corpus() -> Vec<(&'static str, TriMesh)> {
    vec![
        ("icosphere", icosphere(1.0, Vec3::zeros(), 3)),
        ("ellipsoid", ellipsoid(1.2, 1.0, 0.8, 3).unwrap()),
        ("torus", torus(2.0, 1.0, 32, 16).unwrap()),
        ("biconcave", biconcave(&BiconcaveParams::default()).unwrap()),
        ("catenoid_spheres", catenoid_spheres(0.1, 0.8, 20).unwrap()),
    ]
}

pub fn rotation(axis: [f64; 3], angle: f64) -> Matrix3<f64> {
    let axis = Vec3::from(axis);
    let axis = if axis.norm() < 1e-3 { Vec3::z() } else { axis };
    *Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).matrix()
}

/// Moves every vertex by a deterministic pseudo-random offset of size at
/// most `amp`.
pub fn jiggle(mesh: &TriMesh, amp: f64, seed: u64) -> TriMesh {
    let pos = mesh
        .positions()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let t = (i as f64 + 1.0) * (seed as f64 * 0.37 + 0.618);
            p + amp * Vec3::new((1.3 * t).sin(), (2.9 * t).cos(), (0.7 * t).sin()) / 3f64.sqrt()
        })
        .collect();
    mesh.with_positions(pos).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
