//! Named generators and their parameters.

use helfrich_core::shapes::{
    biconcave, catenoid_spheres_with, ellipsoid, icosphere, torus, BiconcaveParams, CatenoidSpheresParams,
};
use helfrich_core::{TriMesh, Vec3};

use crate::config::Settings;
use crate::error::CliError;

pub const GENERATORS: &[&str] = &["icosphere", "ellipsoid", "torus", "biconcave", "catenoid-spheres"];

pub const SHAPE_KEYS: &[&str] = &[
    "radius",
    "subdiv",
    "a",
    "b",
    "c",
    "R",
    "r",
    "n_u",
    "n_v",
    "neck",
    "blend",
    "cap_angle",
    "sphere_radius",
    "resolution",
];

pub fn generate(name: &str, s: &Settings) -> Result<TriMesh, CliError> {
    let bad = |e: helfrich_core::shapes::ShapeError| CliError::Usage(format!("{name}: {e}"));
    let subdiv = || -> Result<u32, CliError> { s.get_or("subdiv", 3) };
    match name {
        "icosphere" => {
            let radius: f64 = s.get_or("radius", 1.0)?;
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(CliError::Usage(format!(
                    "icosphere: radius must be positive, got {radius}"
                )));
            }
            Ok(icosphere(radius, Vec3::zeros(), subdiv()?))
        }
        "ellipsoid" => ellipsoid(s.get_or("a", 1.2)?, s.get_or("b", 1.0)?, s.get_or("c", 1.0)?, subdiv()?).map_err(bad),
        "torus" => torus(
            s.get_or("R", 2.0)?,
            s.get_or("r", 1.0)?,
            s.get_or("n_u", 48)?,
            s.get_or("n_v", 24)?,
        )
        .map_err(bad),
        "biconcave" => {
            let d = BiconcaveParams::default();
            biconcave(&BiconcaveParams {
                radius: s.get_or("radius", d.radius)?,
                angular: s.get_or("resolution", d.angular)?,
                ..d
            })
            .map_err(bad)
        }
        "catenoid-spheres" => {
            let d = CatenoidSpheresParams::new(
                s.get_or("neck", 0.1)?,
                s.get_or("sphere_radius", CatenoidSpheresParams::DEFAULT_SPHERE_RADIUS)?,
            );
            catenoid_spheres_with(&CatenoidSpheresParams {
                blend_width: s.get_or("blend", d.blend_width)?,
                cap_angle: s.get_or("cap_angle", d.cap_angle)?,
                angular: s.get_or("resolution", d.angular)?,
                ..d
            })
            .map_err(bad)
        }
        _ => Err(CliError::Usage(format!(
            "unknown generator {name:?}; known: {}",
            GENERATORS.join(", ")
        ))),
    }
}
