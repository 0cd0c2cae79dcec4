//! Numerical laboratory for the constrained Willmore (Helfrich) gradient
//! flow of closed triangulated surfaces.
//!
//! The crate is organized bottom-up: [`mesh`] holds immutable oriented
//! triangle meshes, [`ddg`] evaluates curvature and measures, [`energy`]
//! assembles the energy and its exact discrete gradient, [`flow`]
//! integrates the gradient flow, [`shapes`] generates test surfaces and
//! [`theory`] checks the flow against analytic bounds and oracles.

pub mod ddg;
pub mod energy;
pub mod flow;
pub mod mesh;
pub mod shapes;
pub mod theory;

pub use mesh::{TriMesh, Vec3};
