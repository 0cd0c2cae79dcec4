//! Analytic oracles and bound checks for the flow.

mod blowup;
mod bounds;
mod hypotheses;
mod intersect;
mod ode;

pub use blowup::{analyze_frame, blowup_analyze, BlowupAnalysis, BlowupFrame, RoundnessThresholds};
pub use bounds::{inequality_monitor, singularity_time_bound, Inequality, MonitorInput, Relation, MONITOR_SLACK};
pub use hypotheses::{classify_hypotheses, eps1, eps2, HypothesisCase, HypothesisVerdict};
pub use intersect::{self_intersect, triangles_intersect};
pub use ode::{sphere_radius_ode, OdeForm, RadiusOde};

use thiserror::Error;

use crate::ddg::DdgError;
use crate::energy::EnergyError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("λ₁ must be positive, got {0}")]
    Lambda1NonPositive(f64),
    #[error("initial energy {0} lies below the Willmore floor 4π")]
    BelowWillmoreFloor(f64),
    #[error("initial radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("the run ended without a detected singularity")]
    NoSingularity,
    #[error("blowup analysis needs {needed} snapshots, the run has {available}")]
    TooFewSnapshots { needed: usize, available: usize },
    #[error(transparent)]
    Geometry(#[from] DdgError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}
