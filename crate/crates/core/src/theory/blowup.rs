//! Rescaling of the last snapshots before a singularity around the point
//! of largest curvature, and a roundness verdict on the rescaled surfaces.

use super::TheoryError;
use crate::ddg::{geometry_report, tracefree_energy};
use crate::energy::{discrete_gradient, FlowParams};
use crate::flow::{SingularityReport, Trajectory};
use crate::mesh::{TriMesh, Vec3};

/// Calibration constants of the roundness verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundnessThresholds {
    pub sphericity: f64,
    pub radius_spread: f64,
}

impl Default for RoundnessThresholds {
    fn default() -> Self {
        RoundnessThresholds {
            sphericity: 0.1,
            radius_spread: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlowupFrame {
    pub t: f64,
    /// Position of the vertex with the largest `|A|`.
    pub center: Vec3,
    /// `1 / max |A|`.
    pub scale: f64,
    /// `(f − center) / scale`.
    pub mesh: TriMesh,
    /// `∫ |A⁰|²` of the rescaled surface.
    pub sphericity: f64,
    /// `(max − min) / mean` of vertex distances to the vertex centroid.
    pub radius_spread: f64,
    /// `max |A|` after rescaling.
    pub max_curvature: f64,
    /// L²(μ) norm of the Willmore gradient of the rescaled surface.
    pub willmore_grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct BlowupAnalysis {
    pub frames: Vec<BlowupFrame>,
    pub round: bool,
    pub thresholds: RoundnessThresholds,
}

fn radius_spread(mesh: &TriMesh) -> f64 {
    let c = mesh.centroid();
    let d: Vec<f64> = mesh.positions().iter().map(|p| (p - c).norm()).collect();
    let (min, max) = d
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    (max - min) / mean
}

pub fn analyze_frame(t: f64, mesh: &TriMesh) -> Result<BlowupFrame, TheoryError> {
    let report = geometry_report(mesh)?;
    let (v, max_a) = report.max_curvature();
    let center = mesh.positions()[v];
    let scale = 1.0 / max_a;
    let rescaled = mesh.translated(-center).scaled(max_a);
    let rescaled_report = geometry_report(&rescaled)?;
    let grad = discrete_gradient(&rescaled, &FlowParams::new(0.0, 0.0))?;
    Ok(BlowupFrame {
        t,
        center,
        scale,
        sphericity: tracefree_energy(&rescaled_report),
        radius_spread: radius_spread(&rescaled),
        max_curvature: rescaled_report.max_curvature().1,
        willmore_grad_norm: grad.norm_sq.sqrt(),
        mesh: rescaled,
    })
}

/// Rescales the last `n_frames` snapshots of a run that ended in a
/// singularity. The verdict is "round" when the final frame's sphericity
/// and radius spread are both below the thresholds.
pub fn blowup_analyze(
    trajectory: &Trajectory,
    singularity: &SingularityReport,
    n_frames: usize,
    thresholds: RoundnessThresholds,
) -> Result<BlowupAnalysis, TheoryError> {
    if !singularity.detected {
        return Err(TheoryError::NoSingularity);
    }
    let available = trajectory.snapshots.len();
    if n_frames == 0 || available < n_frames {
        return Err(TheoryError::TooFewSnapshots {
            needed: n_frames.max(1),
            available,
        });
    }
    let frames = trajectory.snapshots[available - n_frames..]
        .iter()
        .map(|s| analyze_frame(s.t, &s.mesh))
        .collect::<Result<Vec<_>, _>>()?;
    let last = frames.last().expect("n_frames ≥ 1");
    let round = last.sphericity < thresholds.sphericity && last.radius_spread < thresholds.radius_spread;
    Ok(BlowupAnalysis {
        frames,
        round,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{Snapshot, StopReason};
    use crate::shapes::{ellipsoid, icosphere};

    fn fake_run(meshes: Vec<TriMesh>, detected: bool) -> (Trajectory, SingularityReport) {
        let snapshots = meshes
            .into_iter()
            .enumerate()
            .map(|(i, mesh)| Snapshot {
                step: i,
                t: i as f64,
                mesh,
            })
            .collect();
        let traj = Trajectory {
            rows: Vec::new(),
            snapshots,
            rejected_steps: 0,
        };
        let rep = SingularityReport {
            detected,
            t_sing: 1.0,
            trigger: if detected {
                StopReason::DtUnderflow
            } else {
                StopReason::MaxSteps
            },
            curvature_scale: 1.0,
            location: Vec3::zeros(),
            steps: 1,
        };
        (traj, rep)
    }

    #[test]
    fn shrinking_spheres_are_round_with_unit_curvature() {
        let meshes = [1.0, 0.5, 0.25]
            .map(|r| icosphere(r, Vec3::new(1.0, 2.0, 3.0), 4))
            .to_vec();
        let (traj, rep) = fake_run(meshes, true);
        let a = blowup_analyze(&traj, &rep, 3, RoundnessThresholds::default()).unwrap();
        assert!(a.round);
        for f in &a.frames {
            assert!((f.max_curvature - 1.0).abs() < 1e-9);
            assert!(
                f.sphericity < 0.05 && f.radius_spread < 0.02,
                "{} {}",
                f.sphericity,
                f.radius_spread
            );
        }
        assert!((a.frames[2].scale / a.frames[0].scale - 0.25).abs() < 1e-9);
    }

    #[test]
    fn elongated_surface_is_not_round() {
        let (traj, rep) = fake_run(vec![ellipsoid(3.0, 1.0, 1.0, 3).unwrap()], true);
        assert!(
            !blowup_analyze(&traj, &rep, 1, RoundnessThresholds::default())
                .unwrap()
                .round
        );
    }

    #[test]
    fn preconditions() {
        let (traj, rep) = fake_run(vec![icosphere(1.0, Vec3::zeros(), 1)], false);
        assert_eq!(
            blowup_analyze(&traj, &rep, 1, RoundnessThresholds::default()).unwrap_err(),
            TheoryError::NoSingularity
        );
        let (traj, rep) = fake_run(vec![icosphere(1.0, Vec3::zeros(), 1)], true);
        assert!(matches!(
            blowup_analyze(&traj, &rep, 2, RoundnessThresholds::default()),
            Err(TheoryError::TooFewSnapshots {
                needed: 2,
                available: 1
            })
        ));
    }
}
