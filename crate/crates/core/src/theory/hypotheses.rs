use std::f64::consts::PI;
use std::fmt;

use super::{self_intersect, TheoryError};
use crate::energy::{energy_parts, FlowParams};
use crate::mesh::TriMesh;

/// `ε₁ = 16π λ₁² / λ₂²`, the area of the stationary sphere.
pub fn eps1(lambda1: f64, lambda2: f64) -> f64 {
    16.0 * PI * lambda1 * lambda1 / (lambda2 * lambda2)
}

/// `ε₂ = 16π λ₁³ / (3 λ₂²)`.
pub fn eps2(lambda1: f64, lambda2: f64) -> f64 {
    16.0 * PI * lambda1.powi(3) / (3.0 * lambda2 * lambda2)
}

/// Which sufficient condition for a finite-time singularity applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisCase {
    /// `λ₂ = 0`: every initial surface.
    PureArea,
    /// Embedded, positive volume, `Area < ε₁` and `E < 4π + ε₂`.
    SmallAreaEnergy,
    /// Embedded, positive volume, `λ₂ > 0` and `E < 8π + min(ε₂, 8π)`.
    PositiveVolumeEnergy,
    None,
}

impl HypothesisCase {
    pub fn as_str(self) -> &'static str {
        match self {
            HypothesisCase::PureArea => "thm12_i",
            HypothesisCase::SmallAreaEnergy => "thm12_ii_a",
            HypothesisCase::PositiveVolumeEnergy => "thm12_ii_b",
            HypothesisCase::None => "none",
        }
    }
}

impl fmt::Display for HypothesisCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisVerdict {
    /// `None` when `λ₂ = 0`.
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub case: HypothesisCase,
    pub energy: f64,
    pub area: f64,
    pub volume: f64,
    pub embedded: bool,
    /// Why each case of the `λ₂ ≠ 0` branch failed.
    pub reasons: Vec<String>,
}

/// Decides which finite-time singularity criterion the initial mesh meets.
/// All comparisons are strict and use the measured discrete quantities.
pub fn classify_hypotheses(mesh: &TriMesh, params: &FlowParams) -> Result<HypothesisVerdict, TheoryError> {
    let (l1, l2) = (params.lambda1, params.lambda2);
    if !(l1 > 0.0) {
        return Err(TheoryError::Lambda1NonPositive(l1));
    }
    let parts = energy_parts(mesh)?;
    let energy = parts.total(params);
    let embedded = self_intersect(mesh).is_none();
    let mut verdict = HypothesisVerdict {
        eps1: None,
        eps2: None,
        case: HypothesisCase::None,
        energy,
        area: parts.area,
        volume: parts.volume,
        embedded,
        reasons: Vec::new(),
    };
    if l2 == 0.0 {
        verdict.case = HypothesisCase::PureArea;
        return Ok(verdict);
    }
    let (e1, e2) = (eps1(l1, l2), eps2(l1, l2));
    verdict.eps1 = Some(e1);
    verdict.eps2 = Some(e2);

    let mut shared = Vec::new();
    if !embedded {
        shared.push("not embedded".to_string());
    }
    if !(parts.volume > 0.0) {
        shared.push(format!("volume {} is not positive", parts.volume));
    }

    let mut small = shared.clone();
    if !(parts.area < e1) {
        small.push(format!("area {} ≥ ε₁ = {e1}", parts.area));
    }
    if !(energy < 4.0 * PI + e2) {
        small.push(format!("energy {energy} ≥ 4π + ε₂ = {}", 4.0 * PI + e2));
    }
    if small.is_empty() {
        verdict.case = HypothesisCase::SmallAreaEnergy;
        return Ok(verdict);
    }

    let mut positive = shared;
    let limit = 8.0 * PI + e2.min(8.0 * PI);
    if !(l2 > 0.0) {
        positive.push("λ₂ is not positive".to_string());
    }
    if !(energy < limit) {
        positive.push(format!("energy {energy} ≥ 8π + min(ε₂, 8π) = {limit}"));
    }
    if positive.is_empty() {
        verdict.case = HypothesisCase::PositiveVolumeEnergy;
        return Ok(verdict);
    }
    verdict.reasons = small
        .into_iter()
        .map(|r| format!("ii_a: {r}"))
        .chain(positive.into_iter().map(|r| format!("ii_b: {r}")))
        .collect();
    Ok(verdict)
}
