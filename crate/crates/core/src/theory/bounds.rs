use std::f64::consts::PI;

use super::{eps1, TheoryError};
use crate::ddg::{willmore_energy, GeometryReport};
use crate::energy::FlowParams;
use crate::flow::TrajectoryRow;

/// Relative slack granted to every monitored inequality for
/// discretization error.
pub const MONITOR_SLACK: f64 = 0.02;

/// Upper bound on the maximal existence time when `λ₂ = 0` (or `λ₂ > 0`
/// with an embedded start of energy at most 8π):
/// `T ≤ (E₀² − 16π²) / (2π² λ₁²)`.
pub fn singularity_time_bound(e0: f64, lambda1: f64) -> Result<f64, TheoryError> {
    if !(lambda1 > 0.0) {
        return Err(TheoryError::Lambda1NonPositive(lambda1));
    }
    if e0 < 4.0 * PI {
        return Err(TheoryError::BelowWillmoreFloor(e0));
    }
    Ok((e0 * e0 - 16.0 * PI * PI) / (2.0 * PI * PI * lambda1 * lambda1))
}

/// Scalars the monitors read, from a report or a trajectory row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorInput {
    pub area: f64,
    pub volume: f64,
    pub willmore: f64,
    pub diameter: f64,
    pub grad_norm_sq: Option<f64>,
}

impl MonitorInput {
    pub fn from_report(report: &GeometryReport) -> Self {
        MonitorInput {
            area: report.area,
            volume: report.signed_volume,
            willmore: willmore_energy(report),
            diameter: report.diameter,
            grad_norm_sq: None,
        }
    }

    pub fn from_row(row: &TrajectoryRow) -> Self {
        MonitorInput {
            area: row.area,
            volume: row.volume,
            willmore: row.willmore,
            diameter: row.diameter,
            grad_norm_sq: Some(row.grad_norm_sq),
        }
    }

    pub fn energy(&self, params: &FlowParams) -> f64 {
        self.willmore + params.lambda1 * self.area + params.lambda2 * self.volume
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    GreaterEq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub ok: bool,
}

impl Inequality {
    fn new(name: &'static str, lhs: f64, relation: Relation, rhs: f64) -> Self {
        let slack = MONITOR_SLACK * rhs.abs();
        let ok = match relation {
            Relation::LessEq => lhs <= rhs + slack,
            Relation::GreaterEq => lhs >= rhs - slack,
        };
        Inequality {
            name,
            lhs,
            relation,
            rhs,
            ok,
        }
    }
}

/// Evaluates every inequality whose hypotheses hold at this instant.
///
/// Always: the diameter estimate `diam ≤ (2/π) √(Area · W)`, the
/// isoperimetric inequality `Vol ≤ Area^{3/2} / (6 √π)` and `W ≥ 4π`.
/// With `λ₁ > 0`, `λ₂ ≠ 0` and `Area ≤ ε₁`: `Area ≤ (3/λ₁)(E − W)`.
/// With a gradient norm: `‖grad‖² ≥ π² λ₁² / W` when `λ₂ Vol ≥ 0`, and
/// `‖grad‖² ≥ π² (λ₁ − |λ₂| √Area / (4√π))² / W` when `Area < ε₁`.
pub fn inequality_monitor(input: &MonitorInput, params: &FlowParams) -> Vec<Inequality> {
    let MonitorInput {
        area,
        volume,
        willmore,
        diameter,
        grad_norm_sq,
    } = *input;
    let (l1, l2) = (params.lambda1, params.lambda2);
    let mut out = vec![
        Inequality::new(
            "diameter",
            diameter,
            Relation::LessEq,
            2.0 / PI * (area * willmore).sqrt(),
        ),
        Inequality::new(
            "isoperimetric",
            volume,
            Relation::LessEq,
            area.powf(1.5) / (6.0 * PI.sqrt()),
        ),
        Inequality::new("willmore_floor", willmore, Relation::GreaterEq, 4.0 * PI),
    ];
    let small_area = l1 > 0.0 && l2 != 0.0 && area <= eps1(l1, l2);
    if small_area {
        let energy = input.energy(params);
        out.push(Inequality::new(
            "area_bound",
            area,
            Relation::LessEq,
            3.0 / l1 * (energy - willmore),
        ));
    }
    if let (Some(g), true) = (grad_norm_sq, l1 > 0.0) {
        if l2 * volume >= 0.0 {
            out.push(Inequality::new(
                "gradient",
                g,
                Relation::GreaterEq,
                PI * PI * l1 * l1 / willmore,
            ));
        }
        if l2 != 0.0 && area < eps1(l1, l2) {
            let c = l1 - l2.abs() * area.sqrt() / (4.0 * PI.sqrt());
            out.push(Inequality::new(
                "gradient_small_area",
                g,
                Relation::GreaterEq,
                PI * PI * c * c / willmore,
            ));
        }
    }
    out
}
