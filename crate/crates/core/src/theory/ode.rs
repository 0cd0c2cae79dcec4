//! Radius of a round sphere moving under the flow.
//!
//! A sphere of radius `r` has `E(r) = 4π + 4π λ₁ r² + (4π/3) λ₂ r³`, and
//! the L²(μ) gradient flow restricted to spheres reads
//! `ṙ = −E'(r) / (4π r²) = −(2 λ₁ / r + λ₂)`.

use super::TheoryError;
use crate::energy::FlowParams;

/// Coefficient in front of `λ₁ / r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeForm {
    /// `ṙ = −(2 λ₁ / r + λ₂)`, consistent with the energy.
    EnergyConsistent,
    /// `ṙ = −(λ₁ / r + λ₂)`.
    Printed,
}

impl OdeForm {
    pub fn coefficient(self) -> f64 {
        match self {
            OdeForm::EnergyConsistent => 2.0,
            OdeForm::Printed => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusOde {
    pub form: OdeForm,
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    /// Time at which the radius reaches zero, if it does.
    pub extinction_time: Option<f64>,
    /// Radius with `ṙ = 0`, if positive.
    pub stationary_radius: Option<f64>,
}

impl RadiusOde {
    /// Piecewise-linear interpolation of the sampled radius; `None` past the
    /// last sample.
    pub fn radius_at(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&s| s <= t);
        if i == 0 {
            return self.radii.first().copied();
        }
        if i == self.times.len() {
            return (t == self.times[i - 1]).then(|| self.radii[i - 1]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        Some(self.radii[i - 1] * (1.0 - w) + self.radii[i] * w)
    }
}

fn rk4(f: impl Fn(f64) -> f64, y: f64, h: f64) -> f64 {
    let k1 = f(y);
    let k2 = f(y + 0.5 * h * k1);
    let k3 = f(y + 0.5 * h * k2);
    let k4 = f(y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates the radius ODE with classical Runge–Kutta steps of size
/// `dt` up to `t_max` or extinction.
///
/// The extinction time is computed separately as
/// `T = ∫₀^{r0} r / (a λ₁ + λ₂ r) dr`, integrated in `r` where the
/// integrand is smooth, since `ṙ` itself blows up as `r → 0`.
pub fn sphere_radius_ode(
    r0: f64,
    params: &FlowParams,
    dt: f64,
    t_max: f64,
    form: OdeForm,
) -> Result<RadiusOde, TheoryError> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(TheoryError::BadRadius(r0));
    }
    let a = form.coefficient() * params.lambda1;
    let l2 = params.lambda2;
    let rate = |r: f64| -(a / r + l2);

    let stationary_radius = (a > 0.0 && l2 < 0.0).then(|| -a / l2);
    // The radius shrinks to zero exactly when the speed stays negative on
    // (0, r0].
    let shrinks_to_zero = a >= 0.0 && (a > 0.0 || l2 > 0.0) && a + l2 * r0 > 0.0;
    let extinction_time = shrinks_to_zero.then(|| {
        let n = 4096;
        let h = r0 / n as f64;
        // dT/dr = r / (a + λ₂ r), integrated from 0 to r0.
        (0..n).fold(0.0, |acc, i| {
            let r = i as f64 * h;
            let g = |r: f64| r / (a + l2 * r);
            acc + h / 6.0 * (g(r) + 4.0 * g(r + 0.5 * h) + g(r + h))
        })
    });

    let mut times = vec![0.0];
    let mut radii = vec![r0];
    let (mut t, mut r) = (0.0, r0);
    let end = extinction_time.map_or(t_max, |te| te.min(t_max));
    while t < end {
        let h = dt.min(end - t);
        let next = rk4(rate, r, h);
        if !(next > 0.0) || !next.is_finite() {
            break;
        }
        r = next;
        t += h;
        times.push(t);
        radii.push(r);
    }
    Ok(RadiusOde {
        form,
        times,
        radii,
        extinction_time,
        stationary_radius,
    })
}
