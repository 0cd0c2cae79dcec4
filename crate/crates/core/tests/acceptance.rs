//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when the failing set differs from `KNOWN_FAILURES`.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{corpus, rel};
use helfrich_core::ddg::{geometry_report, tracefree_energy, willmore_energy};
use helfrich_core::energy::{discrete_gradient, scaling_derivative_check, total_energy, FlowParams};
use helfrich_core::flow::{
    dissipation_audit, run, SingularityReport, StepControl, StopReason, Trajectory, TrajectoryRow,
};
use helfrich_core::shapes::{
    catenoid_spheres_profile, catenoid_spheres_with, ellipsoid, icosphere, CatenoidSpheresParams,
};
use helfrich_core::theory::{
    blowup_analyze, classify_hypotheses, inequality_monitor, singularity_time_bound, HypothesisCase, MonitorInput,
    RoundnessThresholds,
};
use helfrich_core::{TriMesh, Vec3};
use proptest::prelude::RngExt;
use proptest::test_runner::{RngAlgorithm, TestRng};

/// Criteria that fail for reasons analysed in the project notes; see the
/// README.
const KNOWN_FAILURES: &[u32] = &[6];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

struct Run {
    traj: Trajectory,
    rep: SingularityReport,
    e0: f64,
    elapsed: Duration,
}

fn flow(mesh: &TriMesh, params: FlowParams, control: StepControl) -> Run {
    let start = Instant::now();
    let e0 = total_energy(mesh, &params).unwrap();
    let (traj, rep) = run(mesh, &params, &control).unwrap();
    Run {
        traj,
        rep,
        e0,
        elapsed: start.elapsed(),
    }
}

fn singular_control() -> StepControl {
    StepControl {
        dt_min_ratio: 5e-4,
        snapshot_every: 5000,
        ..StepControl::default()
    }
}

fn discrete_geometry() -> Verdict {
    let start = Instant::now();
    let (mut gb, mut tf) = (0.0f64, 0.0f64);
    for (_, m) in corpus() {
        let r = geometry_report(&m).unwrap();
        let chi = m.euler_characteristic() as f64;
        gb = gb.max((r.total_gauss_curvature() - 2.0 * PI * chi).abs());
        let w = willmore_energy(&r);
        tf = tf.max(rel(tracefree_energy(&r), 2.0 * w - 4.0 * PI * chi));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        gb < 1e-9 && tf < 1e-9 && secs < 5.0,
        format!("Gauss-Bonnet err {gb:.1e}, tracefree rel err {tf:.1e}, {secs:.2} s"),
    )
}

fn operator_convergence() -> Verdict {
    let errors: Vec<[f64; 3]> = (3..=5)
        .map(|l| {
            let r = geometry_report(&icosphere(1.0, Vec3::zeros(), l)).unwrap();
            [
                (r.area - 4.0 * PI).abs(),
                (r.signed_volume - 4.0 * PI / 3.0).abs(),
                (willmore_energy(&r) - 4.0 * PI).abs(),
            ]
        })
        .collect();
    let ratios: Vec<f64> = errors
        .windows(2)
        .flat_map(|w| (0..3).map(move |k| w[0][k] / w[1][k]))
        .collect();
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let w4 = willmore_energy(&geometry_report(&icosphere(1.0, Vec3::zeros(), 4)).unwrap());
    let w4_dev = rel(w4, 4.0 * PI);
    verdict(
        min_ratio >= 3.0 && w4_dev < 0.01,
        format!(
            "min error ratio per level {min_ratio:.2}, W(level 4) off 4π by {:.3}%",
            100.0 * w4_dev
        ),
    )
}

/// Fourth-order central difference of the energy along `dir`.
fn directional(mesh: &TriMesh, params: &FlowParams, dir: &[Vec3], h: f64) -> f64 {
    let at = |s: f64| {
        let pos = mesh.positions().iter().zip(dir).map(|(x, u)| x + s * u).collect();
        total_energy(&mesh.with_positions(pos).unwrap(), params).unwrap()
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

fn gradient_fidelity() -> Verdict {
    let start = Instant::now();
    let mut rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let p = FlowParams::new(1.0, 0.5);
    let mut worst_fd = 0.0f64;
    for (_, m) in corpus() {
        let g = discrete_gradient(&m, &p).unwrap();
        for _ in 0..20 {
            let dir: Vec<Vec3> = (0..m.vertex_count())
                .map(|_| {
                    Vec3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    )
                })
                .collect();
            let numeric = directional(&m, &p, &dir, 1e-6);
            worst_fd = worst_fd.max((g.pair(&dir) - numeric).abs() / numeric.abs().max(1.0));
        }
    }
    let mut worst_scaling = 0.0f64;
    for (_, m) in corpus() {
        for l1 in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            for l2 in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                let (lhs, rhs) =
                    scaling_derivative_check(&m, &FlowParams::new(l1, l2), Vec3::new(0.3, -0.2, 0.1)).unwrap();
                // Both sides vanish for λ = 0; compare against the area then.
                worst_scaling = worst_scaling.max((lhs - rhs).abs() / rhs.abs().max(m.total_area()));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst_fd < 1e-6 && worst_scaling < 1e-8 && secs < 60.0,
        format!("directional rel err {worst_fd:.1e} (100 directions), scaling identity rel err {worst_scaling:.1e}, {secs:.1} s"),
    )
}

/// Radius from the area, which makes the level-3 mesh a homothety of its
/// initial state.
fn area_radius(row: &TrajectoryRow, first: &TrajectoryRow) -> f64 {
    (row.area / first.area).sqrt()
}

fn sphere_dynamics(sphere: &Run) -> Verdict {
    let rows = &sphere.traj.rows;
    let mut radius_dev = 0.0f64;
    let mut w_dev = 0.0f64;
    for row in rows {
        let r = area_radius(row, &rows[0]);
        if r >= 0.2 {
            let exact = (1.0 - 4.0 * row.t).max(0.0).sqrt();
            radius_dev = radius_dev.max(rel(r, exact));
        }
        w_dev = w_dev.max(rel(row.willmore, 4.0 * PI));
    }
    let t_err = rel(sphere.rep.t_sing, 0.25);
    let secs = sphere.elapsed.as_secs_f64();
    verdict(
        sphere.rep.detected && radius_dev < 0.01 && t_err < 0.05 && w_dev < 0.01 && secs < 300.0,
        format!(
            "radius dev {:.3}%, t_sing {:.5} ({:.2}% from 0.25, {}), W dev {:.3}%, {} steps, {secs:.0} s",
            100.0 * radius_dev,
            sphere.rep.t_sing,
            100.0 * t_err,
            sphere.rep.trigger,
            100.0 * w_dev,
            sphere.rep.steps
        ),
    )
}

fn time_bound(runs: &[(&str, &Run)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, r) in runs {
        let bound = singularity_time_bound(r.e0, 1.0).unwrap();
        pass &= r.rep.detected && r.rep.t_sing <= bound;
        parts.push(format!(
            "{name} t_sing {:.4} ≤ {bound:.3} (ratio {:.1})",
            r.rep.t_sing,
            bound / r.rep.t_sing
        ));
    }
    verdict(pass, parts.join(", "))
}

fn stationarity(stationary: &Run) -> Verdict {
    let p = FlowParams::new(1.0, -1.0);
    let norms: Vec<f64> = (2..=5)
        .map(|l| {
            discrete_gradient(&icosphere(2.0, Vec3::zeros(), l), &p)
                .unwrap()
                .norm_sq
                .sqrt()
        })
        .collect();
    // h halves per level, so order = log2 of the ratio.
    let orders: Vec<f64> = norms.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let a0 = stationary.traj.rows[0].area;
    let drift = stationary.traj.rows.iter().map(|r| rel(r.area, a0)).fold(0.0, f64::max);
    let steps_ok = stationary.rep.trigger == StopReason::MaxSteps && stationary.rep.steps == 10_000;
    let order_ok = min_order > 1.8;
    verdict(
        order_ok && drift < 0.02 && steps_ok,
        format!(
            "gradient norms {} give orders {} (need ≈ 2: {}), area drift {:.4}% over {} steps ({})",
            norms.iter().map(|n| format!("{n:.3e}")).collect::<Vec<_>>().join(" "),
            orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(" "),
            if order_ok { "ok" } else { "FAIL" },
            100.0 * drift,
            stationary.rep.steps,
            if drift < 0.02 { "ok" } else { "FAIL" },
        ),
    )
}

fn max_energy_increase(traj: &Trajectory) -> f64 {
    traj.rows
        .windows(2)
        .map(|w| (w[1].energy - w[0].energy) / w[0].energy.abs().max(1.0))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn dissipation(runs: &[&Run]) -> Verdict {
    // Relative rounding slack the step acceptance allows.
    let slack = StepControl::default().energy_slack;
    let worst = runs
        .iter()
        .map(|r| max_energy_increase(&r.traj))
        .fold(f64::NEG_INFINITY, f64::max);
    let every_step = runs.iter().all(|r| r.traj.rows.len() == r.rep.steps + 1);

    let m = ellipsoid(1.2, 1.0, 1.0, 2).unwrap();
    let audit = |safety: f64| {
        let c = StepControl {
            safety,
            t_end: Some(0.01),
            snapshot_every: 0,
            ..StepControl::default()
        };
        let (traj, _) = run(&m, &FlowParams::new(1.0, 0.0), &c).unwrap();
        dissipation_audit(&traj).unwrap()
    };
    let (coarse, fine) = (audit(0.1), audit(0.05));
    let ratio = fine.max_relative / coarse.max_relative;
    verdict(
        worst <= slack && every_step && (0.35..=0.65).contains(&ratio),
        format!(
            "largest relative energy increase per step {worst:.1e} over {} runs, audit mismatch {:.2e} -> {:.2e} (ratio {ratio:.3})",
            runs.len(),
            coarse.max_relative,
            fine.max_relative
        ),
    )
}

fn monitors(runs: &[(&str, &Run)]) -> Verdict {
    let mut failures = Vec::new();
    let mut rows = 0;
    for (name, r) in runs {
        for row in &r.traj.rows {
            rows += 1;
            for ineq in inequality_monitor(&MonitorInput::from_row(row), &FlowParams::new(1.0, 0.0)) {
                if matches!(ineq.name, "diameter" | "isoperimetric" | "willmore_floor") && !ineq.ok {
                    failures.push(format!(
                        "{name} t = {}: {} {} vs {}",
                        row.t, ineq.name, ineq.lhs, ineq.rhs
                    ));
                }
            }
        }
    }
    let detail = match failures.first() {
        None => format!("diameter, isoperimetric and Willmore floor hold on {rows} rows"),
        Some(f) => format!("{} violations, first: {f}", failures.len()),
    };
    verdict(failures.is_empty(), detail)
}

fn round_point(ell: &Run) -> Verdict {
    let below_8pi = ell.e0 < 8.0 * PI;
    match blowup_analyze(&ell.traj, &ell.rep, 3, RoundnessThresholds::default()) {
        Ok(a) => {
            let last = a.frames.last().unwrap();
            let secs = ell.elapsed.as_secs_f64();
            verdict(
                below_8pi && a.round && secs < 600.0,
                format!(
                    "E0 {:.3} < 8π, {} at t {:.4}, final frame sphericity {:.3}, spread {:.4}, verdict {}, {secs:.0} s",
                    ell.e0,
                    ell.rep.trigger,
                    ell.rep.t_sing,
                    last.sphericity,
                    last.radius_spread,
                    if a.round { "round" } else { "not round" }
                ),
            )
        }
        Err(e) => verdict(false, format!("blowup analysis failed: {e}")),
    }
}

fn sharpness() -> Verdict {
    let params = CatenoidSpheresParams {
        angular: 20,
        ..CatenoidSpheresParams::new(0.1, 2.0)
    };
    let turning = catenoid_spheres_profile(&params).unwrap().turning_number();
    let mesh = catenoid_spheres_with(&params).unwrap();
    let w = willmore_energy(&geometry_report(&mesh).unwrap());
    let in_window = w > 8.0 * PI && w < 8.0 * PI + 1.5;
    let c = StepControl {
        max_steps: 100_000,
        snapshot_every: 2000,
        record_every: 50,
        ..StepControl::default()
    };
    let r = flow(&mesh, FlowParams::new(100.0, 0.0), c);
    match blowup_analyze(&r.traj, &r.rep, 3, RoundnessThresholds::default()) {
        Ok(a) => {
            let last = a.frames.last().unwrap();
            verdict(
                in_window && (turning - 3.0).abs() < 1e-9 && !a.round,
                format!(
                    "W - 8π {:.3}, turning number {turning:.0}, {} at t {:.3e}, final frame sphericity {:.2}, spread {:.2}, verdict {}",
                    w - 8.0 * PI,
                    r.rep.trigger,
                    r.rep.t_sing,
                    last.sphericity,
                    last.radius_spread,
                    if a.round { "round" } else { "not round" }
                ),
            )
        }
        Err(e) => verdict(
            false,
            format!("W - 8π {:.3}, blowup analysis failed: {e}", w - 8.0 * PI),
        ),
    }
}

fn classifier() -> Verdict {
    let sphere = icosphere(1.0, Vec3::zeros(), 3);
    let v = classify_hypotheses(&sphere, &FlowParams::new(1.0, 2.0)).unwrap();
    let eps_ok = rel(v.eps1.unwrap(), 4.0 * PI) < 1e-12 && rel(v.eps2.unwrap(), 4.0 * PI / 3.0) < 1e-12;
    let pure = corpus()
        .iter()
        .all(|(_, m)| classify_hypotheses(m, &FlowParams::new(1.0, 0.0)).unwrap().case == HypothesisCase::PureArea);
    let mut rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let meshes = corpus();
    let mut consistent = 0;
    for i in 0..10 {
        let m = &meshes[i % meshes.len()].1;
        let s = rng.random_range(0.1..10.0);
        let (l1, l2) = (rng.random_range(0.1..3.0), rng.random_range(-3.0..3.0));
        let a = classify_hypotheses(m, &FlowParams::new(l1, l2)).unwrap().case;
        let b = classify_hypotheses(&m.scaled(s), &FlowParams::new(l1 / (s * s), l2 / (s * s * s)))
            .unwrap()
            .case;
        consistent += (a == b) as usize;
    }
    verdict(
        eps_ok && pure && consistent == 10,
        format!(
            "ε1 {:.6} ε2 {:.6} at (1, 2), thm12_i on the corpus: {pure}, scale-consistent {consistent}/10",
            v.eps1.unwrap(),
            v.eps2.unwrap()
        ),
    )
}

fn main() -> ExitCode {
    let mut lines: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut report = |id: u32, name: &'static str, v: Verdict| {
        println!(
            "criterion {id:>2} {} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        lines.push((id, name, v));
    };

    report(1, "discrete geometry exactness", discrete_geometry());
    report(2, "operator convergence", operator_convergence());
    report(3, "gradient fidelity", gradient_fidelity());

    let sphere = flow(
        &icosphere(1.0, Vec3::zeros(), 3),
        FlowParams::new(1.0, 0.0),
        singular_control(),
    );
    report(4, "sphere dynamics vs radius ODE", sphere_dynamics(&sphere));

    let scaled_ellipsoid = ellipsoid(1.2, 1.0, 1.0, 3).unwrap().scaled(0.9);
    let ell = flow(&scaled_ellipsoid, FlowParams::new(1.0, 0.0), singular_control());
    report(
        5,
        "singularity time bound",
        time_bound(&[("sphere", &sphere), ("ellipsoid", &ell)]),
    );

    let stationary = flow(
        &icosphere(2.0, Vec3::zeros(), 4),
        FlowParams::new(1.0, -1.0),
        StepControl {
            max_steps: 10_000,
            snapshot_every: 0,
            ..StepControl::default()
        },
    );
    report(6, "stationary sphere", stationarity(&stationary));
    report(7, "dissipation", dissipation(&[&sphere, &ell, &stationary]));
    report(
        8,
        "inequality monitors",
        monitors(&[("sphere", &sphere), ("ellipsoid", &ell), ("stationary", &stationary)]),
    );
    report(9, "round point", round_point(&ell));
    report(10, "sharpness witness", sharpness());
    report(11, "hypothesis classifier", classifier());

    let failing: Vec<u32> = lines.iter().filter(|(_, _, v)| !v.pass).map(|(id, _, _)| *id).collect();
    println!(
        "{} of {} criteria pass; failing {:?}, documented failures {:?}",
        lines.len() - failing.len(),
        lines.len(),
        failing,
        KNOWN_FAILURES
    );
    if failing == KNOWN_FAILURES {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
