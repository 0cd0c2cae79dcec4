mod common;

use std::f64::consts::PI;

use common::{corpus, rel};
use helfrich_core::ddg::geometry_report;
use helfrich_core::energy::FlowParams;
use helfrich_core::shapes::{ellipsoid, icosphere, torus};
use helfrich_core::theory::{
    analyze_frame, classify_hypotheses, inequality_monitor, singularity_time_bound, sphere_radius_ode, MonitorInput,
    OdeForm,
};
use helfrich_core::{TriMesh, Vec3};
use proptest::prelude::*;

fn base(kind: usize) -> TriMesh {
    match kind {
        0 => icosphere(1.0, Vec3::zeros(), 2),
        1 => ellipsoid(1.2, 1.0, 0.9, 2).unwrap(),
        _ => torus(2.0, 1.0, 24, 12).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn time_bound_grows_with_energy_and_shrinks_with_lambda1(e0 in 4.0 * PI..200.0, de in 1e-3f64..50.0, l1 in 0.01f64..10.0, dl in 1e-3f64..10.0) {
        let t = singularity_time_bound(e0, l1).unwrap();
        prop_assert!(t >= 0.0);
        prop_assert!(singularity_time_bound(e0 + de, l1).unwrap() > t);
        prop_assert!(singularity_time_bound(e0, l1 + dl).unwrap() < t || t == 0.0);
    }

    #[test]
    fn verdict_is_invariant_under_joint_rescaling(kind in 0usize..3, s in 0.05f64..20.0, l1 in 0.05f64..5.0, l2 in -5.0f64..5.0) {
        let m = base(kind);
        let a = classify_hypotheses(&m, &FlowParams::new(l1, l2)).unwrap();
        let b = classify_hypotheses(&m.scaled(s), &FlowParams::new(l1 / (s * s), l2 / s.powi(3))).unwrap();
        prop_assert_eq!(a.case, b.case);
        prop_assert!(rel(b.energy, a.energy) < 1e-10);
    }

    #[test]
    fn radius_ode_matches_closed_form(r0 in 0.1f64..5.0, l1 in 0.1f64..5.0, frac in 0.0f64..0.95) {
        let t_ext = r0 * r0 / (4.0 * l1);
        let ode = sphere_radius_ode(r0, &FlowParams::new(l1, 0.0), t_ext / 2000.0, 10.0 * t_ext, OdeForm::EnergyConsistent).unwrap();
        prop_assert!(rel(ode.extinction_time.unwrap(), t_ext) < 1e-8);
        let t = frac * t_ext;
        let exact = (r0 * r0 - 4.0 * l1 * t).sqrt();
        prop_assert!(rel(ode.radius_at(t).unwrap(), exact) < 1e-4);
    }

    #[test]
    fn negative_pressure_has_a_stationary_sphere(l1 in 0.1f64..5.0, l2 in -5.0f64..-0.1) {
        let r = -2.0 * l1 / l2;
        let ode = sphere_radius_ode(r, &FlowParams::new(l1, l2), 1e-3, 0.1, OdeForm::EnergyConsistent).unwrap();
        prop_assert_eq!(ode.stationary_radius, Some(r));
        prop_assert!(ode.radii.iter().all(|&x| rel(x, r) < 1e-12));
    }

    #[test]
    fn rescaled_frames_have_unit_curvature(kind in 0usize..3, s in 0.01f64..100.0, shift in prop::array::uniform3(-5.0f64..5.0)) {
        let m = base(kind).scaled(s).translated(Vec3::from(shift));
        let frame = analyze_frame(0.0, &m).unwrap();
        prop_assert!(frame.scale > 0.0);
        prop_assert!((0.8..=1.2).contains(&frame.max_curvature));
    }

    #[test]
    fn monitors_hold_on_generated_shapes(a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..2.0, big_r in 1.5f64..4.0, l1 in 0.0f64..3.0, l2 in -3.0f64..3.0) {
        let p = FlowParams::new(l1, l2);
        for m in [ellipsoid(a, b, c, 3).unwrap(), torus(big_r, 1.0, 48, 24).unwrap()] {
            let r = geometry_report(&m).unwrap();
            for ineq in inequality_monitor(&MonitorInput::from_report(&r), &p) {
                prop_assert!(ineq.ok, "{:?}", ineq);
            }
        }
    }
}

#[test]
fn monitors_hold_on_the_corpus() {
    let p = FlowParams::new(1.0, 1.0);
    for (name, m) in corpus() {
        let r = geometry_report(&m).unwrap();
        for ineq in inequality_monitor(&MonitorInput::from_report(&r), &p) {
            assert!(ineq.ok, "{name}: {ineq:?}");
        }
    }
}
