use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use helfrich_core::ddg::{geometry_report, willmore_energy, GeometryReport};
use helfrich_core::energy::{discrete_gradient, FlowParams};
use helfrich_core::flow::{run, SingularityReport, StopReason, Trajectory};
use helfrich_core::mesh::{load_obj, save_obj};
use helfrich_core::theory::{
    blowup_analyze, classify_hypotheses, inequality_monitor, singularity_time_bound, HypothesisVerdict, Inequality,
    MonitorInput, Relation, RoundnessThresholds, TheoryError,
};
use helfrich_core::{TriMesh, Vec3};

use crate::config::{RunConfig, Settings, Source};
use crate::error::CliError;
use crate::shapes::generate;

/// Whether any monitored inequality failed.
pub type Outcome = Result<bool, CliError>;

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn report_of(mesh: &TriMesh) -> Result<GeometryReport, CliError> {
    geometry_report(mesh).map_err(|e| CliError::Data(e.to_string()))
}

fn theory(e: TheoryError) -> CliError {
    match e {
        TheoryError::NoSingularity | TheoryError::TooFewSnapshots { .. } => CliError::Precondition(e.to_string()),
        _ => CliError::Data(e.to_string()),
    }
}

fn summary(mesh: &TriMesh, report: &GeometryReport, params: &FlowParams) -> String {
    let w = willmore_energy(report);
    let mut s = String::new();
    let _ = writeln!(s, "vertices = {}", mesh.vertex_count());
    let _ = writeln!(s, "faces = {}", mesh.face_count());
    let _ = writeln!(s, "euler_characteristic = {}", mesh.euler_characteristic());
    let _ = writeln!(s, "area = {:.10}", report.area);
    let _ = writeln!(s, "volume = {:.10}", report.signed_volume);
    let _ = writeln!(s, "diameter = {:.10}", report.diameter);
    let _ = writeln!(s, "willmore = {:.10}", w);
    let _ = writeln!(s, "willmore_over_4pi = {:.10}", w / (4.0 * PI));
    let _ = writeln!(
        s,
        "energy = {:.10} (lambda1 = {}, lambda2 = {})",
        w + params.lambda1 * report.area + params.lambda2 * report.signed_volume,
        params.lambda1,
        params.lambda2
    );
    s
}

fn relation(r: Relation) -> &'static str {
    match r {
        Relation::LessEq => "<=",
        Relation::GreaterEq => ">=",
    }
}

fn inequality_line(i: &Inequality) -> String {
    format!(
        "{} : {:.10} {} {:.10} -> {}",
        i.name,
        i.lhs,
        relation(i.relation),
        i.rhs,
        if i.ok { "ok" } else { "VIOLATED" }
    )
}

fn hypothesis_lines(v: &HypothesisVerdict) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "case = {}", v.case);
    match (v.eps1, v.eps2) {
        (Some(e1), Some(e2)) => {
            let _ = writeln!(s, "eps1 = {e1:.10}");
            let _ = writeln!(s, "eps2 = {e2:.10}");
        }
        _ => {
            let _ = writeln!(s, "eps1 = none (lambda2 = 0)");
            let _ = writeln!(s, "eps2 = none (lambda2 = 0)");
        }
    }
    let _ = writeln!(s, "embedded = {}", v.embedded);
    for r in &v.reasons {
        let _ = writeln!(s, "reason = {r}");
    }
    s
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn write_monitor_rows<W: std::io::Write>(
    w: &mut csv::Writer<W>,
    t: f64,
    rows: &[Inequality],
    path: &Path,
) -> Result<(), CliError> {
    for i in rows {
        w.write_record([
            format!("{t:?}"),
            i.name.to_string(),
            format!("{:?}", i.lhs),
            relation(i.relation).to_string(),
            format!("{:?}", i.rhs),
            i.ok.to_string(),
        ])
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

const MONITOR_HEADER: [&str; 6] = ["t", "name", "lhs", "relation", "rhs", "ok"];

pub fn gen(name: &str, shape: &Settings, params: &FlowParams, output: Option<&Path>) -> Result<String, CliError> {
    let mesh = generate(name, shape)?;
    let report = report_of(&mesh)?;
    if let Some(path) = output {
        save_obj(&mesh, path).map_err(|e| CliError::Output(e.to_string()))?;
    }
    let mut s = format!("generator = {name}\n");
    if let Some(path) = output {
        let _ = writeln!(s, "file = {}", path.display());
    }
    s.push_str(&summary(&mesh, &report, params));
    Ok(s)
}

pub fn check(mesh_path: &Path, params: &FlowParams, csv_out: Option<&Path>) -> Result<(String, bool), CliError> {
    let mesh = load_obj(mesh_path).map_err(|e| CliError::Input(e.to_string()))?;
    let report = report_of(&mesh)?;
    let monitors = inequality_monitor(&MonitorInput::from_report(&report), params);
    let mut s = format!("mesh = {}\n", mesh_path.display());
    s.push_str(&summary(&mesh, &report, params));
    s.push_str("[monitors]\n");
    for i in &monitors {
        s.push_str(&inequality_line(i));
        s.push('\n');
    }
    s.push_str("[hypotheses]\n");
    if params.lambda1 > 0.0 {
        let v = classify_hypotheses(&mesh, params).map_err(theory)?;
        s.push_str(&hypothesis_lines(&v));
    } else {
        s.push_str("case = not classified (lambda1 must be positive)\n");
    }
    if let Some(path) = csv_out {
        let mut w = csv_writer(path)?;
        w.write_record(MONITOR_HEADER)
            .map_err(|e| CliError::Output(e.to_string()))?;
        write_monitor_rows(&mut w, 0.0, &monitors, path)?;
        w.flush().map_err(|e| CliError::Output(e.to_string()))?;
    }
    Ok((s, monitors.iter().all(|i| i.ok)))
}

fn singularity_text(r: &SingularityReport) -> String {
    format!(
        "detected = {}\ntrigger = {}\nt_sing = {:?}\ncurvature_scale = {:?}\nlocation_x = {:?}\nlocation_y = {:?}\nlocation_z = {:?}\nsteps = {}\n",
        r.detected, r.trigger, r.t_sing, r.curvature_scale, r.location.x, r.location.y, r.location.z, r.steps
    )
}

fn read_singularity(dir: &Path) -> Result<SingularityReport, CliError> {
    let path = dir.join("singularity.txt");
    let text = fs::read_to_string(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let s = Settings::parse(&text, &path.display().to_string())?;
    let need = |k: &str| {
        s.raw(k)
            .ok_or_else(|| CliError::Input(format!("{}: missing {k}", path.display())))
    };
    need("trigger")?;
    let trigger: StopReason = need("trigger")?.parse().map_err(CliError::Input)?;
    let num = |k: &str| -> Result<f64, CliError> {
        need(k)?
            .parse()
            .map_err(|_| CliError::Input(format!("{}: invalid {k}", path.display())))
    };
    Ok(SingularityReport {
        detected: need("detected")? == "true",
        t_sing: num("t_sing")?,
        trigger,
        curvature_scale: num("curvature_scale")?,
        location: Vec3::new(num("location_x")?, num("location_y")?, num("location_z")?),
        steps: need("steps")?
            .parse()
            .map_err(|_| CliError::Input(format!("{}: invalid steps", path.display())))?,
    })
}

pub fn flow(config: &RunConfig) -> Outcome {
    let mesh = match &config.source {
        Source::Generator(name) => generate(name, &config.settings)?,
        Source::Obj(path) => load_obj(path).map_err(|e| CliError::Input(e.to_string()))?,
    };
    let params = config.params;
    let initial = report_of(&mesh)?;
    let e0 = willmore_energy(&initial) + params.lambda1 * initial.area + params.lambda2 * initial.signed_volume;
    let verdict = (params.lambda1 > 0.0)
        .then(|| classify_hypotheses(&mesh, &params))
        .transpose()
        .map_err(theory)?;

    let (traj, sing) = run(&mesh, &params, &config.control).map_err(|e| CliError::Data(e.to_string()))?;
    let dir = &config.output;
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    traj.export(dir).map_err(|e| CliError::Output(e.to_string()))?;
    write(&dir.join("singularity.txt"), &singularity_text(&sing))?;

    // Every row, every inequality.
    let path = dir.join("monitors.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(MONITOR_HEADER)
        .map_err(|e| CliError::Output(e.to_string()))?;
    let mut stats: Vec<(Inequality, usize, usize, Inequality)> = Vec::new();
    for row in &traj.rows {
        let rows = inequality_monitor(&MonitorInput::from_row(row), &params);
        write_monitor_rows(&mut w, row.t, &rows, &path)?;
        for i in rows {
            match stats.iter_mut().find(|s| s.0.name == i.name) {
                Some(s) => {
                    s.1 += 1;
                    s.2 += usize::from(!i.ok);
                    s.3 = i;
                }
                None => stats.push((i.clone(), 1, usize::from(!i.ok), i)),
            }
        }
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))?;
    let violated = stats.iter().any(|s| s.2 > 0);

    let mut s = String::from("# helfrich flow report\n[parameters]\n");
    for (k, v) in config.settings.entries() {
        let _ = writeln!(s, "{k} = {v}");
    }
    s.push_str("[initial]\n");
    s.push_str(&summary(&mesh, &initial, &params));
    s.push_str("[hypotheses]\n");
    match &verdict {
        Some(v) => s.push_str(&hypothesis_lines(v)),
        None => s.push_str("case = not classified (lambda1 must be positive)\n"),
    }
    s.push_str("[run]\n");
    let _ = writeln!(s, "stop = {}", sing.trigger);
    let _ = writeln!(
        s,
        "singularity = {}",
        if sing.detected {
            "detected"
        } else {
            "none within budget"
        }
    );
    let _ = writeln!(s, "steps = {}", sing.steps);
    let _ = writeln!(s, "rejected_steps = {}", traj.rejected_steps);
    let _ = writeln!(s, "t_final = {:.10}", sing.t_sing);
    if let Some(last) = traj.last_row() {
        let _ = writeln!(s, "energy_final = {:.10}", last.energy);
    }
    if sing.detected {
        let _ = writeln!(s, "t_sing = {:.10}", sing.t_sing);
        let _ = writeln!(s, "curvature_scale = {:.6e}", sing.curvature_scale);
        match singularity_time_bound(e0, params.lambda1) {
            Ok(bound) => {
                // The bound is proved for λ₂ = 0 and for λ₂ > 0 with an
                // embedded start below 8π.
                let applies = params.lambda2 == 0.0
                    || (params.lambda2 > 0.0 && verdict.as_ref().is_some_and(|v| v.embedded) && e0 <= 8.0 * PI);
                let _ = writeln!(s, "time_bound = {bound:.10} ((E0^2 - 16 pi^2) / (2 pi^2 lambda1^2))");
                let _ = writeln!(s, "time_bound_applies = {applies}");
                let _ = writeln!(s, "t_sing_within_bound = {}", sing.t_sing <= bound);
            }
            Err(e) => {
                let _ = writeln!(s, "time_bound = unavailable ({e})");
            }
        }
    }
    if let Some(final_mesh) = traj.final_mesh() {
        let g = discrete_gradient(final_mesh, &params).map_err(|e| CliError::Data(e.to_string()))?;
        let norm = g.norm_sq.sqrt();
        let _ = writeln!(s, "final_gradient_norm = {norm:.6e}");
        let _ = writeln!(
            s,
            "gradient_below_tolerance = {} (tolerance {})",
            norm < config.grad_tolerance,
            config.grad_tolerance
        );
    }
    s.push_str("[monitors]\n");
    for (first, rows, failures, last) in &stats {
        let _ = writeln!(s, "{}: rows = {rows}, violations = {failures}", first.name);
        let _ = writeln!(s, "  initial {}", inequality_line(first));
        let _ = writeln!(s, "  final   {}", inequality_line(last));
    }
    let _ = writeln!(s, "monitors_ok = {}", !violated);
    write(&dir.join("report.txt"), &s)?;
    print!("{s}");
    Ok(violated)
}

pub fn blowup(dir: &Path, frames: usize, thresholds: RoundnessThresholds) -> Result<String, CliError> {
    let sing = read_singularity(dir)?;
    if !sing.detected {
        return Err(CliError::Precondition(format!(
            "the run in {} stopped with {} and has no singularity",
            dir.display(),
            sing.trigger
        )));
    }
    let traj = Trajectory::import(dir).map_err(|e| CliError::Input(e.to_string()))?;
    let analysis = blowup_analyze(&traj, &sing, frames, thresholds).map_err(theory)?;
    let out = dir.join("blowup");
    fs::create_dir_all(&out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;

    let path = out.join("frames.csv");
    let mut w = csv_writer(&path)?;
    let err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    w.write_record([
        "frame",
        "t",
        "x",
        "y",
        "z",
        "scale",
        "sphericity",
        "radius_spread",
        "max_curvature",
        "willmore_grad_norm",
    ])
    .map_err(err)?;
    let mut s = format!(
        "# helfrich blowup report\nrun = {}\nt_sing = {:.10}\ntrigger = {}\n",
        dir.display(),
        sing.t_sing,
        sing.trigger
    );
    for (i, f) in analysis.frames.iter().enumerate() {
        save_obj(&f.mesh, out.join(format!("frame_{i:03}.obj"))).map_err(|e| CliError::Output(e.to_string()))?;
        w.write_record([
            i.to_string(),
            format!("{:?}", f.t),
            format!("{:?}", f.center.x),
            format!("{:?}", f.center.y),
            format!("{:?}", f.center.z),
            format!("{:?}", f.scale),
            format!("{:?}", f.sphericity),
            format!("{:?}", f.radius_spread),
            format!("{:?}", f.max_curvature),
            format!("{:?}", f.willmore_grad_norm),
        ])
        .map_err(err)?;
        let _ = writeln!(
            s,
            "frame {i}: t = {:.10}, scale = {:.6e}, sphericity = {:.6}, radius_spread = {:.6}, max_curvature = {:.4}, willmore_grad_norm = {:.6e}",
            f.t, f.scale, f.sphericity, f.radius_spread, f.max_curvature, f.willmore_grad_norm
        );
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))?;
    let _ = writeln!(
        s,
        "thresholds = sphericity < {}, radius_spread < {}",
        analysis.thresholds.sphericity, analysis.thresholds.radius_spread
    );
    let _ = writeln!(s, "verdict = {}", if analysis.round { "round" } else { "not-round" });
    write(&out.join("blowup.txt"), &s)?;
    Ok(s)
}
