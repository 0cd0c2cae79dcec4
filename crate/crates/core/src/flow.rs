//! Explicit time integration of `∂ₜ f = −grad E(f)` with energy
//! backtracking, trajectory recording and breakdown detection.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::ddg::{self, DdgError, GeometryReport};
use crate::energy::{energy_and_gradient, EnergyError, EnergyParts, FlowParams, GradientField};
use crate::mesh::{load_obj, save_obj, ObjError, TriMesh, Vec3};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("invalid step control: {0}")]
    BadControl(String),
    #[error("time step must be finite and non-negative, got {0}")]
    BadStep(f64),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Obj(#[from] ObjError),
    #[error("trajectory CSV line {line}: {message}")]
    Csv { line: usize, message: String },
}

impl From<DdgError> for FlowError {
    fn from(e: DdgError) -> Self {
        FlowError::Energy(e.into())
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FlowError + '_ {
    move |source| FlowError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Which descent direction the vertices follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Velocity {
    /// The full L²(μ) gradient of the discrete energy.
    Full,
    /// Its component along the area-weighted vertex normal, plus an optional
    /// tangential redistribution (see [`StepControl::tangential_smoothing`]).
    Normal,
}

/// Vertex velocity of one step and the energy dissipation rate it
/// produces, `⟨grad E, v⟩_{L²(μ)}`. The tangential part of the gradient
/// is small, so the redistribution does little work on the energy; what
/// it does is included in the rate.
#[derive(Debug, Clone)]
struct Motion {
    vectors: Vec<Vec3>,
    rate: f64,
}

/// Edge lengths of the initial mesh; their rescaled copies are the rest
/// lengths of the tangential redistribution.
#[derive(Debug, Clone)]
struct RestLengths {
    lengths: Vec<f64>,
    mean: f64,
}

impl RestLengths {
    fn of(mesh: &TriMesh) -> Self {
        let p = mesh.positions();
        let lengths: Vec<f64> = mesh
            .topology()
            .edge_vertices()
            .map(|(a, b)| (p[a] - p[b]).norm())
            .collect();
        let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
        RestLengths { lengths, mean }
    }
}

fn motion(mesh: &TriMesh, grad: GradientField, normals: &[Vec3], control: &StepControl, rest: &RestLengths) -> Motion {
    if control.velocity == Velocity::Full {
        return Motion {
            rate: grad.norm_sq,
            vectors: grad.vectors,
        };
    }
    let normal: Vec<Vec3> = grad.vectors.iter().zip(normals).map(|(g, n)| g.dot(n) * n).collect();
    let mut vectors = normal.clone();
    if control.tangential_smoothing > 0.0 {
        // Edge springs with rest lengths proportional to the initial ones,
        // so a homothetically shrinking mesh feels no force. Their rate is
        // one mean edge of relaxation per mean edge of normal travel.
        let p = mesh.positions();
        let (_, mean_edge) = edge_lengths(mesh);
        let scale = mean_edge / rest.mean;
        let mut force = vec![Vec3::zeros(); p.len()];
        for ((a, b), &l0) in mesh.topology().edge_vertices().zip(&rest.lengths) {
            let e = p[b] - p[a];
            let f = (e.norm() / (scale * l0) - 1.0) * e;
            force[a] += f;
            force[b] -= f;
        }
        let speed = normal.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let k = control.tangential_smoothing * speed / mean_edge;
        let tangential = force.iter().zip(normals).map(|(f, n)| -k * (f - f.dot(n) * n));
        vectors.iter_mut().zip(tangential).for_each(|(v, t)| *v += t);
    }
    let rate = grad.pair(&vectors);
    Motion { vectors, rate }
}

/// Step-size policy and stopping rules.
#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    /// Multiplier of the `h⁴` stability bound.
    pub safety: f64,
    /// First trial step; the stability bound when `None`.
    pub dt_init: Option<f64>,
    /// The run stops when the step falls below `dt_min_ratio` times the
    /// first accepted step.
    pub dt_min_ratio: f64,
    pub max_steps: usize,
    /// Optional final time.
    pub t_end: Option<f64>,
    pub energy_backtrack: bool,
    pub velocity: Velocity,
    /// Strength of the tangential mesh redistribution in
    /// [`Velocity::Normal`] mode; 0 disables it. It moves vertices within
    /// their tangent planes only, so the surface moves as under the
    /// normal flow up to reparametrization.
    pub tangential_smoothing: f64,
    /// Accepted energy increase, relative to `max(|E|, 1)`, that is
    /// attributed to rounding.
    pub energy_slack: f64,
    /// Keep a snapshot every this many accepted steps (0 keeps none besides
    /// the initial and final meshes).
    pub snapshot_every: usize,
    /// Record a trajectory row every this many accepted steps.
    pub record_every: usize,
    /// Curvature blowup when `max |A|` times the mean edge length around
    /// that vertex exceeds this.
    pub curvature_threshold: f64,
    /// Edge collapse when the shortest edge falls below this fraction of
    /// the initial mean edge.
    pub edge_collapse_ratio: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            safety: 0.1,
            dt_init: None,
            dt_min_ratio: 1e-4,
            max_steps: 1_000_000,
            t_end: None,
            energy_backtrack: true,
            velocity: Velocity::Normal,
            tangential_smoothing: 1.0,
            energy_slack: 1e-14,
            snapshot_every: 1000,
            record_every: 1,
            curvature_threshold: 1.0,
            edge_collapse_ratio: 1e-3,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |m: &str| Err(FlowError::BadControl(m.to_string()));
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad("safety must lie in (0, 1]");
        }
        if !(self.dt_min_ratio > 0.0 && self.dt_min_ratio < 1.0) {
            return bad("dt_min_ratio must lie in (0, 1)");
        }
        if let Some(dt) = self.dt_init {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad("dt_init must be positive");
            }
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0) {
                return bad("t_end must be positive");
            }
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        if !(self.tangential_smoothing >= 0.0 && self.tangential_smoothing.is_finite()) {
            return bad("tangential_smoothing must be non-negative");
        }
        if !(self.energy_slack >= 0.0) || !(self.curvature_threshold > 0.0) || !(self.edge_collapse_ratio > 0.0) {
            return bad("thresholds must be positive");
        }
        Ok(())
    }
}

/// One recorded instant of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub energy: f64,
    pub willmore: f64,
    pub area: f64,
    pub volume: f64,
    pub diameter: f64,
    pub max_mean_curv: f64,
    pub max_tracefree_sq: f64,
    /// Step that led to this row (0 for the initial row).
    pub dt: f64,
    /// Dissipation rate `⟨grad E, v⟩_{L²(μ)}` of the velocity at this row's
    /// mesh; `‖grad E‖²` for the full gradient.
    pub grad_norm_sq: f64,
}

pub const CSV_HEADER: &str = "t,E,W,area,vol,diam,maxH,maxA0sq,dt,gradnorm2";

impl TrajectoryRow {
    fn fields(&self) -> [f64; 10] {
        [
            self.t,
            self.energy,
            self.willmore,
            self.area,
            self.volume,
            self.diameter,
            self.max_mean_curv,
            self.max_tracefree_sq,
            self.dt,
            self.grad_norm_sq,
        ]
    }

    fn from_fields(f: [f64; 10]) -> Self {
        TrajectoryRow {
            t: f[0],
            energy: f[1],
            willmore: f[2],
            area: f[3],
            volume: f[4],
            diameter: f[5],
            max_mean_curv: f[6],
            max_tracefree_sq: f[7],
            dt: f[8],
            grad_norm_sq: f[9],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub mesh: TriMesh,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub snapshots: Vec<Snapshot>,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last_row(&self) -> Option<&TrajectoryRow> {
        self.rows.last()
    }

    pub fn final_mesh(&self) -> Option<&TriMesh> {
        self.snapshots.last().map(|s| &s.mesh)
    }

    /// Rows as CSV with [`CSV_HEADER`]; floats use round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut write = || -> csv::Result<()> {
            w.write_record(CSV_HEADER.split(','))?;
            for row in &self.rows {
                w.write_record(row.fields().iter().map(|x| format!("{x:?}")))?;
            }
            w.flush()?;
            Ok(())
        };
        write().expect("writing to memory");
        String::from_utf8(w.into_inner().expect("flushed")).expect("ASCII output")
    }

    pub fn rows_from_csv(text: &str) -> Result<Vec<TrajectoryRow>, FlowError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader.headers().map_err(csv_err)?;
        if header.iter().map(str::trim).ne(CSV_HEADER.split(',')) {
            return Err(FlowError::Csv {
                line: 1,
                message: format!("expected header {CSV_HEADER:?}"),
            });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_err)?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let mut f = [0.0; 10];
            for (slot, c) in f.iter_mut().zip(&record) {
                *slot = c.trim().parse().map_err(|_| FlowError::Csv {
                    line,
                    message: format!("invalid number {c:?}"),
                })?;
            }
            rows.push(TrajectoryRow::from_fields(f));
        }
        Ok(rows)
    }

    /// Writes `trajectory.csv`, numbered snapshot OBJs and a
    /// `snapshots.csv` index (`index,step,t,file`).
    pub fn export(&self, dir: &Path) -> Result<(), FlowError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("trajectory.csv");
        fs::write(&path, self.to_csv()).map_err(io_err(&path))?;
        let path = dir.join("snapshots.csv");
        let mut index = csv::Writer::from_path(&path).map_err(csv_err_at(&path))?;
        index
            .write_record(["index", "step", "t", "file"])
            .map_err(csv_err_at(&path))?;
        for (i, s) in self.snapshots.iter().enumerate() {
            let name = format!("snapshot_{i:05}.obj");
            save_obj(&s.mesh, dir.join(&name))?;
            index
                .write_record([i.to_string(), s.step.to_string(), format!("{:?}", s.t), name])
                .map_err(csv_err_at(&path))?;
        }
        index.flush().map_err(io_err(&path))
    }

    /// Reads a directory written by [`Trajectory::export`]. The rejected
    /// step count is not stored and comes back as zero.
    pub fn import(dir: &Path) -> Result<Self, FlowError> {
        let path = dir.join("trajectory.csv");
        let rows = Self::rows_from_csv(&fs::read_to_string(&path).map_err(io_err(&path))?)?;
        let path = dir.join("snapshots.csv");
        let mut index = csv::Reader::from_path(&path).map_err(csv_err_at(&path))?;
        let mut snapshots = Vec::new();
        for record in index.records() {
            let record = record.map_err(csv_err_at(&path))?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let bad = || FlowError::Csv {
                line,
                message: "expected index,step,t,file".to_string(),
            };
            let step = record.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let t = record.get(2).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let file = record.get(3).ok_or_else(bad)?;
            snapshots.push(Snapshot {
                step,
                t,
                mesh: load_obj(dir.join(file))?,
            });
        }
        Ok(Trajectory {
            rows,
            snapshots,
            rejected_steps: 0,
        })
    }
}

fn csv_err(e: csv::Error) -> FlowError {
    csv_err_at(Path::new("<memory>"))(e)
}

fn csv_err_at(path: &Path) -> impl Fn(csv::Error) -> FlowError + '_ {
    move |e| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        match e.into_kind() {
            csv::ErrorKind::Io(source) => FlowError::Io {
                path: path.display().to_string(),
                source,
            },
            kind => FlowError::Csv {
                line,
                message: format!("{kind:?}"),
            },
        }
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    DtUnderflow,
    CurvatureBlowup,
    EdgeCollapse,
    MaxSteps,
    TimeLimit,
}

impl StopReason {
    /// The budget stops are not singularities.
    pub fn is_singular(self) -> bool {
        !matches!(self, StopReason::MaxSteps | StopReason::TimeLimit)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::DtUnderflow => "dt_underflow",
            StopReason::CurvatureBlowup => "curvature_blowup",
            StopReason::EdgeCollapse => "edge_collapse",
            StopReason::MaxSteps => "max_steps",
            StopReason::TimeLimit => "time_limit",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopReason {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [
            StopReason::DtUnderflow,
            StopReason::CurvatureBlowup,
            StopReason::EdgeCollapse,
            StopReason::MaxSteps,
            StopReason::TimeLimit,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
        .ok_or_else(|| format!("unknown stop reason {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityReport {
    pub detected: bool,
    /// Time of the last accepted step.
    pub t_sing: f64,
    pub trigger: StopReason,
    /// `1 / max |A|` on the last accepted mesh.
    pub curvature_scale: f64,
    /// Position of the vertex with the largest `|A|`.
    pub location: Vec3,
    pub steps: usize,
}

/// Forward-Euler trial step `v ← v − dt g_v`. Returns the new mesh and
/// whether the energy did not increase; a rejected step returns the input.
pub fn step(mesh: &TriMesh, params: &FlowParams, dt: f64) -> Result<(TriMesh, bool), FlowError> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(FlowError::BadStep(dt));
    }
    let (parts, grad) = energy_and_gradient(mesh, params)?;
    let e0 = parts.total(params);
    let trial = advance(mesh, &grad.vectors, dt);
    let accepted = match crate::energy::energy_parts(&trial) {
        Ok(p) => p.total(params) <= e0,
        Err(_) => false,
    };
    Ok(if accepted { (trial, true) } else { (mesh.clone(), false) })
}

fn advance(mesh: &TriMesh, velocity: &[Vec3], dt: f64) -> TriMesh {
    let positions = mesh.positions().iter().zip(velocity).map(|(x, g)| x - dt * g).collect();
    mesh.with_positions(positions).expect("same vertex count")
}

fn edge_lengths(mesh: &TriMesh) -> (f64, f64) {
    let p = mesh.positions();
    let (mut min, mut sum) = (f64::INFINITY, 0.0);
    for (a, b) in mesh.topology().edge_vertices() {
        let l = (p[a] - p[b]).norm();
        min = min.min(l);
        sum += l;
    }
    (min, sum / mesh.edge_count() as f64)
}

fn local_mean_edge(mesh: &TriMesh, v: usize) -> f64 {
    let p = mesh.positions();
    let (sum, count) = mesh
        .topology()
        .neighbors(v)
        .fold((0.0, 0), |(s, c), u| (s + (p[u] - p[v]).norm(), c + 1));
    sum / count as f64
}

/// The `h⁴` step bound, damped where the velocity is large on the scale
/// of the shortest edge.
pub fn stable_step(mesh: &TriMesh, velocity: &[Vec3], safety: f64) -> f64 {
    let (h, _) = edge_lengths(mesh);
    let g_max = velocity.iter().fold(0.0f64, |m, g| m.max(g.norm()));
    safety * h.powi(4) / (1.0 + g_max * h.powi(3))
}

struct State {
    parts: EnergyParts,
    motion: Motion,
    /// Without the diameter, which only recorded rows need.
    report: GeometryReport,
}

fn make_row(t: f64, dt: f64, params: &FlowParams, mesh: &TriMesh, state: &State) -> TrajectoryRow {
    let (parts, motion, report) = (&state.parts, &state.motion, &state.report);
    TrajectoryRow {
        t,
        energy: parts.total(params),
        willmore: parts.willmore,
        area: parts.area,
        volume: parts.volume,
        diameter: ddg::diameter(mesh),
        max_mean_curv: report.max_abs_mean_curv(),
        max_tracefree_sq: report.max_tracefree_sq(),
        dt,
        grad_norm_sq: motion.rate,
    }
}

/// Integrates the flow until a breakdown trigger or a budget stop.
pub fn run(
    mesh: &TriMesh,
    params: &FlowParams,
    control: &StepControl,
) -> Result<(Trajectory, SingularityReport), FlowError> {
    control.validate()?;
    let (_, initial_mean_edge) = edge_lengths(mesh);
    let rest = RestLengths::of(mesh);
    let mut current = mesh.clone();
    let evaluate = |m: &TriMesh, e_max: Option<f64>| -> Result<Option<State>, FlowError> {
        let (parts, grad) = energy_and_gradient(m, params)?;
        if e_max.is_some_and(|e| parts.total(params) > e) {
            return Ok(None);
        }
        let report = ddg::local_geometry_report(m)?;
        let motion = motion(m, grad, &report.normal, control, &rest);
        Ok(Some(State { parts, motion, report }))
    };
    let mut state = evaluate(&current, None)?.expect("no energy bound");
    let mut t = 0.0;
    let mut traj = Trajectory {
        rows: vec![make_row(0.0, 0.0, params, &current, &state)],
        snapshots: vec![Snapshot {
            step: 0,
            t: 0.0,
            mesh: current.clone(),
        }],
        rejected_steps: 0,
    };

    let mut dt = control
        .dt_init
        .unwrap_or_else(|| stable_step(&current, &state.motion.vectors, control.safety));
    let mut dt_first: Option<f64> = None;
    let mut streak = 0usize;
    let mut accepted = 0usize;
    let mut last_recorded = 0usize;

    let reason = loop {
        if accepted >= control.max_steps {
            break StopReason::MaxSteps;
        }
        if let Some(t_end) = control.t_end {
            if t >= t_end * (1.0 - 1e-12) {
                break StopReason::TimeLimit;
            }
        }
        let (max_v, max_a) = state.report.max_curvature();
        if max_a * local_mean_edge(&current, max_v) > control.curvature_threshold {
            break StopReason::CurvatureBlowup;
        }
        let (h_min, _) = edge_lengths(&current);
        if h_min < control.edge_collapse_ratio * initial_mean_edge {
            break StopReason::EdgeCollapse;
        }

        let cap = stable_step(&current, &state.motion.vectors, control.safety);
        dt = dt.min(cap);
        if let Some(t_end) = control.t_end {
            dt = dt.min(t_end - t);
        }
        if let Some(first) = dt_first {
            if dt < control.dt_min_ratio * first {
                break StopReason::DtUnderflow;
            }
        }

        let e0 = state.parts.total(params);
        let trial = advance(&current, &state.motion.vectors, dt);
        let bound = control
            .energy_backtrack
            .then(|| e0 + control.energy_slack * e0.abs().max(1.0));
        // Degenerate trial geometry counts as a rejection.
        let Ok(Some(next)) = evaluate(&trial, bound) else {
            traj.rejected_steps += 1;
            streak = 0;
            dt *= 0.5;
            if dt_first.is_none() && control.dt_init.is_none() {
                // Without a reference step, underflow is judged against the
                // stability bound.
                if dt < control.dt_min_ratio * cap {
                    break StopReason::DtUnderflow;
                }
            }
            continue;
        };
        current = trial;
        state = next;
        t += dt;
        accepted += 1;
        dt_first.get_or_insert(dt);

        if accepted - last_recorded >= control.record_every {
            traj.rows.push(make_row(t, dt, params, &current, &state));
            last_recorded = accepted;
        }
        if control.snapshot_every > 0 && accepted.is_multiple_of(control.snapshot_every) {
            traj.snapshots.push(Snapshot {
                step: accepted,
                t,
                mesh: current.clone(),
            });
        }

        streak += 1;
        if streak >= 5 {
            dt *= 2.0;
            streak = 0;
        }
    };

    if last_recorded != accepted {
        traj.rows
            .push(make_row(t, traj_last_dt(&traj, dt), params, &current, &state));
    }
    if traj.snapshots.last().map(|s| s.step) != Some(accepted) {
        traj.snapshots.push(Snapshot {
            step: accepted,
            t,
            mesh: current.clone(),
        });
    }
    let (max_v, max_a) = state.report.max_curvature();
    let singularity = SingularityReport {
        detected: reason.is_singular(),
        t_sing: t,
        trigger: reason,
        curvature_scale: 1.0 / max_a,
        location: current.positions()[max_v],
        steps: accepted,
    };
    Ok((traj, singularity))
}

fn traj_last_dt(traj: &Trajectory, fallback: f64) -> f64 {
    traj.rows.last().map(|r| r.dt).filter(|&d| d > 0.0).unwrap_or(fallback)
}

/// Mismatch between the discrete energy rate and `−‖grad‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationAudit {
    /// Largest `|ΔE/Δt + ‖g‖²| / ‖g‖²` over row pairs with `‖g‖²` above
    /// the floor.
    pub max_relative: f64,
    /// Largest `|ΔE/Δt + ‖g‖²|` over all consecutive row pairs.
    pub max_absolute: f64,
    /// Largest energy increase between consecutive rows (≤ 0 when the
    /// energy never rises).
    pub max_energy_increase: f64,
    pub pairs: usize,
}

/// Rates below this are compared in absolute terms only.
pub const DISSIPATION_FLOOR: f64 = 1e-8;

/// Compares `(E(t + dt) − E(t)) / dt` with `−‖grad E(t)‖²` row by row.
/// Only consecutive rows one accepted step apart are meaningful, so the
/// trajectory should be recorded with `record_every = 1`.
pub fn dissipation_audit(trajectory: &Trajectory) -> Option<DissipationAudit> {
    let rows = &trajectory.rows;
    if rows.len() < 2 {
        return None;
    }
    let mut audit = DissipationAudit {
        max_relative: 0.0,
        max_absolute: 0.0,
        max_energy_increase: f64::NEG_INFINITY,
        pairs: 0,
    };
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let dt = b.t - a.t;
        if !(dt > 0.0) {
            continue;
        }
        let rate = (b.energy - a.energy) / dt;
        let mismatch = (rate + a.grad_norm_sq).abs();
        audit.max_absolute = audit.max_absolute.max(mismatch);
        if a.grad_norm_sq > DISSIPATION_FLOOR {
            audit.max_relative = audit.max_relative.max(mismatch / a.grad_norm_sq);
        }
        audit.max_energy_increase = audit.max_energy_increase.max(b.energy - a.energy);
        audit.pairs += 1;
    }
    Some(audit)
}
