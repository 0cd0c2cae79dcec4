mod commands;
mod config;
mod error;
mod shapes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use helfrich_core::energy::FlowParams;
use helfrich_core::theory::RoundnessThresholds;

use config::{RunConfig, Settings};
use error::{CliError, EXIT_VIOLATION};

const EXIT_CODES: &str = "\
Exit codes:
  0   success
  2   an inequality monitor was violated
  3   analysis precondition not met (e.g. no singularity to blow up)
  64  usage or configuration error, including a missing config file
  65  unusable input data (invalid mesh, failed numerics)
  66  input file or run directory not readable
  73  output not writable

Environment:
  HELFRICH_THREADS  maximum number of worker threads";

/// Laboratory for the constrained Willmore (Helfrich) gradient flow of
/// closed triangulated surfaces.
#[derive(Parser, Debug)]
#[command(name = "helfrich", version, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a corpus surface and print its geometry.
    Gen {
        /// icosphere, ellipsoid, torus, biconcave or catenoid-spheres.
        generator: String,
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda2: f64,
        /// OBJ file to write.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the flow and write trajectory.csv, monitors.csv, snapshots and report.txt.
    #[command(after_help = "Configuration keys (flat `key = value`, flags override the file):
  shape | mesh, output, lambda1, lambda2, safety, dt_init, dt_min_ratio,
  max_steps, t_end, velocity (normal|full), tangential_smoothing,
  snapshot_every, record_every, curvature_threshold, edge_collapse_ratio,
  grad_tolerance, and the generator parameters radius, subdiv, a, b, c,
  R, r, n_u, n_v, neck, blend, cap_angle, sphere_radius, resolution.")]
    Flow(FlowArgs),
    /// Rescale the last snapshots of a singular run and judge roundness.
    Blowup {
        /// Output directory of a flow run.
        dir: PathBuf,
        #[arg(long, default_value_t = 3)]
        frames: usize,
        #[arg(long, default_value_t = RoundnessThresholds::default().sphericity)]
        sphericity: f64,
        #[arg(long, default_value_t = RoundnessThresholds::default().radius_spread)]
        spread: f64,
    },
    /// Geometry, inequality monitors and hypothesis verdict of one mesh.
    Check {
        mesh: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda2: f64,
        /// Also write the monitors as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct ShapeArgs {
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    subdiv: Option<u32>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Torus center-line radius.
    #[arg(long = "R")]
    big_r: Option<f64>,
    /// Torus tube radius.
    #[arg(long = "r")]
    small_r: Option<f64>,
    #[arg(long)]
    n_u: Option<usize>,
    #[arg(long)]
    n_v: Option<usize>,
    /// Catenoid waist radius.
    #[arg(long)]
    neck: Option<f64>,
    #[arg(long)]
    blend: Option<f64>,
    #[arg(long)]
    cap_angle: Option<f64>,
    #[arg(long)]
    sphere_radius: Option<f64>,
    /// Vertices per ring of surfaces of revolution.
    #[arg(long)]
    resolution: Option<usize>,
}

impl ShapeArgs {
    fn apply(&self, s: &mut Settings) {
        let floats = [
            ("radius", self.radius),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("R", self.big_r),
            ("r", self.small_r),
            ("neck", self.neck),
            ("blend", self.blend),
            ("cap_angle", self.cap_angle),
            ("sphere_radius", self.sphere_radius),
        ];
        for (k, v) in floats {
            if let Some(v) = v {
                s.set(k, v);
            }
        }
        let counts = [("n_u", self.n_u), ("n_v", self.n_v), ("resolution", self.resolution)];
        for (k, v) in counts {
            if let Some(v) = v {
                s.set(k, v);
            }
        }
        if let Some(v) = self.subdiv {
            s.set("subdiv", v);
        }
    }
}

#[derive(Args, Debug)]
struct FlowArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generator name.
    #[arg(long)]
    shape: Option<String>,
    /// Input OBJ file instead of a generator.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[command(flatten)]
    shape_args: ShapeArgs,
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda2: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    safety: Option<f64>,
    #[arg(long)]
    snapshot_every: Option<usize>,
    #[arg(long)]
    record_every: Option<usize>,
    /// normal or full.
    #[arg(long)]
    velocity: Option<String>,
    /// Output directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Any other configuration key, as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl FlowArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        for pair in &self.set {
            s.set_pair(pair)?;
        }
        if let Some(v) = &self.shape {
            s.set("shape", v);
        }
        if let Some(v) = &self.mesh {
            s.set("mesh", v.display());
        }
        self.shape_args.apply(&mut s);
        let floats = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("t_end", self.t_end),
            ("safety", self.safety),
        ];
        for (k, v) in floats {
            if let Some(v) = v {
                s.set(k, v);
            }
        }
        let counts = [
            ("max_steps", self.max_steps),
            ("snapshot_every", self.snapshot_every),
            ("record_every", self.record_every),
        ];
        for (k, v) in counts {
            if let Some(v) = v {
                s.set(k, v);
            }
        }
        if let Some(v) = &self.velocity {
            s.set("velocity", v);
        }
        if let Some(v) = &self.output {
            s.set("output", v.display());
        }
        Ok(s)
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("HELFRICH_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("HELFRICH_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    match cli.command {
        Command::Gen {
            generator,
            shape,
            lambda1,
            lambda2,
            output,
        } => {
            let mut s = Settings::default();
            shape.apply(&mut s);
            print!(
                "{}",
                commands::gen(&generator, &s, &FlowParams::new(lambda1, lambda2), output.as_deref())?
            );
            Ok(false)
        }
        Command::Flow(args) => commands::flow(&RunConfig::from_settings(args.settings()?)?),
        Command::Blowup {
            dir,
            frames,
            sphericity,
            spread,
        } => {
            let thresholds = RoundnessThresholds {
                sphericity,
                radius_spread: spread,
            };
            print!("{}", commands::blowup(&dir, frames, thresholds)?);
            Ok(false)
        }
        Command::Check {
            mesh,
            lambda1,
            lambda2,
            csv,
        } => {
            let (text, ok) = commands::check(&mesh, &FlowParams::new(lambda1, lambda2), csv.as_deref())?;
            print!("{text}");
            Ok(!ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(64);
        }
    };
    match execute(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("an inequality monitor was violated");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(e) => {
            eprintln!("helfrich: {e}");
            e.exit()
        }
    }
}
