//! Flat `key = value` settings and the run configuration built from them.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use helfrich_core::energy::FlowParams;
use helfrich_core::flow::{StepControl, Velocity};

use crate::error::CliError;
use crate::shapes::SHAPE_KEYS;

/// Ordered so that echoes are reproducible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    /// Lines are `key = value`; `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{origin}:{}: expected key = value, found {raw:?}", i + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::Usage(format!("{origin}:{}: empty key", i + 1)));
            }
            if map.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("{origin}:{}: duplicate key {key:?}", i + 1)));
            }
        }
        Ok(Settings(map))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.0.insert(key.to_string(), value.to_string());
    }

    /// Applies a `key=value` override given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value, found {pair:?}")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("invalid value {v:?} for {key}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn check_known(&self, known: &[&str]) -> Result<(), CliError> {
        match self.0.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(CliError::Usage(format!("unknown configuration key {k:?}"))),
            None => Ok(()),
        }
    }
}

pub const RUN_KEYS: &[&str] = &[
    "shape",
    "mesh",
    "output",
    "lambda1",
    "lambda2",
    "safety",
    "dt_init",
    "dt_min_ratio",
    "max_steps",
    "t_end",
    "velocity",
    "tangential_smoothing",
    "snapshot_every",
    "record_every",
    "curvature_threshold",
    "edge_collapse_ratio",
    "grad_tolerance",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Generator(String),
    Obj(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    pub params: FlowParams,
    pub control: StepControl,
    pub output: PathBuf,
    /// The report calls the final gradient norm small below this.
    pub grad_tolerance: f64,
    pub settings: Settings,
}

impl RunConfig {
    pub fn from_settings(settings: Settings) -> Result<Self, CliError> {
        let known: Vec<&str> = RUN_KEYS.iter().chain(SHAPE_KEYS).copied().collect();
        settings.check_known(&known)?;
        let s = &settings;
        let source = match (s.raw("shape"), s.raw("mesh")) {
            (Some(g), None) => Source::Generator(g.to_string()),
            (None, Some(p)) => Source::Obj(PathBuf::from(p)),
            _ => return Err(CliError::Usage("exactly one of shape and mesh must be given".into())),
        };
        let d = StepControl::default();
        let velocity = match s.raw("velocity").unwrap_or("normal") {
            "normal" => Velocity::Normal,
            "full" => Velocity::Full,
            v => return Err(CliError::Usage(format!("velocity must be normal or full, found {v:?}"))),
        };
        let control = StepControl {
            safety: s.get_or("safety", d.safety)?,
            dt_init: s.get("dt_init")?,
            dt_min_ratio: s.get_or("dt_min_ratio", d.dt_min_ratio)?,
            max_steps: s.get_or("max_steps", d.max_steps)?,
            t_end: s.get("t_end")?,
            velocity,
            tangential_smoothing: s.get_or("tangential_smoothing", d.tangential_smoothing)?,
            snapshot_every: s.get_or("snapshot_every", d.snapshot_every)?,
            record_every: s.get_or("record_every", d.record_every)?,
            curvature_threshold: s.get_or("curvature_threshold", d.curvature_threshold)?,
            edge_collapse_ratio: s.get_or("edge_collapse_ratio", d.edge_collapse_ratio)?,
            ..d
        };
        control.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(RunConfig {
            source,
            params: FlowParams::new(s.get_or("lambda1", 1.0)?, s.get_or("lambda2", 0.0)?),
            control,
            output: PathBuf::from(s.raw("output").unwrap_or("run")),
            grad_tolerance: s.get_or("grad_tolerance", 0.1)?,
            settings,
        })
    }
}
