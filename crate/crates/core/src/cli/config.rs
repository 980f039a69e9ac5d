//! Run configuration: one JSON document per invocation, with dotted-path overrides.

use crate::density::CoefficientModel;
use crate::engine::{Backend, BackendSettings, Rect};
use crate::lab::{Cell, LabSettings};
use crate::symmetric::ZeroConfiguration;
use serde::Deserialize;
use serde_json::Value;
use std::path::PathBuf;

/// Largest number of grid points a single run may request.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<CoefficientModel>,
    #[serde(default)]
    pub backend: BackendConfig,
    /// Real evaluation grid (`density-real`).
    pub grid: Option<Grid>,
    /// Complex evaluation grid (`density-complex`).
    pub complex_grid: Option<ComplexGrid>,
    /// Explicit configurations (`correlation`).
    #[serde(default)]
    pub configurations: Vec<ZeroConfiguration>,
    /// Empirical runs (`simulate`).
    pub simulate: Option<SimulateConfig>,
    /// Scenario names (`validate`).
    #[serde(default)]
    pub scenarios: Vec<String>,
    /// Output file; standard output when absent.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: Option<Backend>,
    pub tol: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub adaptive_cutoff: Option<usize>,
    pub truncation_eps: Option<f64>,
    pub max_intervals: Option<usize>,
    pub qmc_replicates: Option<u64>,
}

impl BackendConfig {
    pub fn settings(&self) -> Result<BackendSettings, String> {
        let d = BackendSettings::default();
        let backend = self.kind.unwrap_or(d.backend);
        if backend.is_stochastic() && self.seed.is_none() {
            return Err(format!("backend {} needs an explicit seed", backend.name()));
        }
        let s = BackendSettings {
            backend,
            tol: self.tol.unwrap_or(d.tol),
            samples: self.samples.unwrap_or(d.samples),
            seed: self.seed.unwrap_or(d.seed),
            adaptive_cutoff: self.adaptive_cutoff.unwrap_or(d.adaptive_cutoff),
            truncation_eps: self.truncation_eps.unwrap_or(d.truncation_eps),
            max_intervals: self.max_intervals.unwrap_or(d.max_intervals),
            qmc_replicates: self.qmc_replicates.unwrap_or(d.qmc_replicates),
        };
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return Err(format!("tol must lie in (0, 1), got {}", s.tol));
        }
        if !(s.truncation_eps > 0.0 && s.truncation_eps < 1.0) {
            return Err(format!("truncation_eps must lie in (0, 1), got {}", s.truncation_eps));
        }
        if s.samples == 0 {
            return Err("samples must be positive".into());
        }
        Ok(s)
    }
}

/// Either an explicit point list or an arithmetic progression `start, start + step, ..` up to `stop`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Grid {
    Points { points: Vec<f64> },
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        match self {
            Grid::Points { points } => {
                if points.iter().any(|p| !p.is_finite()) {
                    return Err("grid points must be finite".into());
                }
                Ok(points.clone())
            }
            &Grid::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                    return Err("grid bounds must be finite".into());
                }
                if step <= 0.0 {
                    return Err(format!("grid step must be positive, got {step}"));
                }
                if stop < start {
                    return Ok(Vec::new());
                }
                let count = ((stop - start) / step * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
                if count > MAX_GRID_POINTS {
                    return Err(format!("grid has {count} points, the limit is {MAX_GRID_POINTS}"));
                }
                Ok((0..count).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexGrid {
    pub re: Grid,
    pub im: Grid,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub tau: Option<f64>,
    pub residual_threshold: Option<f64>,
    pub max_iterations: Option<usize>,
    /// Cells for density estimates.
    #[serde(default)]
    pub cells: Vec<Cell>,
    /// Box family for a factorial-moment estimate.
    pub boxes: Option<BoxesConfig>,
    /// Whether to estimate the real-count pmf.
    #[serde(default)]
    pub pmf: bool,
    /// JSON-lines dump of every sample.
    pub dump: Option<PathBuf>,
}

impl SimulateConfig {
    pub fn settings(&self) -> Result<LabSettings, String> {
        let d = LabSettings::default();
        let samples = self.samples.ok_or("simulate.samples is required")?;
        if samples == 0 {
            return Err("simulate.samples must be positive".into());
        }
        let seed = self.seed.ok_or("simulate.seed is required")?;
        let s = LabSettings {
            samples,
            seed,
            tau: self.tau.unwrap_or(d.tau),
            residual_threshold: self.residual_threshold.unwrap_or(d.residual_threshold),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
        };
        if !(s.tau > 0.0) || !(s.residual_threshold > 0.0) {
            return Err("simulate.tau and simulate.residual_threshold must be positive".into());
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxesConfig {
    #[serde(default)]
    pub real: Vec<(f64, f64)>,
    #[serde(default)]
    pub rects: Vec<Rect>,
}

/// Applies `key=value` to a JSON document; `key` is a dotted path and `value`
/// is parsed as JSON when possible, otherwise taken as a string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override '{assignment}' is not of the form key=value"))?;
    if key.is_empty() {
        return Err(format!("override '{assignment}' has an empty key"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if !cur.is_object() {
            if cur.is_null() {
                *cur = Value::Object(Default::default());
            } else {
                return Err(format!("override '{key}': '{part}' is not inside an object"));
            }
        }
        let obj = cur.as_object_mut().unwrap();
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!()
}
