//! Command-line front end: parse a run configuration, dispatch, and write
//! CSV grids or JSON reports.

mod config;

pub use config::{apply_override, BackendConfig, BoxesConfig, ComplexGrid, Grid, RunConfig, SimulateConfig};

use crate::closed_forms::prob_real_count;
use crate::density::CoefficientModel;
use crate::engine::{self, IntegralEstimate};
use crate::error::Error;
use crate::lab::{self, BoxFamily, ComparisonRecord};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Environment variable capping the worker count.
pub const WORKERS_ENV: &str = "ZEROCORR_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "zerocorr", version, about = "Correlation functions of zeros of random polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set backend.kind=monte_carlo`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads (default: available parallelism, capped by ZEROCORR_WORKERS).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density of real zeros on a grid (CSV: x,value,error,backend,effort).
    DensityReal,
    /// Density of complex zeros on a grid in the upper half-plane (CSV: re,im,value,error).
    DensityComplex,
    /// Mixed correlation functions at explicit configurations (JSON).
    Correlation,
    /// Probabilities of each possible number of real zeros (JSON).
    RealCount,
    /// Empirical estimates from simulated polynomials (JSON, optional JSON-lines dump).
    Simulate,
    /// Run named validation scenarios; exits 1 if any comparison fails.
    Validate {
        /// List the scenario registry without running anything.
        #[arg(long)]
        list: bool,
        /// Scenario names (in addition to any in the configuration).
        names: Vec<String>,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BackendUnavailable(_) | Error::Diagnostics(_) | Error::Consistency(_) | Error::Geometry(_) => {
                EXIT_BACKEND
            }
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::usage(format!("{}: {e}", path.display()))
}

/// Loads the configuration file (if any) and applies overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, Failure> {
    let mut doc: Value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
            serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: malformed JSON: {e}", p.display())))?
        }
        None => json!({}),
    };
    for o in overrides {
        apply_override(&mut doc, o).map_err(Failure::usage)?;
    }
    serde_json::from_value(doc).map_err(|e| Failure::usage(format!("invalid configuration: {e}")))
}

/// Worker count from the flag, the environment cap and the hardware.
pub fn worker_count(flag: Option<usize>) -> Result<usize, Failure> {
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| Failure::usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?,
        ),
        Err(_) => None,
    };
    let mut n = flag.unwrap_or(hw);
    if n == 0 {
        return Err(Failure::usage("--workers must be positive"));
    }
    if let Some(c) = cap {
        n = n.min(c);
    }
    Ok(n)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32, Failure> {
    let workers = worker_count(cli.workers)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::usage(format!("cannot start {workers} workers: {e}")))?;
    if let Command::Validate { list: true, .. } = cli.command {
        let mut out = io::stdout().lock();
        for s in lab::registry() {
            writeln!(out, "{}\t{}", s.name, s.description).map_err(|e| Failure::usage(e.to_string()))?;
        }
        return Ok(EXIT_OK);
    }
    let config = load_config(cli.config.as_deref(), &cli.overrides)?;
    pool.install(|| dispatch(&cli.command, &config))
}

fn dispatch(command: &Command, config: &RunConfig) -> Result<i32, Failure> {
    match command {
        Command::DensityReal => density_real(config),
        Command::DensityComplex => density_complex(config),
        Command::Correlation => correlation(config),
        Command::RealCount => real_count(config),
        Command::Simulate => simulate(config),
        Command::Validate { names, .. } => validate(config, names),
    }
}

fn model(config: &RunConfig) -> Result<&CoefficientModel, Failure> {
    config
        .model
        .as_ref()
        .ok_or_else(|| Failure::usage("configuration needs a `model`"))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_failure(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json<T: Serialize>(config: &RunConfig, value: &T) -> Result<(), Failure> {
    let mut out = open_output(config.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::usage(e.to_string()))?;
    out.write_all(b"\n").and_then(|_| out.flush()).map_err(|e| Failure::usage(e.to_string()))
}

fn csv_writer(config: &RunConfig) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(open_output(config.output.as_deref())?))
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::usage(format!("writing CSV: {e}"))
}

fn density_real(config: &RunConfig) -> Result<i32, Failure> {
    let model = model(config)?;
    let settings = config.backend.settings().map_err(Failure::usage)?;
    let grid = config.grid.as_ref().ok_or_else(|| Failure::usage("density-real needs a `grid`"))?;
    let xs = grid.points().map_err(Failure::usage)?;
    let rows = xs
        .iter()
        .map(|&x| engine::rho_real_density(model, x, &settings).map(|e| (x, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = csv_writer(config)?;
    w.write_record(["x", "value", "error", "backend", "effort"]).map_err(csv_failure)?;
    for (x, e) in rows {
        w.write_record([
            x.to_string(),
            e.value.to_string(),
            e.error.to_string(),
            e.backend.name().to_string(),
            e.effort.to_string(),
        ])
        .map_err(csv_failure)?;
    }
    w.flush().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(EXIT_OK)
}

fn density_complex(config: &RunConfig) -> Result<i32, Failure> {
    let model = model(config)?;
    let settings = config.backend.settings().map_err(Failure::usage)?;
    let grid = config
        .complex_grid
        .as_ref()
        .ok_or_else(|| Failure::usage("density-complex needs a `complex_grid`"))?;
    let re = grid.re.points().map_err(Failure::usage)?;
    let im = grid.im.points().map_err(Failure::usage)?;
    if im.iter().any(|y| *y <= 0.0) {
        return Err(Failure::usage("complex grid must lie strictly above the real axis"));
    }
    let mut rows = Vec::with_capacity(re.len() * im.len());
    for &y in &im {
        for &x in &re {
            rows.push((x, y, engine::rho_complex_density(model, Complex64::new(x, y), &settings)?));
        }
    }
    let mut w = csv_writer(config)?;
    w.write_record(["re", "im", "value", "error"]).map_err(csv_failure)?;
    for (x, y, e) in rows {
        w.write_record([x.to_string(), y.to_string(), e.value.to_string(), e.error.to_string()])
            .map_err(csv_failure)?;
    }
    w.flush().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CorrelationRecord<'a> {
    configuration: &'a crate::symmetric::ZeroConfiguration,
    k: usize,
    l: usize,
    value: f64,
    error: f64,
    backend: &'static str,
    effort: u64,
}

fn correlation(config: &RunConfig) -> Result<i32, Failure> {
    let model = model(config)?;
    let settings = config.backend.settings().map_err(Failure::usage)?;
    if config.configurations.is_empty() {
        return Err(Failure::usage("correlation needs at least one entry in `configurations`"));
    }
    let mut records = Vec::new();
    for cfg in &config.configurations {
        let e: IntegralEstimate = engine::rho_kl(model, cfg, &settings)?;
        records.push(CorrelationRecord {
            configuration: cfg,
            k: cfg.k(),
            l: cfg.l(),
            value: e.value,
            error: e.error,
            backend: e.backend.name(),
            effort: e.effort,
        });
    }
    write_json(config, &records)?;
    Ok(EXIT_OK)
}

fn real_count(config: &RunConfig) -> Result<i32, Failure> {
    let model = model(config)?;
    let settings = config.backend.settings().map_err(Failure::usage)?;
    let n = model.degree();
    let mut entries = Vec::new();
    let (mut sum, mut sum_err) = (0.0, 0.0);
    for l in 0..=n / 2 {
        let e = prob_real_count(model, l, &settings)?;
        sum += e.value;
        sum_err += e.error;
        entries.push(json!({
            "real_count": n - 2 * l,
            "l": l,
            "probability": e.value,
            "error": e.error,
            "backend": e.backend.name(),
        }));
    }
    write_json(config, &json!({ "degree": n, "probabilities": entries, "sum": sum, "sum_error": sum_err }))?;
    Ok(EXIT_OK)
}

fn simulate(config: &RunConfig) -> Result<i32, Failure> {
    let model = model(config)?;
    let sim = config
        .simulate
        .as_ref()
        .ok_or_else(|| Failure::usage("simulate needs a `simulate` section with samples and seed"))?;
    let settings = sim.settings().map_err(Failure::usage)?;
    let mut report = serde_json::Map::new();
    report.insert("degree".into(), json!(model.degree()));
    report.insert("samples".into(), json!(settings.samples));
    report.insert("seed".into(), json!(settings.seed));
    if !sim.cells.is_empty() {
        let d = lab::estimate_density(model, &sim.cells, &settings)?;
        report.insert("density".into(), serde_json::to_value(d).unwrap());
    }
    if let Some(b) = &sim.boxes {
        let boxes = BoxFamily::new(b.real.clone(), b.rects.clone())?;
        let m = lab::estimate_mixed_moment(model, &boxes, &settings)?;
        report.insert("moment".into(), serde_json::to_value(m).unwrap());
    }
    if sim.pmf {
        let p = lab::real_count_pmf(model, &settings)?;
        report.insert("pmf".into(), serde_json::to_value(p).unwrap());
    }
    if let Some(path) = &sim.dump {
        let mut out = BufWriter::new(File::create(path).map_err(|e| io_failure(path, e))?);
        let flagged = lab::write_samples(model, &settings, &mut out)?;
        out.flush().map_err(|e| io_failure(path, e))?;
        report.insert("dump_flagged".into(), json!(flagged));
    }
    write_json(config, &Value::Object(report))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ScenarioReport {
    name: String,
    pass: bool,
    records: Vec<ComparisonRecord>,
}

fn validate(config: &RunConfig, names: &[String]) -> Result<i32, Failure> {
    let registry = lab::registry();
    let mut wanted: Vec<String> = config.scenarios.iter().chain(names).cloned().collect();
    if wanted.is_empty() {
        wanted = registry.iter().map(|s| s.name.to_string()).collect();
    }
    for w in &wanted {
        if !registry.iter().any(|s| s.name == w) {
            return Err(Failure::usage(format!("unknown scenario '{w}'")));
        }
    }
    let mut reports = Vec::new();
    for w in &wanted {
        let records = lab::run_scenario(w)?;
        reports.push(ScenarioReport {
            name: w.clone(),
            pass: records.iter().all(|r| r.pass),
            records,
        });
    }
    let pass = reports.iter().all(|r| r.pass);
    write_json(config, &json!({ "pass": pass, "scenarios": reports }))?;
    Ok(if pass { EXIT_OK } else { EXIT_VALIDATION })
}
