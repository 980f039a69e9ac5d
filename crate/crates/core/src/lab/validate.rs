//! Analytic-versus-empirical comparison records and the named scenario registry.

use super::estimators::{estimate_density, estimate_mixed_moment, real_count_pmf, BoxFamily, Cell};
use super::LabSettings;
use crate::closed_forms::prob_real_count;
use crate::density::{CoefficientDensity, CoefficientModel};
use crate::engine::{integrate_correlation, Backend, BackendSettings, IntegralEstimate, Rect};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Pass threshold on `|z|`.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub name: String,
    pub analytic: f64,
    pub analytic_error: f64,
    pub empirical: f64,
    pub empirical_error: f64,
    pub z: f64,
    pub pass: bool,
}

pub fn compare(name: impl Into<String>, analytic: (f64, f64), empirical: (f64, f64)) -> ComparisonRecord {
    let diff = analytic.0 - empirical.0;
    let sd = (analytic.1 * analytic.1 + empirical.1 * empirical.1).sqrt();
    let z = if sd > 0.0 {
        diff / sd
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    ComparisonRecord {
        name: name.into(),
        analytic: analytic.0,
        analytic_error: analytic.1,
        empirical: empirical.0,
        empirical_error: empirical.1,
        z,
        pass: z.abs() < Z_THRESHOLD,
    }
}

/// One analytic quantity with an empirical counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    /// `∫_lo^hi ρ_{1,0}` against the mean number of real zeros in `[lo, hi)`.
    RealMass { lo: f64, hi: f64 },
    /// `∫_rect ρ_{0,1}` against the mean number of zeros in the rectangle.
    ComplexMass { re: (f64, f64), im: (f64, f64) },
    /// `∫ ρ_{k,l}` over a box family against `E[Π μ(B_i)]`.
    MixedMoment { real: Vec<(f64, f64)>, rects: Vec<Rect> },
    /// Every `P[exactly n − 2l real zeros]` against the empirical pmf.
    RealCountPmf,
}

/// Settings for the analytic side: nested quadrature when the total dimension
/// is small, otherwise Monte Carlo with `base`'s sample count and seed.
fn analytic_settings(n: usize, k: usize, l: usize, base: &BackendSettings) -> BackendSettings {
    let d = n + 1 - k - 2 * l;
    if d + k + 2 * l <= 4 {
        BackendSettings {
            backend: Backend::Adaptive,
            tol: base.tol.max(1e-7),
            ..base.clone()
        }
    } else {
        BackendSettings {
            backend: Backend::MonteCarlo,
            ..base.clone()
        }
    }
}

fn pair(e: &IntegralEstimate) -> (f64, f64) {
    (e.value, e.error)
}

pub fn validation_report(
    model: &CoefficientModel,
    quantities: &[Quantity],
    lab: &LabSettings,
    analytic: &BackendSettings,
) -> Result<Vec<ComparisonRecord>> {
    let n = model.degree();
    let mut out = Vec::new();
    for q in quantities {
        match q {
            Quantity::RealMass { lo, hi } => {
                let a = integrate_correlation(model, &[(*lo, *hi)], &[], &analytic_settings(n, 1, 0, analytic))?;
                let e = estimate_density(model, &[Cell::Real { lo: *lo, hi: *hi }], lab)?;
                let c = e.cells[0];
                out.push(compare(format!("real mass [{lo}, {hi})"), pair(&a), (c.mass, c.mass_stderr)));
            }
            Quantity::ComplexMass { re, im } => {
                let rect = Rect::new(*re, *im)?;
                let a = integrate_correlation(model, &[], &[rect], &analytic_settings(n, 0, 1, analytic))?;
                let e = estimate_density(model, &[Cell::Complex { re: *re, im: *im }], lab)?;
                let c = e.cells[0];
                out.push(compare(
                    format!("complex mass [{}, {})x[{}, {})", re.0, re.1, im.0, im.1),
                    pair(&a),
                    (c.mass, c.mass_stderr),
                ));
            }
            Quantity::MixedMoment { real, rects } => {
                let boxes = BoxFamily::new(real.clone(), rects.clone())?;
                let s = analytic_settings(n, real.len(), rects.len(), analytic);
                let a = integrate_correlation(model, real, rects, &s)?;
                let e = estimate_mixed_moment(model, &boxes, lab)?;
                out.push(compare(
                    format!("mixed moment over {} intervals and {} rectangles", real.len(), rects.len()),
                    pair(&a),
                    (e.value, e.stderr),
                ));
            }
            Quantity::RealCountPmf => {
                let pmf = real_count_pmf(model, lab)?;
                let s = if n <= 3 {
                    BackendSettings {
                        backend: Backend::Adaptive,
                        tol: 1e-8,
                        ..analytic.clone()
                    }
                } else {
                    BackendSettings {
                        backend: Backend::MonteCarlo,
                        ..analytic.clone()
                    }
                };
                for entry in &pmf.entries {
                    let a = prob_real_count(model, entry.l, &s)?;
                    out.push(compare(
                        format!("P[{} real zeros]", entry.real_count),
                        pair(&a),
                        (entry.probability, entry.stderr),
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// A fully specified validation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub model: CoefficientModel,
    pub quantities: Vec<Quantity>,
    pub lab: LabSettings,
    pub analytic: BackendSettings,
}

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub build: fn() -> ScenarioSpec,
}

fn iid(n: usize, d: CoefficientDensity) -> CoefficientModel {
    CoefficientModel::iid(n, d).expect("registry models are valid")
}

fn spec(model: CoefficientModel, quantities: Vec<Quantity>, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        model,
        quantities,
        lab: LabSettings::new(100_000, seed),
        analytic: BackendSettings {
            samples: 400_000,
            seed,
            ..BackendSettings::default()
        },
    }
}

fn real(lo: f64, hi: f64) -> Quantity {
    Quantity::RealMass { lo, hi }
}

fn rect(re: (f64, f64), im: (f64, f64)) -> Quantity {
    Quantity::ComplexMass { re, im }
}

pub fn registry() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "n1-gaussian",
            description: "degree 1, gaussian: Cauchy zero density and one real zero",
            build: || {
                let q = vec![real(-2.0, -1.0), real(-0.1, 0.1), real(0.0, 1.0), real(1.0, 3.0), Quantity::RealCountPmf];
                spec(iid(1, CoefficientDensity::standard_gaussian()), q, 101)
            },
        },
        Scenario {
            name: "n1-uniform",
            description: "degree 1, uniform(-1,1): density 1/(4 max(1,|x|)^2)",
            build: || {
                let q = vec![real(-2.0, -1.0), real(-0.1, 0.1), real(0.0, 1.0), real(1.0, 3.0), Quantity::RealCountPmf];
                spec(iid(1, CoefficientDensity::standard_uniform()), q, 102)
            },
        },
        Scenario {
            name: "n1-exponential",
            description: "degree 1, exponential: density (1-x)^-2 on x <= 0",
            build: || {
                let q = vec![real(-3.0, -1.0), real(-1.0, -0.2), real(-0.2, 0.0), real(0.0, 1.0), Quantity::RealCountPmf];
                spec(iid(1, CoefficientDensity::Exponential), q, 103)
            },
        },
        Scenario {
            name: "n2-gaussian",
            description: "degree 2, gaussian: real and complex masses, real-count pmf",
            build: || {
                let q = vec![real(-1.0, 1.0), rect((-1.0, 1.0), (0.2, 1.5)), Quantity::RealCountPmf];
                spec(iid(2, CoefficientDensity::standard_gaussian()), q, 201)
            },
        },
        Scenario {
            name: "n2-uniform",
            description: "degree 2, uniform(-1,1): real and complex masses, real-count pmf",
            build: || {
                let q = vec![real(-1.0, 1.0), rect((-1.0, 1.0), (0.2, 1.5)), Quantity::RealCountPmf];
                spec(iid(2, CoefficientDensity::standard_uniform()), q, 202)
            },
        },
        Scenario {
            name: "n2-exponential",
            description: "degree 2, exponential: real and complex masses, real-count pmf",
            build: || {
                let q = vec![real(-2.0, 0.0), rect((-1.0, 0.0), (0.2, 1.5)), Quantity::RealCountPmf];
                spec(iid(2, CoefficientDensity::Exponential), q, 203)
            },
        },
        Scenario {
            name: "n3-gaussian-pairs",
            description: "degree 3, gaussian: two-point real factorial moment",
            build: || {
                let q = vec![Quantity::MixedMoment {
                    real: vec![(-1.0, 0.0), (0.0, 1.0)],
                    rects: vec![],
                }];
                spec(iid(3, CoefficientDensity::standard_gaussian()), q, 301)
            },
        },
        Scenario {
            name: "n5-gaussian-moments",
            description: "degree 5, gaussian: masses of [0,1] and [0,1]x[0.2,1.2] and their mixed moment",
            build: || {
                let r = Rect {
                    re: (0.0, 1.0),
                    im: (0.2, 1.2),
                };
                let q = vec![
                    real(0.0, 1.0),
                    rect(r.re, r.im),
                    Quantity::MixedMoment {
                        real: vec![(0.0, 1.0)],
                        rects: vec![r],
                    },
                ];
                spec(iid(5, CoefficientDensity::standard_gaussian()), q, 501)
            },
        },
    ]
}

pub fn run_scenario(name: &str) -> Result<Vec<ComparisonRecord>> {
    let s = registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Input(format!("unknown scenario '{name}'")))?;
    let spec = (s.build)();
    validation_report(&spec.model, &spec.quantities, &spec.lab, &spec.analytic)
}
