//! Explicit joint densities when all `n` zeros are prescribed (`k + 2l = n`),
//! and the probability of exactly `n − 2l` real zeros.
//!
//! With `k + 2l = n` the integral collapses to one variable: every coefficient
//! is `(−1)^{n−i} σ_{n−i} t` and the polynomial factor is `|t|^n`, so
//! `ρ_{n−2l,l} = 2^l v_n ∫ |t|^n Π_i f_i((−1)^{n−i} σ_{n−i} t) dt`.

use crate::density::CoefficientModel;
use crate::engine::{self, monte_carlo_moments, Backend, BackendSettings, IntegralEstimate, TruncatedCauchy};
use crate::error::{Error, Result};
use crate::quadrature::{NestedQuad, QuadSettings};
use crate::symmetric::{elementary_symmetric, elementary_symmetric_complex, one_minus_product, SymmetricProfile, ZeroConfiguration};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Uniform,
    Gaussian,
    Exponential,
}

impl Family {
    /// The closed-form family a model belongs to, if any.
    pub fn of(model: &CoefficientModel) -> Option<Family> {
        if model.is_standard_uniform() {
            Some(Family::Uniform)
        } else if model.gaussian_scales().is_some() {
            Some(Family::Gaussian)
        } else if model.is_all_exponential() {
            Some(Family::Exponential)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDensityValue {
    pub value: f64,
    pub family: Family,
    /// False when a support condition (the exponential sign pattern) fails.
    pub indicator: bool,
}

fn full_profile(model: &CoefficientModel, cfg: &ZeroConfiguration) -> Result<SymmetricProfile> {
    let n = model.degree();
    if cfg.m() != n {
        return Err(Error::Dimension(format!(
            "closed forms need k + 2l = n = {n}, got {}",
            cfg.m()
        )));
    }
    elementary_symmetric(cfg)
}

/// Uniform `[−1, 1]` coefficients: `2^{l−n}/(n+1) · v_n / (max_i |σ_i|)^{n+1}`.
pub fn uniform_joint(model: &CoefficientModel, cfg: &ZeroConfiguration) -> Result<JointDensityValue> {
    if !model.is_standard_uniform() {
        return Err(Error::ModelMismatch("uniform closed form needs uniform(-1,1) coefficients".into()));
    }
    let p = full_profile(model, cfg)?;
    let n = model.degree() as i32;
    let max = p.sigmas().iter().fold(0.0f64, |a, s| a.max(s.abs()));
    let value = 2f64.powi(cfg.l() as i32 - n) / (n + 1) as f64 * p.vandermonde() / max.powi(n + 1);
    Ok(JointDensityValue {
        value,
        family: Family::Uniform,
        indicator: true,
    })
}

/// Gaussian coefficients with standard deviations `v_i`:
/// `2^l v_n Γ((n+1)/2) A^{−(n+1)/2} / (π^{(n+1)/2} Π v_i)`, `A = Σ σ_{n−i}² / v_i²`.
pub fn gaussian_joint(model: &CoefficientModel, cfg: &ZeroConfiguration) -> Result<JointDensityValue> {
    let Some(scales) = model.gaussian_scales() else {
        return Err(Error::ModelMismatch("gaussian closed form needs gaussian coefficients".into()));
    };
    let p = full_profile(model, cfg)?;
    let n = model.degree();
    let a: f64 = scales
        .iter()
        .enumerate()
        .map(|(i, v)| (p.sigma((n - i) as isize) / v).powi(2))
        .sum();
    let h = 0.5 * (n + 1) as f64;
    let log_scales: f64 = scales.iter().map(|v| v.ln()).sum();
    let log_value = cfg.l() as f64 * 2f64.ln() + ln_gamma(h) - h * a.ln() - h * PI.ln() - log_scales;
    Ok(JointDensityValue {
        value: p.vandermonde() * log_value.exp(),
        family: Family::Gaussian,
        indicator: true,
    })
}

/// Rate-one exponential coefficients:
/// `2^l n! v_n 1{(−1)^i σ_i ≥ 0 ∀i} / (Π (1 − w_i))^{n+1}`.
pub fn exponential_joint(model: &CoefficientModel, cfg: &ZeroConfiguration) -> Result<JointDensityValue> {
    if !model.is_all_exponential() {
        return Err(Error::ModelMismatch("exponential closed form needs exponential coefficients".into()));
    }
    let p = full_profile(model, cfg)?;
    let n = model.degree();
    let scale = p.sigmas().iter().fold(0.0f64, |a, s| a.max(s.abs()));
    let indicator = p
        .sigmas()
        .iter()
        .enumerate()
        .all(|(i, s)| if i % 2 == 0 { *s } else { -*s } >= -1e-12 * scale);
    if !indicator {
        return Ok(JointDensityValue {
            value: 0.0,
            family: Family::Exponential,
            indicator,
        });
    }
    let denom = one_minus_product(&cfg.full_tuple()).re;
    let log_fact = ln_gamma((n + 1) as f64);
    let value = 2f64.powi(cfg.l() as i32) * p.vandermonde() * (log_fact - (n + 1) as f64 * denom.ln()).exp();
    Ok(JointDensityValue {
        value,
        family: Family::Exponential,
        indicator,
    })
}

/// `ρ_{n−2l,l}` by the closed form of the model's family, or by the engine's
/// one-dimensional integral for other models.
pub fn joint_density(
    model: &CoefficientModel,
    cfg: &ZeroConfiguration,
    settings: &BackendSettings,
) -> Result<IntegralEstimate> {
    let exact = |v: JointDensityValue| IntegralEstimate {
        value: v.value,
        error: 0.0,
        backend: Backend::Adaptive,
        effort: 1,
        clamped: 0.0,
    };
    match Family::of(model) {
        Some(Family::Uniform) => uniform_joint(model, cfg).map(exact),
        Some(Family::Gaussian) => gaussian_joint(model, cfg).map(exact),
        Some(Family::Exponential) => exponential_joint(model, cfg).map(exact),
        None => {
            full_profile(model, cfg)?;
            engine::rho_kl(model, cfg, &BackendSettings {
                backend: Backend::Adaptive,
                ..settings.clone()
            })
        }
    }
}

/// Largest number of position coordinates integrated by nested quadrature.
const MAX_QUADRATURE_POSITIONS: usize = 3;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Splits positions `(x_1..x_k, Re z_1, Im z_1, ..)` into a configuration.
fn configuration(k: usize, pos: &[f64]) -> Option<ZeroConfiguration> {
    let complex: Vec<Complex64> = pos[k..].chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    if complex.iter().any(|z| !(z.im > 0.0)) {
        return None;
    }
    ZeroConfiguration::new(pos[..k].to_vec(), complex).ok()
}

/// Probability that the polynomial has exactly `n − 2l` real zeros,
/// `(1/(l!(n−2l)!)) ∫_{ℝ^{n−2l} × ℂ_+^l} ρ_{n−2l,l}`.
pub fn prob_real_count(model: &CoefficientModel, l: usize, settings: &BackendSettings) -> Result<IntegralEstimate> {
    let n = model.degree();
    if 2 * l > n {
        return Err(Error::Domain(format!("2l = {} exceeds degree {n}", 2 * l)));
    }
    let k = n - 2 * l;
    let norm = 1.0 / (factorial(l) * factorial(k));
    let est = match settings.backend {
        Backend::Adaptive => {
            if n > MAX_QUADRATURE_POSITIONS {
                return Err(Error::BackendUnavailable(format!(
                    "nested quadrature over {n} positions is not offered; use monte_carlo"
                )));
            }
            positions_quadrature(model, k, l, &[], settings)?
        }
        Backend::MonteCarlo if n <= MAX_QUADRATURE_POSITIONS => hybrid(model, k, l, settings)?,
        Backend::MonteCarlo => full_monte_carlo(model, k, l, settings)?,
        Backend::QuasiRandom => {
            return Err(Error::BackendUnavailable(
                "real-count probabilities use the adaptive or monte_carlo backend".into(),
            ))
        }
    };
    Ok(est.scaled(norm))
}

fn quad_tol(settings: &BackendSettings) -> f64 {
    settings.tol.max(1e-10)
}

/// Points where the innermost real position switches which `|σ_i|` is largest,
/// given the other `n − 1` zeros; the uniform density has kinks there.
fn uniform_kinks(others: &[Complex64]) -> Vec<f64> {
    let mut s: Vec<f64> = elementary_symmetric_complex(others).iter().map(|z| z.re).collect();
    s.push(0.0);
    let prev = |i: usize| if i == 0 { 0.0 } else { s[i - 1] };
    let mut out = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            for sign in [1.0, -1.0] {
                let den = prev(i) - sign * prev(j);
                if den != 0.0 {
                    out.push(-(s[i] - sign * s[j]) / den);
                }
            }
        }
    }
    out
}

/// Nested quadrature of the joint density over the real block `x ∈ ℝ^k` and
/// over the complex block unless its values are supplied in `fixed`.
///
/// The real block is integrated over `x_1 < … < x_k` (the density is
/// symmetric), imposed through the integrand with a cut at each diagonal so
/// that every axis keeps the same origin-centred map of the whole line.
fn positions_quadrature(
    model: &CoefficientModel,
    k: usize,
    l: usize,
    fixed: &[f64],
    settings: &BackendSettings,
) -> Result<IntegralEstimate> {
    let all = (f64::NEG_INFINITY, f64::INFINITY);
    let mut bounds = vec![all; k];
    if fixed.is_empty() {
        for _ in 0..l {
            bounds.push(all);
            bounds.push((0.0, f64::INFINITY));
        }
    }
    let dim = bounds.len();
    let uniform = Family::of(model) == Some(Family::Uniform);
    let fixed_points: Vec<Complex64> = fixed
        .chunks(2)
        .flat_map(|c| [Complex64::new(c[0], c[1]), Complex64::new(c[0], -c[1])])
        .collect();
    let breaks = |prefix: &[f64]| {
        let j = prefix.len();
        if j >= k {
            return if (j - k) % 2 == 1 { vec![1.0] } else { vec![-1.0, 0.0, 1.0] };
        }
        let mut b = vec![-1.0, 0.0, 1.0];
        b.extend_from_slice(prefix);
        if uniform && j + 1 == dim {
            let mut others: Vec<Complex64> = prefix.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            others.extend_from_slice(&fixed_points);
            b.extend(uniform_kinks(&others));
        }
        b
    };
    let failure = std::sync::Mutex::new(None);
    let f = |p: &[f64]| {
        if p[..k].windows(2).any(|w| w[1] < w[0]) {
            return 0.0;
        }
        let mut pos = p.to_vec();
        pos.extend_from_slice(fixed);
        let Some(cfg) = configuration(k, &pos) else {
            return 0.0;
        };
        match joint_density(model, &cfg, settings) {
            Ok(e) => e.value,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    };
    let tol = quad_tol(settings);
    let o = if bounds.is_empty() {
        let v = f(&[]);
        crate::quadrature::QuadOutcome {
            value: v,
            error: 0.0,
            evals: 1,
            converged: true,
        }
    } else {
        NestedQuad {
            settings: QuadSettings {
                abs_tol: tol,
                rel_tol: tol,
                max_intervals: settings.max_intervals,
            },
            breaks: Some(&breaks),
        }
        .integrate(&f, &bounds)
    };
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let orderings = factorial(k);
    Ok(IntegralEstimate::clamped(o.value * orderings, o.error * orderings, Backend::Adaptive, o.evals))
}

/// Complex block by Monte Carlo with Cauchy (real part) and half-Cauchy
/// (imaginary part) proposals; real block by quadrature for each draw.
fn hybrid(model: &CoefficientModel, k: usize, l: usize, settings: &BackendSettings) -> Result<IntegralEstimate> {
    check_samples(settings)?;
    // Quadrature finer than a tenth of the sampling noise buys nothing.
    let settings = &BackendSettings {
        tol: settings.tol.max(0.1 / (settings.samples as f64).sqrt()),
        ..settings.clone()
    };
    if l == 0 {
        return positions_quadrature(model, k, l, &[], settings);
    }
    let re = TruncatedCauchy::new((f64::NEG_INFINITY, f64::INFINITY));
    let im = TruncatedCauchy::new((0.0, f64::INFINITY));
    let failure = std::sync::Mutex::new(None);
    let moments = monte_carlo_moments(settings.samples, settings.seed, |rng| {
        let mut pos = Vec::with_capacity(2 * l);
        let mut q = 1.0;
        for _ in 0..l {
            let (a, qa) = re.draw(rng);
            let (b, qb) = im.draw(rng);
            pos.extend([a, b]);
            q *= qa * qb;
        }
        match positions_quadrature(model, k, l, &pos, settings) {
            Ok(e) if q > 0.0 && q.is_finite() => {
                let w = e.value / q;
                if w.is_finite() {
                    w
                } else {
                    0.0
                }
            }
            Ok(_) => 0.0,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let (mean, se) = moments.mean_and_stderr();
    Ok(IntegralEstimate::clamped(mean, se, Backend::MonteCarlo, moments.count))
}

fn full_monte_carlo(model: &CoefficientModel, k: usize, l: usize, settings: &BackendSettings) -> Result<IntegralEstimate> {
    check_samples(settings)?;
    let re = TruncatedCauchy::new((f64::NEG_INFINITY, f64::INFINITY));
    let im = TruncatedCauchy::new((0.0, f64::INFINITY));
    let failure = std::sync::Mutex::new(None);
    let moments = monte_carlo_moments(settings.samples, settings.seed, |rng| {
        let mut pos = Vec::with_capacity(k + 2 * l);
        let mut q = 1.0;
        for j in 0..k + 2 * l {
            let law = if j >= k && (j - k) % 2 == 1 { &im } else { &re };
            let (x, qx) = law.draw(rng);
            pos.push(x);
            q *= qx;
        }
        let Some(cfg) = configuration(k, &pos) else {
            return 0.0;
        };
        match joint_density(model, &cfg, settings) {
            Ok(e) => {
                let w = e.value / q;
                if w.is_finite() {
                    w
                } else {
                    0.0
                }
            }
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let (mean, se) = moments.mean_and_stderr();
    Ok(IntegralEstimate::clamped(mean, se, Backend::MonteCarlo, moments.count))
}

fn check_samples(settings: &BackendSettings) -> Result<()> {
    if settings.samples < 1000 {
        return Err(Error::Input(format!(
            "monte carlo needs at least 1000 samples, got {}",
            settings.samples
        )));
    }
    Ok(())
}
