//! Correlation functions of the zero process.
//!
//! `ρ_m` integrates the product of coefficient densities along the
//! `(n − m + 1)`-dimensional family of polynomials vanishing on a
//! conjugate-closed tuple, weighted by the polynomial cofactor at each point
//! and by the tuple's Vandermonde modulus. The mixed `(k, l)` correlation is
//! `2^l ρ_{k+2l}` evaluated on the tuple with conjugates appended.

mod backends;
mod integrand;
mod polytope;
mod spatial;

pub use backends::{integrate, integrate_adaptive, integrate_monte_carlo, integrate_quasi_random};
pub use integrand::{IntegrandSpec, Layout, MAX_SLOTS};
pub use polytope::{build_polytope, truncated_polytope, FeasiblePolytope};
pub use spatial::{integrate_correlation, Rect};
pub(crate) use backends::monte_carlo_moments;
pub(crate) use spatial::TruncatedCauchy;

use crate::density::CoefficientModel;
use crate::error::{Error, Result};
use crate::symmetric::ZeroConfiguration;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Adaptive,
    MonteCarlo,
    QuasiRandom,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Adaptive => "adaptive",
            Backend::MonteCarlo => "monte_carlo",
            Backend::QuasiRandom => "quasi_random",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(self, Backend::Adaptive)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSettings {
    #[serde(rename = "kind")]
    pub backend: Backend,
    /// Relative tolerance of the adaptive backend.
    pub tol: f64,
    /// Sample count of the stochastic backends.
    pub samples: u64,
    pub seed: u64,
    /// Largest integral dimension handled by adaptive quadrature.
    pub adaptive_cutoff: usize,
    /// Tail mass discarded per coefficient law when truncating unbounded supports.
    pub truncation_eps: f64,
    /// Subinterval cap of each one-dimensional quadrature pass.
    pub max_intervals: usize,
    /// Independent random shifts of the quasi-random backend.
    pub qmc_replicates: u64,
}

impl Default for BackendSettings {
    fn default() -> Self {
        Self {
            backend: Backend::Adaptive,
            tol: 1e-9,
            samples: 200_000,
            seed: 0,
            adaptive_cutoff: 4,
            truncation_eps: 1e-12,
            max_intervals: 200,
            qmc_replicates: 16,
        }
    }
}

impl BackendSettings {
    pub fn adaptive(tol: f64) -> Self {
        Self {
            backend: Backend::Adaptive,
            tol,
            ..Self::default()
        }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        Self {
            backend: Backend::MonteCarlo,
            samples,
            seed,
            ..Self::default()
        }
    }

    pub fn quasi_random(samples: u64, seed: u64) -> Self {
        Self {
            backend: Backend::QuasiRandom,
            samples,
            seed,
            ..Self::default()
        }
    }
}

/// A nonnegative integral value with its error estimate and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    /// Absolute error estimate (adaptive) or standard error (stochastic).
    pub error: f64,
    pub backend: Backend,
    /// Integrand evaluations spent.
    pub effort: u64,
    /// Magnitude of a negative raw value that was clamped to zero.
    pub clamped: f64,
}

impl IntegralEstimate {
    pub fn zero(backend: Backend) -> Self {
        Self {
            value: 0.0,
            error: 0.0,
            backend,
            effort: 0,
            clamped: 0.0,
        }
    }

    /// Clamps a slightly negative raw value to zero, recording the clamp.
    pub fn clamped(value: f64, error: f64, backend: Backend, effort: u64) -> Self {
        let (value, clamped) = if value < 0.0 { (0.0, -value) } else { (value, 0.0) };
        Self {
            value,
            error,
            backend,
            effort,
            clamped,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor,
            clamped: self.clamped * factor,
            ..self
        }
    }
}

/// `ρ_m` on the conjugate-closed tuple of `cfg`, without the `2^l` factor.
pub fn rho_m(model: &CoefficientModel, cfg: &ZeroConfiguration, settings: &BackendSettings) -> Result<IntegralEstimate> {
    let spec = IntegrandSpec::new(model, cfg.clone())?;
    rho_from_spec(&spec, settings)
}

fn rho_from_spec(spec: &IntegrandSpec, settings: &BackendSettings) -> Result<IntegralEstimate> {
    let v = spec.vandermonde();
    if v == 0.0 {
        return Ok(IntegralEstimate::zero(settings.backend));
    }
    Ok(integrate(spec, settings)?.scaled(v))
}

/// Mixed correlation `ρ_{k,l}(x, z) = 2^l ρ_{k+2l}(x, z, z̄)`.
pub fn rho_kl(model: &CoefficientModel, cfg: &ZeroConfiguration, settings: &BackendSettings) -> Result<IntegralEstimate> {
    if cfg.m() > model.degree() {
        return Err(Error::Dimension(format!(
            "k + 2l = {} exceeds degree {}",
            cfg.m(),
            model.degree()
        )));
    }
    Ok(rho_m(model, cfg, settings)?.scaled(2f64.powi(cfg.l() as i32)))
}

/// Density of real zeros `ρ_{1,0}(x)` from the banded two-term integrand.
pub fn rho_real_density(model: &CoefficientModel, x: f64, settings: &BackendSettings) -> Result<IntegralEstimate> {
    if !x.is_finite() {
        return Err(Error::Input(format!("real point {x} is not finite")));
    }
    let spec = IntegrandSpec::real_banded(model, x)?;
    rho_from_spec(&spec, settings)
}

/// Density of complex zeros `ρ_{0,1}(z)` from the banded three-term integrand,
/// with prefactor `4 Im z`.
pub fn rho_complex_density(
    model: &CoefficientModel,
    z: Complex64,
    settings: &BackendSettings,
) -> Result<IntegralEstimate> {
    if !z.is_finite() {
        return Err(Error::Input(format!("complex point {z} is not finite")));
    }
    if z.im <= 0.0 {
        return Err(Error::Domain(format!("complex point {z} must have Im > 0")));
    }
    if model.degree() < 2 {
        return Ok(IntegralEstimate::zero(settings.backend));
    }
    let spec = IntegrandSpec::complex_banded(model, z)?;
    Ok(integrate(&spec, settings)?.scaled(4.0 * z.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::CoefficientDensity;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gaussian(n: usize) -> CoefficientModel {
        CoefficientModel::iid(n, CoefficientDensity::standard_gaussian()).unwrap()
    }

    #[test]
    fn cauchy_density_at_degree_one() {
        let s = BackendSettings::adaptive(1e-10);
        for x in [-3.0, -0.5, 0.0, 1.0, 7.0] {
            let r = rho_m(&gaussian(1), &ZeroConfiguration::real_only(vec![x]).unwrap(), &s).unwrap();
            assert_relative_eq!(r.value, 1.0 / (PI * (1.0 + x * x)), max_relative = 1e-8);
        }
    }

    #[test]
    fn uniform_degree_one_at_origin() {
        let m = CoefficientModel::iid(1, CoefficientDensity::standard_uniform()).unwrap();
        let r = rho_m(&m, &ZeroConfiguration::real_only(vec![0.0]).unwrap(), &BackendSettings::adaptive(1e-10)).unwrap();
        assert_relative_eq!(r.value, 0.25, max_relative = 1e-10);
    }

    #[test]
    fn repeated_points_vanish() {
        let cfg = ZeroConfiguration::real_only(vec![0.3, 0.3]).unwrap();
        let s = BackendSettings::adaptive(1e-8);
        assert_eq!(rho_m(&gaussian(3), &cfg, &s).unwrap().value, 0.0);
        // The bare integral itself stays finite.
        let model = gaussian(3);
        let spec = IntegrandSpec::new(&model, cfg).unwrap();
        let raw = integrate_adaptive(&spec, &s).unwrap();
        assert!(raw.value.is_finite() && raw.value > 0.0);
    }

    #[test]
    fn identity_case_and_domain_errors() {
        let cfg = ZeroConfiguration::real_only(vec![0.4]).unwrap();
        let s = BackendSettings::adaptive(1e-9);
        let a = rho_kl(&gaussian(3), &cfg, &s).unwrap();
        let b = rho_m(&gaussian(3), &cfg, &s).unwrap();
        assert_eq!(a.value, b.value);
        assert!(matches!(
            rho_complex_density(&gaussian(3), Complex64::new(0.0, -1.0), &s),
            Err(Error::Domain(_))
        ));
        let too_big = ZeroConfiguration::new(vec![0.1, 0.2], vec![Complex64::new(0.0, 1.0)]).unwrap();
        assert!(matches!(rho_kl(&gaussian(3), &too_big, &s), Err(Error::Dimension(_))));
    }

    #[test]
    fn adaptive_cutoff_enforced() {
        let cfg = ZeroConfiguration::real_only(vec![0.4]).unwrap();
        let err = rho_m(&gaussian(6), &cfg, &BackendSettings::adaptive(1e-6)).unwrap_err();
        assert!(matches!(err, Error::BackendUnavailable(_)));
    }

    #[test]
    fn degree_one_has_no_complex_zeros() {
        let r = rho_complex_density(&gaussian(1), Complex64::new(0.3, 0.5), &BackendSettings::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn complex_density_vanishes_at_axis() {
        let s = BackendSettings::adaptive(1e-9);
        let near = rho_complex_density(&gaussian(2), Complex64::new(0.0, 1e-6), &s).unwrap();
        let far = rho_complex_density(&gaussian(2), Complex64::new(0.0, 1.0), &s).unwrap();
        assert!(near.value < 1e-5 * far.value);
    }

    #[test]
    fn clamp_is_recorded() {
        let e = IntegralEstimate::clamped(-1e-14, 1e-12, Backend::Adaptive, 10);
        assert_eq!(e.value, 0.0);
        assert_eq!(e.clamped, 1e-14);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_rejects_tiny_runs() {
        let cfg = ZeroConfiguration::real_only(vec![0.2]).unwrap();
        let s = BackendSettings::monte_carlo(20_000, 11);
        let a = rho_m(&gaussian(2), &cfg, &s).unwrap();
        let b = rho_m(&gaussian(2), &cfg, &s).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert!(matches!(
            rho_m(&gaussian(2), &cfg, &BackendSettings::monte_carlo(10, 1)),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn empty_uniform_polytope_gives_exact_zero() {
        let m = CoefficientModel::iid(1, CoefficientDensity::uniform(1.0, 2.0).unwrap()).unwrap();
        let cfg = ZeroConfiguration::real_only(vec![0.0]).unwrap();
        let r = rho_m(&m, &cfg, &BackendSettings::monte_carlo(10_000, 3)).unwrap();
        assert_eq!((r.value, r.error), (0.0, 0.0));
    }

    #[test]
    fn quasi_random_only_for_gaussian() {
        let m = CoefficientModel::iid(2, CoefficientDensity::Exponential).unwrap();
        let cfg = ZeroConfiguration::real_only(vec![-0.2]).unwrap();
        assert!(matches!(
            rho_m(&m, &cfg, &BackendSettings::quasi_random(10_000, 3)),
            Err(Error::BackendUnavailable(_))
        ));
    }
}
