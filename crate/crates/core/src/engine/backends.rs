//! Integration backends for the correlation integrand.

use super::integrand::{IntegrandSpec, MAX_SLOTS};
use super::polytope::{build_polytope, truncated_polytope};
use super::{Backend, BackendSettings, IntegralEstimate};
use crate::density::CoefficientDensity;
use crate::error::{Error, Result};
use crate::qmc;
use crate::quadrature::{NestedQuad, QuadSettings};
use crate::rng::{par_batches, substream, Purpose, StreamRng};
use crate::symmetric::CoefficientMap;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::PI;

/// Samples per counter-based stream.
pub const MC_BATCH: u64 = 1024;
/// Number of leading samples inspected for the degenerate-proposal diagnostic.
pub const DEGENERACY_WINDOW: u64 = 100_000;

/// Nested Gauss–Kronrod integration over the truncated support polytope's box.
pub fn integrate_adaptive(spec: &IntegrandSpec, settings: &BackendSettings) -> Result<IntegralEstimate> {
    let d = spec.dim();
    if d > settings.adaptive_cutoff {
        return Err(Error::BackendUnavailable(format!(
            "adaptive quadrature handles dimension <= {}, this integral has dimension {d}; \
             use the monte_carlo backend",
            settings.adaptive_cutoff
        )));
    }
    let poly = truncated_polytope(spec, settings.truncation_eps)?;
    if !poly.has_interior() {
        return Ok(IntegralEstimate::zero(Backend::Adaptive));
    }
    let bounds = poly.bounding_box().to_vec();
    let breaks = |prefix: &[f64]| spec.breakpoints(prefix);
    let f = |t: &[f64]| spec.eval(t);

    let pilot = NestedQuad {
        settings: QuadSettings {
            abs_tol: 0.0,
            rel_tol: 1e-3,
            max_intervals: 40,
        },
        breaks: Some(&breaks),
    }
    .integrate(&f, &bounds);
    let scale = pilot.value.abs() + pilot.error;
    if scale == 0.0 {
        return Ok(IntegralEstimate {
            effort: pilot.evals,
            ..IntegralEstimate::zero(Backend::Adaptive)
        });
    }
    let fine = NestedQuad {
        settings: QuadSettings {
            abs_tol: 0.5 * settings.tol * scale,
            rel_tol: settings.tol,
            max_intervals: settings.max_intervals,
        },
        breaks: Some(&breaks),
    }
    .integrate(&f, &bounds);
    let unbounded = spec
        .model()
        .densities()
        .iter()
        .any(|d| d.support().0.is_infinite() || d.support().1.is_infinite());
    let truncation = if unbounded {
        fine.value.abs() * (spec.map().rows() as f64) * settings.truncation_eps
    } else {
        0.0
    };
    Ok(IntegralEstimate::clamped(
        fine.value,
        fine.error + truncation,
        Backend::Adaptive,
        pilot.evals + fine.evals,
    ))
}

/// Importance-sampling proposal over `t`.
pub(crate) enum Proposal {
    /// Exact gaussian shape of the density product, for all-gaussian models.
    Gaussian(GaussianProposal),
    /// Draw the top coefficient slots from their own laws (exponentials
    /// optionally at a reduced rate) and back-substitute for `t`.
    CoefficientLaw { tilt: Option<f64> },
    /// Uniform over the support polytope's bounding box.
    UniformBox { lo: Vec<f64>, width: Vec<f64>, volume: f64 },
}

pub(crate) struct GaussianProposal {
    lower: DMatrix<f64>,
    log_norm: f64,
}

impl GaussianProposal {
    pub(crate) fn new(map: &CoefficientMap, scales: &[f64]) -> Result<Self> {
        let d = map.cols();
        let mut a = DMatrix::<f64>::zeros(d, d);
        for (i, &v) in scales.iter().enumerate() {
            let row = map.row(i);
            let w = 1.0 / (v * v);
            for p in 0..d {
                if row[p] == 0.0 {
                    continue;
                }
                for q in 0..d {
                    a[(p, q)] += w * row[p] * row[q];
                }
            }
        }
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::Diagnostics("gaussian proposal precision is not positive definite".into()))?;
        let lower = chol.unpack();
        let log_det_half: f64 = (0..d).map(|i| lower[(i, i)].ln()).sum();
        Ok(Self {
            lower,
            log_norm: -0.5 * d as f64 * (2.0 * PI).ln() + log_det_half,
        })
    }

    /// Maps standard normals `z` to `t = L^{-T} z` and returns `log q(t)`.
    #[inline]
    pub(crate) fn transform(&self, z: &[f64], t: &mut [f64]) -> f64 {
        let d = z.len();
        for i in (0..d).rev() {
            let mut acc = z[i];
            for j in i + 1..d {
                acc -= self.lower[(j, i)] * t[j];
            }
            t[i] = acc / self.lower[(i, i)];
        }
        self.log_norm - 0.5 * z.iter().map(|v| v * v).sum::<f64>()
    }
}

impl Proposal {
    /// Proposal used by the point-evaluation Monte Carlo backend.
    pub(crate) fn select(spec: &IntegrandSpec) -> Result<Self> {
        let model = spec.model();
        if let Some(scales) = model.gaussian_scales() {
            return Ok(Proposal::Gaussian(GaussianProposal::new(spec.map(), &scales)?));
        }
        if model.is_all_exponential() {
            return Ok(Self::exponential_tilt(spec));
        }
        if model.is_all_uniform() {
            let poly = build_polytope(spec)?;
            let lo: Vec<f64> = poly.bounding_box().iter().map(|b| b.0).collect();
            let width: Vec<f64> = poly.bounding_box().iter().map(|b| b.1 - b.0).collect();
            let volume = poly.volume_of_box();
            return Ok(Proposal::UniformBox { lo, width, volume });
        }
        Ok(Proposal::CoefficientLaw { tilt: None })
    }

    /// Cheap proposal for joint sampling over positions, without linear programs.
    pub(crate) fn select_light(spec: &IntegrandSpec) -> Result<Self> {
        let model = spec.model();
        if let Some(scales) = model.gaussian_scales() {
            return Ok(Proposal::Gaussian(GaussianProposal::new(spec.map(), &scales)?));
        }
        if model.is_all_exponential() {
            return Ok(Self::exponential_tilt(spec));
        }
        Ok(Proposal::CoefficientLaw { tilt: None })
    }

    fn exponential_tilt(spec: &IntegrandSpec) -> Self {
        // The polynomial weight has total degree m in t; lowering the rate to
        // d/(d+m) spreads the proposal to match.
        let d = spec.dim() as f64;
        let m = spec.map().m() as f64;
        Proposal::CoefficientLaw {
            tilt: Some(d / (d + m)),
        }
    }

    /// Draws `t` and returns the proposal density `q(t)`.
    #[inline]
    pub(crate) fn draw(&self, spec: &IntegrandSpec, rng: &mut StreamRng, t: &mut [f64]) -> f64 {
        let d = t.len();
        match self {
            Proposal::Gaussian(g) => {
                let mut z = [0.0; MAX_SLOTS];
                for v in z[..d].iter_mut() {
                    *v = StandardNormal.sample(rng);
                }
                g.transform(&z[..d], t).exp()
            }
            Proposal::CoefficientLaw { tilt } => {
                let map = spec.map();
                let model = spec.model();
                let mut top = [0.0; MAX_SLOTS];
                let mut q = 1.0;
                for (k, slot) in top[..d].iter_mut().enumerate() {
                    let dens = model.density(map.m() + k);
                    match (dens, tilt) {
                        (CoefficientDensity::Exponential, Some(rate)) => {
                            let e: f64 = rand_distr::Exp1.sample(rng);
                            *slot = e / rate;
                            q *= rate * (-rate * *slot).exp();
                        }
                        _ => {
                            *slot = dens.sample(rng);
                            q *= dens.eval_unchecked(*slot);
                        }
                    }
                }
                map.solve_top(&top[..d], t);
                q
            }
            Proposal::UniformBox { lo, width, volume } => {
                for j in 0..d {
                    t[j] = lo[j] + width[j] * rng.random::<f64>();
                }
                1.0 / volume
            }
        }
    }
}

/// Accumulated first and second moments of a batch of weights.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
    pub nonzero: u64,
    pub nonzero_in_window: u64,
}

impl Moments {
    #[inline]
    pub(crate) fn push(&mut self, index: u64, w: f64) {
        self.sum += w;
        self.sum_sq += w * w;
        self.count += 1;
        if w != 0.0 {
            self.nonzero += 1;
            if index < DEGENERACY_WINDOW {
                self.nonzero_in_window += 1;
            }
        }
    }

    pub(crate) fn merge(parts: &[Moments]) -> Moments {
        parts.iter().fold(Moments::default(), |a, b| Moments {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
            count: a.count + b.count,
            nonzero: a.nonzero + b.nonzero,
            nonzero_in_window: a.nonzero_in_window + b.nonzero_in_window,
        })
    }

    pub(crate) fn mean_and_stderr(&self) -> (f64, f64) {
        if self.count == 0 {
            return (0.0, 0.0);
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        (mean, (var / n).sqrt())
    }
}

/// Runs `weight(rng, index)` for `samples` indices in fixed batches with one
/// stream per batch and merges the moments in batch order.
pub(crate) fn monte_carlo_moments<F>(samples: u64, seed: u64, weight: F) -> Moments
where
    F: Fn(&mut StreamRng) -> f64 + Sync + Send,
{
    let parts = par_batches(samples, MC_BATCH, |b, range| {
        let mut rng = substream(seed, Purpose::Integration, b);
        let mut m = Moments::default();
        for i in range {
            m.push(i, weight(&mut rng));
        }
        m
    });
    Moments::merge(&parts)
}

pub fn integrate_monte_carlo(spec: &IntegrandSpec, settings: &BackendSettings) -> Result<IntegralEstimate> {
    if settings.samples < 1000 {
        return Err(Error::Input(format!(
            "monte carlo needs at least 1000 samples, got {}",
            settings.samples
        )));
    }
    let gaussian = spec.model().gaussian_scales().is_some();
    if !gaussian {
        let poly = truncated_polytope(spec, settings.truncation_eps)?;
        if !poly.has_interior() {
            return Ok(IntegralEstimate::zero(Backend::MonteCarlo));
        }
    }
    let proposal = Proposal::select(spec)?;
    let d = spec.dim();
    let moments = monte_carlo_moments(settings.samples, settings.seed, |rng| {
        let mut t = [0.0; MAX_SLOTS];
        let q = proposal.draw(spec, rng, &mut t[..d]);
        if q <= 0.0 || !q.is_finite() {
            return 0.0;
        }
        let w = spec.eval(&t[..d]) / q;
        if w.is_finite() {
            w
        } else {
            0.0
        }
    });
    if moments.nonzero_in_window == 0 {
        return Err(Error::Diagnostics(format!(
            "proposal produced no nonzero weight in the first {} samples",
            moments.count.min(DEGENERACY_WINDOW)
        )));
    }
    let (mean, se) = moments.mean_and_stderr();
    Ok(IntegralEstimate::clamped(mean, se, Backend::MonteCarlo, moments.count))
}

/// Randomly shifted Halton points pushed through the matched gaussian; the
/// error is the standard error across independent shifts.
pub fn integrate_quasi_random(spec: &IntegrandSpec, settings: &BackendSettings) -> Result<IntegralEstimate> {
    let Some(scales) = spec.model().gaussian_scales() else {
        return Err(Error::BackendUnavailable(
            "quasi-random backend is only offered for all-gaussian models".into(),
        ));
    };
    let d = spec.dim();
    if d > qmc::MAX_DIM {
        return Err(Error::BackendUnavailable(format!(
            "quasi-random backend supports dimension <= {}",
            qmc::MAX_DIM
        )));
    }
    let replicates = settings.qmc_replicates.max(2);
    let per = (settings.samples / replicates).max(1);
    let proposal = GaussianProposal::new(spec.map(), &scales)?;
    let normal = Normal::standard();
    let means = par_batches(replicates, 1, |r, _| {
        let mut rng = substream(settings.seed, Purpose::QuasiShift, r);
        let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let mut u = vec![0.0; d];
        let mut z = vec![0.0; d];
        let mut t = vec![0.0; d];
        let mut sum = 0.0;
        for i in 0..per {
            qmc::shifted_halton(i, &shift, &mut u);
            for (zj, &uj) in z.iter_mut().zip(&u) {
                *zj = normal.inverse_cdf(uj.clamp(1e-16, 1.0 - 1e-16));
            }
            let q = proposal.transform(&z, &mut t).exp();
            if q > 0.0 {
                let w = spec.eval(&t) / q;
                if w.is_finite() {
                    sum += w;
                }
            }
        }
        sum / per as f64
    });
    let r = means.len() as f64;
    let mean = means.iter().sum::<f64>() / r;
    let var = means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Ok(IntegralEstimate::clamped(
        mean,
        (var / r).sqrt(),
        Backend::QuasiRandom,
        per * replicates,
    ))
}

pub fn integrate(spec: &IntegrandSpec, settings: &BackendSettings) -> Result<IntegralEstimate> {
    match settings.backend {
        Backend::Adaptive => integrate_adaptive(spec, settings),
        Backend::MonteCarlo => integrate_monte_carlo(spec, settings),
        Backend::QuasiRandom => integrate_quasi_random(spec, settings),
    }
}
