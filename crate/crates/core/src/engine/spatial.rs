//! Integrals of `ρ_{k,l}` over products of real intervals and upper-half-plane
//! rectangles, i.e. the analytic side of `E[Π μ(B_i)]`.

use super::backends::{monte_carlo_moments, Proposal};
use super::integrand::{IntegrandSpec, MAX_SLOTS};
use super::{rho_complex_density, rho_kl, rho_real_density, Backend, BackendSettings, IntegralEstimate};
use crate::density::CoefficientModel;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_aux, AxisMap, QuadSettings};
use crate::rng::StreamRng;
use crate::symmetric::ZeroConfiguration;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::PI;

/// Axis-aligned rectangle `re × im` in the closed upper half-plane. Bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rect {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Result<Self> {
        let r = Self { re, im };
        r.validate()?;
        Ok(r)
    }

    /// The whole upper half-plane.
    pub fn upper_half_plane() -> Self {
        Self {
            re: (f64::NEG_INFINITY, f64::INFINITY),
            im: (0.0, f64::INFINITY),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |(a, b): (f64, f64)| !a.is_nan() && !b.is_nan() && a < b;
        if !ok(self.re) || !ok(self.im) {
            return Err(Error::Input(format!("degenerate rectangle {self:?}")));
        }
        if self.im.0 < 0.0 {
            return Err(Error::Domain(format!("rectangle {self:?} extends below the real axis")));
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re.0 && z.re < self.re.1 && z.im >= self.im.0 && z.im < self.im.1
    }

    pub fn area(&self) -> f64 {
        (self.re.1 - self.re.0) * (self.im.1 - self.im.0)
    }
}

fn check_interval((a, b): (f64, f64)) -> Result<()> {
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::Input(format!("degenerate interval [{a}, {b}]")));
    }
    Ok(())
}

/// `∫_{A_1×…×A_k×R_1×…×R_l} ρ_{k,l}(x, z) dx dz`, with `dz` planar Lebesgue measure.
pub fn integrate_correlation(
    model: &CoefficientModel,
    real_sets: &[(f64, f64)],
    rects: &[Rect],
    settings: &BackendSettings,
) -> Result<IntegralEstimate> {
    let (k, l) = (real_sets.len(), rects.len());
    if k + l == 0 {
        return Err(Error::Input("at least one integration set is required".into()));
    }
    if k + 2 * l > model.degree() {
        return Err(Error::Dimension(format!(
            "k + 2l = {} exceeds degree {}",
            k + 2 * l,
            model.degree()
        )));
    }
    for &s in real_sets {
        check_interval(s)?;
    }
    for r in rects {
        r.validate()?;
    }
    let mut coords = Vec::with_capacity(k + 2 * l);
    coords.extend(real_sets.iter().copied());
    for r in rects {
        coords.push(r.re);
        coords.push(r.im);
    }
    match settings.backend {
        Backend::Adaptive => adaptive(model, k, l, &coords, settings),
        Backend::MonteCarlo => monte_carlo(model, k, l, &coords, settings),
        Backend::QuasiRandom => Err(Error::BackendUnavailable(
            "quasi-random backend does not integrate over positions; use monte_carlo".into(),
        )),
    }
}

fn point_value(
    model: &CoefficientModel,
    k: usize,
    l: usize,
    pos: &[f64],
    settings: &BackendSettings,
) -> Result<IntegralEstimate> {
    let complex: Vec<Complex64> = (0..l).map(|j| Complex64::new(pos[k + 2 * j], pos[k + 2 * j + 1])).collect();
    if complex.iter().any(|z| z.im <= 0.0) {
        return Ok(IntegralEstimate::zero(settings.backend));
    }
    match (k, l) {
        (1, 0) => rho_real_density(model, pos[0], settings),
        (0, 1) => rho_complex_density(model, complex[0], settings),
        _ => rho_kl(model, &ZeroConfiguration::new(pos[..k].to_vec(), complex)?, settings),
    }
}

const MAX_ADAPTIVE_POSITIONS: usize = 3;

fn adaptive(
    model: &CoefficientModel,
    k: usize,
    l: usize,
    coords: &[(f64, f64)],
    settings: &BackendSettings,
) -> Result<IntegralEstimate> {
    if coords.len() > MAX_ADAPTIVE_POSITIONS {
        return Err(Error::BackendUnavailable(format!(
            "adaptive integration over {} position coordinates is not offered; use monte_carlo",
            coords.len()
        )));
    }
    let outer_tol = settings.tol.max(1e-8);
    let inner = BackendSettings {
        tol: outer_tol * 0.1,
        ..settings.clone()
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let effort = RefCell::new(0u64);
    let mut pos = vec![0.0; coords.len()];
    let (value, error) = outer_level(
        &mut |p: &[f64]| {
            if failure.borrow().is_some() {
                return (0.0, 0.0);
            }
            match point_value(model, k, l, p, &inner) {
                Ok(e) => {
                    *effort.borrow_mut() += e.effort;
                    (e.value, e.error)
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    (0.0, 0.0)
                }
            }
        },
        coords,
        k,
        0,
        &mut pos,
        &QuadSettings {
            abs_tol: 0.0,
            rel_tol: outer_tol,
            max_intervals: settings.max_intervals,
        },
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(IntegralEstimate::clamped(value, error, Backend::Adaptive, effort.into_inner()))
}

/// Iterated integration over the position coordinates; returns (value, error)
/// where the error adds the outer estimate to the integrated inner errors.
fn outer_level(
    f: &mut dyn FnMut(&[f64]) -> (f64, f64),
    coords: &[(f64, f64)],
    k: usize,
    j: usize,
    pos: &mut Vec<f64>,
    settings: &QuadSettings,
) -> (f64, f64) {
    let map = AxisMap::new(coords[j].0, coords[j].1);
    let (a, b) = map.domain();
    // Kinks of the densities sit on |x| = 1 and at the origin for the
    // bounded families; splitting there is harmless otherwise.
    let imaginary = j >= k && (j - k) % 2 == 1;
    let natural: &[f64] = if imaginary { &[1.0] } else { &[-1.0, 0.0, 1.0] };
    let breaks: Vec<f64> = natural.iter().map(|&x| map.inverse(x)).collect();
    let last = j + 1 == coords.len();
    let (o, inner_err) = integrate_with_aux(
        |s| {
            let (x, jac) = map.point(s);
            if !x.is_finite() || !jac.is_finite() {
                return (0.0, 0.0);
            }
            pos[j] = x;
            let (v, e) = if last {
                f(pos)
            } else {
                outer_level(f, coords, k, j + 1, pos, settings)
            };
            (v * jac, e * jac)
        },
        a,
        b,
        &breaks,
        settings,
    );
    (o.value, o.error + inner_err.abs())
}

/// Cauchy law truncated to `[a, b]`.
pub(crate) struct TruncatedCauchy {
    lo: f64,
    pub(crate) mass: f64,
}

impl TruncatedCauchy {
    pub(crate) fn new((a, b): (f64, f64)) -> Self {
        let cdf = |x: f64| 0.5 + x.atan() / PI;
        Self {
            lo: cdf(a),
            mass: cdf(b) - cdf(a),
        }
    }

    /// Returns the draw and its density.
    pub(crate) fn draw(&self, rng: &mut StreamRng) -> (f64, f64) {
        let u = self.lo + self.mass * rng.random::<f64>();
        let x = (PI * (u - 0.5)).tan();
        (x, 1.0 / (PI * (1.0 + x * x) * self.mass))
    }
}

fn monte_carlo(
    model: &CoefficientModel,
    k: usize,
    l: usize,
    coords: &[(f64, f64)],
    settings: &BackendSettings,
) -> Result<IntegralEstimate> {
    if settings.samples < 1000 {
        return Err(Error::Input(format!(
            "monte carlo needs at least 1000 samples, got {}",
            settings.samples
        )));
    }
    let laws: Vec<TruncatedCauchy> = coords.iter().map(|&c| TruncatedCauchy::new(c)).collect();
    if laws.iter().any(|c| c.mass <= 0.0) {
        return Ok(IntegralEstimate::zero(Backend::MonteCarlo));
    }
    let scale = 2f64.powi(l as i32);
    let moments = monte_carlo_moments(settings.samples, settings.seed, |rng| {
        let mut pos = [0.0; MAX_SLOTS];
        let mut q_pos = 1.0;
        for (p, law) in pos.iter_mut().zip(&laws) {
            let (x, q) = law.draw(rng);
            *p = x;
            q_pos *= q;
        }
        let complex: Vec<Complex64> = (0..l).map(|j| Complex64::new(pos[k + 2 * j], pos[k + 2 * j + 1])).collect();
        let Ok(cfg) = ZeroConfiguration::new(pos[..k].to_vec(), complex) else {
            return 0.0;
        };
        let Ok(spec) = IntegrandSpec::new(model, cfg) else {
            return 0.0;
        };
        let Ok(proposal) = Proposal::select_light(&spec) else {
            return 0.0;
        };
        let d = spec.dim();
        let mut t = [0.0; MAX_SLOTS];
        let q_t = proposal.draw(&spec, rng, &mut t[..d]);
        if !(q_t > 0.0 && q_t.is_finite() && q_pos > 0.0 && q_pos.is_finite()) {
            return 0.0;
        }
        let w = scale * spec.vandermonde() * spec.eval(&t[..d]) / (q_t * q_pos);
        if w.is_finite() {
            w
        } else {
            0.0
        }
    });
    let (mean, se) = moments.mean_and_stderr();
    Ok(IntegralEstimate::clamped(mean, se, Backend::MonteCarlo, moments.count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::CoefficientDensity;
    use approx::assert_relative_eq;

    #[test]
    fn cauchy_mass_of_interval() {
        let m = CoefficientModel::iid(1, CoefficientDensity::standard_gaussian()).unwrap();
        let r = integrate_correlation(&m, &[(-1.0, 1.0)], &[], &BackendSettings::adaptive(1e-8)).unwrap();
        assert_relative_eq!(r.value, 0.5, max_relative = 1e-6);
        let mc = integrate_correlation(&m, &[(-1.0, 1.0)], &[], &BackendSettings::monte_carlo(100_000, 4)).unwrap();
        assert!((mc.value - 0.5).abs() < 4.0 * mc.error, "{mc:?}");
    }

    #[test]
    fn degree_one_total_mass() {
        let m = CoefficientModel::iid(1, CoefficientDensity::standard_uniform()).unwrap();
        let all = (f64::NEG_INFINITY, f64::INFINITY);
        let r = integrate_correlation(&m, &[all], &[], &BackendSettings::adaptive(1e-8)).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn rejects_bad_sets() {
        let m = CoefficientModel::iid(2, CoefficientDensity::standard_gaussian()).unwrap();
        let s = BackendSettings::default();
        assert!(matches!(
            integrate_correlation(&m, &[(1.0, 0.0)], &[], &s),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            Rect::new((0.0, 1.0), (-0.5, 1.0)),
            Err(Error::Domain(_))
        ));
        let r = Rect::new((0.0, 1.0), (0.5, 1.0)).unwrap();
        assert!(matches!(
            integrate_correlation(&m, &[(0.0, 1.0)], &[r], &s),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn exponential_has_no_positive_zeros() {
        let m = CoefficientModel::iid(2, CoefficientDensity::Exponential).unwrap();
        let r = integrate_correlation(&m, &[(0.0, f64::INFINITY)], &[], &BackendSettings::monte_carlo(5_000, 1)).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
