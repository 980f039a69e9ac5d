//! Coefficient laws of the random polynomial.
//!
//! A [`CoefficientModel`] holds one [`CoefficientDensity`] per coefficient slot
//! `0..=n`; slot `i` is the law of the coefficient of `z^i`.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;
use std::f64::consts::PI;

/// Allowed deviation of a tabulated density's trapezoid mass from 1.
pub const TABULATED_MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityDescriptor", into = "DensityDescriptor")]
pub enum CoefficientDensity {
    /// Constant density `1/(b-a)` on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// Centred normal law with standard deviation `v`.
    Gaussian { v: f64 },
    /// Rate-one exponential law on `[0, ∞)`.
    Exponential,
    /// Piecewise-linear density through `(grid[i], values[i])`, zero outside the grid.
    Tabulated(Tabulated),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    grid: Vec<f64>,
    values: Vec<f64>,
    cdf: Vec<f64>,
}

/// The JSON form of a density.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensityDescriptor {
    Uniform { a: f64, b: f64 },
    Gaussian { v: f64 },
    Exponential,
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<DensityDescriptor> for CoefficientDensity {
    type Error = Error;

    fn try_from(d: DensityDescriptor) -> Result<Self> {
        match d {
            DensityDescriptor::Uniform { a, b } => Self::uniform(a, b),
            DensityDescriptor::Gaussian { v } => Self::gaussian(v),
            DensityDescriptor::Exponential => Ok(Self::Exponential),
            DensityDescriptor::Tabulated { grid, values } => Self::tabulated(grid, values),
        }
    }
}

impl From<CoefficientDensity> for DensityDescriptor {
    fn from(d: CoefficientDensity) -> Self {
        match d {
            CoefficientDensity::Uniform { a, b } => DensityDescriptor::Uniform { a, b },
            CoefficientDensity::Gaussian { v } => DensityDescriptor::Gaussian { v },
            CoefficientDensity::Exponential => DensityDescriptor::Exponential,
            CoefficientDensity::Tabulated(t) => DensityDescriptor::Tabulated {
                grid: t.grid,
                values: t.values,
            },
        }
    }
}

impl CoefficientDensity {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Input(format!("uniform({a}, {b}) needs finite a < b")));
        }
        Ok(Self::Uniform { a, b })
    }

    pub fn gaussian(v: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Input(format!("gaussian standard deviation {v} must be positive")));
        }
        Ok(Self::Gaussian { v })
    }

    pub fn standard_gaussian() -> Self {
        Self::Gaussian { v: 1.0 }
    }

    pub fn standard_uniform() -> Self {
        Self::Uniform { a: -1.0, b: 1.0 }
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::Input(
                "tabulated density needs matching grid and values with at least two nodes".into(),
            ));
        }
        if grid.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::Input("tabulated density has non-finite entries".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("tabulated grid must be strictly increasing".into()));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::Input("tabulated density values must be nonnegative".into()));
        }
        let mut cdf = Vec::with_capacity(grid.len());
        cdf.push(0.0);
        for k in 1..grid.len() {
            let h = grid[k] - grid[k - 1];
            cdf.push(cdf[k - 1] + 0.5 * h * (values[k] + values[k - 1]));
        }
        let mass = *cdf.last().unwrap();
        if (mass - 1.0).abs() > TABULATED_MASS_TOL {
            return Err(Error::Input(format!("tabulated density has mass {mass}, expected 1")));
        }
        Ok(Self::Tabulated(Tabulated { grid, values, cdf }))
    }

    /// Pointwise density; exactly zero outside the support.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::Input(format!("density evaluated at non-finite point {u}")));
        }
        Ok(self.eval_unchecked(u))
    }

    /// Density without the finiteness check, for hot loops that guarantee finite input.
    #[inline]
    pub fn eval_unchecked(&self, u: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => {
                if (a..=b).contains(&u) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Self::Gaussian { v } => (-0.5 * (u / v).powi(2)).exp() / ((2.0 * PI).sqrt() * v),
            Self::Exponential => {
                if u >= 0.0 {
                    (-u).exp()
                } else {
                    0.0
                }
            }
            Self::Tabulated(ref t) => t.eval(u),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Self::Gaussian { v } => {
                let z: f64 = StandardNormal.sample(rng);
                v * z
            }
            Self::Exponential => Exp1.sample(rng),
            Self::Tabulated(ref t) => t.inverse_cdf(rng.random::<f64>()),
        }
    }

    /// Radius `R` such that at most `eps` of the mass lies outside `[-R, R]`.
    pub fn decay_radius(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Input(format!("tail mass {eps} must lie in (0, 1)")));
        }
        Ok(match *self {
            Self::Uniform { a, b } => a.abs().max(b.abs()),
            Self::Gaussian { v } => v * std::f64::consts::SQRT_2 * erfc_inv(eps),
            Self::Exponential => -eps.ln(),
            Self::Tabulated(ref t) => t.grid[0].abs().max(t.grid.last().unwrap().abs()),
        })
    }

    /// Exact support as a closed interval, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { a, b } => (a, b),
            Self::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Exponential => (0.0, f64::INFINITY),
            Self::Tabulated(ref t) => (t.grid[0], *t.grid.last().unwrap()),
        }
    }

    /// Support intersected with `[-R, R]` for `R = decay_radius(eps)`.
    pub fn truncated_support(&self, eps: f64) -> Result<(f64, f64)> {
        let r = self.decay_radius(eps)?;
        let (lo, hi) = self.support();
        Ok((lo.max(-r), hi.min(r)))
    }

    /// Points where the density is not smooth (jumps or kinks).
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Self::Uniform { a, b } => vec![a, b],
            Self::Gaussian { .. } => Vec::new(),
            Self::Exponential => vec![0.0],
            Self::Tabulated(ref t) => t.grid.clone(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { a, b } => 0.5 * (a + b),
            Self::Gaussian { .. } => 0.0,
            Self::Exponential => 1.0,
            Self::Tabulated(ref t) => t.mean(),
        }
    }
}

impl Tabulated {
    fn eval(&self, u: f64) -> f64 {
        let g = &self.grid;
        if u < g[0] || u > *g.last().unwrap() {
            return 0.0;
        }
        let k = match g.partition_point(|&x| x <= u) {
            0 => 0,
            p if p >= g.len() => g.len() - 2,
            p => p - 1,
        };
        let w = (u - g[k]) / (g[k + 1] - g[k]);
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        let total = *self.cdf.last().unwrap();
        let target = p * total;
        let k = self
            .cdf
            .partition_point(|&c| c <= target)
            .clamp(1, self.cdf.len() - 1)
            - 1;
        let (g0, g1) = (self.grid[k], self.grid[k + 1]);
        let (f0, f1) = (self.values[k], self.values[k + 1]);
        let r = target - self.cdf[k];
        let slope = (f1 - f0) / (g1 - g0);
        // Solve f0*d + slope*d^2/2 = r for the offset d within the cell.
        let disc = (f0 * f0 + 2.0 * slope * r).max(0.0);
        let denom = f0 + disc.sqrt();
        let d = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        (g0 + d).clamp(g0, g1)
    }

    fn mean(&self) -> f64 {
        // Exact first moment of the piecewise-linear density.
        let mut m = 0.0;
        for k in 1..self.grid.len() {
            let (a, b) = (self.grid[k - 1], self.grid[k]);
            let (fa, fb) = (self.values[k - 1], self.values[k]);
            let h = b - a;
            m += h * (fa * (2.0 * a + b) + fb * (a + 2.0 * b)) / 6.0;
        }
        m
    }
}

/// Degree and per-slot coefficient laws of a random polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDescriptor", into = "ModelDescriptor")]
pub struct CoefficientModel {
    densities: Vec<CoefficientDensity>,
}

/// JSON form of a model: either an explicit list of `degree + 1` densities or a
/// single `iid` density repeated for every slot.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<Vec<CoefficientDensity>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iid: Option<CoefficientDensity>,
}

impl TryFrom<ModelDescriptor> for CoefficientModel {
    type Error = Error;

    fn try_from(d: ModelDescriptor) -> Result<Self> {
        match (d.densities, d.iid) {
            (Some(list), None) => {
                if list.len() != d.degree + 1 {
                    return Err(Error::Input(format!(
                        "degree {} needs {} densities, got {}",
                        d.degree,
                        d.degree + 1,
                        list.len()
                    )));
                }
                Self::new(list)
            }
            (None, Some(density)) => Self::iid(d.degree, density),
            _ => Err(Error::Input("model needs exactly one of `densities` or `iid`".into())),
        }
    }
}

impl From<CoefficientModel> for ModelDescriptor {
    fn from(m: CoefficientModel) -> Self {
        ModelDescriptor {
            degree: m.degree(),
            densities: Some(m.densities),
            iid: None,
        }
    }
}

impl CoefficientModel {
    pub fn new(densities: Vec<CoefficientDensity>) -> Result<Self> {
        if densities.len() < 2 {
            return Err(Error::Input("a random polynomial needs degree n >= 1".into()));
        }
        Ok(Self { densities })
    }

    pub fn iid(degree: usize, density: CoefficientDensity) -> Result<Self> {
        Self::new(vec![density; degree + 1])
    }

    pub fn degree(&self) -> usize {
        self.densities.len() - 1
    }

    pub fn densities(&self) -> &[CoefficientDensity] {
        &self.densities
    }

    pub fn density(&self, i: usize) -> &CoefficientDensity {
        &self.densities[i]
    }

    /// Standard deviations when every slot is gaussian.
    pub fn gaussian_scales(&self) -> Option<Vec<f64>> {
        self.densities
            .iter()
            .map(|d| match *d {
                CoefficientDensity::Gaussian { v } => Some(v),
                _ => None,
            })
            .collect()
    }

    pub fn is_all_uniform(&self) -> bool {
        self.densities
            .iter()
            .all(|d| matches!(d, CoefficientDensity::Uniform { .. }))
    }

    pub fn is_standard_uniform(&self) -> bool {
        self.densities
            .iter()
            .all(|d| *d == CoefficientDensity::standard_uniform())
    }

    pub fn is_all_exponential(&self) -> bool {
        self.densities
            .iter()
            .all(|d| matches!(d, CoefficientDensity::Exponential))
    }

    /// Draw a full coefficient vector `(ξ_0, .., ξ_n)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.densities.iter().map(|d| d.sample(rng)).collect()
    }
}
