use crate::density::CoefficientModel;
use crate::error::{Error, Result};
use crate::symmetric::{elementary_symmetric, CoefficientMap, SymmetricProfile, ZeroConfiguration};
use num_complex::Complex64;

/// Largest number of coefficient slots the fixed-size scratch buffers support.
pub const MAX_SLOTS: usize = 64;

/// How the density arguments `u = M t` are assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    /// Dense product with the coefficient map.
    Generic,
    /// One real point: `u_i = t_{i−1} − x t_i`.
    RealBanded(f64),
    /// One conjugate pair: `u_i = t_{i−2} − 2 Re z t_{i−1} + |z|² t_i`.
    ComplexBanded(Complex64),
}

/// Everything needed to evaluate the integrand over `t ∈ ℝ^d`, `d = n − m + 1`.
#[derive(Debug, Clone)]
pub struct IntegrandSpec<'a> {
    model: &'a CoefficientModel,
    cfg: ZeroConfiguration,
    profile: SymmetricProfile,
    map: CoefficientMap,
    layout: Layout,
}

impl<'a> IntegrandSpec<'a> {
    pub fn new(model: &'a CoefficientModel, cfg: ZeroConfiguration) -> Result<Self> {
        let n = model.degree();
        if n + 1 > MAX_SLOTS {
            return Err(Error::Unsupported(format!(
                "degree {n} exceeds the supported maximum {}",
                MAX_SLOTS - 1
            )));
        }
        let profile = elementary_symmetric(&cfg)?;
        let map = CoefficientMap::new(&profile, n)?;
        Ok(Self {
            model,
            cfg,
            profile,
            map,
            layout: Layout::Generic,
        })
    }

    /// Integrand for the density of real zeros at `x`, assembled from the banded form.
    pub fn real_banded(model: &'a CoefficientModel, x: f64) -> Result<Self> {
        let mut s = Self::new(model, ZeroConfiguration::real_only(vec![x])?)?;
        s.layout = Layout::RealBanded(x);
        Ok(s)
    }

    /// Integrand for the density of complex zeros at `z`, assembled from the banded form.
    pub fn complex_banded(model: &'a CoefficientModel, z: Complex64) -> Result<Self> {
        let mut s = Self::new(model, ZeroConfiguration::new(Vec::new(), vec![z])?)?;
        s.layout = Layout::ComplexBanded(z);
        Ok(s)
    }

    pub fn model(&self) -> &'a CoefficientModel {
        self.model
    }

    pub fn configuration(&self) -> &ZeroConfiguration {
        &self.cfg
    }

    pub fn profile(&self) -> &SymmetricProfile {
        &self.profile
    }

    pub fn map(&self) -> &CoefficientMap {
        &self.map
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.map.cols()
    }

    /// Vandermonde modulus of the full tuple (the prefactor of `ρ_m`).
    pub fn vandermonde(&self) -> f64 {
        self.profile.vandermonde()
    }

    #[inline]
    fn arguments(&self, t: &[f64], u: &mut [f64]) {
        let n = self.map.degree();
        match self.layout {
            Layout::Generic => self.map.apply_into(t, u),
            Layout::RealBanded(x) => {
                for (i, ui) in u.iter_mut().enumerate().take(n + 1) {
                    let prev = if i >= 1 { t[i - 1] } else { 0.0 };
                    let cur = if i < n { t[i] } else { 0.0 };
                    *ui = prev - x * cur;
                }
            }
            Layout::ComplexBanded(z) => {
                let (b, c) = (2.0 * z.re, z.norm_sqr());
                let at = |j: isize| {
                    if j >= 0 && (j as usize) < n - 1 {
                        t[j as usize]
                    } else {
                        0.0
                    }
                };
                for (i, ui) in u.iter_mut().enumerate().take(n + 1) {
                    let i = i as isize;
                    *ui = at(i - 2) - b * at(i - 1) + c * at(i);
                }
            }
        }
    }

    /// `Π_i f_i((M t)_i) · Π_x |p(x)| · Π_z |p(z)|²` with `p(w) = Σ_j t_j w^j`.
    /// The Vandermonde and `2^l` prefactors are not included.
    #[inline]
    pub fn eval(&self, t: &[f64]) -> f64 {
        let n = self.map.degree();
        let mut u = [0.0; MAX_SLOTS];
        self.arguments(t, &mut u[..n + 1]);
        let mut dens = 1.0;
        for (i, &ui) in u[..n + 1].iter().enumerate() {
            let f = self.model.density(i).eval_unchecked(ui);
            if f == 0.0 {
                return 0.0;
            }
            dens *= f;
        }
        dens * self.polynomial_factor(t)
    }

    #[inline]
    pub fn polynomial_factor(&self, t: &[f64]) -> f64 {
        let mut acc = 1.0;
        for &x in self.cfg.real_points() {
            let p = t.iter().rev().fold(0.0, |s, &c| s * x + c);
            acc *= p.abs();
        }
        for &z in self.cfg.complex_points() {
            let p = t
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |s, &c| s * z + c);
            acc *= p.norm_sqr();
        }
        acc
    }

    /// Points in the last coordinate where the integrand is not smooth once the
    /// other coordinates are fixed to `prefix`: density jumps and kinks pulled
    /// back through the affine dependence of each `u_i`, and the zeros of the
    /// real-point factors `|p(x)|`.
    pub fn breakpoints(&self, prefix: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let last = d - 1;
        if prefix.len() != last {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..=self.map.degree() {
            let row = self.map.row(i);
            let slope = row[last];
            if slope == 0.0 {
                continue;
            }
            let offset: f64 = row[..last].iter().zip(prefix).map(|(a, b)| a * b).sum();
            for s in self.model.density(i).breakpoints() {
                out.push((s - offset) / slope);
            }
        }
        for &x in self.cfg.real_points() {
            let lead = x.powi(last as i32);
            if lead == 0.0 {
                continue;
            }
            let rest = prefix.iter().rev().fold(0.0, |s, &c| s * x + c);
            out.push(-rest / lead);
        }
        out.retain(|v| v.is_finite());
        out
    }
}
