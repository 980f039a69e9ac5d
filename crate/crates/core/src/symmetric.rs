//! Elementary symmetric polynomials, Vandermonde moduli and the linear map
//! from integration variables to coefficient slots.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative imaginary residue tolerated when realifying a symmetric function.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// `k` real points and `l` upper-half-plane points; the conjugates are implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigurationDescriptor", into = "ConfigurationDescriptor")]
pub struct ZeroConfiguration {
    real: Vec<f64>,
    complex: Vec<Complex64>,
}

/// JSON form: `{"real": [x..], "complex": [[re, im], ..]}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationDescriptor {
    #[serde(default)]
    pub real: Vec<f64>,
    #[serde(default)]
    pub complex: Vec<[f64; 2]>,
}

impl TryFrom<ConfigurationDescriptor> for ZeroConfiguration {
    type Error = Error;

    fn try_from(d: ConfigurationDescriptor) -> Result<Self> {
        let complex = d.complex.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Self::new(d.real, complex)
    }
}

impl From<ZeroConfiguration> for ConfigurationDescriptor {
    fn from(c: ZeroConfiguration) -> Self {
        ConfigurationDescriptor {
            real: c.real,
            complex: c.complex.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ZeroConfiguration {
    pub fn new(real: Vec<f64>, complex: Vec<Complex64>) -> Result<Self> {
        if real.iter().any(|x| !x.is_finite()) || complex.iter().any(|z| !z.is_finite()) {
            return Err(Error::Input("configuration points must be finite".into()));
        }
        if let Some(z) = complex.iter().find(|z| z.im <= 0.0) {
            return Err(Error::Domain(format!(
                "complex point {z} is not in the open upper half-plane"
            )));
        }
        Ok(Self { real, complex })
    }

    pub fn real_only(real: Vec<f64>) -> Result<Self> {
        Self::new(real, Vec::new())
    }

    pub fn real_points(&self) -> &[f64] {
        &self.real
    }

    pub fn complex_points(&self) -> &[Complex64] {
        &self.complex
    }

    pub fn k(&self) -> usize {
        self.real.len()
    }

    pub fn l(&self) -> usize {
        self.complex.len()
    }

    /// Length of the conjugate-closed tuple, `k + 2l`.
    pub fn m(&self) -> usize {
        self.real.len() + 2 * self.complex.len()
    }

    /// `(x_1, .., x_k, z_1, conj z_1, .., z_l, conj z_l)`.
    pub fn full_tuple(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.real.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for z in &self.complex {
            out.push(*z);
            out.push(z.conj());
        }
        out
    }
}

/// `σ_0 .. σ_m` of a configuration together with its Vandermonde modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricProfile {
    sigma: Vec<f64>,
    vandermonde: f64,
}

impl SymmetricProfile {
    pub fn m(&self) -> usize {
        self.sigma.len() - 1
    }

    /// `σ_i`, zero for `i < 0` or `i > m`.
    pub fn sigma(&self, i: isize) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.sigma.get(i as usize).copied().unwrap_or(0.0)
        }
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigma
    }

    pub fn vandermonde(&self) -> f64 {
        self.vandermonde
    }
}

/// `σ_0 .. σ_m` of an arbitrary complex tuple by incremental multiplication.
pub fn elementary_symmetric_complex(points: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); points.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (r, &w) in points.iter().enumerate() {
        for i in (1..=r + 1).rev() {
            e[i] = e[i] + w * e[i - 1];
        }
    }
    e
}

/// Product of pairwise distances.
pub fn vandermonde_modulus(points: &[Complex64]) -> f64 {
    let mut v = 1.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            v *= (points[i] - points[j]).norm();
        }
    }
    v
}

pub fn elementary_symmetric(cfg: &ZeroConfiguration) -> Result<SymmetricProfile> {
    let tuple = cfg.full_tuple();
    let e = elementary_symmetric_complex(&tuple);
    // Rounding in σ_i is relative to the same sum taken over |w|, which can be
    // far larger than |σ_i| when terms cancel.
    let moduli: Vec<Complex64> = tuple.iter().map(|w| Complex64::new(w.norm(), 0.0)).collect();
    let scale = elementary_symmetric_complex(&moduli);
    let mut sigma = Vec::with_capacity(e.len());
    for (i, s) in e.iter().enumerate() {
        if s.im.abs() > IMAG_RESIDUE_TOL * (1.0 + scale[i].re) {
            return Err(Error::Consistency(format!(
                "sigma_{i} = {s} has an imaginary residue; tuple is not conjugate-closed"
            )));
        }
        sigma.push(s.re);
    }
    Ok(SymmetricProfile {
        sigma,
        vandermonde: vandermonde_modulus(&tuple),
    })
}

/// The linear map `t ↦ u` with `u_i = Σ_j (−1)^{m−i+j} σ_{m−i+j} t_j`.
///
/// Column `j` is the coefficient vector of `z^j · Π (z − w)` over the full
/// tuple. Rows `m..=n` form a unit upper-triangular block in the natural
/// `(row − m, column)` indexing, which is what makes back-substitution from
/// the top coefficient slots possible.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMap {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl CoefficientMap {
    pub fn new(profile: &SymmetricProfile, n: usize) -> Result<Self> {
        let m = profile.m();
        if m > n {
            return Err(Error::Dimension(format!(
                "configuration of size m = {m} exceeds degree n = {n}"
            )));
        }
        let cols = n - m + 1;
        let mut data = vec![0.0; (n + 1) * cols];
        for i in 0..=n {
            for j in 0..cols {
                let idx = m as isize - i as isize + j as isize;
                let sign = if idx.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                data[i * cols + j] = sign * profile.sigma(idx);
            }
        }
        Ok(Self { n, m, data })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> usize {
        self.n + 1
    }

    /// Number of integration variables `n − m + 1`.
    pub fn cols(&self) -> usize {
        self.n - self.m + 1
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows()).map(|i| self.entry(i, j)).collect()
    }

    /// `out = M t`.
    #[inline]
    pub fn apply_into(&self, t: &[f64], out: &mut [f64]) {
        let c = self.cols();
        for (i, o) in out.iter_mut().enumerate().take(self.n + 1) {
            let row = &self.data[i * c..(i + 1) * c];
            *o = row.iter().zip(t).map(|(a, b)| a * b).sum();
        }
    }

    pub fn apply(&self, t: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.apply_into(t, &mut out);
        out
    }

    /// Recover `t` from the top slots `u_m .. u_n` (the triangular block).
    pub fn solve_top(&self, top: &[f64], t: &mut [f64]) {
        let d = self.cols();
        debug_assert_eq!(top.len(), d);
        for q in (0..d).rev() {
            let row = self.row(self.m + q);
            let mut acc = top[q];
            for j in q + 1..d {
                acc -= row[j] * t[j];
            }
            t[q] = acc;
        }
    }

    /// Interval back-substitution: bounds on `t` implied by `u_{m+q} ∈ [lo_q, hi_q]`.
    pub fn triangular_box(&self, top: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let d = self.cols();
        let mut bx = vec![(0.0, 0.0); d];
        for q in (0..d).rev() {
            let row = self.row(self.m + q);
            let (mut lo, mut hi) = top[q];
            for j in q + 1..d {
                let c = -row[j];
                let (a, b) = (c * bx[j].0, c * bx[j].1);
                lo += a.min(b);
                hi += a.max(b);
            }
            bx[q] = (lo, hi);
        }
        bx
    }
}

pub fn coefficient_map(cfg: &ZeroConfiguration, n: usize) -> Result<CoefficientMap> {
    CoefficientMap::new(&elementary_symmetric(cfg)?, n)
}

/// Square real matrix with one row `(x^0 .. x^{m−1})` per real point and rows
/// `Re(z^p)`, `Im(z^p)` per complex point.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVandermondeMatrix {
    pub matrix: DMatrix<f64>,
}

impl RealVandermondeMatrix {
    pub fn abs_det(&self) -> f64 {
        if self.matrix.nrows() == 0 {
            return 1.0;
        }
        self.matrix.clone().lu().determinant().abs()
    }
}

pub fn real_vandermonde(cfg: &ZeroConfiguration) -> RealVandermondeMatrix {
    let m = cfg.m();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for &x in cfg.real_points() {
        let mut p = 1.0;
        rows.push(
            (0..m)
                .map(|_| {
                    let v = p;
                    p *= x;
                    v
                })
                .collect(),
        );
    }
    for &z in cfg.complex_points() {
        let mut p = Complex64::new(1.0, 0.0);
        let powers: Vec<Complex64> = (0..m)
            .map(|_| {
                let v = p;
                p *= z;
                v
            })
            .collect();
        rows.push(powers.iter().map(|w| w.re).collect());
        rows.push(powers.iter().map(|w| w.im).collect());
    }
    RealVandermondeMatrix {
        matrix: DMatrix::from_fn(m, m, |i, j| rows[i][j]),
    }
}

/// `Σ_i (−1)^i σ_i(w)`.
///
/// The alternating sum cancels heavily when some `w_i` is near 1, so the
/// recurrence and the sum run in double-double arithmetic.
pub fn alternating_sigma_product(points: &[Complex64]) -> Complex64 {
    let mut e = vec![dd::Complex::ZERO; points.len() + 1];
    e[0] = dd::Complex::ONE;
    for (r, w) in points.iter().enumerate() {
        for i in (1..=r + 1).rev() {
            e[i] = e[i].add(e[i - 1].mul(*w));
        }
    }
    let mut acc = dd::Complex::ZERO;
    for (i, s) in e.iter().enumerate() {
        acc = if i % 2 == 0 { acc.add(*s) } else { acc.add(s.neg()) };
    }
    acc.to_complex()
}

/// Minimal double-double arithmetic (error-free transformations).
mod dd {
    use num_complex::Complex64;

    #[derive(Debug, Clone, Copy)]
    pub struct Real {
        hi: f64,
        lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> Real {
        let s = a + b;
        Real { hi: s, lo: b - (s - a) }
    }

    impl Real {
        pub const ZERO: Real = Real { hi: 0.0, lo: 0.0 };

        pub fn add(self, o: Real) -> Real {
            let (s, e) = two_sum(self.hi, o.hi);
            quick_two_sum(s, e + self.lo + o.lo)
        }

        pub fn mul_f64(self, b: f64) -> Real {
            let p = self.hi * b;
            let e = self.hi.mul_add(b, -p);
            quick_two_sum(p, e + self.lo * b)
        }

        pub fn neg(self) -> Real {
            Real { hi: -self.hi, lo: -self.lo }
        }
    }

    #[derive(Debug, Clone, Copy)]
    pub struct Complex {
        re: Real,
        im: Real,
    }

    impl Complex {
        pub const ZERO: Complex = Complex { re: Real::ZERO, im: Real::ZERO };
        pub const ONE: Complex = Complex {
            re: Real { hi: 1.0, lo: 0.0 },
            im: Real::ZERO,
        };

        pub fn add(self, o: Complex) -> Complex {
            Complex {
                re: self.re.add(o.re),
                im: self.im.add(o.im),
            }
        }

        pub fn mul(self, w: Complex64) -> Complex {
            Complex {
                re: self.re.mul_f64(w.re).add(self.im.mul_f64(w.im).neg()),
                im: self.re.mul_f64(w.im).add(self.im.mul_f64(w.re)),
            }
        }

        pub fn neg(self) -> Complex {
            Complex {
                re: self.re.neg(),
                im: self.im.neg(),
            }
        }

        pub fn to_complex(self) -> Complex64 {
            Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
        }
    }
}

/// `Π (1 − w_i)`.
pub fn one_minus_product(points: &[Complex64]) -> Complex64 {
    points
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, w| acc * (1.0 - w))
}
