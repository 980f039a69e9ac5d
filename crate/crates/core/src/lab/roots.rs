//! Aberth–Ehrlich simultaneous root finder for real-coefficient polynomials.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSettings {
    pub max_iterations: usize,
    pub polish_steps: usize,
}

impl Default for RootSettings {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            polish_steps: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootOutcome {
    pub roots: Vec<Complex64>,
    /// Largest backward error `|p(z)| / Σ |a_i| |z|^i` over the roots.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Polynomial `Σ a_i z^i` stored lowest degree first.
struct Poly<'a> {
    a: &'a [f64],
    abs: Vec<f64>,
}

impl<'a> Poly<'a> {
    fn new(a: &'a [f64]) -> Self {
        Self {
            a,
            abs: a.iter().map(|c| c.abs()).collect(),
        }
    }

    fn degree(&self) -> usize {
        self.a.len() - 1
    }

    /// `(p(z), Σ|a_i||z|^i)`.
    fn eval_with_bound(&self, z: Complex64) -> (Complex64, f64) {
        let r = z.norm();
        let mut p = Complex64::new(0.0, 0.0);
        let mut b = 0.0;
        for (c, ac) in self.a.iter().zip(&self.abs).rev() {
            p = p * z + c;
            b = b * r + ac;
        }
        (p, b)
    }

    /// Newton correction `p(z)/p'(z)`, evaluated through the reversed
    /// polynomial outside the unit disc to avoid overflow.
    fn newton_ratio(&self, z: Complex64) -> Complex64 {
        let n = self.degree();
        if z.norm() <= 1.0 {
            let mut p = Complex64::new(0.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            for c in self.a.iter().rev() {
                dp = dp * z + p;
                p = p * z + c;
            }
            p / dp
        } else {
            let w = 1.0 / z;
            let mut q = Complex64::new(0.0, 0.0);
            let mut dq = Complex64::new(0.0, 0.0);
            for c in self.a.iter() {
                dq = dq * w + q;
                q = q * w + c;
            }
            1.0 / (w * (n as f64 - w * dq / q))
        }
    }

    fn backward_error(&self, z: Complex64) -> f64 {
        let (p, b) = self.eval_with_bound(z);
        if b == 0.0 {
            0.0
        } else {
            p.norm() / b
        }
    }
}

/// Initial guesses on circles whose radii come from the upper convex hull of
/// `(i, ln|a_i|)` (the Newton polygon), spread in angle.
fn initial_guesses(a: &[f64]) -> Vec<Complex64> {
    let n = a.len() - 1;
    let pts: Vec<(usize, f64)> = a
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| (i, c.abs().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (o, q) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (q.0 as f64 - o.0 as f64) * (p.1 - o.1) - (q.1 - o.1) * (p.0 as f64 - o.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    // Roots at the origin for vanishing low-order coefficients.
    let lowest = hull.first().map_or(0, |h| h.0);
    for _ in 0..lowest {
        out.push(Complex64::new(0.0, 0.0));
    }
    for w in hull.windows(2) {
        let (i, j) = (w[0].0, w[1].0);
        let k = j - i;
        let r = ((w[0].1 - w[1].1) / k as f64).exp();
        for s in 0..k {
            let theta = 2.0 * PI * s as f64 / k as f64 + 2.0 * PI * i as f64 / n as f64 + 0.7;
            out.push(Complex64::from_polar(r, theta));
        }
    }
    out
}

/// All `n` complex roots of `Σ a_i z^i`.
pub fn find_roots(coefficients: &[f64], settings: &RootSettings) -> Result<RootOutcome> {
    if coefficients.len() < 2 {
        return Err(Error::Input("a polynomial of degree >= 1 is required".into()));
    }
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Input("non-finite coefficient".into()));
    }
    let n = coefficients.len() - 1;
    if coefficients[n].abs() < 1e-300 {
        return Err(Error::Input("leading coefficient is zero".into()));
    }
    // Unit geometric mean of the nonzero coefficient magnitudes.
    let nz: Vec<f64> = coefficients.iter().filter(|c| **c != 0.0).map(|c| c.abs().ln()).collect();
    let scale = (-(nz.iter().sum::<f64>() / nz.len() as f64)).exp();
    let scaled: Vec<f64> = coefficients.iter().map(|c| c * scale).collect();
    let poly = Poly::new(&scaled);

    let mut z = initial_guesses(&scaled);
    let mut frozen = vec![false; n];
    for (zi, f) in z.iter().zip(frozen.iter_mut()) {
        if *zi == Complex64::new(0.0, 0.0) && scaled[0] == 0.0 {
            *f = true;
        }
    }
    let eps = f64::EPSILON;
    let mut iterations = 0;
    while iterations < settings.max_iterations && frozen.iter().any(|f| !f) {
        iterations += 1;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let (p, bound) = poly.eval_with_bound(z[i]);
            if p.norm() <= 4.0 * eps * bound {
                frozen[i] = true;
                continue;
            }
            let ratio = poly.newton_ratio(z[i]);
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            let step = ratio / (1.0 - ratio * s);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= eps * z[i].norm() {
                frozen[i] = true;
            }
        }
    }
    let converged = frozen.iter().all(|f| *f);
    for zi in z.iter_mut() {
        let mut best = poly.backward_error(*zi);
        for _ in 0..settings.polish_steps {
            let cand = *zi - poly.newton_ratio(*zi);
            if !cand.is_finite() {
                break;
            }
            let e = poly.backward_error(cand);
            if e < best {
                *zi = cand;
                best = e;
            } else {
                break;
            }
        }
    }
    let residual = z.iter().map(|zi| poly.backward_error(*zi)).fold(0.0, f64::max);
    Ok(RootOutcome {
        roots: z,
        residual,
        converged,
        iterations,
    })
}
