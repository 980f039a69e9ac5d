#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use zerocorr::{CoefficientDensity, CoefficientModel, ZeroConfiguration};

/// Composite Gauss–Legendre rule, refined by bisection until both halves agree.
pub struct Legendre {
    nodes: Vec<(f64, f64)>,
}

impl Legendre {
    pub fn new(order: usize) -> Self {
        let mut nodes = Vec::with_capacity(order);
        for i in 1..=order {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (order as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        Self { nodes }
    }

    fn panel(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        h * self.nodes.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>()
    }

    fn refine(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (self.panel(f, a, m), self.panel(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= tol {
            return l + r;
        }
        self.refine(f, a, m, l, 0.5 * tol, depth - 1) + self.refine(f, m, b, r, 0.5 * tol, depth - 1)
    }

    /// Integral over `[a, b]` split at the sorted `breaks` inside it.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
        let mut cuts = vec![a];
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        inner.sort_by(f64::total_cmp);
        cuts.extend(inner);
        cuts.push(b);
        cuts.windows(2)
            .map(|w| self.refine(f, w[0], w[1], self.panel(f, w[0], w[1]), tol, 40))
            .sum()
    }
}

/// Coefficients of `Π (X − w)` from low to high degree.
pub fn monic_coefficients(points: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &w in points {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (j, &cj) in c.iter().enumerate() {
            next[j + 1] += cj;
            next[j] -= w * cj;
        }
        c = next;
    }
    c.iter().map(|z| z.re).collect()
}

/// `ρ_{k,l}` at `k + 2l = n` by direct one-dimensional quadrature over the
/// multiple `t` of the monic polynomial with the prescribed zeros:
/// `2^l Π|w_i − w_j| ∫ |t|^n Π_j f_j(t c_j) dt`.
pub fn joint_by_quadrature(model: &CoefficientModel, cfg: &ZeroConfiguration) -> f64 {
    let n = model.degree();
    let mut pts: Vec<Complex64> = cfg.real_points().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for &z in cfg.complex_points() {
        pts.push(z);
        pts.push(z.conj());
    }
    assert_eq!(pts.len(), n);
    let mut vand = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            vand *= (pts[i] - pts[j]).norm();
        }
    }
    let c = monic_coefficients(&pts);
    let dens = model.densities();
    let f = |t: f64| {
        let mut v = t.abs().powi(n as i32);
        for (j, d) in dens.iter().enumerate() {
            v *= d.eval_unchecked(t * c[j]);
        }
        v
    };
    // Integration window and kinks from the coefficient supports.
    let mut reach = 0.0f64;
    let mut breaks = vec![0.0];
    for (j, d) in dens.iter().enumerate() {
        if c[j] == 0.0 {
            continue;
        }
        let (lo, hi) = d.support();
        if lo.is_finite() && hi.is_finite() {
            for u in d.breakpoints().into_iter().chain([lo, hi]) {
                breaks.push(u / c[j]);
                reach = reach.max((u / c[j]).abs());
            }
        }
    }
    let a_gauss: f64 = dens
        .iter()
        .enumerate()
        .filter_map(|(j, d)| match *d {
            CoefficientDensity::Gaussian { v } => Some((c[j] / v).powi(2)),
            _ => None,
        })
        .sum();
    if a_gauss > 0.0 {
        reach = reach.max(45.0 / a_gauss.sqrt());
    }
    if dens.iter().any(|d| matches!(d, CoefficientDensity::Exponential)) {
        let rate: f64 = dens
            .iter()
            .enumerate()
            .filter(|(_, d)| matches!(d, CoefficientDensity::Exponential))
            .map(|(j, _)| c[j].abs())
            .fold(0.0, f64::max);
        reach = reach.max(800.0 / rate.max(1e-300));
        breaks.extend([1.0, 10.0, 100.0].map(|s| s / rate.max(1e-300)));
    }
    let rule = Legendre::new(20);
    let scale = rule.integrate(&f, -reach, reach, &breaks, 1e-6);
    let value = rule.integrate(&f, -reach, reach, &breaks, 1e-14 * scale.abs().max(1e-300));
    2f64.powi(cfg.l() as i32) * vand * value
}

/// Random configuration with `k` real points and `l` upper-half-plane points,
/// pairwise at least 0.05 apart; `left_half` keeps every point in `Re < 0`.
pub fn random_configuration<R: Rng>(rng: &mut R, k: usize, l: usize, left_half: bool) -> ZeroConfiguration {
    loop {
        let real: Vec<f64> = (0..k)
            .map(|_| if left_half { -rng.random_range(0.05..3.0) } else { rng.random_range(-2.5..2.5) })
            .collect();
        let complex: Vec<Complex64> = (0..l)
            .map(|_| {
                let re = if left_half { -rng.random_range(0.05..2.0) } else { rng.random_range(-2.0..2.0) };
                Complex64::new(re, rng.random_range(0.1..2.0))
            })
            .collect();
        let mut pts: Vec<Complex64> = real.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        pts.extend(complex.iter().copied());
        let separated = pts
            .iter()
            .enumerate()
            .all(|(i, a)| pts[i + 1..].iter().all(|b| (a - b).norm() > 0.05));
        if separated {
            return ZeroConfiguration::new(real, complex).unwrap();
        }
    }
}
