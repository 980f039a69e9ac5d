//! Splitting a root multiset into real roots and conjugate pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default real-classification tolerance, relative to `1 + |Re|`.
pub const DEFAULT_TAU: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// Sorted ascending.
    pub real_roots: Vec<f64>,
    /// Upper-half-plane representatives, sorted by real part.
    pub complex_pairs: Vec<Complex64>,
    /// A borderline root was moved to the real axis to restore parity.
    pub reclassified: bool,
    /// Some non-real root found no conjugate partner.
    pub unmatched: bool,
}

/// Largest `|u − conj(l)| / (1 + |u|)` accepted as a conjugate pair; real
/// polynomials give exact pairs, so anything larger is a solver failure.
const PAIR_TOL: f64 = 1e-4;

fn margin(z: &Complex64) -> f64 {
    z.im.abs() / (1.0 + z.re.abs())
}

pub fn classify_roots(roots: &[Complex64], tau: f64) -> Classification {
    let mut real = Vec::new();
    let mut other: Vec<Complex64> = Vec::new();
    for z in roots {
        if margin(z) <= tau {
            real.push(z.re);
        } else {
            other.push(*z);
        }
    }
    let mut reclassified = false;
    if other.len() % 2 == 1 {
        let (idx, _) = other
            .iter()
            .enumerate()
            .min_by(|a, b| margin(a.1).total_cmp(&margin(b.1)))
            .unwrap();
        real.push(other.remove(idx).re);
        reclassified = true;
    }
    let upper: Vec<Complex64> = other.iter().filter(|z| z.im > 0.0).copied().collect();
    let lower: Vec<Complex64> = other.iter().filter(|z| z.im < 0.0).copied().collect();
    let mut candidates = Vec::with_capacity(upper.len() * lower.len());
    for (i, u) in upper.iter().enumerate() {
        for (j, l) in lower.iter().enumerate() {
            candidates.push(((u - l.conj()).norm(), i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_u = vec![false; upper.len()];
    let mut used_l = vec![false; lower.len()];
    let mut pairs = Vec::new();
    for (dist, i, j) in candidates {
        if used_u[i] || used_l[j] || dist > PAIR_TOL * (1.0 + upper[i].norm()) {
            continue;
        }
        used_u[i] = true;
        used_l[j] = true;
        pairs.push(0.5 * (upper[i] + lower[j].conj()));
    }
    let unmatched = used_u.iter().chain(&used_l).any(|u| !u);
    real.sort_by(f64::total_cmp);
    pairs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Classification {
        real_roots: real,
        complex_pairs: pairs,
        reclassified,
        unmatched,
    }
}
