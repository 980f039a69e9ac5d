use num_complex::Complex64;
use proptest::prelude::*;
use zerocorr::symmetric::{
    alternating_sigma_product, coefficient_map, elementary_symmetric, one_minus_product, real_vandermonde,
    vandermonde_modulus, ZeroConfiguration,
};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// Conjugate-closed tuple with `k` real points and `l` pairs in the unit disc.
fn configuration(max_m: usize) -> impl Strategy<Value = ZeroConfiguration> {
    (0..=max_m / 2)
        .prop_flat_map(move |l| (Just(l), 0..=max_m - 2 * l))
        .prop_filter("non-empty", |(l, k)| k + 2 * l >= 1)
        .prop_flat_map(|(l, k)| {
            (
                prop::collection::vec(-0.99f64..0.99, k),
                prop::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::PI), l),
            )
        })
        .prop_map(|(real, polar)| {
            let complex = polar
                .into_iter()
                .map(|(r, th)| Complex64::from_polar(0.05 + 0.94 * r, th.clamp(0.01, std::f64::consts::PI - 0.01)))
                .collect();
            ZeroConfiguration::new(real, complex).unwrap()
        })
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients (lowest first) of Π(z − x_i) Π (z² − 2 Re z_j z + |z_j|²).
fn expand(cfg: &ZeroConfiguration) -> Vec<f64> {
    let mut p = vec![1.0];
    for &x in cfg.real_points() {
        p = poly_mul(&p, &[-x, 1.0]);
    }
    for z in cfg.complex_points() {
        p = poly_mul(&p, &[z.norm_sqr(), -2.0 * z.re, 1.0]);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn permutation_invariance(cfg in configuration(8), seed in 0u64..1000) {
        let mut real = cfg.real_points().to_vec();
        let mut complex = cfg.complex_points().to_vec();
        // Deterministic shuffles driven by `seed`.
        let k = real.len();
        if k > 1 { real.rotate_left((seed as usize) % k); real.swap(0, k - 1); }
        let l = complex.len();
        if l > 1 { complex.rotate_right((seed as usize) % l); }
        let perm = ZeroConfiguration::new(real, complex).unwrap();
        let a = elementary_symmetric(&cfg).unwrap();
        let b = elementary_symmetric(&perm).unwrap();
        for (x, y) in a.sigmas().iter().zip(b.sigmas()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "{x} vs {y}");
        }
        prop_assert!(close(a.vandermonde(), b.vandermonde(), 1e-12));
    }

    #[test]
    fn determinant_identity(cfg in configuration(8)) {
        let v = vandermonde_modulus(&cfg.full_tuple());
        let det = real_vandermonde(&cfg).abs_det();
        let expect = 2f64.powi(-(cfg.l() as i32)) * v;
        prop_assert!(close(det, expect, 1e-10), "{det} vs {expect}");
    }

    #[test]
    fn product_identity(cfg in configuration(8)) {
        let w = cfg.full_tuple();
        let a = alternating_sigma_product(&w);
        let b = one_minus_product(&w);
        prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300) + 1e-15, "{a} vs {b}");
    }

    #[test]
    fn map_columns_are_shifted_products(cfg in configuration(6), extra in 0usize..7) {
        let m = cfg.m();
        let n = (m + extra).min(12);
        let map = coefficient_map(&cfg, n).unwrap();
        let base = expand(&cfg);
        for j in 0..map.cols() {
            let col = map.column(j);
            for i in 0..=n {
                let expect = if i >= j && i - j < base.len() { base[i - j] } else { 0.0 };
                prop_assert!((col[i] - expect).abs() <= 1e-10, "col {j} row {i}: {} vs {expect}", col[i]);
            }
        }
        // Rows m..n are unit triangular: row m+q starts at column q with a one.
        for q in 0..map.cols() {
            prop_assert_eq!(map.entry(m + q, q), 1.0);
            for j in 0..q {
                prop_assert_eq!(map.entry(m + q, j), 0.0);
            }
        }
    }
}

#[test]
fn symmetric_examples() {
    let p = elementary_symmetric(&ZeroConfiguration::real_only(vec![2.0, 3.0]).unwrap()).unwrap();
    assert_eq!(p.sigmas(), &[1.0, 5.0, 6.0]);
    assert_eq!(p.vandermonde(), 1.0);
    let p = elementary_symmetric(&ZeroConfiguration::new(vec![], vec![Complex64::new(0.0, 1.0)]).unwrap()).unwrap();
    assert_eq!(p.sigmas(), &[1.0, 0.0, 1.0]);
    assert_eq!(p.vandermonde(), 2.0);
    assert_eq!((p.sigma(-1), p.sigma(3)), (0.0, 0.0));
    let p = elementary_symmetric(&ZeroConfiguration::real_only(vec![1.0, 1.0, 1.0]).unwrap()).unwrap();
    assert_eq!(p.sigmas(), &[1.0, 3.0, 3.0, 1.0]);
    assert_eq!(p.vandermonde(), 0.0);
}

#[test]
fn real_vandermonde_examples() {
    let i = Complex64::new(0.0, 1.0);
    let v = real_vandermonde(&ZeroConfiguration::new(vec![], vec![i]).unwrap());
    assert!((v.abs_det() - 1.0).abs() < 1e-15);
    let v = real_vandermonde(&ZeroConfiguration::real_only(vec![0.0, 1.0]).unwrap());
    assert!((v.abs_det() - 1.0).abs() < 1e-15);
    let v = real_vandermonde(&ZeroConfiguration::new(vec![0.0], vec![Complex64::new(1.0, 1.0)]).unwrap());
    assert!((v.abs_det() - 2.0).abs() < 1e-14);
}

#[test]
fn product_identity_examples() {
    let z = Complex64::new(0.0, 0.0);
    assert_eq!(alternating_sigma_product(&[z, z]), Complex64::new(1.0, 0.0));
    assert_eq!(alternating_sigma_product(&[Complex64::new(2.0, 0.0)]), Complex64::new(-1.0, 0.0));
    let w = [Complex64::new(1.0, 1.0), Complex64::new(1.0, -1.0)];
    assert!((alternating_sigma_product(&w) - 1.0).norm() < 1e-15);
}

#[test]
fn map_examples() {
    // m = n: one column (−1)^{n−i} σ_{n−i}.
    let cfg = ZeroConfiguration::real_only(vec![2.0, 3.0]).unwrap();
    let map = coefficient_map(&cfg, 2).unwrap();
    assert_eq!(map.column(0), vec![6.0, -5.0, 1.0]);
    // m = 1: row i realizes t_{i−1} − x t_i.
    let x = 0.7;
    let map = coefficient_map(&ZeroConfiguration::real_only(vec![x]).unwrap(), 3).unwrap();
    let t = [0.3, -1.2, 2.0];
    let u = map.apply(&t);
    for i in 0..=3 {
        let prev = if i >= 1 { t[i - 1] } else { 0.0 };
        let cur = if i < 3 { t[i] } else { 0.0 };
        assert!((u[i] - (prev - x * cur)).abs() < 1e-15);
    }
    assert!(coefficient_map(&cfg, 1).is_err());
}

#[test]
fn non_conjugate_closed_input_rejected() {
    assert!(ZeroConfiguration::new(vec![], vec![Complex64::new(0.0, -1.0)]).is_err());
    assert!(ZeroConfiguration::new(vec![], vec![Complex64::new(0.3, 0.0)]).is_err());
}
