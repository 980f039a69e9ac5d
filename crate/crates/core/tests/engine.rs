use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zerocorr::engine::{
    build_polytope, integrate_correlation, rho_complex_density, rho_kl, rho_m, rho_real_density, IntegrandSpec,
    Rect,
};
use zerocorr::{Backend, BackendSettings, CoefficientDensity, CoefficientModel, Error, ZeroConfiguration};

fn gaussian(n: usize) -> CoefficientModel {
    CoefficientModel::iid(n, CoefficientDensity::standard_gaussian()).unwrap()
}

fn uniform(n: usize) -> CoefficientModel {
    CoefficientModel::iid(n, CoefficientDensity::standard_uniform()).unwrap()
}

fn exponential(n: usize) -> CoefficientModel {
    CoefficientModel::iid(n, CoefficientDensity::Exponential).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

const GRID: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

#[test]
fn n1_gaussian_is_cauchy() {
    // Ratio of two independent standard normals.
    let m = gaussian(1);
    for x in GRID {
        let got = rho_real_density(&m, x, &BackendSettings::adaptive(1e-10)).unwrap();
        let want = 1.0 / (std::f64::consts::PI * (1.0 + x * x));
        assert!(rel(got.value, want) < 1e-6, "x={x}: {} vs {want}", got.value);
        assert_eq!(got.backend, Backend::Adaptive);
    }
}

#[test]
fn n1_uniform_and_exponential() {
    let u = uniform(1);
    let e = exponential(1);
    let s = BackendSettings::adaptive(1e-10);
    for x in GRID.iter().copied().chain([0.5, -0.25, 3.5]) {
        // -a0/a1 with a0, a1 ~ U[-1,1]: flat at 1/4 inside, x^-2/4 outside.
        let want = 0.25 / x.abs().max(1.0).powi(2);
        let got = rho_real_density(&u, x, &s).unwrap().value;
        assert!(rel(got, want) < 1e-6, "uniform x={x}: {got} vs {want}");

        // -a0/a1 with a0, a1 ~ Exp(1): density of -ratio is (1-x)^-2 on x ≤ 0.
        let want = if x <= 0.0 { (1.0 - x).powi(-2) } else { 0.0 };
        let got = rho_real_density(&e, x, &s).unwrap().value;
        if want == 0.0 {
            assert_eq!(got, 0.0, "exponential x={x}");
        } else {
            assert!(rel(got, want) < 1e-8, "exponential x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn tolerance_refinement_converges() {
    let m = gaussian(3);
    for x in [-1.3, 0.0, 0.4, 2.2] {
        let coarse = rho_real_density(&m, x, &BackendSettings::adaptive(1e-6)).unwrap();
        let fine = rho_real_density(&m, x, &BackendSettings::adaptive(1e-10)).unwrap();
        assert!((coarse.value - fine.value).abs() < 1e-5, "x={x}");
        assert!(fine.error <= coarse.error.max(1e-9));
    }
}

#[test]
fn monte_carlo_agrees_with_adaptive() {
    let cases: Vec<(CoefficientModel, ZeroConfiguration)> = vec![
        (gaussian(1), ZeroConfiguration::real_only(vec![0.3]).unwrap()),
        (gaussian(3), ZeroConfiguration::real_only(vec![0.7]).unwrap()),
        (uniform(2), ZeroConfiguration::real_only(vec![-0.4]).unwrap()),
        (exponential(2), ZeroConfiguration::real_only(vec![-0.8]).unwrap()),
        (
            CoefficientModel::iid(2, CoefficientDensity::tabulated(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap())
                .unwrap(),
            ZeroConfiguration::real_only(vec![0.5]).unwrap(),
        ),
    ];
    for (i, (model, cfg)) in cases.iter().enumerate() {
        let exact = rho_kl(model, cfg, &BackendSettings::adaptive(1e-10)).unwrap();
        let mc = rho_kl(model, cfg, &BackendSettings::monte_carlo(1_000_000, 11 + i as u64)).unwrap();
        assert_eq!(mc.backend, Backend::MonteCarlo);
        assert!(mc.error > 0.0);
        let z = (mc.value - exact.value) / mc.error.hypot(exact.error);
        assert!(z.abs() < 3.0, "case {i}: mc {} ± {} vs {}", mc.value, mc.error, exact.value);
    }
}

#[test]
fn quasi_random_agrees_with_adaptive() {
    let m = gaussian(3);
    let cfg = ZeroConfiguration::real_only(vec![0.2, -0.9]).unwrap();
    let exact = rho_kl(&m, &cfg, &BackendSettings::adaptive(1e-10)).unwrap();
    let qmc = rho_kl(&m, &cfg, &BackendSettings::quasi_random(1 << 16, 5)).unwrap();
    assert_eq!(qmc.backend, Backend::QuasiRandom);
    let z = (qmc.value - exact.value) / qmc.error.hypot(exact.error).max(1e-12);
    assert!(z.abs() < 4.0, "qmc {} ± {} vs {}", qmc.value, qmc.error, exact.value);
}

#[test]
fn stochastic_backends_are_reproducible() {
    let m = gaussian(4);
    let cfg = ZeroConfiguration::new(vec![0.5], vec![Complex64::new(-0.2, 0.9)]).unwrap();
    for settings in [BackendSettings::monte_carlo(200_000, 42), BackendSettings::quasi_random(1 << 14, 42)] {
        let a = rho_kl(&m, &cfg, &settings).unwrap();
        let b = rho_kl(&m, &cfg, &settings).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let c = one.install(|| rho_kl(&m, &cfg, &settings)).unwrap();
        let d = four.install(|| rho_kl(&m, &cfg, &settings)).unwrap();
        for other in [&b, &c, &d] {
            assert_eq!(a.value.to_bits(), other.value.to_bits());
            assert_eq!(a.error.to_bits(), other.error.to_bits());
        }
        let shifted = BackendSettings { seed: 43, ..settings.clone() };
        assert_ne!(rho_kl(&m, &cfg, &shifted).unwrap().value.to_bits(), a.value.to_bits());
    }
}

#[test]
fn missing_backend_is_reported() {
    // QMC is wired only for the integrand; spatial integrals need MC or quadrature.
    let m = gaussian(2);
    let err = integrate_correlation(&m, &[(0.0, 1.0)], &[], &BackendSettings::quasi_random(1024, 1)).unwrap_err();
    assert!(matches!(err, Error::BackendUnavailable(_)));
}

#[test]
fn witnesses_lie_on_box_faces() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let model = uniform(4);
    for _ in 0..20 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.5..1.5)).collect();
        let cfg = ZeroConfiguration::real_only(x).unwrap();
        let spec = IntegrandSpec::new(&model, cfg).unwrap();
        let poly = build_polytope(&spec).unwrap();
        if poly.is_empty() {
            continue;
        }
        assert_eq!(poly.dim(), 3);
        for (j, (lo, hi)) in poly.witnesses().iter().enumerate() {
            let (a, b) = poly.bounding_box()[j];
            assert!(poly.contains_with(lo, 1e-9) && poly.contains_with(hi, 1e-9));
            assert!((lo[j] - a).abs() < 1e-9 * (1.0 + a.abs()));
            assert!((hi[j] - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
        // Random box points outside the polytope contribute nothing.
        for _ in 0..200 {
            let t: Vec<f64> = poly.bounding_box().iter().map(|&(a, b)| rng.random_range(a..=b)).collect();
            if !poly.contains(&t) {
                assert_eq!(spec.eval(&t), 0.0);
            }
        }
    }
}

#[test]
fn empty_uniform_polytope_gives_zero() {
    // Shifted supports keep every coefficient positive, so no zero can be positive.
    let model = CoefficientModel::iid(3, CoefficientDensity::uniform(1.0, 2.0).unwrap()).unwrap();
    let cfg = ZeroConfiguration::real_only(vec![0.5, 2.0]).unwrap();
    let spec = IntegrandSpec::new(&model, cfg.clone()).unwrap();
    assert!(build_polytope(&spec).unwrap().is_empty());
    let est = rho_kl(&model, &cfg, &BackendSettings::adaptive(1e-9)).unwrap();
    assert_eq!(est.value, 0.0);
}

#[test]
fn correlation_is_symmetric() {
    let m = gaussian(4);
    let s = BackendSettings::adaptive(1e-10);
    let xs = [0.2, -0.5, 1.1];
    let base = rho_kl(&m, &ZeroConfiguration::real_only(xs.to_vec()).unwrap(), &s).unwrap().value;
    for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
        let p: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
        let v = rho_kl(&m, &ZeroConfiguration::real_only(p).unwrap(), &s).unwrap().value;
        assert!(rel(v, base) < 1e-8);
    }
    // a_i -> (-1)^i a_i preserves the centred gaussian law and maps zeros w -> -w.
    let z = Complex64::new(0.4, 0.8);
    let a = rho_kl(&m, &ZeroConfiguration::new(vec![-0.3], vec![z]).unwrap(), &s).unwrap().value;
    let b = rho_kl(&m, &ZeroConfiguration::new(vec![0.3], vec![-z.conj()]).unwrap(), &s).unwrap().value;
    assert!(rel(a, b) < 1e-7);
}

#[test]
fn vanishes_linearly_on_the_diagonal() {
    let m = gaussian(3);
    let s = BackendSettings::adaptive(1e-11);
    let at = |h: f64| rho_kl(&m, &ZeroConfiguration::real_only(vec![0.3, 0.3 + h]).unwrap(), &s).unwrap().value;
    let (a, b) = (at(1e-2), at(1e-3));
    assert!(a > 0.0 && b > 0.0);
    assert!((a / b - 10.0).abs() < 0.2, "ratio {}", a / b);
}

#[test]
fn specialized_and_generic_paths_agree() {
    let m = gaussian(3);
    let s = BackendSettings::adaptive(1e-10);
    for x in [-1.5, 0.0, 0.8] {
        let special = rho_real_density(&m, x, &s).unwrap().value;
        let generic = rho_kl(&m, &ZeroConfiguration::real_only(vec![x]).unwrap(), &s).unwrap().value;
        assert!(rel(special, generic) < 1e-6);
    }
    for z in [Complex64::new(0.5, 0.5), Complex64::new(-1.0, 1.5)] {
        let special = rho_complex_density(&m, z, &s).unwrap().value;
        let via_m = rho_m(&m, &ZeroConfiguration::new(vec![], vec![z]).unwrap(), &s).unwrap().value * 2.0;
        assert!(rel(special, via_m) < 1e-6, "z={z}: {special} vs {via_m}");
    }
}

#[test]
fn complex_density_domain() {
    let m = gaussian(3);
    let s = BackendSettings::adaptive(1e-8);
    assert!(matches!(rho_complex_density(&m, Complex64::new(0.0, -1.0), &s), Err(Error::Domain(_))));
    assert!(matches!(rho_complex_density(&m, Complex64::new(0.0, 0.0), &s), Err(Error::Domain(_))));
    assert_eq!(rho_complex_density(&gaussian(1), Complex64::new(0.0, 1.0), &s).unwrap().value, 0.0);
    let too_many = ZeroConfiguration::real_only(vec![0.0, 1.0, 2.0]).unwrap();
    assert!(matches!(rho_kl(&gaussian(2), &too_many, &s), Err(Error::Dimension(_))));
}

#[test]
fn conservation_n2_quadrature() {
    let m = gaussian(2);
    let s = BackendSettings::adaptive(1e-8);
    let real = integrate_correlation(&m, &[(-f64::INFINITY, f64::INFINITY)], &[], &s).unwrap();
    let cplx = integrate_correlation(&m, &[], &[Rect::upper_half_plane()], &s).unwrap();
    let total = real.value + 2.0 * cplx.value;
    assert!((total - 2.0).abs() < 0.02, "{} + 2·{}", real.value, cplx.value);
}

#[test]
fn set_integrals_validate_input() {
    let m = gaussian(3);
    let s = BackendSettings::adaptive(1e-8);
    assert!(matches!(integrate_correlation(&m, &[], &[], &s), Err(Error::Input(_))));
    assert!(matches!(integrate_correlation(&m, &[(1.0, 0.0)], &[], &s), Err(Error::Input(_))));
    assert!(Rect::new((0.0, 1.0), (-1.0, 1.0)).is_err());
    let r = Rect::new((0.0, 1.0), (0.5, 1.0)).unwrap();
    assert!(matches!(integrate_correlation(&gaussian(2), &[(0.0, 1.0)], &[r], &s), Err(Error::Dimension(_))));
}
