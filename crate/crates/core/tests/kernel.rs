use std::f64::consts::PI;

use num_complex::Complex64;
use prodspec::kernel::{
    compute_ck, compute_ck_quadrature, kernel_eval, normalizing_constant, one_point_density,
    radial_density_pn, KernelSpec, RadialWeight,
};
use prodspec::oracle::{eigenvalues, ComplexMatrix};
use prodspec::quadrature::{integrate, integrate_to_infinity, Tolerance};
use prodspec::special::ln_factorial;
use proptest::prelude::*;

fn tabulated_weight() -> RadialWeight {
    // φ(x) = (1 − x)^2 on [0, 1], tabulated finely
    let x: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
    let phi = x.iter().map(|v| (1.0 - v) * (1.0 - v)).collect();
    RadialWeight::tabulated(x, phi).unwrap()
}

fn weights() -> Vec<RadialWeight> {
    vec![
        RadialWeight::GinibreM1,
        RadialWeight::truncated(1).unwrap(),
        RadialWeight::truncated(4).unwrap(),
        tabulated_weight(),
    ]
}

fn pn_integral(spec: &KernelSpec) -> f64 {
    let f = |r: f64| radial_density_pn(spec, r);
    match spec.weight().support_upper() {
        Some(top) => {
            integrate(f, 0.0, top, Tolerance::absolute(1e-12))
                .unwrap()
                .value
        }
        None => {
            integrate_to_infinity(f, 0.0, 2.0, Tolerance::absolute(1e-12))
                .unwrap()
                .value
        }
    }
}

#[test]
fn quadrature_matches_closed_forms_up_to_k20() {
    for weight in [
        RadialWeight::GinibreM1,
        RadialWeight::truncated(1).unwrap(),
        RadialWeight::truncated(2).unwrap(),
        RadialWeight::truncated(7).unwrap(),
    ] {
        for k in 0..=20u64 {
            let closed = compute_ck(&weight, k).unwrap();
            let quad = compute_ck_quadrature(&weight, k).unwrap();
            assert!((quad - closed).exp_m1().abs() < 1e-8, "{weight:?} k={k}");
        }
    }
    for k in 0..=20u64 {
        let c = compute_ck(&RadialWeight::GinibreM1, k).unwrap();
        assert!((c - PI.ln() - ln_factorial(k)).abs() < 1e-10);
    }
}

#[test]
fn tabulated_constants_match_exact_moments() {
    // 2π ∫ x^{2k+1}(1−x)^2 dx = 2π · 2 / ((2k+2)(2k+3)(2k+4))
    let weight = tabulated_weight();
    for k in 0..6u64 {
        let kf = k as f64;
        let exact = 4.0 * PI / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0) * (2.0 * kf + 4.0));
        let c = compute_ck(&weight, k).unwrap().exp();
        assert!((c / exact - 1.0).abs() < 1e-4, "k={k}: {c} vs {exact}");
    }
}

#[test]
fn pn_is_normalized_for_every_weight() {
    for weight in weights() {
        for n in [1usize, 5, 20] {
            let spec = KernelSpec::new(n, weight.clone()).unwrap();
            let total = pn_integral(&spec);
            assert!((total - 1.0).abs() < 1e-8, "{weight:?} n={n}: {total}");
        }
    }
}

#[test]
fn one_point_density_polar_relation() {
    for weight in weights() {
        let spec = KernelSpec::new(6, weight.clone()).unwrap();
        let top = weight.support_upper().unwrap_or(5.0);
        for i in 0..=100 {
            let r = top * i as f64 / 100.0;
            let z = Complex64::from_polar(r, 0.7 * i as f64);
            let lhs = 2.0 * PI * r * one_point_density(&spec, z);
            assert!(
                (lhs - radial_density_pn(&spec, r)).abs() < 1e-10,
                "{weight:?} r={r}"
            );
        }
    }
}

#[test]
fn one_point_density_integrates_over_plane() {
    let spec = KernelSpec::new(8, RadialWeight::GinibreM1).unwrap();
    let radial = integrate_to_infinity(
        |r| 2.0 * PI * r * one_point_density(&spec, Complex64::new(r, 0.0)),
        0.0,
        2.0,
        Tolerance::absolute(1e-10),
    )
    .unwrap()
    .value;
    assert!((radial - 1.0).abs() < 1e-6);
}

#[test]
fn normalizing_constant_examples() {
    let g = RadialWeight::GinibreM1;
    assert!((normalizing_constant(1, &g).unwrap().exp() - 1.0 / PI).abs() < 1e-15);
    assert!((normalizing_constant(2, &g).unwrap().exp() - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
    assert!(
        (normalizing_constant(1, &RadialWeight::truncated(1).unwrap())
            .unwrap()
            .exp()
            - 1.0)
            .abs()
            < 1e-14
    );
}

fn complex_in_disc(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_matrix_is_positive_semidefinite(
        n in 1usize..12,
        points in prop::collection::vec(complex_in_disc(2.5), 4),
        which in 0usize..3,
    ) {
        let weight = [RadialWeight::GinibreM1, RadialWeight::truncated(3).unwrap(), tabulated_weight()][which].clone();
        let spec = KernelSpec::new(n, weight).unwrap();
        let rows = points
            .iter()
            .map(|z| points.iter().map(|w| kernel_eval(&spec, *z, *w)).collect())
            .collect();
        let gram = ComplexMatrix::from_rows(rows).unwrap();
        let spectrum = eigenvalues(&gram, 1e-12).unwrap();
        for lambda in spectrum.eigenvalues() {
            prop_assert!(lambda.re >= -1e-8, "eigenvalue {lambda}");
        }
    }

    #[test]
    fn kernel_is_hermitian(n in 1usize..30, z in complex_in_disc(3.0), w in complex_in_disc(3.0)) {
        let spec = KernelSpec::new(n, RadialWeight::GinibreM1).unwrap();
        let a = kernel_eval(&spec, z, w).conj();
        let b = kernel_eval(&spec, w, z);
        prop_assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0));
    }

    #[test]
    fn density_depends_on_modulus_only(n in 1usize..30, r in 0.0f64..4.0, t1 in 0.0f64..std::f64::consts::TAU, t2 in 0.0f64..std::f64::consts::TAU) {
        let spec = KernelSpec::new(n, RadialWeight::GinibreM1).unwrap();
        let a = one_point_density(&spec, Complex64::from_polar(r, t1));
        let b = one_point_density(&spec, Complex64::from_polar(r, t2));
        prop_assert!((a - b).abs() <= 1e-12);
    }
}
