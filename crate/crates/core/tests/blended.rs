use blended_gbdf::blended::{
    convergence_params, optimize_gamma, scalar_blended_iterate, z_matrix, BlendedParams,
};
use blended_gbdf::construction::{assemble_glm, catalogue, AuxChoice, GlmTableau};
use blended_gbdf::linalg::{complex_spectral_radius, lu_factor, Complex64, ComplexMatrix};
use proptest::prelude::*;

fn optimized(t: GlmTableau) -> (GlmTableau, BlendedParams) {
    let p = optimize_gamma(t.a()).unwrap().params;
    (t.with_gamma(p.gamma), p)
}

fn direct_solve(t: &GlmTableau, q: Complex64, eta: &[Complex64]) -> Vec<Complex64> {
    let n = t.r();
    let m = ComplexMatrix::identity(n)
        .sub(&t.a().to_complex().scale(q))
        .unwrap();
    lu_factor(&m).unwrap().solve(eta).unwrap()
}

fn method() -> impl Strategy<Value = (usize, AuxChoice)> {
    (
        prop::sample::select(vec![3usize, 4, 6, 8, 10, 12, 14, 16]),
        prop_oneof![Just(AuxChoice::Geometric), Just(AuxChoice::Rational)],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_point_is_the_discrete_solution(
        (k, choice) in method(),
        re in -50.0f64..0.0,
        im in -50.0f64..50.0,
        eta_re in prop::collection::vec(-1.0f64..1.0, 11),
    ) {
        let (t, p) = optimized(blended_gbdf::construction::catalogue_method(k, choice).unwrap());
        let q = Complex64::new(re, im);
        prop_assume!(p.rho_at(q) < 0.95);
        let eta: Vec<Complex64> = eta_re[..t.r()].iter().map(|&v| Complex64::new(v, -0.5 * v)).collect();
        let hist = scalar_blended_iterate(&t, q, &eta, 2000).unwrap();
        let want = direct_solve(&t, q, &eta);
        let scale = want.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        for (a, b) in hist.last().iter().zip(&want) {
            prop_assert!((a - b).norm() <= 1e-10 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn stiff_limit_of_iteration_matrix((k, choice) in method(), mag in 4.0f64..10.0, arg in 0.0f64..1.0) {
        let (t, p) = optimized(blended_gbdf::construction::catalogue_method(k, choice).unwrap());
        let theta = std::f64::consts::FRAC_PI_2 + arg * std::f64::consts::PI;
        let q = Complex64::from_polar(10f64.powf(mag), theta);
        let z = z_matrix(t.a(), p.gamma, q).unwrap();
        let rho = complex_spectral_radius(&z).unwrap();
        prop_assert!(rho <= 2.0 * p.rho_inf / q.norm(), "{rho:e}");
    }
}

#[test]
fn identities_hold_for_the_catalogue() {
    for choice in [AuxChoice::Geometric, AuxChoice::Rational] {
        for t in catalogue(choice).unwrap() {
            let (_, p) = optimized(t);
            assert!((p.rho_inf - p.rho_tilde / (p.gamma * p.gamma)).abs() < 1e-12);
            assert!((p.rho_star - p.rho_tilde / (2.0 * p.gamma)).abs() < 1e-12);
            assert!((p.rho_at(Complex64::new(0.0, 1.0 / p.gamma)) - p.rho_star).abs() < 1e-12);
            assert!(p.is_a_convergent());
            assert!(p.rho_tilde >= 0.0 && p.rho_inf >= 0.0 && p.rho_star >= 0.0);
        }
    }
}

#[test]
fn params_follow_the_definitions() {
    let t = assemble_glm(4, 4, 3, AuxChoice::Rational).unwrap();
    let p = convergence_params(t.a(), 0.6249).unwrap();
    assert!((p.rho_tilde - 0.3827).abs() < 5e-5);
    assert!((p.rho_inf - 0.9801).abs() < 5e-5);
    assert!((p.rho_star - 0.3062).abs() < 5e-5);
    // the tabulated ρ∞ = 2.9374 belongs to the unrounded optimum, not to 0.5000
    let (_, p) = optimized(assemble_glm(16, 11, 9, AuxChoice::Rational).unwrap());
    assert!((p.gamma - 0.5).abs() < 5e-5);
    assert!((p.rho_tilde - 0.7345).abs() < 5e-5);
    assert!((p.rho_inf - 2.9374).abs() < 5e-5);
    assert!((p.rho_star - 0.7344).abs() < 5e-5);
}
