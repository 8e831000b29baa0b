use proptest::prelude::*;

use stratsweep::sensitivity::{
    closed_form_derivative, closed_form_solution, delta_r_envelope, dtn_number, first_order_sensitivity,
    integrate_adaptive, relative_errors, riccati_integrate, HalfLineBc, HalfLineProblem,
};
use stratsweep::C64;

proptest! {
    #[test]
    fn delta_t_never_exceeds_epsilon(omega in 0.1f64..500.0, a in 0.01f64..10.0, eps in 0.0f64..0.2) {
        prop_assert!(relative_errors(eps, omega, a).0 <= eps);
    }

    #[test]
    fn transparent_dtn_change_is_bounded(omega in 0.5f64..400.0, a in 0.1f64..3.0, eps in 0.0f64..0.1) {
        // |DtN_T(ε) - DtN_T(0)| = ωε|sin| / |√(1+ε)cos - i sin| ≤ ωε for ε ≥ 0
        let p0 = HalfLineProblem::new(a, omega, 0.0, HalfLineBc::Transparent).unwrap();
        let pe = HalfLineProblem::new(a, omega, eps, HalfLineBc::Transparent).unwrap();
        let gap = (dtn_number(&pe).unwrap() - dtn_number(&p0).unwrap()).norm();
        prop_assert!(gap <= eps * omega * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riccati_reproduces_constant_perturbation(omega in 1.0f64..15.0, a in 0.2f64..2.0, k in 0usize..3) {
        let eps = [0.0, 1e-3, 1e-2][k];
        let p = HalfLineProblem::new(a, omega, eps, HalfLineBc::Transparent).unwrap();
        let exact = closed_form_derivative(&p, 0.0).unwrap() / closed_form_solution(&p, 0.0).unwrap();
        let v = riccati_integrate(omega, a, |_| omega * omega * eps, HalfLineBc::Transparent).unwrap();
        prop_assert!((v - exact).norm() < 1e-8);
    }

    #[test]
    fn transparent_sensitivity_is_bounded_by_perturbation_mass(
        omega in 1.0f64..30.0,
        c0 in -1.0f64..1.0,
        c1 in -1.0f64..1.0,
        f in 0.5f64..8.0,
    ) {
        let a = 1.0;
        let e = move |y: f64| c0 + c1 * (f * y).cos();
        let k = first_order_sensitivity(omega, a, HalfLineBc::Transparent, e).unwrap();
        let mass = integrate_adaptive(|y| C64::new(e(y).abs(), 0.0), 0.0, a, 1e-12).unwrap().re;
        prop_assert!(k.norm() <= mass * (1.0 + 1e-8) + 1e-12);
    }
}

#[test]
fn reflecting_error_envelope_grows_with_frequency() {
    for omega in [20.0, 40.0, 80.0] {
        let lo = delta_r_envelope(1e-3, 1.0, omega, 401);
        let hi = delta_r_envelope(1e-3, 1.0, 2.0 * omega, 401);
        assert!(hi >= 1.5 * lo, "omega {omega}: {lo} -> {hi}");
    }
}
