use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use stratsweep::coeffmodel::{make_disk_coefficients, make_sh_coefficients, pml_scale, PmlSpec, RadialProfile};
use stratsweep::dtn::{
    exterior_radial_space, mode_dtn_number, modal_operator, moving_pml_dtns, tensor_dtn_operators,
    TransverseEigenbasis,
};
use stratsweep::fem::{assemble_tensor_system, radial_space, theta_space, Mesh1D, Space1D, SpaceBc};
use stratsweep::linalg::asymmetry;
use stratsweep::sweep::decompose;
use stratsweep::C64;

fn sh_basis(n: usize) -> TransverseEigenbasis {
    let c = make_sh_coefficients(&RadialProfile::prem_like(), 10.0).unwrap();
    let st = theta_space(&c, n, 4).unwrap();
    TransverseEigenbasis::for_coefficients(&c, &st).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eigenbasis_is_complete(x in prop::collection::vec(-1.0f64..1.0, 47)) {
        // M⁻¹ K x = Ψ Λ Ψᵀ K ... written as K x = M Ψ Λ Ψᵀ M x
        let b = sh_basis(12);
        prop_assert_eq!(b.len(), 47);
        let x = DVector::from_vec(x);
        let lam = DMatrix::from_diagonal(&DVector::from_vec(b.eigenvalues.clone()));
        let lhs = &b.stiffness * &x;
        let rhs = &b.mass * &b.vectors * lam * b.vectors.transpose() * &b.mass * &x;
        let scale = lhs.amax().max(1.0);
        prop_assert!((lhs - rhs).amax() < 1e-8 * scale);
    }

    #[test]
    fn modal_operator_is_linear_in_the_numbers(
        re in prop::collection::vec(-5.0f64..5.0, 23),
        im in prop::collection::vec(-5.0f64..5.0, 23),
        s in -3.0f64..3.0,
    ) {
        let b = sh_basis(6);
        let d1: Vec<C64> = re.iter().zip(&im).map(|(a, c)| C64::new(*a, *c)).collect();
        let d2: Vec<C64> = im.iter().map(|a| C64::new(1.0, *a)).collect();
        let sum: Vec<C64> = d1.iter().zip(&d2).map(|(a, c)| a * s + c).collect();
        let lhs = modal_operator(&b, &sum);
        let rhs = modal_operator(&b, &d1) * C64::new(s, 0.0) + modal_operator(&b, &d2);
        let scale = rhs.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12 * scale);
    }

    #[test]
    fn interface_operators_are_complex_symmetric(omega in 4.0f64..16.0, alpha in 0.0f64..1.5) {
        let c = make_disk_coefficients(alpha, omega, 3).unwrap();
        let c = pml_scale(PmlSpec::new(2.0 / 3.0, 1.0 / 3.0, 50.0), &c).unwrap();
        let sr = radial_space(&c, 6, 3).unwrap();
        let st = theta_space(&c, 8, 3).unwrap();
        let sys = assemble_tensor_system(&c, &sr, &st).unwrap();
        let d = decompose(&sr, 3).unwrap();
        let mut ops = tensor_dtn_operators(&c, &sr, &st, &d).unwrap();
        ops.extend(moving_pml_dtns(&sys, &PmlSpec::new(0.0, 1.0, 70.0), &d).unwrap());
        for op in ops {
            prop_assert_eq!(asymmetry(&op.matrix), 0.0);
        }
    }
}

#[test]
fn refined_exterior_mesh_breaks_the_discrete_identity() {
    // the Schur equivalence needs the exterior space to be the restriction
    // of the 2D radial space; a finer 1D mesh gives slightly different numbers
    let c = make_sh_coefficients(&RadialProfile::prem_like(), 24.0).unwrap();
    let sr = radial_space(&c, 6, 4).unwrap();
    let d = decompose(&sr, 3).unwrap();
    let ext = exterior_radial_space(&sr, &d, 3).unwrap();
    let (a, b) = (ext.mesh().start(), ext.mesh().end());
    let fine = Space1D::new(Mesh1D::uniform(a, b, 2 * ext.n_elements()).unwrap(), 4, SpaceBc::None).unwrap();
    for lambda in [0.0, 50.0, 400.0] {
        let d0 = mode_dtn_number(&c, &ext, lambda).unwrap();
        let d1 = mode_dtn_number(&c, &fine, lambda).unwrap();
        let rel = (d0 - d1).norm() / d0.norm();
        assert!(rel > 1e-9 && rel < 0.5, "lambda {lambda}: {rel}");
    }
}
