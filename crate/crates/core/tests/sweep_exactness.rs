use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stratsweep::coeffmodel::{make_disk_coefficients, make_sh_coefficients, pml_scale, PmlSpec, RadialProfile, SeparableCoefficients};
use stratsweep::dtn::{exact_schur_dtns, moving_pml_dtns, tensor_dtn_operators};
use stratsweep::fem::{assemble_load, assemble_tensor_system, radial_space, relative_l2_error, theta_space, SourceSpec, TensorSystem};
use stratsweep::linalg::{max_abs, tensor_ordering, OrderedLu};
use stratsweep::sweep::{build_preconditioner, decompose, DosmPreconditioner};
use stratsweep::C64;

fn system(c: &SeparableCoefficients, layers: usize, n_theta: usize, p: usize, src: SourceSpec) -> TensorSystem {
    let sr = radial_space(c, 2 * layers, p).unwrap();
    let st = theta_space(c, n_theta, p).unwrap();
    let sys = assemble_tensor_system(c, &sr, &st).unwrap();
    let f = assemble_load(&src, &sr, &st, c.pml.as_ref()).unwrap();
    sys.with_rhs(f).unwrap()
}

fn sh_free() -> SeparableCoefficients {
    make_sh_coefficients(&RadialProfile::prem_like(), 32.0).unwrap()
}

fn sh_pml() -> SeparableCoefficients {
    let c = sh_free();
    let w = (1.0 - c.r_interval.0) / 3.0;
    pml_scale(PmlSpec::new(1.0 - w, w, 120.0), &c).unwrap()
}

fn disk() -> SeparableCoefficients {
    let c = make_disk_coefficients(0.5, 10.0, 3).unwrap();
    pml_scale(PmlSpec::new(2.0 / 3.0, 1.0 / 3.0, 80.0), &c).unwrap()
}

fn random_vec(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn one_sweep_error(sys: &TensorSystem, layers: usize, tensor: bool) -> f64 {
    let d = decompose(&sys.space_r, layers).unwrap();
    let ops = if tensor {
        tensor_dtn_operators(sys.coeffs(), &sys.space_r, &sys.space_theta, &d).unwrap()
    } else {
        exact_schur_dtns(sys, &d).unwrap()
    };
    let pre = build_preconditioner(sys, &d, &ops).unwrap();
    let u = pre.apply_vec(&sys.rhs);
    relative_l2_error(&u, &sys.solve_direct().unwrap(), sys).unwrap()
}

#[test]
fn exact_transmission_reproduces_direct_solve() {
    let srcs = [SourceSpec::dirac(0.8, 1.0), SourceSpec::random(5)];
    for c in [sh_free(), sh_pml()] {
        for src in srcs {
            let sys = system(&c, 3, 12, 4, src);
            assert!(one_sweep_error(&sys, 3, false) < 1e-8);
            assert!(one_sweep_error(&sys, 3, true) < 1e-8);
        }
    }
    for src in [SourceSpec::dirac(0.4, 1.0), SourceSpec::random(5)] {
        let sys = system(&disk(), 3, 12, 4, src);
        assert!(one_sweep_error(&sys, 3, false) < 1e-8);
    }
}

#[test]
fn single_layer_is_a_direct_solve() {
    let sys = system(&sh_free(), 1, 8, 3, SourceSpec::random(2));
    let d = decompose(&sys.space_r, 1).unwrap();
    let pre = build_preconditioner(&sys, &d, &[]).unwrap();
    let u = pre.apply_vec(&sys.rhs);
    assert!(relative_l2_error(&u, &sys.solve_direct().unwrap(), &sys).unwrap() < 1e-12);
}

#[test]
fn stationary_step_with_exact_transmission_lands_on_solution() {
    let sys = system(&disk(), 3, 12, 3, SourceSpec::random(4));
    let d = decompose(&sys.space_r, 3).unwrap();
    let pre = build_preconditioner(&sys, &d, &exact_schur_dtns(&sys, &d).unwrap()).unwrap();
    let u_prev = random_vec(sys.dim(), 9);
    let u = pre.stationary_step(&sys.rhs, &u_prev);
    assert!(relative_l2_error(&u, &sys.solve_direct().unwrap(), &sys).unwrap() < 1e-10);
}

#[test]
fn moving_pml_on_the_outer_layer_is_the_exact_dtn() {
    // with two layers the exterior of interface 2 is the surface PML itself
    let c = make_disk_coefficients(0.0, 8.0, 2).unwrap();
    let spec = PmlSpec::new(0.5, 0.5, 40.0);
    let c = pml_scale(spec, &c).unwrap();
    let sys = system(&c, 2, 8, 3, SourceSpec::random(1));
    let d = decompose(&sys.space_r, 2).unwrap();
    let mp = moving_pml_dtns(&sys, &spec, &d).unwrap();
    let ex = exact_schur_dtns(&sys, &d).unwrap();
    let gap = max_abs(&(&mp[0].matrix - &ex[0].matrix)) / max_abs(&ex[0].matrix);
    assert!(gap < 1e-12, "{gap}");
}

#[test]
fn interior_ordering_does_not_change_solves() {
    let sys = system(&disk(), 3, 12, 3, SourceSpec::random(4));
    let d = decompose(&sys.space_r, 3).unwrap();
    let pre = build_preconditioner(&sys, &d, &exact_schur_dtns(&sys, &d).unwrap()).unwrap();
    let sub = pre.subdomain(3);
    let n = sub.matrix.nrows();
    let n_r = n / sys.n_theta();
    let b = random_vec(n, 3);
    let orders = [
        tensor_ordering(n_r, sys.n_theta(), true),
        tensor_ordering(n_r, sys.n_theta(), false),
        (0..n).collect(),
        (0..n).rev().collect(),
    ];
    let sols: Vec<Vec<C64>> = orders
        .into_iter()
        .map(|perm| OrderedLu::factor(&sub.matrix, perm, "test").unwrap().solve(&b))
        .collect();
    let norm = sols[0].iter().map(|z| z.norm()).fold(0.0, f64::max);
    for s in &sols[1..] {
        let gap = s.iter().zip(&sols[0]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(gap < 1e-12 * norm, "{gap}");
    }
    // factorization residual of the layer problem
    let x = sub.solve(&b[..sub.dim()]);
    let r = sub.apply_local(&x);
    let res = r.iter().zip(&b).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(res < 1e-10 * b.iter().map(|z| z.norm()).fold(0.0, f64::max));
}

fn shared() -> &'static (TensorSystem, DosmPreconditioner) {
    static CELL: OnceLock<(TensorSystem, DosmPreconditioner)> = OnceLock::new();
    CELL.get_or_init(|| {
        let sys = system(&disk(), 3, 10, 3, SourceSpec::random(1));
        let d = decompose(&sys.space_r, 3).unwrap();
        let spec = PmlSpec::new(0.0, 1.0, 60.0);
        let pre = build_preconditioner(&sys, &d, &moving_pml_dtns(&sys, &spec, &d).unwrap()).unwrap();
        (sys, pre)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sweep_is_linear_and_deterministic(s1 in 0u64..1000, s2 in 0u64..1000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let (sys, pre) = shared();
        let x = random_vec(sys.dim(), s1);
        let y = random_vec(sys.dim(), s2);
        let (ca, cb) = (C64::new(a, 0.5), C64::new(b, -1.0));
        let z: Vec<C64> = x.iter().zip(&y).map(|(p, q)| ca * p + cb * q).collect();
        let (mx, my, mz) = (pre.apply_vec(&x), pre.apply_vec(&y), pre.apply_vec(&z));
        let scale = mz.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        let gap = mz
            .iter()
            .zip(mx.iter().zip(&my))
            .map(|(w, (p, q))| (w - (ca * p + cb * q)).norm())
            .fold(0.0, f64::max);
        prop_assert!(gap < 1e-10 * scale);
        prop_assert_eq!(pre.apply_vec(&x), mx);
    }
}
