use nalgebra::DMatrix;
use proptest::prelude::*;

use stratsweep::coeffmodel::{
    make_disk_coefficients, make_sh_coefficients, make_strip_coefficients, pml_scale, PmlSpec, RadialProfile,
    SeparableCoefficients,
};
use stratsweep::fem::quadrature::gauss_legendre;
use stratsweep::fem::{assemble_tensor_system, radial_space, theta_space, Space1D};
use stratsweep::C64;

/// Element-by-element 2D quadrature straight from the bilinear form.
fn brute_force(c: &SeparableCoefficients, sr: &Space1D, st: &Space1D) -> DMatrix<C64> {
    let nt = st.dof_count();
    let n = sr.dof_count() * nt;
    let mut a = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let (rr, rt) = (sr.reference(), st.reference());
    for er in 0..sr.n_elements() {
        let (r0, r1) = sr.mesh().element(er);
        let jr = 0.5 * (r1 - r0);
        let rdofs: Vec<Option<usize>> = sr.element_dofs(er).collect();
        for et in 0..st.n_elements() {
            let (t0, t1) = st.mesh().element(et);
            let jt = 0.5 * (t1 - t0);
            let tdofs: Vec<Option<usize>> = st.element_dofs(et).collect();
            for (qr, &xr) in rr.quad_nodes.iter().enumerate() {
                let r = r0 + jr * (xr + 1.0);
                let [c0, c1, c2] = c.radial(r);
                for (qt, &xt) in rt.quad_nodes.iter().enumerate() {
                    let theta = t0 + jt * (xt + 1.0);
                    let (w0, w1) = (c.w0(theta), c.w1(theta));
                    let w = rr.quad_weights[qr] * rt.quad_weights[qt] * jr * jt;
                    for (ia, ra) in rdofs.iter().enumerate() {
                        for (ta, tda) in tdofs.iter().enumerate() {
                            let (Some(ra), Some(tda)) = (ra, tda) else { continue };
                            let (u, ur, ut) = (
                                rr.values[qr][ia] * rt.values[qt][ta],
                                rr.derivatives[qr][ia] / jr * rt.values[qt][ta],
                                rr.values[qr][ia] * rt.derivatives[qt][ta] / jt,
                            );
                            for (ib, rb) in rdofs.iter().enumerate() {
                                for (tb, tdb) in tdofs.iter().enumerate() {
                                    let (Some(rb), Some(tdb)) = (rb, tdb) else { continue };
                                    let (v, vr, vt) = (
                                        rr.values[qr][ib] * rt.values[qt][tb],
                                        rr.derivatives[qr][ib] / jr * rt.values[qt][tb],
                                        rr.values[qr][ib] * rt.derivatives[qt][tb] / jt,
                                    );
                                    let val = -c0 * w0 * u * v + c1 * w0 * ur * vr + c2 * w1 * ut * vt;
                                    a[(ra * nt + tda, rb * nt + tdb)] += val * w;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    a
}

fn relative_gap(c: &SeparableCoefficients, n_r: usize, n_t: usize, p: usize) -> f64 {
    let sr = radial_space(c, n_r, p).unwrap();
    let st = theta_space(c, n_t, p).unwrap();
    let k = assemble_tensor_system(c, &sr, &st).unwrap().matrix.to_dense();
    let b = brute_force(c, &sr, &st);
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (k - b).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

#[test]
fn strip_sh_and_disk_match() {
    let strip = make_strip_coefficients(1.3, 4.0, (0.0, 1.0), 2.0).unwrap();
    assert!(relative_gap(&strip, 3, 3, 2) < 1e-12);
    let sh = make_sh_coefficients(&RadialProfile::prem_like(), 9.0).unwrap();
    assert!(relative_gap(&sh, 4, 3, 3) < 1e-12);
    let disk = make_disk_coefficients(0.5, 7.0, 2).unwrap();
    let disk = pml_scale(PmlSpec::new(0.5, 0.5, 30.0), &disk).unwrap();
    assert!(relative_gap(&disk, 4, 4, 3) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pml_scaled_sh_matches(omega in 1.0f64..20.0, sigma in 0.0f64..80.0, p in 1usize..4, n_t in 2usize..4) {
        let c = make_sh_coefficients(&RadialProfile::prem_like(), omega).unwrap();
        let c = pml_scale(PmlSpec::new(0.8, 0.2, sigma).with_gamma(0.5), &c).unwrap();
        prop_assert!(relative_gap(&c, 4, n_t, p) < 1e-12);
    }

    #[test]
    fn periodic_disk_matches(alpha in 0.0f64..1.5, omega in 1.0f64..12.0, p in 1usize..4) {
        let c = make_disk_coefficients(alpha, omega, 3).unwrap();
        prop_assert!(relative_gap(&c.with_free_surface(), 3, 4, p) < 1e-12);
    }
}

/// Strip `(0, 1) × (0, 1)`, `-Δu - ω²u = 0`, `u = sin(πθ) cos(k r)`,
/// `k² = ω² - π²`; the Neumann data at `r = 1` is the only load.
fn h1_error(n: usize, p: usize) -> f64 {
    use std::f64::consts::PI;
    let omega = 5.0;
    let k = (omega * omega - PI * PI).sqrt();
    let c = make_strip_coefficients(1.0, omega, (0.0, 1.0), 1.0).unwrap();
    let sr = radial_space(&c, n, p).unwrap();
    let st = theta_space(&c, n, p).unwrap();
    let sys = assemble_tensor_system(&c, &sr, &st).unwrap();
    let nt = st.dof_count();
    let q = gauss_legendre(p + 3);
    let flux = -k * k.sin();
    let mut f = vec![C64::new(0.0, 0.0); sys.dim()];
    let top = sr.dof_count() - 1;
    for e in 0..st.n_elements() {
        let (t0, t1) = st.mesh().element(e);
        for (&x, &w) in q.nodes.iter().zip(&q.weights) {
            let theta = t0 + 0.5 * (t1 - t0) * (x + 1.0);
            for (d, v, _) in st.eval_at(theta).unwrap() {
                f[top * nt + d] += C64::new(flux * (PI * theta).sin() * v * w * 0.5 * (t1 - t0), 0.0);
            }
        }
    }
    let u = sys.with_rhs(f).unwrap().solve_direct().unwrap();
    let mut err = 0.0;
    for er in 0..sr.n_elements() {
        let (r0, r1) = sr.mesh().element(er);
        for et in 0..st.n_elements() {
            let (t0, t1) = st.mesh().element(et);
            for (&xr, &wr) in q.nodes.iter().zip(&q.weights) {
                let r = r0 + 0.5 * (r1 - r0) * (xr + 1.0);
                let br = sr.eval_at(r).unwrap();
                for (&xt, &wt) in q.nodes.iter().zip(&q.weights) {
                    let theta = t0 + 0.5 * (t1 - t0) * (xt + 1.0);
                    let bt = st.eval_at(theta).unwrap();
                    let (mut dr, mut dt) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                    for &(i, v, dv) in &br {
                        for &(j, w, dw) in &bt {
                            dr += u[i * nt + j] * dv * w;
                            dt += u[i * nt + j] * v * dw;
                        }
                    }
                    let er_ = dr - (-k * (k * r).sin() * (PI * theta).sin());
                    let et_ = dt - ((k * r).cos() * PI * (PI * theta).cos());
                    err += (er_.norm_sqr() + et_.norm_sqr()) * wr * wt * 0.25 * (r1 - r0) * (t1 - t0);
                }
            }
        }
    }
    err.sqrt()
}

#[test]
fn h1_convergence_rate_at_order_two() {
    let errs: Vec<f64> = [4, 8, 16].iter().map(|&n| h1_error(n, 2)).collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate > 1.8 && rate < 2.5, "errors {errs:?}");
    }
}
