use super::assembly::TensorSystem;
use crate::{Error, Result, C64};

/// `‖u - u_ref‖ / ‖u_ref‖` in the weighted L² norm of the medium's volume
/// element, integrated element by element with the space quadrature.
pub fn relative_l2_error(u: &[C64], u_ref: &[C64], system: &TensorSystem) -> Result<f64> {
    let n = system.dim();
    if u.len() != n || u_ref.len() != n {
        return Err(Error::validation(format!(
            "vectors of length {} and {} do not match the system dimension {n}",
            u.len(),
            u_ref.len()
        )));
    }
    let (sr, st) = (&system.space_r, &system.space_theta);
    let medium = &system.coeffs().medium;
    let (rr, rt) = (sr.reference(), st.reference());
    let nt = st.dof_count();
    let (mut num, mut den) = (0.0, 0.0);
    for er in 0..sr.n_elements() {
        let (r0, r1) = sr.mesh().element(er);
        let hr = 0.5 * (r1 - r0);
        let rdofs: Vec<Option<usize>> = sr.element_dofs(er).collect();
        for et in 0..st.n_elements() {
            let (t0, t1) = st.mesh().element(et);
            let ht = 0.5 * (t1 - t0);
            let tdofs: Vec<Option<usize>> = st.element_dofs(et).collect();
            for (qr, &xr) in rr.quad_nodes.iter().enumerate() {
                let r = r0 + hr * (xr + 1.0);
                for (qt, &xt) in rt.quad_nodes.iter().enumerate() {
                    let theta = t0 + ht * (xt + 1.0);
                    let (mut e, mut v) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                    for (a, ia) in rdofs.iter().enumerate() {
                        let Some(i) = ia else { continue };
                        for (k, ik) in tdofs.iter().enumerate() {
                            let Some(j) = ik else { continue };
                            let phi = rr.values[qr][a] * rt.values[qt][k];
                            let g = i * nt + j;
                            e += (u[g] - u_ref[g]) * phi;
                            v += u_ref[g] * phi;
                        }
                    }
                    let w = rr.quad_weights[qr] * hr * rt.quad_weights[qt] * ht * medium.volume_weight(r, theta);
                    num += w * e.norm_sqr();
                    den += w * v.norm_sqr();
                }
            }
        }
    }
    if den == 0.0 {
        return Err(Error::validation("reference solution has zero norm"));
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffmodel::{make_disk_coefficients, pml_scale, PmlSpec};
    use crate::fem::{assemble_tensor_system, radial_space, theta_space};

    #[test]
    fn scaling_and_identity() {
        let c = make_disk_coefficients(0.5, 4.0, 2).unwrap();
        let c = pml_scale(PmlSpec::new(0.5, 0.5, 20.0), &c).unwrap();
        let sys = assemble_tensor_system(&c, &radial_space(&c, 4, 2).unwrap(), &theta_space(&c, 4, 2).unwrap()).unwrap();
        let u: Vec<C64> = (0..sys.dim()).map(|i| C64::new(i as f64, 1.0)).collect();
        assert_eq!(relative_l2_error(&u, &u, &sys).unwrap(), 0.0);
        let v: Vec<C64> = u.iter().map(|z| z * 1.5).collect();
        assert!((relative_l2_error(&v, &u, &sys).unwrap() - 0.5).abs() < 1e-13);
        assert!(relative_l2_error(&u[1..], &u, &sys).is_err());
    }
}
