use std::ops::Range;

use rayon::prelude::*;

use super::space::{Mesh1D, Space1D, SpaceBc};
use crate::coeffmodel::{Perturbation, RadialBc, SeparableCoefficients, ThetaBc};
use crate::linalg::{tensor_ordering, CsrMatrix, OrderedLu};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Value,
    First,
}

/// `∫ weight · φ_i^(du) · φ_j^(dv)` over all elements.
pub fn assemble_weighted_matrix<F>(space: &Space1D, weight: F, du: Derivative, dv: Derivative) -> CsrMatrix
where
    F: Fn(f64) -> C64,
{
    assemble_weighted_matrix_on(space, weight, du, dv, 0..space.n_elements())
}

/// Same as [`assemble_weighted_matrix`] restricted to a range of elements.
/// The result keeps the dimension of the full space.
pub fn assemble_weighted_matrix_on<F>(
    space: &Space1D,
    weight: F,
    du: Derivative,
    dv: Derivative,
    elements: Range<usize>,
) -> CsrMatrix
where
    F: Fn(f64) -> C64,
{
    let re = space.reference();
    let np = space.order() + 1;
    let symmetric = du == dv;
    let mut trip = Vec::with_capacity(elements.len() * np * np);
    for e in elements {
        let (x0, x1) = space.mesh().element(e);
        let half = 0.5 * (x1 - x0);
        let mut local = vec![C64::new(0.0, 0.0); np * np];
        for (q, &xi) in re.quad_nodes.iter().enumerate() {
            let x = x0 + half * (xi + 1.0);
            let wq = weight(x) * (re.quad_weights[q] * half);
            let pick = |d: Derivative, a: usize| match d {
                Derivative::Value => re.values[q][a],
                Derivative::First => re.derivatives[q][a] / half,
            };
            for a in 0..np {
                let ba = pick(du, a);
                let b0 = if symmetric { a } else { 0 };
                for b in b0..np {
                    local[a * np + b] += wq * ba * pick(dv, b);
                }
            }
        }
        if symmetric {
            for a in 0..np {
                for b in 0..a {
                    local[a * np + b] = local[b * np + a];
                }
            }
        }
        let dofs: Vec<Option<usize>> = space.element_dofs(e).collect();
        for a in 0..np {
            let Some(i) = dofs[a] else { continue };
            for b in 0..np {
                if let Some(j) = dofs[b] {
                    trip.push((i, j, local[a * np + b]));
                }
            }
        }
    }
    let n = space.dof_count();
    CsrMatrix::from_triplets(n, n, trip)
}

/// Radial factors `(M[c0], K[c1], M[c2])` over the given elements.
pub fn radial_matrices(
    coeffs: &SeparableCoefficients,
    space_r: &Space1D,
    elements: Range<usize>,
) -> [CsrMatrix; 3] {
    use Derivative::*;
    [
        assemble_weighted_matrix_on(space_r, |r| coeffs.radial(r)[0], Value, Value, elements.clone()),
        assemble_weighted_matrix_on(space_r, |r| coeffs.radial(r)[1], First, First, elements.clone()),
        assemble_weighted_matrix_on(space_r, |r| coeffs.radial(r)[2], Value, Value, elements),
    ]
}

/// Angular factors `(M[w0], K[w1])`.
pub fn theta_matrices(coeffs: &SeparableCoefficients, space_theta: &Space1D) -> (CsrMatrix, CsrMatrix) {
    use Derivative::*;
    (
        assemble_weighted_matrix(space_theta, |t| C64::new(coeffs.w0(t), 0.0), Value, Value),
        assemble_weighted_matrix(space_theta, |t| C64::new(coeffs.w1(t), 0.0), First, First),
    )
}

/// Uniform radial space with the boundary constraints of `coeffs`.
pub fn radial_space(coeffs: &SeparableCoefficients, n_elements: usize, order: usize) -> Result<Space1D> {
    let (a, b) = coeffs.r_interval;
    let bc = match (coeffs.r_bc_inner.is_dirichlet(), coeffs.r_bc_outer.is_dirichlet()) {
        (false, false) => SpaceBc::None,
        (true, false) => SpaceBc::DirichletLeft,
        (false, true) => SpaceBc::DirichletRight,
        (true, true) => SpaceBc::DirichletBoth,
    };
    Space1D::new(Mesh1D::uniform(a, b, n_elements)?, order, bc)
}

/// Uniform angular space with the boundary constraints of `coeffs`.
pub fn theta_space(coeffs: &SeparableCoefficients, n_elements: usize, order: usize) -> Result<Space1D> {
    let (a, b) = coeffs.theta_interval;
    let bc = match coeffs.theta_bc {
        ThetaBc::Dirichlet => SpaceBc::DirichletBoth,
        ThetaBc::Periodic => SpaceBc::Periodic,
    };
    Space1D::new(Mesh1D::uniform(a, b, n_elements)?, order, bc)
}

/// How the system matrix is generated: by Kronecker products of 1D factors
/// or by pointwise 2D quadrature with a perturbed velocity.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemForm {
    Separable(SeparableCoefficients),
    Pointwise {
        coeffs: SeparableCoefficients,
        perturbation: Perturbation,
    },
}

impl SystemForm {
    pub fn coeffs(&self) -> &SeparableCoefficients {
        match self {
            SystemForm::Separable(c) => c,
            SystemForm::Pointwise { coeffs, .. } => coeffs,
        }
    }

    /// Same form with different (e.g. PML-scaled) background coefficients.
    pub fn with_coeffs(&self, coeffs: SeparableCoefficients) -> Self {
        match self {
            SystemForm::Separable(_) => SystemForm::Separable(coeffs),
            SystemForm::Pointwise { perturbation, .. } => SystemForm::Pointwise {
                coeffs,
                perturbation: *perturbation,
            },
        }
    }

    /// Contributions of the radial elements in `elements` to the global
    /// matrix (full dimension).
    pub fn assemble_region(&self, space_r: &Space1D, space_theta: &Space1D, elements: Range<usize>) -> CsrMatrix {
        match self {
            SystemForm::Separable(c) => {
                let [m0, k1, m2] = radial_matrices(c, space_r, elements);
                let (mt, kt) = theta_matrices(c, space_theta);
                let neg_m0 = m0.scale(C64::new(-1.0, 0.0));
                CsrMatrix::kron_sum(&[(&neg_m0, &mt), (&k1, &mt), (&m2, &kt)])
            }
            SystemForm::Pointwise { coeffs, perturbation } => {
                pointwise_region(coeffs, perturbation, space_r, space_theta, elements)
            }
        }
    }
}

fn pointwise_region(
    coeffs: &SeparableCoefficients,
    perturbation: &Perturbation,
    space_r: &Space1D,
    space_theta: &Space1D,
    elements: Range<usize>,
) -> CsrMatrix {
    let rr = space_r.reference();
    let rt = space_theta.reference();
    let (npr, npt) = (space_r.order() + 1, space_theta.order() + 1);
    let nloc = npr * npt;
    let nt = space_theta.dof_count();
    let n = space_r.dof_count() * nt;

    let per_element: Vec<Vec<(usize, usize, C64)>> = elements
        .into_par_iter()
        .map(|er| {
            let (r0, r1) = space_r.mesh().element(er);
            let hr = 0.5 * (r1 - r0);
            let rdofs: Vec<Option<usize>> = space_r.element_dofs(er).collect();
            let mut trip = Vec::new();
            for et in 0..space_theta.n_elements() {
                let (t0, t1) = space_theta.mesh().element(et);
                let ht = 0.5 * (t1 - t0);
                let tdofs: Vec<Option<usize>> = space_theta.element_dofs(et).collect();
                let mut local = vec![C64::new(0.0, 0.0); nloc * nloc];
                for (qr, &xr) in rr.quad_nodes.iter().enumerate() {
                    let r = r0 + hr * (xr + 1.0);
                    for (qt, &xt) in rt.quad_nodes.iter().enumerate() {
                        let theta = t0 + ht * (xt + 1.0);
                        let jw = rr.quad_weights[qr] * hr * rt.quad_weights[qt] * ht;
                        let f = perturbation.factor(r, theta);
                        let [c0, c1, c2] = coeffs.radial_with_velocity_factor(r, f);
                        let w0 = coeffs.w0(theta) * jw;
                        let w1 = coeffs.w1(theta) * jw;
                        let (mass, rstiff, tstiff) = (-c0 * w0, c1 * w0, c2 * w1);
                        for a in 0..npr {
                            let (pa, da) = (rr.values[qr][a], rr.derivatives[qr][a] / hr);
                            for k in 0..npt {
                                let (qa, ea) = (rt.values[qt][k], rt.derivatives[qt][k] / ht);
                                let row = a * npt + k;
                                for b in a..npr {
                                    let (pb, db) = (rr.values[qr][b], rr.derivatives[qr][b] / hr);
                                    let l0 = if b == a { k } else { 0 };
                                    for l in l0..npt {
                                        let (qb, eb) = (rt.values[qt][l], rt.derivatives[qt][l] / ht);
                                        local[row * nloc + b * npt + l] += mass * (pa * pb * qa * qb)
                                            + rstiff * (da * db * qa * qb)
                                            + tstiff * (pa * pb * ea * eb);
                                    }
                                }
                            }
                        }
                    }
                }
                for i in 0..nloc {
                    for j in 0..i {
                        local[i * nloc + j] = local[j * nloc + i];
                    }
                }
                for a in 0..npr {
                    for k in 0..npt {
                        let (Some(ir), Some(it)) = (rdofs[a], tdofs[k]) else { continue };
                        for b in 0..npr {
                            for l in 0..npt {
                                let (Some(jr), Some(jt)) = (rdofs[b], tdofs[l]) else { continue };
                                trip.push((
                                    ir * nt + it,
                                    jr * nt + jt,
                                    local[(a * npt + k) * nloc + b * npt + l],
                                ));
                            }
                        }
                    }
                }
            }
            trip
        })
        .collect();
    CsrMatrix::from_triplets(n, n, per_element.into_iter().flatten().collect())
}

/// Assembled 2D operator with its load vector and discretization data.
#[derive(Debug, Clone)]
pub struct TensorSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<C64>,
    pub space_r: Space1D,
    pub space_theta: Space1D,
    pub form: SystemForm,
}

impl TensorSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_theta(&self) -> usize {
        self.space_theta.dof_count()
    }

    pub fn coeffs(&self) -> &SeparableCoefficients {
        self.form.coeffs()
    }

    pub fn global_index(&self, r_dof: usize, theta_dof: usize) -> usize {
        r_dof * self.n_theta() + theta_dof
    }

    pub fn with_rhs(mut self, rhs: Vec<C64>) -> Result<Self> {
        if rhs.len() != self.dim() {
            return Err(Error::validation(format!(
                "load has length {} but the system has {} unknowns",
                rhs.len(),
                self.dim()
            )));
        }
        self.rhs = rhs;
        Ok(self)
    }

    pub fn assemble_region(&self, elements: Range<usize>) -> CsrMatrix {
        self.form.assemble_region(&self.space_r, &self.space_theta, elements)
    }

    /// Banded LU of the full matrix in a band-reducing order.
    pub fn direct_solver(&self) -> Result<OrderedLu> {
        let periodic = self.space_theta.bc() == SpaceBc::Periodic;
        let perm = tensor_ordering(self.space_r.dof_count(), self.n_theta(), periodic);
        OrderedLu::factor(&self.matrix, perm, "global system")
    }

    pub fn solve_direct(&self) -> Result<Vec<C64>> {
        Ok(self.direct_solver()?.solve(&self.rhs))
    }
}

fn check_spaces(coeffs: &SeparableCoefficients, space_r: &Space1D, space_theta: &Space1D) -> Result<()> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
    let (r0, r1) = coeffs.r_interval;
    if !close(space_r.mesh().start(), r0) || !close(space_r.mesh().end(), r1) {
        return Err(Error::validation("radial mesh does not span the coefficient interval"));
    }
    let (t0, t1) = coeffs.theta_interval;
    if !close(space_theta.mesh().start(), t0) || !close(space_theta.mesh().end(), t1) {
        return Err(Error::validation("angular mesh does not span the coefficient interval"));
    }
    let expect_theta = match coeffs.theta_bc {
        ThetaBc::Dirichlet => SpaceBc::DirichletBoth,
        ThetaBc::Periodic => SpaceBc::Periodic,
    };
    if space_theta.bc() != expect_theta {
        return Err(Error::validation("angular space constraints do not match the coefficients"));
    }
    let outer_dirichlet = matches!(space_r.bc(), SpaceBc::DirichletRight | SpaceBc::DirichletBoth);
    let inner_dirichlet = matches!(space_r.bc(), SpaceBc::DirichletLeft | SpaceBc::DirichletBoth);
    if outer_dirichlet != coeffs.r_bc_outer.is_dirichlet() || inner_dirichlet != coeffs.r_bc_inner.is_dirichlet() {
        return Err(Error::validation("radial space constraints do not match the coefficients"));
    }
    if coeffs.r_bc_outer == RadialBc::Pml && coeffs.pml.is_none() {
        return Err(Error::validation("outer boundary is marked PML but no PML is attached"));
    }
    Ok(())
}

/// Kronecker assembly of the separable system
/// `-M_r[c0]⊗M_θ[w0] + K_r[c1]⊗M_θ[w0] + M_r[c2]⊗K_θ[w1]` with a zero load.
pub fn assemble_tensor_system(
    coeffs: &SeparableCoefficients,
    space_r: &Space1D,
    space_theta: &Space1D,
) -> Result<TensorSystem> {
    check_spaces(coeffs, space_r, space_theta)?;
    let form = SystemForm::Separable(coeffs.clone());
    let matrix = form.assemble_region(space_r, space_theta, 0..space_r.n_elements());
    Ok(TensorSystem {
        rhs: vec![C64::new(0.0, 0.0); matrix.nrows()],
        matrix,
        space_r: space_r.clone(),
        space_theta: space_theta.clone(),
        form,
    })
}

/// General 2D assembly with the velocity `v_bg(r) * factor(r, θ)` evaluated
/// at every quadrature point.
pub fn assemble_perturbed_system(
    coeffs: &SeparableCoefficients,
    perturbation: Perturbation,
    space_r: &Space1D,
    space_theta: &Space1D,
) -> Result<TensorSystem> {
    check_spaces(coeffs, space_r, space_theta)?;
    // velocity must stay positive at every quadrature node
    let rr = space_r.reference();
    let rt = space_theta.reference();
    for er in 0..space_r.n_elements() {
        let (r0, r1) = space_r.mesh().element(er);
        for &xr in &rr.quad_nodes {
            let r = r0 + 0.5 * (r1 - r0) * (xr + 1.0);
            let vb = coeffs.medium.background_velocity(r);
            for et in 0..space_theta.n_elements() {
                let (t0, t1) = space_theta.mesh().element(et);
                for &xt in &rt.quad_nodes {
                    let theta = t0 + 0.5 * (t1 - t0) * (xt + 1.0);
                    let v = vb * perturbation.factor(r, theta);
                    if !(v > 0.0) {
                        return Err(Error::validation(format!(
                            "perturbed velocity {v} is not positive at (r, θ) = ({r}, {theta})"
                        )));
                    }
                }
            }
        }
    }
    let form = SystemForm::Pointwise {
        coeffs: coeffs.clone(),
        perturbation,
    };
    let matrix = form.assemble_region(space_r, space_theta, 0..space_r.n_elements());
    Ok(TensorSystem {
        rhs: vec![C64::new(0.0, 0.0); matrix.nrows()],
        matrix,
        space_r: space_r.clone(),
        space_theta: space_theta.clone(),
        form,
    })
}
