//! Interface transmission operators.
//!
//! Three variants act on the trace of `Γ_{j,j-1}`:
//!
//! * the moving PML, the Schur complement of layer `j - 1` turned into an
//!   absorbing layer,
//! * the tensor-product DtN `P = M Ψ diag(dtn_ℓ) Ψᵀ M` built from the
//!   transverse eigenbasis and one 1D exterior solve per mode,
//! * the exact Schur complement of the exterior region, used as an oracle.
//!
//! DtN numbers follow the sign of `g ↦ -c1 ∂_r v` at the interface and are
//! computed variationally as 1D Schur complements. On a separable medium
//! the tensor and exact operators coincide up to rounding.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::coeffmodel::{PmlSpec, SeparableCoefficients};
use crate::fem::{assemble_weighted_matrix, assemble_weighted_matrix_on, Derivative, Mesh1D, Space1D, SpaceBc, TensorSystem};
use crate::linalg::{symmetrize, tensor_ordering, CsrMatrix, DenseLu, OrderedLu};
use crate::sweep::{expand, LayerDecomposition};
use crate::{Error, Result, C64};

/// Generalized eigenpairs `K ψ = λ M ψ` of the weighted angular Laplacian.
#[derive(Debug, Clone)]
pub struct TransverseEigenbasis {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are `M`-orthonormal eigenvectors.
    pub vectors: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
}

fn real_dense(m: &CsrMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplets() {
        d[(i, j)] += v.re;
    }
    d
}

/// Dense symmetric-definite eigendecomposition with Jacobi scaling of the
/// mass matrix before the Cholesky factorization.
pub fn transverse_eigenbasis<W0, W1>(space_theta: &Space1D, w0: W0, w1: W1) -> Result<TransverseEigenbasis>
where
    W0: Fn(f64) -> f64,
    W1: Fn(f64) -> f64,
{
    use Derivative::*;
    let mass = real_dense(&assemble_weighted_matrix(space_theta, |t| C64::new(w0(t), 0.0), Value, Value));
    let stiffness = real_dense(&assemble_weighted_matrix(space_theta, |t| C64::new(w1(t), 0.0), First, First));
    let n = mass.nrows();
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let d = mass[(i, i)];
        if !(d > 0.0) {
            return Err(Error::validation("transverse mass matrix is not positive definite"));
        }
        scale.push(1.0 / d.sqrt());
    }
    let ms = DMatrix::from_fn(n, n, |i, j| mass[(i, j)] * scale[i] * scale[j]);
    let ks = DMatrix::from_fn(n, n, |i, j| stiffness[(i, j)] * scale[i] * scale[j]);
    let chol = ms
        .cholesky()
        .ok_or_else(|| Error::validation("transverse mass matrix is not positive definite"))?;
    let l = chol.l();
    // C = L⁻¹ K L⁻ᵀ
    let y = l
        .solve_lower_triangular(&ks)
        .ok_or_else(|| Error::validation("singular Cholesky factor"))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::validation("singular Cholesky factor"))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let v = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    let w = l
        .transpose()
        .solve_upper_triangular(&v)
        .ok_or_else(|| Error::validation("singular Cholesky factor"))?;
    let vectors = DMatrix::from_fn(n, n, |i, k| w[(i, k)] * scale[i]);
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    Ok(TransverseEigenbasis {
        eigenvalues,
        vectors,
        mass,
        stiffness,
    })
}

impl TransverseEigenbasis {
    pub fn for_coefficients(coeffs: &SeparableCoefficients, space_theta: &Space1D) -> Result<Self> {
        transverse_eigenbasis(space_theta, |t| coeffs.w0(t), |t| coeffs.w1(t))
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Radial space on `(R_j, R_outer)` made of the global elements above the
/// interface, with the global outer constraint.
pub fn exterior_radial_space(space_r: &Space1D, decomp: &LayerDecomposition, j: usize) -> Result<Space1D> {
    if j < 2 || j > decomp.n_layers() {
        return Err(Error::validation(format!("interface index {j} out of range")));
    }
    let elems = decomp.exterior_elements(j);
    let verts = space_r.mesh().vertices()[elems.start..=elems.end].to_vec();
    let bc = match space_r.bc() {
        SpaceBc::DirichletRight | SpaceBc::DirichletBoth => SpaceBc::DirichletRight,
        _ => SpaceBc::None,
    };
    Space1D::new(Mesh1D::new(verts)?, space_r.order(), bc)
}

fn mode_matrix(coeffs: &SeparableCoefficients, space: &Space1D, lambda: f64, factor: f64) -> DMatrix<C64> {
    use Derivative::*;
    let all = 0..space.n_elements();
    let c = |r: f64| coeffs.radial_with_velocity_factor(r, factor);
    let m0 = assemble_weighted_matrix_on(space, |r| -c(r)[0], Value, Value, all.clone());
    let k1 = assemble_weighted_matrix_on(space, |r| c(r)[1], First, First, all.clone());
    let m2 = assemble_weighted_matrix_on(space, |r| c(r)[2] * lambda, Value, Value, all);
    m0.to_dense() + k1.to_dense() + m2.to_dense()
}

fn dtn_with_factor(coeffs: &SeparableCoefficients, space: &Space1D, lambda: f64, factor: f64) -> Result<C64> {
    let a = mode_matrix(coeffs, space, lambda, factor);
    let n = a.nrows();
    let gamma = space
        .node_dof(0)
        .ok_or_else(|| Error::validation("exterior space has no interface unknown"))?;
    let rest: Vec<usize> = (0..n).filter(|&i| i != gamma).collect();
    if rest.is_empty() {
        return Ok(a[(gamma, gamma)]);
    }
    let a_ii = DMatrix::from_fn(rest.len(), rest.len(), |i, k| a[(rest[i], rest[k])]);
    let b: Vec<C64> = rest.iter().map(|&i| a[(i, gamma)]).collect();
    let lu = DenseLu::factor(a_ii, "mode").map_err(|_| Error::ModeResonance { ell: 0, lambda })?;
    let z = lu.solve(&b);
    let corr: C64 = rest.iter().zip(&z).map(|(&i, zi)| a[(gamma, i)] * zi).sum();
    Ok(a[(gamma, gamma)] - corr)
}

/// DtN number of one transverse mode: the 1D Schur complement onto the
/// interface node of `-M[c0] + K[c1] + λ M[c2]` on the exterior space.
pub fn mode_dtn_number(coeffs: &SeparableCoefficients, exterior_space_r: &Space1D, lambda: f64) -> Result<C64> {
    dtn_with_factor(coeffs, exterior_space_r, lambda, 1.0)
}

/// Diagnostic variant: `-c1(R) u_h'(R)` from the pointwise derivative of the
/// discrete mode with `u_h(R) = 1`. Differs from [`mode_dtn_number`] by the
/// discretization error of the flux.
pub fn mode_dtn_pointwise(coeffs: &SeparableCoefficients, exterior_space_r: &Space1D, lambda: f64) -> Result<C64> {
    let a = mode_matrix(coeffs, exterior_space_r, lambda, 1.0);
    let n = a.nrows();
    let gamma = exterior_space_r
        .node_dof(0)
        .ok_or_else(|| Error::validation("exterior space has no interface unknown"))?;
    let rest: Vec<usize> = (0..n).filter(|&i| i != gamma).collect();
    let a_ii = DMatrix::from_fn(rest.len(), rest.len(), |i, k| a[(rest[i], rest[k])]);
    let b: Vec<C64> = rest.iter().map(|&i| -a[(i, gamma)]).collect();
    let lu = DenseLu::factor(a_ii, "mode").map_err(|_| Error::ModeResonance { ell: 0, lambda })?;
    let z = lu.solve(&b);
    let mut u = vec![C64::new(0.0, 0.0); n];
    u[gamma] = C64::new(1.0, 0.0);
    for (&i, zi) in rest.iter().zip(z) {
        u[i] = zi;
    }
    let r0 = exterior_space_r.mesh().start();
    let du: C64 = exterior_space_r
        .eval_at(r0)?
        .into_iter()
        .map(|(d, _, der)| u[d] * der)
        .sum();
    Ok(-coeffs.radial(r0)[1] * du)
}

/// DtN numbers of all modes of an eigenbasis at one interface.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalDtN {
    pub radius: f64,
    pub eigenvalues: Vec<f64>,
    pub numbers: Vec<C64>,
}

impl ModalDtN {
    pub fn len(&self) -> usize {
        self.numbers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numbers.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("ell,lambda,re_dtn,im_dtn\n");
        for (k, (l, d)) in self.eigenvalues.iter().zip(&self.numbers).enumerate() {
            let _ = writeln!(s, "{},{l:.16e},{:.16e},{:.16e}", k + 1, d.re, d.im);
        }
        s
    }
}

/// Modal DtN with the background velocity multiplied by `velocity_factor`
/// (1 for the background itself).
pub fn modal_dtn(
    coeffs: &SeparableCoefficients,
    exterior_space_r: &Space1D,
    basis: &TransverseEigenbasis,
    velocity_factor: f64,
) -> Result<ModalDtN> {
    let numbers = basis
        .eigenvalues
        .par_iter()
        .enumerate()
        .map(|(k, &lambda)| {
            dtn_with_factor(coeffs, exterior_space_r, lambda, velocity_factor).map_err(|e| match e {
                Error::ModeResonance { lambda, .. } => Error::ModeResonance { ell: k + 1, lambda },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModalDtN {
        radius: exterior_space_r.mesh().start(),
        eigenvalues: basis.eigenvalues.clone(),
        numbers,
    })
}

/// `|d0 - d1| / |d0|` per mode; a zero background number gives infinity.
pub fn modal_relative_error(background: &ModalDtN, perturbed: &ModalDtN) -> Result<Vec<f64>> {
    if background.len() != perturbed.len() || background.eigenvalues != perturbed.eigenvalues {
        return Err(Error::validation("modal DtN tables use different eigenbases"));
    }
    Ok(background
        .numbers
        .iter()
        .zip(&perturbed.numbers)
        .map(|(a, b)| {
            if a.norm() == 0.0 {
                f64::INFINITY
            } else {
                (a - b).norm() / a.norm()
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransmissionKind {
    MovingPml,
    Tensor,
    ExactSchur,
}

impl TransmissionKind {
    pub fn name(self) -> &'static str {
        match self {
            TransmissionKind::MovingPml => "moving-pml",
            TransmissionKind::Tensor => "tensor",
            TransmissionKind::ExactSchur => "exact-schur",
        }
    }
}

/// Dense complex symmetric matrix on the trace unknowns of `Γ_{j,j-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceOperator {
    pub interface: usize,
    pub kind: TransmissionKind,
    pub matrix: DMatrix<C64>,
}

/// `M Ψ diag(dtn) Ψᵀ M`, filled from the upper triangle.
pub fn modal_operator(basis: &TransverseEigenbasis, numbers: &[C64]) -> DMatrix<C64> {
    let mpsi = &basis.mass * &basis.vectors;
    let n = mpsi.nrows();
    let mut p = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for k in i..n {
            let s: C64 = numbers
                .iter()
                .enumerate()
                .map(|(l, d)| d * (mpsi[(i, l)] * mpsi[(k, l)]))
                .sum();
            p[(i, k)] = s;
            p[(k, i)] = s;
        }
    }
    p
}

/// Tensor-product DtN on `Γ_{j,j-1}` for a separable medium.
pub fn tensor_dtn_operator(
    coeffs: &SeparableCoefficients,
    basis: &TransverseEigenbasis,
    space_r: &Space1D,
    decomp: &LayerDecomposition,
    j: usize,
) -> Result<InterfaceOperator> {
    let ext = exterior_radial_space(space_r, decomp, j)?;
    let modal = modal_dtn(coeffs, &ext, basis, 1.0)?;
    Ok(InterfaceOperator {
        interface: j,
        kind: TransmissionKind::Tensor,
        matrix: modal_operator(basis, &modal.numbers),
    })
}

/// Tensor DtN operators for all interfaces `j = 2..J`.
pub fn tensor_dtn_operators(
    coeffs: &SeparableCoefficients,
    space_r: &Space1D,
    space_theta: &Space1D,
    decomp: &LayerDecomposition,
) -> Result<Vec<InterfaceOperator>> {
    let basis = TransverseEigenbasis::for_coefficients(coeffs, space_theta)?;
    (2..=decomp.n_layers())
        .map(|j| tensor_dtn_operator(coeffs, &basis, space_r, decomp, j))
        .collect()
}

/// `A_ΓΓ - A_ΓI A_II⁻¹ A_IΓ` for a region matrix, symmetrized.
fn trace_schur(
    region: &CsrMatrix,
    interior_rdofs: &[usize],
    gamma_rdof: usize,
    n_theta: usize,
    periodic: bool,
    context: &str,
) -> Result<DMatrix<C64>> {
    let interior = expand(interior_rdofs, n_theta);
    let gamma = expand(&[gamma_rdof], n_theta);
    let a_gg = region.submatrix(&gamma, &gamma).to_dense();
    if interior.is_empty() {
        return Ok(symmetrize(&a_gg));
    }
    let a_ii = region.submatrix(&interior, &interior);
    let a_ig = region.submatrix(&interior, &gamma);
    let a_gi = region.submatrix(&gamma, &interior);
    let lu = OrderedLu::factor(&a_ii, tensor_ordering(interior_rdofs.len(), n_theta, periodic), context)?;
    let a_ig_t = a_ig.transpose();
    let cols: Vec<Vec<C64>> = (0..n_theta)
        .into_par_iter()
        .map(|c| {
            let mut col = vec![C64::new(0.0, 0.0); interior.len()];
            for (i, v) in a_ig_t.row(c) {
                col[i] = v;
            }
            a_gi.mul_vec(&lu.solve(&col))
        })
        .collect();
    let s = DMatrix::from_fn(n_theta, n_theta, |i, k| a_gg[(i, k)] - cols[k][i]);
    Ok(symmetrize(&s))
}

/// Exact Schur complement of the exterior region `∪_{i<j} Ω_i` onto
/// `Γ_{j,j-1}`, with the physical outer condition of the system.
pub fn exact_schur_dtn(system: &TensorSystem, decomp: &LayerDecomposition, j: usize) -> Result<InterfaceOperator> {
    if j < 2 || j > decomp.n_layers() {
        return Err(Error::validation(format!("interface index {j} out of range")));
    }
    let region = system.assemble_region(decomp.exterior_elements(j));
    let gamma = decomp.layer(j).top_rdof.expect("interfaces below layer 1 carry unknowns");
    let interior: Vec<usize> = (gamma + 1..system.space_r.dof_count()).collect();
    let periodic = system.space_theta.bc() == SpaceBc::Periodic;
    let matrix = trace_schur(
        &region,
        &interior,
        gamma,
        system.n_theta(),
        periodic,
        &format!("exterior of interface {j}"),
    )?;
    Ok(InterfaceOperator {
        interface: j,
        kind: TransmissionKind::ExactSchur,
        matrix,
    })
}

pub fn exact_schur_dtns(system: &TensorSystem, decomp: &LayerDecomposition) -> Result<Vec<InterfaceOperator>> {
    (2..=decomp.n_layers()).map(|j| exact_schur_dtn(system, decomp, j)).collect()
}

/// Moving PML: layer `j - 1` with complex scaling starting at `Γ_{j,j-1}`
/// over the whole layer, closed by a homogeneous Dirichlet condition, and
/// condensed onto the interface. `pml` supplies `sigma0`, the exponent and
/// the damping shift; its position is overridden.
pub fn moving_pml_dtn(
    system: &TensorSystem,
    pml: &PmlSpec,
    decomp: &LayerDecomposition,
    j: usize,
) -> Result<InterfaceOperator> {
    if j < 2 || j > decomp.n_layers() {
        return Err(Error::validation(format!("interface index {j} out of range")));
    }
    let start = decomp.interface_radius(j);
    let width = decomp.interface_radius(j - 1) - start;
    let spec = PmlSpec {
        start,
        width,
        ..*pml
    };
    let mut coeffs = system.coeffs().clone();
    coeffs.gamma = spec.gamma;
    coeffs.pml = Some(spec);
    let form = system.form.with_coeffs(coeffs);
    let pml_layer = decomp.layer(j - 1);
    let region = form.assemble_region(&system.space_r, &system.space_theta, pml_layer.elements.clone());
    let p = system.space_r.order();
    let lo_node = pml_layer.elements.start * p;
    let hi_node = pml_layer.elements.end * p;
    let interior: Vec<usize> = (lo_node + 1..hi_node)
        .filter_map(|k| system.space_r.node_dof(k))
        .collect();
    let gamma = decomp.layer(j).top_rdof.expect("interfaces below layer 1 carry unknowns");
    let periodic = system.space_theta.bc() == SpaceBc::Periodic;
    let matrix = trace_schur(
        &region,
        &interior,
        gamma,
        system.n_theta(),
        periodic,
        &format!("moving PML of interface {j}"),
    )?;
    Ok(InterfaceOperator {
        interface: j,
        kind: TransmissionKind::MovingPml,
        matrix,
    })
}

pub fn moving_pml_dtns(system: &TensorSystem, pml: &PmlSpec, decomp: &LayerDecomposition) -> Result<Vec<InterfaceOperator>> {
    (2..=decomp.n_layers()).map(|j| moving_pml_dtn(system, pml, decomp, j)).collect()
}
