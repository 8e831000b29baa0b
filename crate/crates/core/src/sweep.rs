//! Layer decomposition of the radial mesh and the double-sweep optimized
//! Schwarz preconditioner.
//!
//! Layers are numbered from the outer boundary inward. Layer `j` owns two
//! radial elements; its top trace `Γ_{j,j-1}` is the radial node it shares
//! with layer `j - 1` and its bottom trace is the top trace of layer `j + 1`.
//! Each layer's unknowns are its interior nodes plus its top trace, so the
//! layers partition the global unknowns.
//!
//! A subdomain problem is the restriction of the layer's own element
//! contributions, with the transmission matrix `P_j` added on the top trace
//! and a Dirichlet condition on the bottom trace. Interface data are
//! variational fluxes (residual functionals on the shared trace), which
//! makes one double sweep with exact Schur complements a direct solver.

use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dtn::InterfaceOperator;
use crate::fem::{Space1D, SpaceBc, TensorSystem};
use crate::krylov::LinearOperator;
use crate::linalg::{tensor_ordering, CsrMatrix, DenseLu, OrderedLu};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// 1-based, 1 at the outer boundary.
    pub index: usize,
    /// Radial element indices (counted from the inner boundary).
    pub elements: Range<usize>,
    /// Radial unknowns of the layer that are not on `Γ_{j,j-1}`, ascending.
    pub interior_rdofs: Vec<usize>,
    /// Radial unknown of `Γ_{j,j-1}`; `None` for layer 1.
    pub top_rdof: Option<usize>,
    /// Radial unknown of `Γ_{j,j+1}`; `None` for the last layer.
    pub bottom_rdof: Option<usize>,
}

impl Layer {
    /// Local unknowns in ascending radial order; the top trace comes last.
    pub fn local_rdofs(&self) -> Vec<usize> {
        let mut v = self.interior_rdofs.clone();
        v.extend(self.top_rdof);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerDecomposition {
    layers: Vec<Layer>,
    radii: Vec<f64>,
    n_rdofs: usize,
}

/// Splits a radial space with `2J` elements into `J` layers.
pub fn decompose(space_r: &Space1D, n_layers: usize) -> Result<LayerDecomposition> {
    let n = space_r.n_elements();
    if n_layers == 0 || n != 2 * n_layers {
        return Err(Error::validation(format!(
            "radial mesh has {n} elements, expected 2J = {}",
            2 * n_layers
        )));
    }
    if space_r.bc() == SpaceBc::Periodic {
        return Err(Error::validation("radial space cannot be periodic"));
    }
    let p = space_r.order();
    let mut layers = Vec::with_capacity(n_layers);
    let mut radii = Vec::with_capacity(n_layers);
    for j in 1..=n_layers {
        let e0 = n - 2 * j;
        let lo = e0 * p;
        let hi = (e0 + 2) * p;
        let top_rdof = if j > 1 { space_r.node_dof(hi) } else { None };
        let first = if j == n_layers { lo } else { lo + 1 };
        let last = if j > 1 { hi - 1 } else { hi };
        let interior_rdofs = (first..=last).filter_map(|k| space_r.node_dof(k)).collect();
        let bottom_rdof = if j < n_layers { space_r.node_dof(lo) } else { None };
        layers.push(Layer {
            index: j,
            elements: e0..e0 + 2,
            interior_rdofs,
            top_rdof,
            bottom_rdof,
        });
        radii.push(space_r.node_coordinate(hi));
    }
    Ok(LayerDecomposition {
        layers,
        radii,
        n_rdofs: space_r.dof_count(),
    })
}

impl LayerDecomposition {
    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Layer `j`, 1-based.
    pub fn layer(&self, j: usize) -> &Layer {
        &self.layers[j - 1]
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Radius of the top of layer `j`; for `j ≥ 2` this is the interface
    /// `Γ_{j,j-1}`.
    pub fn interface_radius(&self, j: usize) -> f64 {
        self.radii[j - 1]
    }

    pub fn n_radial_dofs(&self) -> usize {
        self.n_rdofs
    }

    /// Radial elements of the exterior region `∪_{i<j} Ω_i`.
    pub fn exterior_elements(&self, j: usize) -> Range<usize> {
        self.layers[j - 1].elements.end..2 * self.n_layers()
    }
}

/// Global unknowns `r * n_theta + k` for the given radial unknowns.
pub fn expand(rdofs: &[usize], n_theta: usize) -> Vec<usize> {
    rdofs
        .iter()
        .flat_map(|&r| (0..n_theta).map(move |k| r * n_theta + k))
        .collect()
}

fn matvec_sub(m: &CsrMatrix, x: &[C64], y: &mut [C64]) {
    for (i, yi) in y.iter_mut().enumerate() {
        for (j, v) in m.row(i) {
            *yi -= v * x[j];
        }
    }
}

/// Trace block elimination for a layer with a transmission condition.
#[derive(Debug, Clone)]
struct TraceSolve {
    a_it: CsrMatrix,
    a_ti: CsrMatrix,
    schur: DenseLu,
}

/// Factorized local problem of one layer.
#[derive(Debug, Clone)]
pub struct SubdomainSystem {
    pub layer: usize,
    /// Global index of each local unknown.
    pub global_dofs: Vec<usize>,
    /// Layer block of the global matrix on the local unknowns, without `P_j`.
    pub matrix: CsrMatrix,
    pub transmission: Option<DMatrix<C64>>,
    n_interior: usize,
    interior_lu: OrderedLu,
    trace: Option<TraceSolve>,
    /// `A^(j)[local, bottom]`.
    bottom_coupling: Option<CsrMatrix>,
    /// `A^(j)[bottom, local]`.
    flux_rows: Option<CsrMatrix>,
    /// `A^(j)[bottom, bottom]`.
    bottom_block: Option<CsrMatrix>,
}

impl SubdomainSystem {
    fn build(
        system: &TensorSystem,
        layer: &Layer,
        transmission: Option<&InterfaceOperator>,
    ) -> Result<Self> {
        let nt = system.n_theta();
        let periodic = system.space_theta.bc() == SpaceBc::Periodic;
        let context = format!("subdomain of layer {}", layer.index);
        let region = system.assemble_region(layer.elements.clone());
        let global_dofs = expand(&layer.local_rdofs(), nt);
        let matrix = region.submatrix(&global_dofs, &global_dofs);
        let n_interior = layer.interior_rdofs.len() * nt;
        let interior: Vec<usize> = (0..n_interior).collect();
        let a_ii = matrix.submatrix(&interior, &interior);
        let interior_lu = OrderedLu::factor(
            &a_ii,
            tensor_ordering(layer.interior_rdofs.len(), nt, periodic),
            &context,
        )?;

        let trace = match (layer.top_rdof, transmission) {
            (None, None) => None,
            (Some(_), Some(p)) => {
                if p.matrix.nrows() != nt || p.matrix.ncols() != nt {
                    return Err(Error::validation(format!(
                        "transmission operator of layer {} is {}x{}, trace has {nt} unknowns",
                        layer.index,
                        p.matrix.nrows(),
                        p.matrix.ncols()
                    )));
                }
                let tr: Vec<usize> = (n_interior..n_interior + nt).collect();
                let a_it = matrix.submatrix(&interior, &tr);
                let a_ti = matrix.submatrix(&tr, &interior);
                let a_tt = matrix.submatrix(&tr, &tr).to_dense();
                let columns: Vec<Vec<C64>> = (0..nt)
                    .into_par_iter()
                    .map(|c| {
                        let mut col = vec![C64::new(0.0, 0.0); n_interior];
                        for (i, v) in a_it.triplets().filter(|t| t.1 == c).map(|t| (t.0, t.2)) {
                            col[i] = v;
                        }
                        let z = interior_lu.solve(&col);
                        a_ti.mul_vec(&z)
                    })
                    .collect();
                let s = DMatrix::from_fn(nt, nt, |i, j| a_tt[(i, j)] + p.matrix[(i, j)] - columns[j][i]);
                Some(TraceSolve {
                    a_it,
                    a_ti,
                    schur: DenseLu::factor(s, &context)?,
                })
            }
            (Some(_), None) => {
                return Err(Error::validation(format!(
                    "layer {} needs a transmission operator",
                    layer.index
                )))
            }
            (None, Some(_)) => {
                return Err(Error::validation("layer 1 has no transmission interface"));
            }
        };

        let (bottom_coupling, flux_rows, bottom_block) = match layer.bottom_rdof {
            Some(b) => {
                let bottom = expand(&[b], nt);
                (
                    Some(region.submatrix(&global_dofs, &bottom)),
                    Some(region.submatrix(&bottom, &global_dofs)),
                    Some(region.submatrix(&bottom, &bottom)),
                )
            }
            None => (None, None, None),
        };

        Ok(Self {
            layer: layer.index,
            global_dofs,
            matrix,
            transmission: transmission.map(|p| p.matrix.clone()),
            n_interior,
            interior_lu,
            trace,
            bottom_coupling,
            flux_rows,
            bottom_block,
        })
    }

    pub fn dim(&self) -> usize {
        self.global_dofs.len()
    }

    /// Solves `(A_j + P_j) x = b` on the local unknowns.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let Some(t) = &self.trace else {
            return self.interior_lu.solve(b);
        };
        let ni = self.n_interior;
        let y = self.interior_lu.solve(&b[..ni]);
        let mut rt = b[ni..].to_vec();
        matvec_sub(&t.a_ti, &y, &mut rt);
        let xt = t.schur.solve(&rt);
        let mut bi = b[..ni].to_vec();
        matvec_sub(&t.a_it, &xt, &mut bi);
        let mut x = self.interior_lu.solve(&bi);
        x.extend(xt);
        x
    }

    /// `(A_j + P_j) x`.
    pub fn apply_local(&self, x: &[C64]) -> Vec<C64> {
        let mut y = self.matrix.mul_vec(x);
        if let Some(p) = &self.transmission {
            let ni = self.n_interior;
            let nt = p.nrows();
            for i in 0..nt {
                for j in 0..nt {
                    y[ni + i] += p[(i, j)] * x[ni + j];
                }
            }
        }
        y
    }

    fn trace_len(&self) -> usize {
        self.dim() - self.n_interior
    }
}

/// One forward and one backward sweep over the layers.
#[derive(Debug, Clone)]
pub struct DosmPreconditioner {
    decomp: LayerDecomposition,
    subdomains: Vec<SubdomainSystem>,
    n_theta: usize,
    dim: usize,
}

/// Factorizes all layer problems. `transmission[j - 2]` acts on `Γ_{j,j-1}`.
pub fn build_preconditioner(
    system: &TensorSystem,
    decomp: &LayerDecomposition,
    transmission: &[InterfaceOperator],
) -> Result<DosmPreconditioner> {
    let n_layers = decomp.n_layers();
    if transmission.len() + 1 != n_layers {
        return Err(Error::validation(format!(
            "{} transmission operators given for {n_layers} layers",
            transmission.len()
        )));
    }
    if decomp.n_radial_dofs() != system.space_r.dof_count() {
        return Err(Error::validation("decomposition does not match the radial space"));
    }
    let subdomains = decomp
        .layers()
        .par_iter()
        .map(|layer| {
            let p = if layer.index > 1 {
                Some(&transmission[layer.index - 2])
            } else {
                None
            };
            SubdomainSystem::build(system, layer, p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DosmPreconditioner {
        decomp: decomp.clone(),
        subdomains,
        n_theta: system.n_theta(),
        dim: system.dim(),
    })
}

impl DosmPreconditioner {
    pub fn subdomain(&self, j: usize) -> &SubdomainSystem {
        &self.subdomains[j - 1]
    }

    pub fn decomposition(&self) -> &LayerDecomposition {
        &self.decomp
    }

    fn gather(&self, j: usize, v: &[C64]) -> Vec<C64> {
        self.subdomains[j - 1].global_dofs.iter().map(|&g| v[g]).collect()
    }

    fn bottom_values(&self, j: usize, v: &[C64]) -> Vec<C64> {
        let b = self.decomp.layer(j).bottom_rdof.expect("layer has a bottom trace");
        v[b * self.n_theta..(b + 1) * self.n_theta].to_vec()
    }

    /// Preconditioner application: the double sweep with a zero previous
    /// iterate.
    pub fn apply_vec(&self, f: &[C64]) -> Vec<C64> {
        self.sweep(f, None)
    }

    /// One stationary double-sweep iteration starting from `u_prev`.
    pub fn stationary_step(&self, f: &[C64], u_prev: &[C64]) -> Vec<C64> {
        self.sweep(f, Some(u_prev))
    }

    fn sweep(&self, f: &[C64], u_prev: Option<&[C64]>) -> Vec<C64> {
        assert_eq!(f.len(), self.dim, "load has the wrong dimension");
        let n_layers = self.decomp.n_layers();
        let mut robin: Vec<Option<Vec<C64>>> = vec![None; n_layers + 1];

        for j in 1..n_layers {
            let sub = &self.subdomains[j - 1];
            let mut rhs = self.gather(j, f);
            add_trace(sub, &mut rhs, robin[j].as_deref());
            let prev_bottom = u_prev.map(|u| self.bottom_values(j, u));
            if let Some(pb) = &prev_bottom {
                matvec_sub(sub.bottom_coupling.as_ref().unwrap(), pb, &mut rhs);
            }
            let u = sub.solve(&rhs);
            let mut flux = vec![C64::new(0.0, 0.0); self.n_theta];
            matvec_sub(sub.flux_rows.as_ref().unwrap(), &u, &mut flux);
            if let Some(pb) = &prev_bottom {
                matvec_sub(sub.bottom_block.as_ref().unwrap(), pb, &mut flux);
                let next = self.subdomains[j].transmission.as_ref().unwrap();
                for (i, fi) in flux.iter_mut().enumerate() {
                    for (k, v) in pb.iter().enumerate() {
                        *fi += next[(i, k)] * v;
                    }
                }
            }
            robin[j + 1] = Some(flux);
        }

        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        let mut below: Option<Vec<C64>> = None;
        for j in (1..=n_layers).rev() {
            let sub = &self.subdomains[j - 1];
            let mut rhs = self.gather(j, f);
            add_trace(sub, &mut rhs, robin[j].as_deref());
            if let Some(bv) = &below {
                matvec_sub(sub.bottom_coupling.as_ref().unwrap(), bv, &mut rhs);
            }
            let u = sub.solve(&rhs);
            for (&g, &v) in sub.global_dofs.iter().zip(&u) {
                out[g] = v;
            }
            below = (j > 1).then(|| u[u.len() - self.n_theta..].to_vec());
        }
        out
    }
}

fn add_trace(sub: &SubdomainSystem, rhs: &mut [C64], g: Option<&[C64]>) {
    if let Some(g) = g {
        let off = rhs.len() - sub.trace_len();
        for (r, v) in rhs[off..].iter_mut().zip(g) {
            *r += v;
        }
    }
}

impl LinearOperator for DosmPreconditioner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(&self.apply_vec(x));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh1D;

    fn space(n: usize, p: usize, bc: SpaceBc) -> Space1D {
        Space1D::new(Mesh1D::uniform(0.0, 1.0, n).unwrap(), p, bc).unwrap()
    }

    #[test]
    fn three_layers_partition() {
        let s = space(6, 3, SpaceBc::DirichletRight);
        let d = decompose(&s, 3).unwrap();
        assert_eq!(d.layer(1).elements, 4..6);
        assert_eq!(d.layer(3).elements, 0..2);
        assert!((d.interface_radius(2) - 4.0 / 6.0).abs() < 1e-15);
        assert!((d.interface_radius(3) - 2.0 / 6.0).abs() < 1e-15);
        let mut all: Vec<usize> = d.layers().iter().flat_map(|l| l.local_rdofs()).collect();
        all.sort();
        assert_eq!(all, (0..s.dof_count()).collect::<Vec<_>>());
        for j in 1..3 {
            assert_eq!(d.layer(j).bottom_rdof, d.layer(j + 1).top_rdof);
            assert!(d.layer(j + 1).top_rdof.is_some());
        }
        assert_eq!(d.layer(1).top_rdof, None);
        assert_eq!(d.layer(3).bottom_rdof, None);
        assert_eq!(d.exterior_elements(3), 2..6);
    }

    #[test]
    fn single_layer_and_wrong_count() {
        let s = space(2, 2, SpaceBc::None);
        let d = decompose(&s, 1).unwrap();
        assert_eq!(d.layer(1).local_rdofs().len(), s.dof_count());
        assert!(decompose(&s, 2).is_err());
        assert!(decompose(&space(5, 2, SpaceBc::None), 2).is_err());
    }

    #[test]
    fn expand_is_theta_fastest() {
        assert_eq!(expand(&[2, 5], 3), vec![6, 7, 8, 15, 16, 17]);
    }
}
