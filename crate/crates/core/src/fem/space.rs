use super::quadrature::{gauss_legendre, gauss_lobatto_nodes, LagrangeBasis};
use crate::{Error, Result};

/// Strictly increasing element vertices on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::validation("mesh needs at least one element"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("mesh nodes must be strictly increasing"));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("mesh needs at least one element"));
        }
        let nodes = (0..=n)
            .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
            .collect();
        Self::new(nodes)
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn vertices(&self) -> &[f64] {
        &self.nodes
    }

    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Element containing `x` (the left one at interior vertices).
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.start() || x > self.end() {
            return None;
        }
        let k = self.nodes.partition_point(|&v| v < x);
        Some(k.saturating_sub(1).min(self.n_elements() - 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceBc {
    None,
    DirichletLeft,
    DirichletRight,
    DirichletBoth,
    Periodic,
}

/// Reference element data on `[-1, 1]`: GLL nodal basis and the Gauss rule
/// used for assembly, with basis values and derivatives tabulated at the
/// quadrature points.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub basis: LagrangeBasis,
    pub quad_nodes: Vec<f64>,
    pub quad_weights: Vec<f64>,
    /// `values[q][a]`
    pub values: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
}

impl ReferenceElement {
    pub fn new(order: usize) -> Self {
        let basis = LagrangeBasis::new(gauss_lobatto_nodes(order));
        let rule = gauss_legendre(order + 3);
        let values = rule.nodes.iter().map(|&x| basis.values(x)).collect();
        let derivatives = rule.nodes.iter().map(|&x| basis.derivatives(x)).collect();
        Self {
            basis,
            quad_nodes: rule.nodes,
            quad_weights: rule.weights,
            values,
            derivatives,
        }
    }
}

/// H¹-conforming nodal space of degree `order` on a 1D mesh.
///
/// Nodes are numbered `e * order + a` (element `e`, local node `a`), so
/// element vertices are nodes `e * order`. Constrained nodes carry no
/// degree of freedom; with periodic conditions the last node is identified
/// with the first.
#[derive(Debug, Clone)]
pub struct Space1D {
    mesh: Mesh1D,
    order: usize,
    bc: SpaceBc,
    reference: ReferenceElement,
    node_dof: Vec<Option<usize>>,
    dof_node: Vec<usize>,
}

impl Space1D {
    pub fn new(mesh: Mesh1D, order: usize, bc: SpaceBc) -> Result<Self> {
        if order == 0 {
            return Err(Error::validation("polynomial order must be at least 1"));
        }
        let n_nodes = mesh.n_elements() * order + 1;
        let mut node_dof = vec![None; n_nodes];
        let mut dof_node = Vec::with_capacity(n_nodes);
        let skip_first = matches!(bc, SpaceBc::DirichletLeft | SpaceBc::DirichletBoth);
        let skip_last = matches!(
            bc,
            SpaceBc::DirichletRight | SpaceBc::DirichletBoth | SpaceBc::Periodic
        );
        for (k, slot) in node_dof.iter_mut().enumerate() {
            if (k == 0 && skip_first) || (k == n_nodes - 1 && skip_last) {
                continue;
            }
            *slot = Some(dof_node.len());
            dof_node.push(k);
        }
        if bc == SpaceBc::Periodic {
            if n_nodes < 3 {
                return Err(Error::validation("periodic space needs at least two nodes"));
            }
            node_dof[n_nodes - 1] = node_dof[0];
        }
        if dof_node.is_empty() {
            return Err(Error::validation("space has no degrees of freedom"));
        }
        Ok(Self {
            mesh,
            order,
            bc,
            reference: ReferenceElement::new(order),
            node_dof,
            dof_node,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bc(&self) -> SpaceBc {
        self.bc
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn n_nodes(&self) -> usize {
        self.node_dof.len()
    }

    pub fn dof_count(&self) -> usize {
        self.dof_node.len()
    }

    pub fn node_dof(&self, node: usize) -> Option<usize> {
        self.node_dof[node]
    }

    /// Representative node of a degree of freedom.
    pub fn dof_node(&self, dof: usize) -> usize {
        self.dof_node[dof]
    }

    pub fn element_dofs(&self, e: usize) -> impl Iterator<Item = Option<usize>> + '_ {
        let first = e * self.order;
        self.node_dof[first..=first + self.order].iter().copied()
    }

    pub fn node_coordinate(&self, node: usize) -> f64 {
        let e = (node / self.order).min(self.n_elements() - 1);
        let a = node - e * self.order;
        let (x0, x1) = self.mesh.element(e);
        if a == 0 {
            x0
        } else if a == self.order {
            x1
        } else {
            x0 + 0.5 * (self.reference.basis.nodes[a] + 1.0) * (x1 - x0)
        }
    }

    /// Elements whose closure contains `node`.
    pub fn node_support(&self, node: usize) -> Vec<usize> {
        let p = self.order;
        let n = self.n_elements();
        let mut out = Vec::with_capacity(2);
        if node % p == 0 {
            let v = node / p;
            if v > 0 {
                out.push(v - 1);
            }
            if v < n {
                out.push(v);
            }
            if self.bc == SpaceBc::Periodic && (v == 0 || v == n) {
                out = vec![0, n - 1];
                out.dedup();
            }
        } else {
            out.push(node / p);
        }
        out
    }

    /// Nonzero basis functions at `x`: `(dof, value, derivative)`.
    pub fn eval_at(&self, x: f64) -> Result<Vec<(usize, f64, f64)>> {
        let e = self.mesh.locate(x).ok_or(Error::Domain {
            value: x,
            lo: self.mesh.start(),
            hi: self.mesh.end(),
        })?;
        let (x0, x1) = self.mesh.element(e);
        let xi = 2.0 * (x - x0) / (x1 - x0) - 1.0;
        let vals = self.reference.basis.values(xi);
        let ders = self.reference.basis.derivatives(xi);
        let jac = 2.0 / (x1 - x0);
        let mut out: Vec<(usize, f64, f64)> = Vec::new();
        for (a, dof) in self.element_dofs(e).enumerate() {
            if let Some(d) = dof {
                match out.iter_mut().find(|(k, _, _)| *k == d) {
                    Some(entry) => {
                        entry.1 += vals[a];
                        entry.2 += ders[a] * jac;
                    }
                    None => out.push((d, vals[a], ders[a] * jac)),
                }
            }
        }
        Ok(out)
    }

    /// Finite element function with coefficients `u` evaluated at `x`.
    pub fn interpolate<T>(&self, u: &[T], x: f64) -> Result<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        Ok(self.eval_at(x)?.into_iter().map(|(d, v, _)| u[d] * v).sum())
    }
}
