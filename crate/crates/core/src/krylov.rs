//! Right-preconditioned GMRES without restart.

use std::fmt::Write as _;

use crate::linalg::{dot, norm2, CsrMatrix};
use crate::{Error, Result, C64};

/// A linear map `y = A x` on complex vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec(x, y);
    }
}

/// Identity preconditioner.
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(x);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: crate::DEFAULT_TOLERANCE,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresReport {
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual estimate after each iteration, starting with 1.
    pub history: Vec<f64>,
    /// `‖b - A x‖ / ‖b‖` recomputed from the returned iterate.
    pub final_relres: f64,
    pub tolerance: f64,
}

impl GmresReport {
    pub fn history_csv(&self) -> String {
        let mut s = String::from("iter,relres\n");
        for (k, r) in self.history.iter().enumerate() {
            let _ = writeln!(s, "{k},{r:.16e}");
        }
        s
    }
}

/// Solve `A x = b` with right preconditioning `A M⁻¹ y = b`, `x = M⁻¹ y`,
/// starting from zero.
pub fn gmres(
    a: &dyn LinearOperator,
    m_inv: &dyn LinearOperator,
    b: &[C64],
    opts: GmresOptions,
) -> Result<(Vec<C64>, GmresReport)> {
    let n = a.dim();
    if b.len() != n || m_inv.dim() != n {
        return Err(Error::validation(format!(
            "dimension mismatch: operator {n}, preconditioner {}, right-hand side {}",
            m_inv.dim(),
            b.len()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::validation("GMRES tolerance must be positive"));
    }
    let zero = C64::new(0.0, 0.0);
    let beta = norm2(b);
    if beta == 0.0 {
        return Ok((
            vec![zero; n],
            GmresReport {
                iterations: 0,
                converged: true,
                history: vec![0.0],
                final_relres: 0.0,
                tolerance: opts.tol,
            },
        ));
    }

    let mut v: Vec<Vec<C64>> = vec![b.iter().map(|z| z / beta).collect()];
    let mut h: Vec<Vec<C64>> = Vec::new(); // column k has length k + 2
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<C64> = Vec::new();
    let mut g = vec![C64::new(beta, 0.0)];
    let mut history = vec![1.0];
    let mut z = vec![zero; n];
    let mut w = vec![zero; n];
    let mut converged = false;

    while h.len() < opts.max_iter {
        let k = h.len();
        m_inv.apply(&v[k], &mut z);
        a.apply(&z, &mut w);
        let mut col = vec![zero; k + 2];
        for _pass in 0..2 {
            for (j, vj) in v.iter().enumerate() {
                let c = dot(vj, &w);
                col[j] += c;
                for (wi, vi) in w.iter_mut().zip(vj) {
                    *wi -= c * vi;
                }
            }
        }
        let hn = norm2(&w);
        col[k + 1] = C64::new(hn, 0.0);

        for j in 0..k {
            let t = cs[j] * col[j] + sn[j] * col[j + 1];
            col[j + 1] = -sn[j].conj() * col[j] + cs[j] * col[j + 1];
            col[j] = t;
        }
        let (c, s, r) = givens(col[k], col[k + 1]);
        col[k] = r;
        col[k + 1] = zero;
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s.conj() * gk);
        h.push(col);

        let res = g[k + 1].norm() / beta;
        history.push(res);
        if res <= opts.tol {
            converged = true;
            break;
        }
        if hn <= 1e-300 {
            // lucky breakdown: the Krylov space is invariant
            converged = true;
            break;
        }
        v.push(w.iter().map(|x| x / hn).collect());
    }

    let m = h.len();
    let mut y = vec![zero; m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for j in i + 1..m {
            s -= h[j][i] * y[j];
        }
        y[i] = s / h[i][i];
    }
    let mut t = vec![zero; n];
    for (j, yj) in y.iter().enumerate() {
        for (ti, vi) in t.iter_mut().zip(&v[j]) {
            *ti += yj * vi;
        }
    }
    let mut x = vec![zero; n];
    m_inv.apply(&t, &mut x);

    a.apply(&x, &mut w);
    let r: Vec<C64> = b.iter().zip(&w).map(|(bi, wi)| bi - wi).collect();
    let final_relres = norm2(&r) / beta;
    Ok((
        x,
        GmresReport {
            iterations: m,
            converged,
            history,
            final_relres,
            tolerance: opts.tol,
        },
    ))
}

/// Rotation with real cosine annihilating `b` in `(a, b)`.
fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    if b.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0), a);
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm(), C64::new(b.norm(), 0.0));
    }
    let na = a.norm();
    let nrm = na.hypot(b.norm());
    let c = na / nrm;
    let phase = a / na;
    let s = phase * b.conj() / nrm;
    (c, s, phase * nrm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(n: usize, seed: u64) -> (CsrMatrix, Vec<C64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if i == j {
                    z += C64::new(n as f64, 0.5);
                }
                trip.push((i, j, z));
            }
        }
        let b = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        (CsrMatrix::from_triplets(n, n, trip), b)
    }

    #[test]
    fn matches_dense_solve() {
        let (a, b) = random_system(30, 3);
        let (x, rep) = gmres(&a, &Identity(30), &b, GmresOptions { tol: 1e-12, max_iter: 100 }).unwrap();
        assert!(rep.converged);
        let lu = a.to_dense().lu();
        let xd = lu.solve(&DVector::from_vec(b.clone())).unwrap();
        let err = x.iter().zip(xd.iter()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!(rep.final_relres < 1e-11);
    }

    #[test]
    fn history_is_monotone_and_reaches_tolerance() {
        let (a, b) = random_system(40, 9);
        let (_, rep) = gmres(&a, &Identity(40), &b, GmresOptions { tol: 1e-9, max_iter: 100 }).unwrap();
        assert_eq!(rep.history.len(), rep.iterations + 1);
        for w in rep.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert!(*rep.history.last().unwrap() <= 1e-9);
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let (a, b) = random_system(20, 5);
        let inv = a.to_dense().try_inverse().unwrap();
        let mut trip = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                trip.push((i, j, inv[(i, j)]));
            }
        }
        let p = CsrMatrix::from_triplets(20, 20, trip);
        let (_, rep) = gmres(&a, &p, &b, GmresOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
    }

    #[test]
    fn zero_rhs_and_mismatch() {
        let (a, _) = random_system(5, 1);
        let (x, rep) = gmres(&a, &Identity(5), &[C64::new(0.0, 0.0); 5], GmresOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(x.iter().all(|z| z.norm() == 0.0));
        assert!(gmres(&a, &Identity(4), &[C64::new(1.0, 0.0); 5], GmresOptions::default()).is_err());
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        // diagonal with spread spectrum needs n iterations
        let n = 50;
        let trip = (0..n).map(|i| (i, i, C64::new(1.0 + i as f64, 0.0))).collect();
        let a = CsrMatrix::from_triplets(n, n, trip);
        let b = vec![C64::new(1.0, 0.0); n];
        let (_, rep) = gmres(&a, &Identity(n), &b, GmresOptions { tol: 1e-14, max_iter: 5 }).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 5);
    }
}
