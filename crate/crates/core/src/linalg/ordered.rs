use nalgebra::{DMatrix, DVector, LU};

use super::{BandedLu, CsrMatrix};
use crate::{Error, Result, C64};

/// Band-reducing order for a tensor block with unknown `r * n_theta + k`:
/// the radial index runs fastest. A periodic θ ring is visited zig-zag
/// (`0, n-1, 1, n-2, ...`) so wraparound couplings stay near the diagonal.
///
/// Returns `perm` with `perm[new] = old`.
pub fn tensor_ordering(n_r: usize, n_theta: usize, periodic: bool) -> Vec<usize> {
    let thetas: Vec<usize> = if periodic {
        let (mut lo, mut hi) = (0, n_theta);
        let mut out = Vec::with_capacity(n_theta);
        while lo < hi {
            out.push(lo);
            lo += 1;
            if lo < hi {
                hi -= 1;
                out.push(hi);
            }
        }
        out
    } else {
        (0..n_theta).collect()
    };
    thetas
        .into_iter()
        .flat_map(|k| (0..n_r).map(move |r| r * n_theta + k))
        .collect()
}

/// Banded LU of a symmetrically permuted matrix.
#[derive(Debug, Clone)]
pub struct OrderedLu {
    perm: Vec<usize>,
    lu: BandedLu,
}

impl OrderedLu {
    pub fn factor(a: &CsrMatrix, perm: Vec<usize>, context: &str) -> Result<Self> {
        if perm.len() != a.nrows() {
            return Err(Error::validation("ordering length does not match the matrix"));
        }
        let lu = BandedLu::factor(&a.submatrix(&perm, &perm), context)?;
        Ok(Self { perm, lu })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut y: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        self.lu.solve_in_place(&mut y);
        let mut x = vec![C64::new(0.0, 0.0); b.len()];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Dense LU with partial pivoting and a relative singularity check.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl DenseLu {
    pub fn factor(a: DMatrix<C64>, context: &str) -> Result<Self> {
        let scale = super::max_abs(&a);
        let lu = a.lu();
        let u = lu.u();
        let (pivot, smallest) = u
            .diagonal()
            .iter()
            .map(|z| z.norm())
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        if !(smallest > 1e-14 * scale) {
            return Err(Error::Singular {
                context: context.to_string(),
                pivot,
            });
        }
        Ok(Self { lu })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let x = self
            .lu
            .solve(&DVector::from_column_slice(b))
            .expect("nonsingular by construction");
        x.as_slice().to_vec()
    }

    pub fn solve_matrix(&self, b: &DMatrix<C64>) -> DMatrix<C64> {
        self.lu.solve(b).expect("nonsingular by construction")
    }
}
