//! Sparse storage, banded LU with partial pivoting and dense helpers.

mod banded;
mod ordered;
mod sparse;

pub use banded::BandedLu;
pub use ordered::{tensor_ordering, DenseLu, OrderedLu};
pub use sparse::CsrMatrix;

use nalgebra::DMatrix;

use crate::C64;

/// Euclidean norm of a complex vector.
pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `Σ conj(x_i) y_i`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(m + mᵀ) / 2`, exactly symmetric in floating point.
pub fn symmetrize(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) * 0.5)
}

/// Largest entrywise asymmetry `max |m_ij - m_ji|`.
pub fn asymmetry(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    worst
}
