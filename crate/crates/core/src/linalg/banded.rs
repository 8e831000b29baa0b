use super::CsrMatrix;
use crate::{Error, Result, C64};

/// LU factorization with partial pivoting of a square banded matrix
/// (`kl` sub- and super-diagonals). Pivoting fills the upper factor up to
/// `2 * kl` super-diagonals.
///
/// Row `i` is stored as a window over columns `i - kl ..= i + 2 * kl`.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    upper: Vec<C64>,
    lower: Vec<C64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Factorizes `a`; `context` names the matrix in singularity errors.
    pub fn factor(a: &CsrMatrix, context: &str) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::validation("banded LU needs a square matrix"));
        }
        let kl = a.bandwidth();
        let width = 3 * kl + 1;
        let mut upper = vec![C64::new(0.0, 0.0); n * width];
        for (i, j, v) in a.triplets() {
            upper[i * width + j + kl - i] += v;
        }
        let scale = a.max_abs();
        let tiny = scale * 1e-14;
        let mut lower = vec![C64::new(0.0, 0.0); n * kl.max(1)];
        let mut pivots = vec![0; n];

        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let cend = (k + 2 * kl).min(n - 1);
            let (mut p, mut best) = (k, -1.0);
            for i in k..=last {
                let v = upper[i * width + k + kl - i].norm_sqr();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best.sqrt() > tiny) {
                return Err(Error::Singular {
                    context: context.to_string(),
                    pivot: k,
                });
            }
            pivots[k] = p;
            if p != k {
                for c in k..=cend {
                    upper.swap(k * width + c + kl - k, p * width + c + kl - p);
                }
            }
            let (head, tail) = upper.split_at_mut((k + 1) * width);
            let row_k = &head[k * width..];
            let pivot = row_k[kl];
            let len = cend - k;
            let src = &row_k[kl + 1..kl + 1 + len];
            for i in k + 1..=last {
                let row_i = &mut tail[(i - k - 1) * width..(i - k) * width];
                let off = k + kl - i;
                let m = row_i[off] / pivot;
                lower[k * kl + (i - k - 1)] = m;
                row_i[off] = C64::new(0.0, 0.0);
                if m != C64::new(0.0, 0.0) {
                    for (dst, s) in row_i[off + 1..off + 1 + len].iter_mut().zip(src) {
                        *dst -= m * s;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            width,
            upper,
            lower,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, w) = (self.n, self.kl, self.width);
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            if bk != C64::new(0.0, 0.0) {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.lower[k * kl + (i - k - 1)] * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let row = &self.upper[i * w..(i + 1) * w];
            let cend = (i + 2 * kl).min(n - 1);
            let mut s = b[i];
            for c in i + 1..=cend {
                s -= row[c + kl - i] * b[c];
            }
            b[i] = s / row[kl];
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, bw: usize, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                t.push((i, j, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            }
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn matches_dense_solve() {
        for (n, bw) in [(1, 0), (5, 1), (40, 3), (60, 7)] {
            let a = random_banded(n, bw, n as u64);
            let lu = BandedLu::factor(&a, "test").unwrap();
            let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
            let x = lu.solve(&b);
            let xd = a.to_dense().lu().solve(&DVector::from_vec(b.clone())).unwrap();
            for i in 0..n {
                assert!((x[i] - xd[i]).norm() < 1e-9 * (1.0 + xd[i].norm()));
            }
        }
    }

    #[test]
    fn needs_pivoting() {
        // zero leading pivot
        let a = CsrMatrix::from_triplets(
            2,
            2,
            vec![
                (0, 1, C64::new(1.0, 0.0)),
                (1, 0, C64::new(1.0, 0.0)),
                (1, 1, C64::new(1.0, 0.0)),
            ],
        );
        let x = BandedLu::factor(&a, "swap").unwrap().solve(&[C64::new(2.0, 0.0), C64::new(5.0, 0.0)]);
        assert!((x[0] - 3.0).norm() < 1e-15 && (x[1] - 2.0).norm() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let a = CsrMatrix::from_triplets(
            2,
            2,
            vec![
                (0, 0, C64::new(1.0, 0.0)),
                (0, 1, C64::new(1.0, 0.0)),
                (1, 0, C64::new(1.0, 0.0)),
                (1, 1, C64::new(1.0, 0.0)),
            ],
        );
        let err = BandedLu::factor(&a, "layer 2").unwrap_err();
        assert!(err.to_string().contains("layer 2"));
    }
}
