use nalgebra::DMatrix;

use crate::C64;

/// Compressed sparse row matrix with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds the matrix from triplets. Duplicates are summed in insertion
    /// order, so mirrored insertion sequences give bitwise symmetric sums.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            debug_assert!(i < nrows && j < ncols);
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, Vec::new())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(i, j, v)| (j, i, v)).collect(),
        )
    }

    /// `Σ_t kron(a_t, b_t)`; all `a_t` share one shape, all `b_t` another.
    /// Index `(i, k)` of the product maps to `i * b.nrows() + k`.
    pub fn kron_sum(terms: &[(&CsrMatrix, &CsrMatrix)]) -> Self {
        let (a0, b0) = terms[0];
        let (na, nb) = (a0.nrows, b0.nrows);
        let (ma, mb) = (a0.ncols, b0.ncols);
        let mut trip = Vec::new();
        for i in 0..na {
            for k in 0..nb {
                for (a, b) in terms {
                    for (j, av) in a.row(i) {
                        for (l, bv) in b.row(k) {
                            trip.push((i * nb + k, j * mb + l, av * bv));
                        }
                    }
                }
            }
        }
        Self::from_triplets(na * nb, ma * mb, trip)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// Entries `(rows[a], cols[b])` as a new matrix.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (b, &c) in cols.iter().enumerate() {
            col_map[c] = b;
        }
        let mut trip = Vec::new();
        for (a, &r) in rows.iter().enumerate() {
            for (j, v) in self.row(r) {
                let b = col_map[j];
                if b != usize::MAX {
                    trip.push((a, b, v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), trip)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).norm())
            .fold(0.0, f64::max)
    }

    /// Maximum `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    /// Coordinate text dump, one `row col re im` line per entry.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        for (i, j, v) in self.triplets() {
            out.push_str(&format!("{i} {j} {:e} {:e}\n", v.re, v.im));
        }
        out
    }
}
