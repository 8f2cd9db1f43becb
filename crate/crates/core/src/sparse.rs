//! Minimal complex CSR matrix used for many-body operators and
//! superoperators.
//!
//! Only the operations the rest of the crate needs are implemented:
//! construction from triplets, Kronecker products, sparse×sparse and
//! sparse×dense products, adjoints and scaled sums. Column indices are
//! kept sorted within each row.

use ndarray::{Array2, ArrayView2};

use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![C64::new(1.0, 0.0); n],
        }
    }

    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut trips: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        trips.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(trips.len());
        let mut vals: Vec<C64> = Vec::with_capacity(trips.len());

        let mut i = 0;
        while i < trips.len() {
            let (r, c, mut v) = trips[i];
            debug_assert!(r < nrows && c < ncols);
            let mut j = i + 1;
            while j < trips.len() && trips[j].0 == r && trips[j].1 == c {
                v += trips[j].2;
                j += 1;
            }
            if v != C64::new(0.0, 0.0) {
                col_idx.push(c);
                vals.push(v);
                row_ptr[r + 1] = col_idx.len();
            }
            i = j;
        }
        // fill row_ptr entries for rows without stored values
        for i in 1..=nrows {
            if row_ptr[i] < row_ptr[i - 1] {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        Self { nrows, ncols, row_ptr, col_idx, vals }
    }

    pub fn from_dense(a: ArrayView2<C64>) -> Self {
        let (nrows, ncols) = a.dim();
        let mut trips = Vec::new();
        for r in 0..nrows {
            for c in 0..ncols {
                if a[[r, c]] != C64::new(0.0, 0.0) {
                    trips.push((r, c, a[[r, c]]));
                }
            }
        }
        Self::from_triplets(nrows, ncols, trips)
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[[r, self.col_idx[k]]] += self.vals[k];
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// (column indices, values) of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn scale(&mut self, s: C64) {
        for v in &mut self.vals {
            *v *= s;
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.iter().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(r, c, v)| (c, r, v)))
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v = v.conj();
        }
        out
    }

    /// self + coeff * other.
    pub fn add_scaled(&self, other: &Self, coeff: C64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.iter()
                .chain(other.iter().map(|(r, c, v)| (r, c, coeff * v))),
        )
    }

    /// Sparse × sparse product.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let n = other.ncols;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut touched: Vec<usize> = Vec::new();

        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            let (cols_a, vals_a) = self.row(r);
            for (&q, &va) in cols_a.iter().zip(vals_a) {
                let (cols_b, vals_b) = other.row(q);
                for (&c, &vb) in cols_b.iter().zip(vals_b) {
                    if acc[c] == C64::new(0.0, 0.0) {
                        touched.push(c);
                    }
                    acc[c] += va * vb;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != C64::new(0.0, 0.0) {
                    col_idx.push(c);
                    vals.push(acc[c]);
                }
                acc[c] = C64::new(0.0, 0.0);
            }
            row_ptr[r + 1] = col_idx.len();
        }
        Self { nrows: self.nrows, ncols: n, row_ptr, col_idx, vals }
    }

    /// y = A·x.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = C64::new(0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
    }

    /// out += coeff · A · B, with B (ncols × k) and out (nrows × k) dense
    /// row-major.
    pub fn mul_dense_acc(&self, coeff: C64, b: &[C64], k: usize, out: &mut [C64]) {
        debug_assert_eq!(b.len(), self.ncols * k);
        debug_assert_eq!(out.len(), self.nrows * k);
        for r in 0..self.nrows {
            let orow = &mut out[r * k..(r + 1) * k];
            let (cols, vals) = (&self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]],
                                &self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]);
            for (&c, &v) in cols.iter().zip(vals) {
                let cv = coeff * v;
                let brow = &b[c * k..(c + 1) * k];
                for (o, &x) in orow.iter_mut().zip(brow) {
                    *o += cv * x;
                }
            }
        }
    }

    /// out += coeff · B · A, with B (k × nrows) and out (k × ncols) dense
    /// row-major.
    pub fn rmul_dense_acc(&self, coeff: C64, b: &[C64], k: usize, out: &mut [C64]) {
        debug_assert_eq!(b.len(), k * self.nrows);
        debug_assert_eq!(out.len(), k * self.ncols);
        for r in 0..k {
            let brow = &b[r * self.nrows..(r + 1) * self.nrows];
            let orow = &mut out[r * self.ncols..(r + 1) * self.ncols];
            for q in 0..self.nrows {
                let (lo, hi) = (self.row_ptr[q], self.row_ptr[q + 1]);
                if lo == hi {
                    continue;
                }
                let cb = coeff * brow[q];
                for kk in lo..hi {
                    orow[self.col_idx[kk]] += cb * self.vals[kk];
                }
            }
        }
    }

    /// Largest absolute row sum (induced ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).1.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// max |A − A†| over all entries.
    pub fn herm_residual(&self) -> f64 {
        let dag = self.dagger();
        self.add_scaled(&dag, C64::new(-1.0, 0.0))
            .vals
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CsrMatrix, b: &CsrMatrix) -> CsrMatrix {
    let nrows = a.nrows * b.nrows;
    let ncols = a.ncols * b.ncols;
    let mut row_ptr = Vec::with_capacity(nrows + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::with_capacity(a.nnz() * b.nnz());
    let mut vals = Vec::with_capacity(a.nnz() * b.nnz());
    for ra in 0..a.nrows {
        let (cols_a, vals_a) = a.row(ra);
        for rb in 0..b.nrows {
            let (cols_b, vals_b) = b.row(rb);
            for (&ca, &va) in cols_a.iter().zip(vals_a) {
                for (&cb, &vb) in cols_b.iter().zip(vals_b) {
                    col_idx.push(ca * b.ncols + cb);
                    vals.push(va * vb);
                }
            }
            row_ptr.push(col_idx.len());
        }
    }
    CsrMatrix { nrows, ncols, row_ptr, col_idx, vals }
}
