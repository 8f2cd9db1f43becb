//! Liouville-space machinery: density-matrix vectorization and the GKSL
//! generator L̂ = L̂^H + L̂^D in dense, sparse and matrix-free forms.
//!
//! Vectorization is column-stacking throughout: vec(ρ)[c·n + r] = ρ[r, c],
//! so vec(AρB) = (Bᵀ ⊗ A)·vec(ρ) and
//!
//!   L̂ = −i(I⊗H − Hᵀ⊗I)
//!      + Σ_k [ conj(L_k)⊗L_k − ½ I⊗(L_k†L_k) − ½ (L_k†L_k)ᵀ⊗I ].
//!
//! The dense representation is gated to N ≤ 4 sites; larger systems use
//! the sparse matrix or the matrix-free closure over (H, {L_k}).

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::sparse::{kron, CsrMatrix};
use crate::{C64, Error, Result};

/// Largest site count for which dense 4^N × 4^N storage is allowed.
pub const DENSE_GATE_SITES: usize = 4;

/// Validation tolerances for physical states.
pub const TRACE_TOL: f64 = 1e-10;
pub const HERM_TOL: f64 = 1e-10;
pub const EIG_FLOOR: f64 = -1e-8;

/// A 2^N × 2^N density matrix (Hermitian, unit trace, PSD within
/// tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: Array2<C64>,
}

impl DensityMatrix {
    /// Validating constructor; use for externally supplied matrices.
    pub fn new(data: Array2<C64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(Error::NotSquare { rows: r, cols: c });
        }
        let rho = Self { data };
        let trace_err = (rho.trace() - C64::new(1.0, 0.0)).norm();
        if trace_err > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace deviates by {trace_err:.3e}")));
        }
        let herm = rho.herm_residual();
        if herm > HERM_TOL {
            return Err(Error::InvalidState(format!("Hermiticity residual {herm:.3e}")));
        }
        let min_eig = rho.min_eigenvalue()?;
        if min_eig < EIG_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(rho)
    }

    /// Wraps a matrix that is trusted to be a valid state.
    pub fn from_matrix_unchecked(data: Array2<C64>) -> Self {
        Self { data }
    }

    /// Pure-state projector |ψ⟩⟨ψ| (the amplitude vector is normalized).
    pub fn from_pure(psi: &Array1<C64>) -> Self {
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let n = psi.len();
        let mut data = Array2::zeros((n, n));
        for r in 0..n {
            for c in 0..n {
                data[[r, c]] = psi[r] * psi[c].conj() / (norm * norm);
            }
        }
        Self { data }
    }

    /// The maximally mixed state I/dim.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mut data = Array2::zeros((dim, dim));
        for k in 0..dim {
            data[[k, k]] = C64::new(1.0 / dim as f64, 0.0);
        }
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    pub fn purity(&self) -> f64 {
        self.data
            .iter()
            .zip(self.data.t().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn herm_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                let d = (self.data[[r, c]] - self.data[[c, r]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (w, _) = self.data.eigh(UPLO::Lower)?;
        Ok(w.iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ρ ← (ρ + ρ†)/2.
    pub fn hermitize(&mut self) {
        let n = self.dim();
        for r in 0..n {
            for c in (r + 1)..n {
                let avg = 0.5 * (self.data[[r, c]] + self.data[[c, r]].conj());
                self.data[[r, c]] = avg;
                self.data[[c, r]] = avg.conj();
            }
            let d = self.data[[r, r]];
            self.data[[r, r]] = C64::new(d.re, 0.0);
        }
    }

    /// Rescales to unit trace.
    pub fn renormalize_trace(&mut self) {
        let tr = self.trace();
        if tr.norm() > 0.0 {
            let inv = C64::new(1.0, 0.0) / tr;
            self.data.mapv_inplace(|v| v * inv);
        }
    }
}

/// Column-stacking vectorization.
pub fn vectorize(m: &Array2<C64>) -> Result<Array1<C64>> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    let mut out = Array1::zeros(n * n);
    for c in 0..n {
        for r in 0..n {
            out[c * n + r] = m[[r, c]];
        }
    }
    Ok(out)
}

/// Inverse of [`vectorize`]; the length must be a perfect square.
pub fn devectorize(v: &[C64]) -> Result<Array2<C64>> {
    let len = v.len();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(Error::DimensionMismatch { expected: n * n, got: len });
    }
    let mut out = Array2::zeros((n, n));
    for c in 0..n {
        for r in 0..n {
            out[[r, c]] = v[c * n + r];
        }
    }
    Ok(out)
}

/// Representation choice for the assembled generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperRepr {
    Dense,
    Sparse,
    MatrixFree,
}

struct JumpTerm {
    l: CsrMatrix,
    l_dag: CsrMatrix,
    /// L†L, precomputed.
    ldl: CsrMatrix,
}

/// Matrix-free GKSL right-hand side: closure over (H, {L_k}) applying
/// dρ/dt = −i[H,ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}) to row-major
/// matrix buffers. Jump operators that are identically zero are skipped.
pub struct GkslOp {
    dim: usize,
    h: CsrMatrix,
    jumps: Vec<JumpTerm>,
}

impl GkslOp {
    fn new(h: CsrMatrix, jump_ops: &[CsrMatrix]) -> Self {
        let dim = h.nrows();
        let jumps = jump_ops
            .iter()
            .filter(|l| l.nnz() > 0)
            .map(|l| {
                let l_dag = l.dagger();
                let ldl = l_dag.matmul(l);
                JumpTerm { l: l.clone(), l_dag, ldl }
            })
            .collect();
        Self { dim, h, jumps }
    }

    /// out = GKSL(rho), both row-major dim×dim buffers; `tmp` is a
    /// caller-provided dim² scratch buffer.
    pub fn apply_matrix_into(&self, rho: &[C64], out: &mut [C64], tmp: &mut [C64]) {
        let n = self.dim;
        debug_assert_eq!(rho.len(), n * n);
        debug_assert_eq!(out.len(), n * n);
        debug_assert_eq!(tmp.len(), n * n);
        out.fill(C64::new(0.0, 0.0));
        let minus_i = C64::new(0.0, -1.0);
        let plus_i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let minus_half = C64::new(-0.5, 0.0);
        self.h.mul_dense_acc(minus_i, rho, n, out);
        self.h.rmul_dense_acc(plus_i, rho, n, out);
        for jt in &self.jumps {
            tmp.fill(C64::new(0.0, 0.0));
            jt.l.mul_dense_acc(one, rho, n, tmp);
            jt.l_dag.rmul_dense_acc(one, tmp, n, out);
            jt.ldl.mul_dense_acc(minus_half, rho, n, out);
            jt.ldl.rmul_dense_acc(minus_half, rho, n, out);
        }
    }
}

enum SuperData {
    Dense(Array2<C64>),
    Sparse(CsrMatrix),
    Free(GkslOp),
}

/// The Liouville-space generator acting on vectorized density matrices.
pub struct Superoperator {
    dim_h: usize,
    data: SuperData,
}

/// Scratch buffers for matrix-shaped application.
pub struct LiouvilleWs {
    tmp: Vec<C64>,
    vec_in: Vec<C64>,
    vec_out: Vec<C64>,
}

impl LiouvilleWs {
    pub fn new(dim_h: usize) -> Self {
        let n2 = dim_h * dim_h;
        Self {
            tmp: vec![C64::new(0.0, 0.0); n2],
            vec_in: vec![C64::new(0.0, 0.0); n2],
            vec_out: vec![C64::new(0.0, 0.0); n2],
        }
    }
}

impl Superoperator {
    /// Assembles the generator from a Hamiltonian and jump operators.
    pub fn build(h: &CsrMatrix, jumps: &[CsrMatrix], repr: SuperRepr) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::NotSquare { rows: h.nrows(), cols: h.ncols() });
        }
        let dim_h = h.nrows();
        for l in jumps {
            if l.nrows() != dim_h || l.ncols() != dim_h {
                return Err(Error::DimensionMismatch { expected: dim_h, got: l.nrows() });
            }
        }
        let data = match repr {
            SuperRepr::Dense => {
                check_dense_gate(dim_h)?;
                SuperData::Dense(assemble_sparse(h, jumps).to_dense())
            }
            SuperRepr::Sparse => SuperData::Sparse(assemble_sparse(h, jumps)),
            SuperRepr::MatrixFree => SuperData::Free(GkslOp::new(h.clone(), jumps)),
        };
        Ok(Self { dim_h, data })
    }

    /// Hilbert-space dimension 2^N.
    pub fn dim_hilbert(&self) -> usize {
        self.dim_h
    }

    /// Liouville-space dimension 4^N.
    pub fn dim(&self) -> usize {
        self.dim_h * self.dim_h
    }

    pub fn repr(&self) -> SuperRepr {
        match &self.data {
            SuperData::Dense(_) => SuperRepr::Dense,
            SuperData::Sparse(_) => SuperRepr::Sparse,
            SuperData::Free(_) => SuperRepr::MatrixFree,
        }
    }

    pub fn nnz(&self) -> Option<usize> {
        match &self.data {
            SuperData::Sparse(m) => Some(m.nnz()),
            _ => None,
        }
    }

    /// Applies L̂ to a column-stacked vector.
    pub fn apply_vec_into(&self, v: &[C64], out: &mut [C64]) -> Result<()> {
        let n2 = self.dim();
        if v.len() != n2 || out.len() != n2 {
            return Err(Error::DimensionMismatch { expected: n2, got: v.len() });
        }
        match &self.data {
            SuperData::Dense(m) => {
                for r in 0..n2 {
                    let mut acc = C64::new(0.0, 0.0);
                    let row = m.row(r);
                    for (x, y) in row.iter().zip(v) {
                        acc += x * y;
                    }
                    out[r] = acc;
                }
            }
            SuperData::Sparse(m) => m.matvec_into(v, out),
            SuperData::Free(op) => {
                let n = self.dim_h;
                // column-stacked vec → row-major matrix and back
                let mut rho = vec![C64::new(0.0, 0.0); n2];
                let mut deriv = vec![C64::new(0.0, 0.0); n2];
                let mut tmp = vec![C64::new(0.0, 0.0); n2];
                transpose_into(v, n, &mut rho);
                op.apply_matrix_into(&rho, &mut deriv, &mut tmp);
                transpose_into(&deriv, n, out);
            }
        }
        Ok(())
    }

    /// Applies L̂ to a row-major matrix buffer (hot path for integrators).
    pub fn apply_matrix_into(&self, rho: &[C64], out: &mut [C64], ws: &mut LiouvilleWs) {
        let n = self.dim_h;
        debug_assert_eq!(rho.len(), n * n);
        match &self.data {
            SuperData::Free(op) => op.apply_matrix_into(rho, out, &mut ws.tmp),
            SuperData::Sparse(m) => {
                transpose_into(rho, n, &mut ws.vec_in);
                m.matvec_into(&ws.vec_in, &mut ws.vec_out);
                transpose_into(&ws.vec_out, n, out);
            }
            SuperData::Dense(m) => {
                transpose_into(rho, n, &mut ws.vec_in);
                for r in 0..n * n {
                    let mut acc = C64::new(0.0, 0.0);
                    for (x, y) in m.row(r).iter().zip(ws.vec_in.iter()) {
                        acc += x * y;
                    }
                    ws.vec_out[r] = acc;
                }
                transpose_into(&ws.vec_out, n, out);
            }
        }
    }

    /// Dense matrix of the generator (gated to N ≤ 4 sites).
    pub fn to_dense(&self) -> Result<Array2<C64>> {
        check_dense_gate(self.dim_h)?;
        Ok(match &self.data {
            SuperData::Dense(m) => m.clone(),
            SuperData::Sparse(m) => m.to_dense(),
            SuperData::Free(op) => {
                let jumps: Vec<CsrMatrix> = op.jumps.iter().map(|jt| jt.l.clone()).collect();
                assemble_sparse(&op.h, &jumps).to_dense()
            }
        })
    }

    /// Spectral abscissa estimate max Re λ via dense eigensolve (gated).
    pub fn spectral_abscissa(&self) -> Result<f64> {
        use ndarray_linalg::Eig;
        let dense = self.to_dense()?;
        let (vals, _) = dense.eig()?;
        Ok(vals.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max))
    }
}

fn check_dense_gate(dim_h: usize) -> Result<()> {
    let max_dim = 1usize << DENSE_GATE_SITES;
    if dim_h > max_dim {
        let n_sites = dim_h.trailing_zeros() as usize;
        return Err(Error::DenseGate { n_sites, max_sites: DENSE_GATE_SITES });
    }
    Ok(())
}

/// out[c·n + r] = x[r·n + c]; converts between row-major matrix layout
/// and column-stacked vector layout (an involution).
fn transpose_into(x: &[C64], n: usize, out: &mut [C64]) {
    debug_assert_eq!(x.len(), n * n);
    debug_assert_eq!(out.len(), n * n);
    for r in 0..n {
        for c in 0..n {
            out[c * n + r] = x[r * n + c];
        }
    }
}

/// Sparse column-stacked assembly of L̂.
fn assemble_sparse(h: &CsrMatrix, jumps: &[CsrMatrix]) -> CsrMatrix {
    let n = h.nrows();
    let eye = CsrMatrix::identity(n);
    let minus_i = C64::new(0.0, -1.0);
    let plus_i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let minus_half = C64::new(-0.5, 0.0);

    let mut total = kron(&eye, h).scaled(minus_i);
    total = total.add_scaled(&kron(&h.transpose(), &eye), plus_i);
    for l in jumps {
        if l.nnz() == 0 {
            continue;
        }
        let ldl = l.dagger().matmul(l);
        total = total.add_scaled(&kron(&l.conj(), l), one);
        total = total.add_scaled(&kron(&eye, &ldl), minus_half);
        total = total.add_scaled(&kron(&ldl.transpose(), &eye), minus_half);
    }
    total
}
