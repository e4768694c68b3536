//! Small dense complex matrices.
//!
//! Everything here is sized for qubit-times-ancilla systems (at most a few
//! dozen rows), so the representation is a plain column-major
//! [`nalgebra::DMatrix`] behind a newtype that only exposes the handful of
//! operations the oracle needs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `<a|b>`, conjugate-linear in the first argument.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// `<v|v>`.
pub fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `a ⊗ b` for column vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix must have positive size".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    /// `|v><v|`.
    pub fn projector(v: &CVector) -> Self {
        Self(v * v.adjoint())
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, z: C64) {
        self.0[(r, c)] = z;
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.0[(r, c)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn column(&self, c: usize) -> CVector {
        self.0.column(c).into_owned()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `max |(U†U − I)_{rc}|`; infinite for non-square input.
    pub fn unitarity_residual(&self) -> f64 {
        if self.rows() != self.cols() {
            return f64::INFINITY;
        }
        let gram = self.0.adjoint() * &self.0;
        let n = self.rows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((gram[(r, c)] - target).norm());
            }
        }
        worst
    }

    /// `max |(A − A†)_{rc}|`; infinite for non-square input.
    pub fn hermiticity_residual(&self) -> f64 {
        if self.rows() != self.cols() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                worst = worst.max((self.0[(r, c)] - self.0[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if self.rows() != self.cols() {
            return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
        }
        let sym = (&self.0 + self.0.adjoint()).map(|z| z * 0.5);
        let mut vals: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    /// Trace out the first tensor factor of a `(d_a·d_b)`-square matrix.
    pub fn partial_trace_first(&self, d_a: usize, d_b: usize) -> Result<Self> {
        if self.rows() != d_a * d_b || self.cols() != d_a * d_b {
            return Err(Error::Dimension(format!(
                "cannot trace a {}x{} matrix as {d_a}x{d_b}",
                self.rows(),
                self.cols()
            )));
        }
        Ok(Self::from_fn(d_b, d_b, |r, c| (0..d_a).map(|a| self.0[(a * d_b + r, a * d_b + c)]).sum()))
    }

    /// Extend the orthonormal columns `cols` to a full unitary of size `n`.
    ///
    /// Missing columns are filled by Gram-Schmidt on the standard basis.
    pub fn complete_unitary(n: usize, fixed: &[(usize, CVector)]) -> Result<Self> {
        let mut out = DMatrix::<C64>::zeros(n, n);
        let mut basis: Vec<CVector> = Vec::with_capacity(n);
        for (slot, v) in fixed {
            if v.len() != n || *slot >= n {
                return Err(Error::Dimension("isometry column out of range".into()));
            }
            out.set_column(*slot, v);
            basis.push(v.clone());
        }
        let taken: Vec<usize> = fixed.iter().map(|(s, _)| *s).collect();
        let mut free = (0..n).filter(|s| !taken.contains(s));
        for e in 0..n {
            if basis.len() == n {
                break;
            }
            let mut cand = CVector::zeros(n);
            cand[e] = ONE;
            // two passes for numerical orthogonality
            for _ in 0..2 {
                for b in &basis {
                    let proj = inner(b, &cand);
                    cand -= b * proj;
                }
            }
            let nrm = norm_sqr(&cand).sqrt();
            if nrm > 1e-8 {
                cand /= C64::new(nrm, 0.0);
                let slot = free.next().expect("free column available");
                out.set_column(slot, &cand);
                basis.push(cand);
            }
        }
        let u = Self(out);
        if u.unitarity_residual() > 1e-10 {
            return Err(Error::Domain("supplied columns are not orthonormal".into()));
        }
        Ok(u)
    }
}
