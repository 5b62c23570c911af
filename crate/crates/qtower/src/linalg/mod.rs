//! Dense complex matrices with the handful of operations the rest of the
//! crate is built on: direct sums, Kronecker products, partial traces,
//! Hermitian eigendecomposition, positive square roots, isometry completion,
//! and operator classification.
//!
//! Conventions, fixed once here and relied on everywhere else:
//!
//! * storage is row-major;
//! * `kron(a, b)` places entry `a[i1,j1] * b[i2,j2]` at row `i1*b.rows + i2`,
//!   column `j1*b.cols + j2` (first factor is the major index);
//! * `direct_sum(a, b)` is block-diagonal concatenation, first block first;
//! * zero-dimensional matrices (0 x n, n x 0) are legal values and behave as
//!   the unique maps to and from the zero space.

mod eig;

pub use eig::{hermitian_eig, psd_sqrt};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("data length {len} does not match shape {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("ragged row {row}: expected {cols} entries, found {found}")]
    RaggedRow { row: usize, cols: usize, found: usize },
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("columns are not orthonormal, cannot complete to a unitary")]
    NotIsometry,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Jacobi iteration failed to converge within {0} sweeps")]
    NoConvergence(usize),
}

/// Verdict of [`classify_operator`]. `NonContraction` means the operator
/// norm exceeds 1 beyond tolerance, so the matrix lives at no level of the
/// tower.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorClass {
    Unitary,
    Isometry,
    Coisometry,
    StrictContraction,
    NonContraction,
}

impl OperatorClass {
    pub fn is_contraction(self) -> bool {
        self != OperatorClass::NonContraction
    }
}

/// Which tensor factor an operation acts on, for `A (x) B` shaped spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.at(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::BadShape { rows, cols, len: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from real entries, row by row. Panics on ragged input; test helper.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Matrix product. Panics when the inner dimensions disagree; shape
    /// agreement is the caller's invariant throughout this crate.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "mul: {}x{} times {}x{}", self.rows, self.cols, rhs.rows, rhs.cols);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.at(i, j) + a * rhs.at(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j));
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self.at(i, i)).sum()
    }

    /// Largest entry magnitude; 0 for empty matrices.
    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sup_distance shape");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.is_square() && self.sup_distance(&Self::identity(self.rows)) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.sup_distance(&self.adjoint()) <= tol
    }

    /// Copy the `r x c` block with upper-left corner `(i0, j0)`.
    pub fn block(&self, i0: usize, j0: usize, r: usize, c: usize) -> Self {
        assert!(i0 + r <= self.rows && j0 + c <= self.cols, "block out of range");
        let mut out = Self::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                out.set(i, j, self.at(i0 + i, j0 + j));
            }
        }
        out
    }

    /// Stack vertically: `[self; below]`.
    pub fn vstack(&self, below: &Self) -> Self {
        assert_eq!(self.cols, below.cols, "vstack widths");
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Self { rows: self.rows + below.rows, cols: self.cols, data }
    }

    /// Concatenate horizontally: `[self | right]`.
    pub fn hstack(&self, right: &Self) -> Self {
        assert_eq!(self.rows, right.rows, "hstack heights");
        let mut out = Self::zeros(self.rows, self.cols + right.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.at(i, j));
            }
            for j in 0..right.cols {
                out.set(i, self.cols + j, right.at(i, j));
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }
}

/// Block-diagonal direct sum; either argument may be zero-dimensional.
pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows + b.rows, a.cols + b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out.set(i, j, a.at(i, j));
        }
    }
    for i in 0..b.rows {
        for j in 0..b.cols {
            out.set(a.rows + i, a.cols + j, b.at(i, j));
        }
    }
    out
}

/// Kronecker product in row-major convention: entry
/// `(i1*b.rows + i2, j1*b.cols + j2) = a[i1,j1] * b[i2,j2]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i1 in 0..a.rows {
        for j1 in 0..a.cols {
            let av = a.at(i1, j1);
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for i2 in 0..b.rows {
                for j2 in 0..b.cols {
                    out.set(i1 * b.rows + i2, j1 * b.cols + j2, av * b.at(i2, j2));
                }
            }
        }
    }
    out
}

/// Partial trace of a square matrix on `C^{d1} (x) C^{d2}` over the factor
/// named by `over`. Composite indices follow the [`kron`] convention,
/// `(a, b) = a*d2 + b`.
pub fn partial_trace(
    m: &ComplexMatrix,
    d1: usize,
    d2: usize,
    over: Factor,
) -> Result<ComplexMatrix, LinalgError> {
    if !m.is_square() || m.rows != d1 * d2 {
        return Err(LinalgError::DimensionMismatch(format!(
            "partial_trace expects a {n}x{n} matrix for factors {d1}x{d2}, got {r}x{c}",
            n = d1 * d2,
            r = m.rows,
            c = m.cols
        )));
    }
    let out = match over {
        Factor::First => {
            let mut out = ComplexMatrix::zeros(d2, d2);
            for b in 0..d2 {
                for bp in 0..d2 {
                    let mut s = Complex64::new(0.0, 0.0);
                    for a in 0..d1 {
                        s += m.at(a * d2 + b, a * d2 + bp);
                    }
                    out.set(b, bp, s);
                }
            }
            out
        }
        Factor::Second => {
            let mut out = ComplexMatrix::zeros(d1, d1);
            for a in 0..d1 {
                for ap in 0..d1 {
                    let mut s = Complex64::new(0.0, 0.0);
                    for b in 0..d2 {
                        s += m.at(a * d2 + b, ap * d2 + b);
                    }
                    out.set(a, ap, s);
                }
            }
            out
        }
    };
    Ok(out)
}

/// Extend a matrix with orthonormal columns to a square unitary by
/// Gram-Schmidt over the standard basis, taken in index order. Candidate
/// basis vectors whose residual against the columns found so far is below
/// [`tol::GS_RESIDUAL`] are skipped. Deterministic: same input, same output.
pub fn complete_isometry(v: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = v.rows;
    let k = v.cols;
    if k > n {
        return Err(LinalgError::NotIsometry);
    }
    if !v.adjoint().mul(v).is_identity(tol::STRUCT) {
        return Err(LinalgError::NotIsometry);
    }
    let mut cols: Vec<Vec<Complex64>> = (0..k).map(|j| v.column(j)).collect();
    let mut e = 0;
    while cols.len() < n {
        if e >= n {
            // Cannot happen for a genuine isometry; guard against drift.
            return Err(LinalgError::NotIsometry);
        }
        let mut cand = vec![Complex64::new(0.0, 0.0); n];
        cand[e] = Complex64::new(1.0, 0.0);
        e += 1;
        // Two orthogonalization passes keep the completion orthonormal to
        // working precision even for nearly dependent candidates.
        for _ in 0..2 {
            for col in &cols {
                let overlap: Complex64 =
                    col.iter().zip(&cand).map(|(c, x)| c.conj() * x).sum();
                for (x, c) in cand.iter_mut().zip(col) {
                    *x -= overlap * c;
                }
            }
        }
        let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < tol::GS_RESIDUAL {
            continue;
        }
        for x in cand.iter_mut() {
            *x /= Complex64::new(norm, 0.0);
        }
        cols.push(cand);
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            out.set(i, j, x);
        }
    }
    Ok(out)
}

/// Classify an operator against the tower levels, all at [`tol::STRUCT`]:
/// unitary (both Gram matrices are identities), isometry (`t* t = I` only),
/// coisometry (`t t* = I` only), strict contraction (largest eigenvalue of
/// `t* t` at most `1 + STRUCT`), or none of these.
pub fn classify_operator(t: &ComplexMatrix) -> OperatorClass {
    let gram_in = t.adjoint().mul(t);
    let gram_out = t.mul(&t.adjoint());
    let iso = gram_in.is_identity(tol::STRUCT);
    let coiso = gram_out.is_identity(tol::STRUCT);
    match (iso, coiso) {
        (true, true) => OperatorClass::Unitary,
        (true, false) => OperatorClass::Isometry,
        (false, true) => OperatorClass::Coisometry,
        (false, false) => {
            // gram_in is Hermitian by construction.
            let (eigs, _) = hermitian_eig(&gram_in).expect("gram matrix is Hermitian");
            let top = eigs.last().copied().unwrap_or(0.0);
            if top <= 1.0 + tol::STRUCT {
                OperatorClass::StrictContraction
            } else {
                OperatorClass::NonContraction
            }
        }
    }
}

/// Permutation matrix reordering a direct-sum layout. `sizes` are the block
/// sizes in source order; `order[k]` names the source block placed k-th in
/// the target. Applying the matrix to a vector laid out as the source blocks
/// yields the same data laid out in the target block order.
pub fn block_permutation(sizes: &[usize], order: &[usize]) -> ComplexMatrix {
    assert_eq!(sizes.len(), order.len(), "block_permutation arity");
    let total: usize = sizes.iter().sum();
    let mut src_offset = vec![0usize; sizes.len()];
    for i in 1..sizes.len() {
        src_offset[i] = src_offset[i - 1] + sizes[i - 1];
    }
    let mut out = ComplexMatrix::zeros(total, total);
    let mut t = 0;
    for &blk in order {
        for j in 0..sizes[blk] {
            out.set(t + j, src_offset[blk] + j, Complex64::new(1.0, 0.0));
        }
        t += sizes[blk];
    }
    out
}

/// Permutation matrix reordering tensor factors. `dims` are the factor
/// dimensions in source order (row-major composite indexing); `order[k]`
/// names the source factor placed k-th in the target.
pub fn tensor_permutation(dims: &[usize], order: &[usize]) -> ComplexMatrix {
    assert_eq!(dims.len(), order.len(), "tensor_permutation arity");
    let total: usize = dims.iter().product();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut idx = vec![0usize; dims.len()];
    for src in 0..total {
        // Decode row-major multi-index.
        let mut rem = src;
        for k in (0..dims.len()).rev() {
            idx[k] = rem % dims[k];
            rem /= dims[k];
        }
        let mut tgt = 0;
        for &k in order {
            tgt = tgt * dims[k] + idx[k];
        }
        out.set(tgt, src, Complex64::new(1.0, 0.0));
    }
    out
}

// JSON form: {"rows": r, "cols": c, "data": [[[re, im], ...], ...]} with one
// inner list per row. Ragged rows are rejected.
#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<[f64; 2]>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let data = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| [self.at(i, j).re, self.at(i, j).im]).collect())
            .collect();
        RawMatrix { rows: self.rows, cols: self.cols, data }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawMatrix::deserialize(de)?;
        if raw.data.len() != raw.rows {
            return Err(D::Error::custom(format!(
                "expected {} rows, found {}",
                raw.rows,
                raw.data.len()
            )));
        }
        let mut data = Vec::with_capacity(raw.rows * raw.cols);
        for (i, row) in raw.data.iter().enumerate() {
            if row.len() != raw.cols {
                return Err(D::Error::custom(format!(
                    "ragged row {}: expected {} entries, found {}",
                    i,
                    raw.cols,
                    row.len()
                )));
            }
            data.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
        }
        ComplexMatrix::new(raw.rows, raw.cols, data).map_err(D::Error::custom)
    }
}

impl ComplexMatrix {
    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }
}
