//! Dense complex-matrix kernel.
//!
//! Everything in this crate is small (a few dozen rows at most), so matrices
//! are plain row-major `Vec`s. Singular values come from nalgebra's SVD; every
//! rank, support and orthogonality decision in the rest of the crate goes
//! through [`Tolerance`].

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, mismatch, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Shorthand for a real complex number.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Numerical cutoffs.
///
/// `rel` is the relative singular-value cutoff used for ranks and supports;
/// `abs` is the absolute cutoff for inner products, identity tests and
/// annihilation checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const DEFAULT_REL: f64 = 1e-9;
    pub const DEFAULT_ABS: f64 = 1e-9;

    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        for (name, v) in [("rel", rel), ("abs", abs)] {
            if !(0.0..1.0).contains(&v) {
                return invalid(format!("tolerance {name}={v} must lie in [0, 1)"));
            }
        }
        Ok(Tolerance { rel, abs })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: Self::DEFAULT_REL,
            abs: Self::DEFAULT_ABS,
        }
    }
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Entries must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return mismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            ));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |r, c| re(rows[r][c]))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|&x| re(x)).collect::<Vec<_>>())
    }

    /// Projector onto the span of the listed standard basis vectors.
    pub fn basis_projector(dim: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in indices {
            m[(i, i)] = ONE;
        }
        m
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        Self::from_fn(ket.len(), bra.len(), |r, c| ket[r] * bra[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape() != other.shape() {
            return mismatch(format!(
                "elementwise op on {:?} and {:?}",
                self.shape(),
                other.shape()
            ));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Matrix product; errors on incompatible shapes.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return mismatch(format!(
                "product of {:?} and {:?}",
                self.shape(),
                other.shape()
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return mismatch(format!(
                "{:?} matrix applied to length-{} vector",
                self.shape(),
                v.len()
            ));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Hilbert-Schmidt inner product `Tr(self† other)`.
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation; `INFINITY` for shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        self.max_abs_diff(other) <= eps
    }

    /// Hermitian within `eps` relative to the largest entry (absolute when the
    /// entries are below one).
    pub fn is_hermitian(&self, eps: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs().max(1.0);
        self.max_abs_diff(&self.adjoint()) <= eps * scale
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut s: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Count of singular values above `tol.rel * σ_max`; zero for the zero
    /// matrix and for empty matrices.
    pub fn rank(&self, tol: Tolerance) -> usize {
        let s = self.singular_values();
        let Some(&smax) = s.first() else { return 0 };
        if smax == 0.0 {
            return 0;
        }
        s.iter().filter(|&&x| x > tol.rel * smax).count()
    }

    /// Standard tensor product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = other.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |r, c| {
            self[(r / r2, c / c2)] * other[(r % r2, c % c2)]
        })
    }

    /// Submatrix made of the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Panicking product for code paths where shapes are already checked.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(r) {
                write!(f, "{:>8.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        if repr.rows == 0 || repr.cols == 0 {
            return Err(serde::de::Error::custom("matrix dimensions must be positive"));
        }
        let data = repr.data.iter().map(|[a, b]| C64::new(*a, *b)).collect();
        ComplexMatrix::new(repr.rows, repr.cols, data).map_err(serde::de::Error::custom)
    }
}

/// Numerical rank via singular values.
pub fn numeric_rank(m: &ComplexMatrix, tol: Tolerance) -> Result<usize> {
    if m.is_empty() {
        return invalid(format!("rank of a {}x{} matrix", m.rows, m.cols));
    }
    Ok(m.rank(tol))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Orthogonal projector onto the support of a Hermitian positive
/// semidefinite matrix (eigenvalues above `tol.rel * λ_max`).
pub fn support_projector(m: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    if !m.is_square() || m.is_empty() {
        return invalid(format!("support projector of a {:?} matrix", m.shape()));
    }
    if !m.is_hermitian(tol.abs) {
        return invalid("support projector requires a Hermitian matrix");
    }
    let n = m.rows;
    let svd = m.to_nalgebra().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut p = ComplexMatrix::zeros(n, n);
    if smax == 0.0 {
        return Ok(p);
    }
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol.rel * smax {
            for r in 0..n {
                for c in 0..n {
                    p[(r, c)] += u[(r, k)] * u[(c, k)].conj();
                }
            }
        }
    }
    Ok(p)
}

/// `A†A = cI` for some `c > 0`, with the deviation measured relative to `c`.
pub fn is_proportional_unitary(a: &ComplexMatrix, tol: Tolerance) -> bool {
    if !a.is_square() || a.is_empty() {
        return false;
    }
    let n = a.rows;
    let gram = &a.adjoint() * a;
    let c = gram.trace().re / n as f64;
    if c <= 0.0 || !c.is_finite() {
        return false;
    }
    let target = ComplexMatrix::identity(n).scale(re(c));
    gram.max_abs_diff(&target) <= tol.abs * c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn rank_of_identity_and_zero() {
        assert_eq!(numeric_rank(&ComplexMatrix::identity(4), tol()).unwrap(), 4);
        assert_eq!(numeric_rank(&ComplexMatrix::zeros(3, 3), tol()).unwrap(), 0);
    }

    #[test]
    fn rank_of_empty_matrix_is_an_error() {
        assert!(numeric_rank(&ComplexMatrix::zeros(0, 3), tol()).is_err());
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));

        let e00 = ComplexMatrix::basis_projector(2, [0]);
        let e11 = ComplexMatrix::basis_projector(2, [1]);
        assert_eq!(kron(&e00, &e11), ComplexMatrix::basis_projector(4, [1]));

        let beta = 2.0 + 3f64.sqrt();
        let d = ComplexMatrix::diag_real(&[1.0, beta]);
        let expected = ComplexMatrix::diag_real(&[1.0, beta, beta, beta * beta]);
        assert!(kron(&d, &d).approx_eq(&expected, 1e-12));
    }

    #[test]
    fn support_projector_examples() {
        let m = ComplexMatrix::diag_real(&[0.5, 0.5, 0.0]);
        let p = support_projector(&m, tol()).unwrap();
        assert!(p.approx_eq(&ComplexMatrix::diag_real(&[1.0, 1.0, 0.0]), 1e-12));

        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(support_projector(&z, tol()).unwrap(), z);

        let nh = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(support_projector(&nh, tol()).is_err());
    }

    #[test]
    fn proportional_unitary_examples() {
        assert!(is_proportional_unitary(&ComplexMatrix::identity(3), tol()));
        assert!(!is_proportional_unitary(
            &ComplexMatrix::diag_real(&[1.0, 1.0, 0.0]),
            tol()
        ));
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]])
            .scale(re(std::f64::consts::FRAC_1_SQRT_2));
        assert!(is_proportional_unitary(&h, tol()));
        assert!(is_proportional_unitary(&h.scale(re(10.0)), tol()));
        assert!(!is_proportional_unitary(&ComplexMatrix::zeros(2, 2), tol()));
    }

    #[test]
    fn json_round_trip() {
        let m = ComplexMatrix::new(1, 2, vec![C64::new(0.1, -2.0), C64::new(1.0 / 3.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"rows\":1"));
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert!(back.approx_eq(&m, 1e-12));
    }

    #[test]
    fn json_rejects_bad_shapes() {
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":0,"cols":2,"data":[]}"#).is_err());
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerance::new(1e-9, 0.5).is_ok());
        assert!(Tolerance::new(1.0, 0.0).is_err());
        assert!(Tolerance::new(-1e-3, 0.0).is_err());
    }
}
