//! Dense complex matrices and the factorizations the pipelines build on.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

/// Scalar type of every matrix entry.
pub type ComplexScalar = Complex64;

/// Dense complex matrix in row-major storage.
///
/// Entries are guaranteed finite: every public constructor rejects NaN and
/// infinity, so downstream arithmetic never has to re-check.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<ComplexScalar>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, entries: Vec<ComplexScalar>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for (idx, e) in entries.iter().enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix entry by entry from a closure.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> ComplexScalar,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// Builds a matrix from a slice of equal-length rows.
    pub fn from_rows(rows: &[Vec<ComplexScalar>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("rows have unequal lengths".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// All-zero matrix. Panics on zero dimensions.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![ComplexScalar::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix of order `n`. Panics on `n == 0`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ComplexScalar::new(1.0, 0.0);
        }
        m
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

    /// Row-major entry slice.
    pub fn entries(&self) -> &[ComplexScalar] {
        &self.entries
    }

    /// Textbook product; operand inner dimensions must agree.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.entries[i * self.cols + k];
                if aik == ComplexScalar::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.entries[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += aik * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_entries(other, |x, y| x + y)
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_entries(other, |x, y| x - y)
    }

    fn zip_entries(
        &self,
        other: &Matrix,
        f: impl Fn(ComplexScalar, ComplexScalar) -> ComplexScalar,
    ) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&x, &y)| f(x, y))
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, s: ComplexScalar) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * s).collect(),
        }
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of the off-diagonal part.
    pub(crate) fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    acc += self[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<ComplexScalar> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[ComplexScalar]) {
        assert_eq!(col.len(), self.rows);
        for (i, &v) in col.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// 2-norm of column `j`.
    pub(crate) fn col_norm(&self, j: usize) -> f64 {
        (0..self.rows)
            .map(|i| self[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product of columns `j` and `k`, conjugating column `j`.
    pub(crate) fn col_dot(&self, j: usize, k: usize) -> ComplexScalar {
        let mut acc = ComplexScalar::new(0.0, 0.0);
        for i in 0..self.rows {
            acc += self[(i, j)].conj() * self[(i, k)];
        }
        acc
    }

    /// New matrix whose column `j` is `self`'s column `order[j]`.
    pub(crate) fn select_columns(&self, order: &[usize]) -> Matrix {
        assert_eq!(order.len(), self.cols);
        let mut out = Matrix::zeros(self.rows, self.cols);
        for (j, &src) in order.iter().enumerate() {
            for i in 0..self.rows {
                out[(i, j)] = self[(i, src)];
            }
        }
        out
    }

    /// Solves `self * x = rhs` by LU with partial pivoting.
    ///
    /// Pivots with magnitude at or below `atol * ||self||_F` are treated as
    /// singular.
    pub fn solve(&self, rhs: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "solve needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if rhs.rows != self.rows {
            return Err(Error::Dimension(format!(
                "rhs has {} rows, expected {}",
                rhs.rows, self.rows
            )));
        }
        let n = self.rows;
        let floor = tol.atol * self.frobenius_norm();
        let mut lu = self.entries.clone();
        let mut x = rhs.clone();
        for k in 0..n {
            let mut piv = k;
            let mut piv_mag = lu[k * n + k].norm();
            for i in k + 1..n {
                let mag = lu[i * n + k].norm();
                if mag > piv_mag {
                    piv = i;
                    piv_mag = mag;
                }
            }
            if piv_mag <= floor {
                return Err(Error::SingularMatrix {
                    pivot: piv_mag,
                    step: k,
                });
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                for j in 0..x.cols {
                    x.entries.swap(k * x.cols + j, piv * x.cols + j);
                }
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let m = lu[i * n + k] / pivot;
                if m == ComplexScalar::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let t = lu[k * n + j];
                    lu[i * n + j] -= m * t;
                }
                for j in 0..x.cols {
                    let t = x.entries[k * x.cols + j];
                    x.entries[i * x.cols + j] -= m * t;
                }
            }
        }
        for k in (0..n).rev() {
            let pivot = lu[k * n + k];
            for j in 0..x.cols {
                let mut acc = x.entries[k * x.cols + j];
                for i in k + 1..n {
                    acc -= lu[k * n + i] * x.entries[i * x.cols + j];
                }
                x.entries[k * x.cols + j] = acc / pivot;
            }
        }
        Ok(x)
    }

    /// Inverse via `solve(self, I)`.
    pub fn inverse(&self, tol: &ToleranceConfig) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "inverse needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        self.solve(&Matrix::identity(self.rows), tol)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = ComplexScalar;

    fn index(&self, (i, j): (usize, usize)) -> &ComplexScalar {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ComplexScalar {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let e = self[(i, j)];
                write!(f, "{:>12.5}{:+.5}i ", e.re, e.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Orthonormalizes the listed columns of `m` in place by modified
/// Gram-Schmidt against the columns listed before them, applying each
/// projection pass twice. Returns the position within `cols` of the first
/// column whose remainder drops to `drop_tol` or below, if any.
pub(crate) fn mgs_orthonormalize_columns(
    m: &mut Matrix,
    cols: &[usize],
    drop_tol: f64,
) -> std::result::Result<(), usize> {
    for (local, &j) in cols.iter().enumerate() {
        for _pass in 0..2 {
            for &k in &cols[..local] {
                let proj = m.col_dot(k, j);
                for i in 0..m.rows() {
                    let t = m[(i, k)];
                    m[(i, j)] -= proj * t;
                }
            }
        }
        let nrm = m.col_norm(j);
        if nrm <= drop_tol {
            return Err(local);
        }
        let inv = ComplexScalar::new(1.0 / nrm, 0.0);
        for i in 0..m.rows() {
            m[(i, j)] *= inv;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn r(re: f64) -> ComplexScalar {
        ComplexScalar::new(re, 0.0)
    }

    pub(crate) fn ex1_a() -> Matrix {
        Matrix::from_rows(&[
            vec![c(1.0, 1.0), r(1.0), r(1.0)],
            vec![r(1.0), c(1.0, 1.0), r(1.0)],
            vec![r(1.0), r(1.0), c(1.0, 1.0)],
        ])
        .unwrap()
    }

    pub(crate) fn ex1_b() -> Matrix {
        Matrix::from_rows(&[
            vec![r(7.0), r(0.0), r(5.0)],
            vec![r(2.0), r(4.0), r(6.0)],
            vec![r(3.0), r(8.0), r(1.0)],
        ])
        .unwrap()
    }

    fn ex2_b() -> Matrix {
        Matrix::from_rows(&[
            vec![r(0.0), r(0.0), r(1.0), r(0.0)],
            vec![r(0.0), r(0.0), r(0.0), r(1.0)],
            vec![r(1.0), r(0.0), r(0.0), r(0.0)],
            vec![r(0.0), r(1.0), r(0.0), r(0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(matches!(
            Matrix::new(0, 2, vec![]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            Matrix::new(2, 2, vec![r(1.0); 3]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn new_rejects_non_finite() {
        let mut entries = vec![r(0.0); 4];
        entries[3] = c(f64::NAN, 0.0);
        assert!(matches!(
            Matrix::new(2, 2, entries),
            Err(Error::NonFinite { row: 1, col: 1 })
        ));
    }

    #[test]
    fn identity_times_matrix_is_matrix() {
        let a = ex1_a();
        let prod = Matrix::identity(3).matmul(&a).unwrap();
        assert_eq!(prod, a);
    }

    #[test]
    fn example_pair_commutes() {
        let a = ex1_a();
        let b = ex1_b();
        let ab = a.matmul(&b).unwrap();
        let ba = b.matmul(&a).unwrap();
        let diff = ab.sub(&ba).unwrap();
        assert!(diff.frobenius_norm() <= 1e-12);
    }

    #[test]
    fn permutation_squares_to_identity() {
        let b = ex2_b();
        let bb = b.matmul(&b).unwrap();
        assert_eq!(bb, Matrix::identity(4));
    }

    #[test]
    fn matmul_rejects_mismatched_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        assert!(matches!(a.matmul(&b), Err(Error::Dimension(_))));
    }

    #[test]
    fn conj_transpose_conjugates_diagonal() {
        let at = ex1_a().conj_transpose();
        for i in 0..3 {
            assert_eq!(at[(i, i)], c(1.0, -1.0));
        }
    }

    #[test]
    fn conj_transpose_is_involution() {
        let a = ex1_b();
        assert_eq!(a.conj_transpose().conj_transpose(), a);
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let b = ex1_b();
        let x = Matrix::identity(3)
            .solve(&b, &ToleranceConfig::default())
            .unwrap();
        let diff = x.sub(&b).unwrap();
        assert!(diff.frobenius_norm() <= 1e-14);
    }

    #[test]
    fn solve_zero_matrix_is_singular() {
        let z = Matrix::zeros(2, 2);
        let err = z
            .solve(&Matrix::identity(2), &ToleranceConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { .. }));
    }

    #[test]
    fn inverse_roundtrip() {
        let tol = ToleranceConfig::default();
        let a = ex1_b();
        let inv = a.inverse(&tol).unwrap();
        let prod = a.matmul(&inv).unwrap();
        let diff = prod.sub(&Matrix::identity(3)).unwrap();
        assert!(diff.frobenius_norm() <= 1e-12);
    }

    #[test]
    fn frobenius_norm_values() {
        assert_eq!(Matrix::zeros(3, 3).frobenius_norm(), 0.0);
        assert_eq!(Matrix::identity(4).frobenius_norm(), 2.0);
        assert_eq!(ex2_b().frobenius_norm(), 2.0);
    }

    #[test]
    fn mgs_detects_dependent_columns() {
        let mut m = Matrix::from_rows(&[vec![r(1.0), r(2.0)], vec![r(1.0), r(2.0)]]).unwrap();
        let got = mgs_orthonormalize_columns(&mut m, &[0, 1], 1e-10);
        assert_eq!(got, Err(1));
    }

    #[test]
    fn mgs_orthonormalizes() {
        let mut m = Matrix::from_rows(&[vec![r(1.0), r(1.0)], vec![r(1.0), r(-2.0)]]).unwrap();
        mgs_orthonormalize_columns(&mut m, &[0, 1], 1e-10).unwrap();
        assert!(m.col_dot(0, 1).norm() <= 1e-14);
        assert!((m.col_norm(0) - 1.0).abs() <= 1e-14);
        assert!((m.col_norm(1) - 1.0).abs() <= 1e-14);
    }
}
