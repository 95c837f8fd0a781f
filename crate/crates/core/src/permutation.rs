//! Permutation conjugation of matrix pairs and spectral invariance checks.

use crate::eigen::eigenvalues_only;
use crate::error::{Error, Result};
use crate::matrix::{ComplexScalar, Matrix};
use crate::svd::singular_values;
use crate::tolerance::ToleranceConfig;

/// Permutation in one-line notation: the matrix has its 1 for column `i` in
/// row `image[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationSpec {
    image: Vec<usize>,
}

/// Multiset comparisons of spectra before and after a transformation.
/// Pairing gaps are relative to the larger spectral scale of the two inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceReport {
    pub eigen_multiset_match: bool,
    pub singular_multiset_match: bool,
    pub max_pairing_gap: f64,
}

impl PermutationSpec {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image value {v} is out of range for order {n}"
                )));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!(
                    "image value {v} appears more than once"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Self {
        let mut image = vec![0usize; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            image[v] = i;
        }
        Self { image }
    }

    /// The 0/1 matrix with entry 1 at `(image[i], i)`.
    pub fn to_matrix(&self) -> Matrix {
        let n = self.image.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &v) in self.image.iter().enumerate() {
            m[(v, i)] = ComplexScalar::new(1.0, 0.0);
        }
        m
    }

    /// Reads a permutation back from a matrix whose entries are 0 or 1
    /// within `atol`.
    pub fn from_matrix(m: &Matrix, tol: &ToleranceConfig) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidPermutation(format!(
                "a permutation matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let mut image = vec![usize::MAX; n];
        let mut row_used = vec![false; n];
        for j in 0..n {
            for i in 0..n {
                let e = m[(i, j)];
                let is_one = (e - ComplexScalar::new(1.0, 0.0)).norm() <= tol.atol;
                let is_zero = e.norm() <= tol.atol;
                if !is_one && !is_zero {
                    return Err(Error::InvalidPermutation(format!(
                        "entry ({i}, {j}) is {e}, neither 0 nor 1"
                    )));
                }
                if is_one {
                    if image[j] != usize::MAX {
                        return Err(Error::InvalidPermutation(format!(
                            "column {j} has more than one unit entry"
                        )));
                    }
                    if row_used[i] {
                        return Err(Error::InvalidPermutation(format!(
                            "row {i} has more than one unit entry"
                        )));
                    }
                    image[j] = i;
                    row_used[i] = true;
                }
            }
            if image[j] == usize::MAX {
                return Err(Error::InvalidPermutation(format!(
                    "column {j} has no unit entry"
                )));
            }
        }
        Ok(Self { image })
    }
}

/// `p a p^T`, computed as an exact entry rearrangement (no arithmetic).
pub fn conjugate(a: &Matrix, p: &PermutationSpec) -> Result<Matrix> {
    if !a.is_square() || a.rows() != p.order() {
        return Err(Error::Dimension(format!(
            "conjugation needs a square matrix matching the permutation order {}, got {}x{}",
            p.order(),
            a.rows(),
            a.cols()
        )));
    }
    let inv = p.inverse();
    Matrix::from_fn(a.rows(), a.cols(), |r, c| a[(inv.image[r], inv.image[c])])
}

/// `p a q` for independent row and column permutations, as an exact entry
/// rearrangement. Works for rectangular `a`.
pub fn general_permute(a: &Matrix, p: &PermutationSpec, q: &PermutationSpec) -> Result<Matrix> {
    if p.order() != a.rows() || q.order() != a.cols() {
        return Err(Error::Dimension(format!(
            "permutations of order {} and {} do not conform to a {}x{} matrix",
            p.order(),
            q.order(),
            a.rows(),
            a.cols()
        )));
    }
    let p_inv = p.inverse();
    Matrix::from_fn(a.rows(), a.cols(), |r, c| a[(p_inv.image[r], q.image[c])])
}

/// Pairs the canonically sorted eigenvalue and singular value multisets of
/// `a` and `a_hat` positionally and reports the largest relative gaps.
pub fn invariance_report(
    a: &Matrix,
    a_hat: &Matrix,
    tol: &ToleranceConfig,
) -> Result<InvarianceReport> {
    if !a.is_square() || !a_hat.is_square() || a.rows() != a_hat.rows() {
        return Err(Error::Dimension(format!(
            "invariance report needs square matrices of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            a_hat.rows(),
            a_hat.cols()
        )));
    }
    let ev1 = eigenvalues_only(a)?;
    let ev2 = eigenvalues_only(a_hat)?;
    let scale = ev1.iter().chain(&ev2).map(|e| e.norm()).fold(0.0, f64::max);
    let mut eigen_gap = 0.0f64;
    for (x, y) in ev1.iter().zip(&ev2) {
        eigen_gap = eigen_gap.max((x - y).norm());
    }
    if scale > 0.0 {
        eigen_gap /= scale;
    }

    let sv1 = singular_values(a, tol)?;
    let sv2 = singular_values(a_hat, tol)?;
    let sscale = sv1.iter().chain(&sv2).copied().fold(0.0, f64::max);
    let mut singular_gap = 0.0f64;
    for (x, y) in sv1.iter().zip(&sv2) {
        singular_gap = singular_gap.max((x - y).abs());
    }
    if sscale > 0.0 {
        singular_gap /= sscale;
    }

    Ok(InvarianceReport {
        eigen_multiset_match: eigen_gap <= tol.cluster_tol,
        singular_multiset_match: singular_gap <= tol.cluster_tol,
        max_pairing_gap: eigen_gap.max(singular_gap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::{ex1_b, ex3_a, ex3_p_image, r};

    #[test]
    fn image_convention_is_column_to_row() {
        let p = PermutationSpec::new(vec![1, 0]).unwrap();
        let m = p.to_matrix();
        assert_eq!(
            m,
            Matrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]]).unwrap()
        );
        let ex3_p = PermutationSpec::new(ex3_p_image()).unwrap().to_matrix();
        // Printed form: rows e1, e5, e2, e0, e3, e4.
        let rows = [1usize, 5, 2, 0, 3, 4];
        for (i, &j) in rows.iter().enumerate() {
            for k in 0..6 {
                let want = if k == j { 1.0 } else { 0.0 };
                assert_eq!(ex3_p[(i, k)], r(want));
            }
        }
    }

    #[test]
    fn new_rejects_non_bijections() {
        assert!(matches!(
            PermutationSpec::new(vec![0, 0, 1]),
            Err(Error::InvalidPermutation(_))
        ));
        assert!(matches!(
            PermutationSpec::new(vec![0, 3]),
            Err(Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn matrix_roundtrip() {
        let tol = ToleranceConfig::default();
        let p = PermutationSpec::new(ex3_p_image()).unwrap();
        let back = PermutationSpec::from_matrix(&p.to_matrix(), &tol).unwrap();
        assert_eq!(back, p);
        let not_perm = Matrix::from_rows(&[vec![r(1.0), r(0.0)], vec![r(1.0), r(0.0)]]).unwrap();
        assert!(matches!(
            PermutationSpec::from_matrix(&not_perm, &tol),
            Err(Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn conjugate_is_exact_and_invertible() {
        let p = PermutationSpec::new(ex3_p_image()).unwrap();
        let a = ex3_a();
        let a_hat = conjugate(&a, &p).unwrap();
        // Spot-check the gather: a_hat[r][c] = a[inv r][inv c].
        let inv = p.inverse();
        for r_i in 0..6 {
            for c_i in 0..6 {
                assert_eq!(a_hat[(r_i, c_i)], a[(inv.image()[r_i], inv.image()[c_i])]);
            }
        }
        let back = conjugate(&a_hat, &inv).unwrap();
        assert_eq!(back, a);
        let same = conjugate(&a, &PermutationSpec::identity(6)).unwrap();
        assert_eq!(same, a);
    }

    #[test]
    fn conjugate_preserves_commutator_norm() {
        let a = ex3_a();
        let b = crate::test_fixtures::ex3_b();
        let p = PermutationSpec::new(ex3_p_image()).unwrap();
        let comm = |x: &Matrix, y: &Matrix| {
            x.matmul(y)
                .unwrap()
                .sub(&y.matmul(x).unwrap())
                .unwrap()
                .frobenius_norm()
        };
        let a_hat = conjugate(&a, &p).unwrap();
        let b_hat = conjugate(&b, &p).unwrap();
        assert!((comm(&a, &b) - comm(&a_hat, &b_hat)).abs() <= 1e-12);
    }

    #[test]
    fn permuted_eigenvectors_diagonalize_conjugate() {
        let tol = ToleranceConfig::default();
        let a = ex1_b();
        let p = PermutationSpec::new(vec![2, 0, 1]).unwrap();
        let ed = crate::eigen::eigendecompose(&a, &tol).unwrap();
        let a_hat = conjugate(&a, &p).unwrap();
        let ps = p.to_matrix().matmul(&ed.s).unwrap();
        let res = crate::eigen::diagonalization_residual(&a_hat, &ps, &ed.eigenvalues).unwrap();
        assert!(res <= 1e-12);
    }

    #[test]
    fn general_permute_moves_rows_and_columns() {
        let a = Matrix::from_rows(&[vec![r(1.0), r(2.0), r(3.0)], vec![r(4.0), r(5.0), r(6.0)]])
            .unwrap();
        let id2 = PermutationSpec::identity(2);
        let id3 = PermutationSpec::identity(3);
        assert_eq!(general_permute(&a, &id2, &id3).unwrap(), a);
        let swap = PermutationSpec::new(vec![1, 0]).unwrap();
        let swapped = general_permute(&a, &swap, &id3).unwrap();
        assert_eq!(swapped[(0, 0)], r(4.0));
        assert_eq!(swapped[(1, 2)], r(3.0));
        let tol = ToleranceConfig::default();
        let q = PermutationSpec::new(vec![2, 0, 1]).unwrap();
        let moved = general_permute(&a, &swap, &q).unwrap();
        let sv_before = crate::svd::singular_values(&a, &tol).unwrap();
        let sv_after = crate::svd::singular_values(&moved, &tol).unwrap();
        for (x, y) in sv_before.iter().zip(&sv_after) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn invariance_report_matches_and_mismatches() {
        let tol = ToleranceConfig::default();
        let a = ex3_a();
        let p = PermutationSpec::new(ex3_p_image()).unwrap();
        let a_hat = conjugate(&a, &p).unwrap();
        let rep = invariance_report(&a, &a_hat, &tol).unwrap();
        assert!(rep.eigen_multiset_match);
        assert!(rep.singular_multiset_match);
        assert!(rep.max_pairing_gap <= 1e-9);

        let same = invariance_report(&a, &a, &tol).unwrap();
        assert!(same.eigen_multiset_match && same.singular_multiset_match);

        let id = Matrix::identity(3);
        let doubled = id.scale(r(2.0));
        let rep = invariance_report(&id, &doubled, &tol).unwrap();
        assert!(!rep.eigen_multiset_match);
    }
}
