//! SVD of a star-commuting pair through a shared left-singular-vector
//! matrix: simultaneously diagonalize the Gram matrices a a^H and b b^H,
//! orthonormalize within joint eigenspaces, and read the right factors off
//! the singular value equations.

use crate::eigen::{
    eigenvalues_only, orthonormalize_within_eigenspaces, unitarity_defect, EigenDecomposition,
};
use crate::error::{Error, Result};
use crate::matrix::{ComplexScalar, Matrix};
use crate::simdiag::{
    check_commute, simultaneous_diagonalize, Cluster, SimDiagResult, SpectralPartition,
};
use crate::tolerance::ToleranceConfig;

/// Shared-basis SVD of a star-commuting pair: `a = u diag(sigma_a) v_a^H`
/// and `b = u diag(sigma_b) v_b^H` with one common `u`.
#[derive(Clone, Debug)]
pub struct CommutingSvdResult {
    pub u: Matrix,
    pub sigma_a: Vec<f64>,
    pub v_a: Matrix,
    pub sigma_b: Vec<f64>,
    pub v_b: Matrix,
    /// `||a - u diag(sigma_a) v_a^H||_F / ||a||_F`.
    pub residual_a: f64,
    /// `||b - u diag(sigma_b) v_b^H||_F / ||b||_F`.
    pub residual_b: f64,
}

/// Residuals reported by `verify_svd`. Unitarity residuals are raw
/// `||x^H x - I||_F` values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvdVerification {
    pub reconstruction_residual: f64,
    pub u_unitarity_residual: f64,
    pub v_unitarity_residual: f64,
}

/// Star-commutator residual `||a^H b - b a^H||_F / (||a||_F ||b||_F + atol)`
/// and whether it passes at `rtol`.
pub fn check_star_commute(a: &Matrix, b: &Matrix, tol: &ToleranceConfig) -> Result<(bool, f64)> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::Dimension(format!(
            "star commutator needs square matrices of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let ah = a.conj_transpose();
    let lhs = ah.matmul(b)?;
    let rhs = b.matmul(&ah)?;
    let num = lhs.sub(&rhs)?.frobenius_norm();
    let residual = num / (a.frobenius_norm() * b.frobenius_norm() + tol.atol);
    Ok((residual <= tol.rtol, residual))
}

/// SVD of a commuting, star-commuting pair with a shared left factor.
pub fn svd_commuting_pair(
    a: &Matrix,
    b: &Matrix,
    tol: &ToleranceConfig,
) -> Result<CommutingSvdResult> {
    let (commutes, commute_residual) = check_commute(a, b, tol)?;
    if !commutes {
        return Err(Error::NotCommuting {
            residual: commute_residual,
        });
    }
    let (star, star_residual) = check_star_commute(a, b, tol)?;
    if !star {
        return Err(Error::NotStarCommuting {
            residual: star_residual,
        });
    }
    let n = a.rows();
    let ga = a.matmul(&a.conj_transpose())?;
    let gb = b.matmul(&b.conj_transpose())?;
    let sd = simultaneous_diagonalize(&ga, &gb, tol).map_err(|e| match e {
        // The Gram matrices of a star-commuting pair commute and are
        // Hermitian, so these failures indicate a numerical breakdown
        // rather than bad input.
        Error::NotCommuting { residual } => Error::InternalDiagnostic(format!(
            "gram matrices fail to commute (residual {residual:.3e})"
        )),
        Error::NotDiagonalizable(msg) => {
            Error::InternalDiagnostic(format!("gram diagonalization failed: {msg}"))
        }
        other => other,
    })?;

    let refined = refine_by_diag_b(&sd, tol);
    let carrier = EigenDecomposition {
        s: sd.s_common.clone(),
        eigenvalues: sd.diag_a.clone(),
        residual: sd.residual_a,
        cond_estimate: 0.0,
        is_unitary: false,
    };
    let ortho =
        orthonormalize_within_eigenspaces(&carrier, &refined, tol).map_err(|e| match e {
            Error::RankDeficientCluster { index } => Error::InternalDiagnostic(format!(
                "joint eigenspace {index} lost rank during orthonormalization"
            )),
            other => other,
        })?;
    let u = ortho.s;
    let u_defect = unitarity_defect(&u);
    if u_defect > tol.rtol * n as f64 {
        return Err(Error::InternalDiagnostic(format!(
            "shared left factor is not unitary (defect {u_defect:.3e})"
        )));
    }

    let sigma_a = gram_eigenvalues_to_sigma(&sd.diag_a, a, tol)?;
    let sigma_b = gram_eigenvalues_to_sigma(&sd.diag_b, b, tol)?;
    let v_a = right_vectors(a, &u, &sigma_a, tol)?;
    let v_b = right_vectors(b, &u, &sigma_b, tol)?;
    for (name, v) in [("a", &v_a), ("b", &v_b)] {
        let defect = unitarity_defect(v);
        if defect > tol.rtol * n as f64 {
            return Err(Error::InternalDiagnostic(format!(
                "right factor for {name} is not unitary (defect {defect:.3e})"
            )));
        }
    }

    let residual_a = reconstruction_residual(a, &u, &sigma_a, &v_a)?;
    let residual_b = reconstruction_residual(b, &u, &sigma_b, &v_b)?;
    for (name, res) in [("a", residual_a), ("b", residual_b)] {
        if res > tol.rtol {
            return Err(Error::InternalDiagnostic(format!(
                "reconstruction residual for {name} is {res:.3e}, above rtol {:.3e}",
                tol.rtol
            )));
        }
    }
    Ok(CommutingSvdResult {
        u,
        sigma_a,
        v_a,
        sigma_b,
        v_b,
        residual_a,
        residual_b,
    })
}

/// Residual report for a proposed factorization `x ~ u diag(sigma) v^H`.
pub fn verify_svd(
    x: &Matrix,
    u: &Matrix,
    sigma: &[f64],
    v: &Matrix,
    tol: &ToleranceConfig,
) -> Result<SvdVerification> {
    let _ = tol;
    if !u.is_square() || !v.is_square() || u.rows() != x.rows() || v.rows() != x.cols() {
        return Err(Error::Dimension(format!(
            "factors {}x{} and {}x{} do not conform to a {}x{} matrix",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols(),
            x.rows(),
            x.cols()
        )));
    }
    let k = x.rows().min(x.cols());
    if sigma.len() != k {
        return Err(Error::Dimension(format!(
            "expected {k} singular values, got {}",
            sigma.len()
        )));
    }
    // u * diag(sigma) padded to the rectangular shape, times v^H.
    let mut us = Matrix::zeros(x.rows(), x.cols());
    for j in 0..k {
        for i in 0..x.rows() {
            us[(i, j)] = u[(i, j)] * ComplexScalar::new(sigma[j], 0.0);
        }
    }
    let recon = us.matmul(&v.conj_transpose())?;
    let num = x.sub(&recon)?.frobenius_norm();
    let den = x.frobenius_norm();
    Ok(SvdVerification {
        reconstruction_residual: if den == 0.0 { num } else { num / den },
        u_unitarity_residual: unitarity_defect(u),
        v_unitarity_residual: unitarity_defect(v),
    })
}

/// Copy of `res` with columns permuted so `sigma_a` is descending, ties
/// broken by descending `sigma_b`, then by original position.
pub fn sort_descending(res: &CommutingSvdResult) -> CommutingSvdResult {
    let n = res.sigma_a.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        res.sigma_a[j]
            .total_cmp(&res.sigma_a[i])
            .then(res.sigma_b[j].total_cmp(&res.sigma_b[i]))
            .then(i.cmp(&j))
    });
    CommutingSvdResult {
        u: res.u.select_columns(&order),
        sigma_a: order.iter().map(|&i| res.sigma_a[i]).collect(),
        v_a: res.v_a.select_columns(&order),
        sigma_b: order.iter().map(|&i| res.sigma_b[i]).collect(),
        v_b: res.v_b.select_columns(&order),
        residual_a: res.residual_a,
        residual_b: res.residual_b,
    }
}

/// Singular values of a (possibly rectangular) matrix, descending, via the
/// eigenvalues of the smaller Gram matrix.
pub fn singular_values(x: &Matrix, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    let gram = if x.rows() <= x.cols() {
        x.matmul(&x.conj_transpose())?
    } else {
        x.conj_transpose().matmul(x)?
    };
    let eigenvalues = eigenvalues_only(&gram)?;
    let mut sigma = clamp_gram_eigenvalues(&eigenvalues, gram.rows(), x, tol)?;
    sigma.sort_by(|p, q| q.total_cmp(p));
    Ok(sigma)
}

/// sqrt of Gram eigenvalues with the PSD clamp window applied.
fn gram_eigenvalues_to_sigma(
    diag: &[ComplexScalar],
    x: &Matrix,
    tol: &ToleranceConfig,
) -> Result<Vec<f64>> {
    clamp_gram_eigenvalues(diag, diag.len(), x, tol)
}

/// Eigenvalues of `x x^H` are non-negative real in exact arithmetic; values
/// within `window = n * rtol * ||x||_F^2` of zero collapse to exactly zero
/// (on both sides, so a true zero singular value survives the square root
/// without noise amplification), anything below `-window` is a numerical
/// failure.
fn clamp_gram_eigenvalues(
    diag: &[ComplexScalar],
    n: usize,
    x: &Matrix,
    tol: &ToleranceConfig,
) -> Result<Vec<f64>> {
    let fro = x.frobenius_norm();
    let window = n as f64 * tol.rtol * fro * fro;
    let mut out = Vec::with_capacity(diag.len());
    for (j, lam) in diag.iter().enumerate() {
        if lam.im.abs() > window || lam.re < -window {
            return Err(Error::InternalDiagnostic(format!(
                "gram eigenvalue {j} is {lam} where a non-negative real was expected"
            )));
        }
        out.push(if lam.re <= window { 0.0 } else { lam.re.sqrt() });
    }
    Ok(out)
}

/// Splits each cluster of the partition into runs of equal `diag_b` values,
/// producing the joint eigenspaces of the two Gram matrices. Cluster columns
/// arrive sorted by `diag_b`, so runs are contiguous.
fn refine_by_diag_b(sd: &SimDiagResult, tol: &ToleranceConfig) -> SpectralPartition {
    let scale = sd.diag_b.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let radius = tol.cluster_tol * scale;
    let mut clusters = Vec::new();
    for cluster in &sd.partition.clusters {
        let mut run: Vec<usize> = Vec::new();
        for &idx in &cluster.indices {
            if let Some(&prev) = run.last() {
                if (sd.diag_b[idx] - sd.diag_b[prev]).norm() > radius {
                    clusters.push(Cluster {
                        representative: cluster.representative,
                        indices: std::mem::take(&mut run),
                    });
                }
            }
            run.push(idx);
        }
        if !run.is_empty() {
            clusters.push(Cluster {
                representative: cluster.representative,
                indices: run,
            });
        }
    }
    SpectralPartition { clusters }
}

/// Right singular vectors: `v_j` is `x^H u_j` scaled to unit length where
/// `sigma_j` is non-negligible; remaining columns are completed to an
/// orthonormal basis from identity columns in index order. The realized
/// column norm stands in for `sigma_j`, which at tiny singular values
/// carries the gram eigenvalue's absolute error.
fn right_vectors(x: &Matrix, u: &Matrix, sigma: &[f64], tol: &ToleranceConfig) -> Result<Matrix> {
    let n = x.rows();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let threshold = tol.rtol * sigma_max;
    let xhu = x.conj_transpose().matmul(u)?;

    let mut v = Matrix::zeros(n, n);
    let mut present: Vec<usize> = Vec::new();
    let mut empty: Vec<usize> = Vec::new();
    for j in 0..n {
        let norm: f64 = (0..n).map(|i| xhu[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if sigma[j] > threshold && norm > 0.0 {
            let inv = ComplexScalar::new(1.0 / norm, 0.0);
            for i in 0..n {
                v[(i, j)] = xhu[(i, j)] * inv;
            }
            present.push(j);
        } else {
            empty.push(j);
        }
    }

    // Completion: march identity columns, keep what survives projection.
    let accept = 0.5 / (n as f64).sqrt();
    let mut candidate = 0usize;
    for &slot in &empty {
        loop {
            if candidate >= n {
                return Err(Error::InternalDiagnostic(
                    "orthonormal completion of the right factor ran out of candidates".into(),
                ));
            }
            let mut w = vec![ComplexScalar::new(0.0, 0.0); n];
            w[candidate] = ComplexScalar::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for &p in &present {
                    let mut dot = ComplexScalar::new(0.0, 0.0);
                    for i in 0..n {
                        dot += v[(i, p)].conj() * w[i];
                    }
                    for i in 0..n {
                        let upd = dot * v[(i, p)];
                        w[i] -= upd;
                    }
                }
            }
            let norm = w.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
            if norm > accept {
                let inv = ComplexScalar::new(1.0 / norm, 0.0);
                for i in 0..n {
                    v[(i, slot)] = w[i] * inv;
                }
                present.push(slot);
                break;
            }
        }
    }
    Ok(v)
}

/// `||x - u diag(sigma) v^H||_F / ||x||_F` with a zero-matrix guard.
fn reconstruction_residual(x: &Matrix, u: &Matrix, sigma: &[f64], v: &Matrix) -> Result<f64> {
    let mut us = u.clone();
    for j in 0..us.cols() {
        for i in 0..us.rows() {
            us[(i, j)] *= ComplexScalar::new(sigma[j], 0.0);
        }
    }
    let recon = us.matmul(&v.conj_transpose())?;
    let num = x.sub(&recon)?.frobenius_norm();
    let den = x.frobenius_norm();
    Ok(if den == 0.0 { num } else { num / den })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::{ex1_a, ex1_b, ex2_a, ex2_b, ex3_a, ex3_b, r};

    fn sorted_desc(xs: &[f64]) -> Vec<f64> {
        let mut v = xs.to_vec();
        v.sort_by(|p, q| q.total_cmp(p));
        v
    }

    fn assert_close_seq(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "{g} vs {w}");
        }
    }

    #[test]
    fn star_commute_accepts_and_rejects() {
        let tol = ToleranceConfig::default();
        let (ok, _) = check_star_commute(&ex1_a(), &ex1_b(), &tol).unwrap();
        assert!(ok);
        let (ok, _) = check_star_commute(&ex3_a(), &ex3_b(), &tol).unwrap();
        assert!(ok);
        let nil = Matrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(0.0), r(0.0)]]).unwrap();
        let (ok, res) = check_star_commute(&nil, &nil, &tol).unwrap();
        assert!(!ok);
        assert!(res > 0.5);
    }

    #[test]
    fn svd_example1() {
        let tol = ToleranceConfig::default();
        let out = svd_commuting_pair(&ex1_a(), &ex1_b(), &tol).unwrap();
        let s3 = 3.0f64.sqrt();
        assert_close_seq(
            &sorted_desc(&out.sigma_a),
            &[10.0f64.sqrt(), 1.0, 1.0],
            1e-9,
        );
        assert_close_seq(
            &sorted_desc(&out.sigma_b),
            &[12.0, 4.0 * s3, 2.0 * s3],
            1e-9,
        );
        assert!(out.residual_a <= 1e-10);
        assert!(out.residual_b <= 1e-10);
        assert!(unitarity_defect(&out.u) <= 1e-12);
        assert!(unitarity_defect(&out.v_a) <= 1e-12);
        assert!(unitarity_defect(&out.v_b) <= 1e-12);
    }

    #[test]
    fn svd_example2() {
        let tol = ToleranceConfig::default();
        let out = svd_commuting_pair(&ex2_a(), &ex2_b(), &tol).unwrap();
        assert_close_seq(&sorted_desc(&out.sigma_a), &[4.0, 4.0, 1.0, 1.0], 1e-10);
        assert_close_seq(&out.sigma_b, &[1.0, 1.0, 1.0, 1.0], 1e-10);
        assert!(out.residual_a <= 1e-10);
        assert!(out.residual_b <= 1e-10);
    }

    #[test]
    fn svd_example3_multisets() {
        let tol = ToleranceConfig::default();
        let out = svd_commuting_pair(&ex3_a(), &ex3_b(), &tol).unwrap();
        let s2 = 2.0f64.sqrt();
        assert_close_seq(
            &sorted_desc(&out.sigma_a),
            &[10.0, 10.0, 4.0, 4.0, 2.0, 0.0],
            1e-9,
        );
        assert_close_seq(
            &sorted_desc(&out.sigma_b),
            &[3.0 * s2, 3.0 * s2, 0.0, 0.0, 0.0, 0.0],
            1e-9,
        );
    }

    #[test]
    fn svd_zero_matrix() {
        let tol = ToleranceConfig::default();
        let zero = Matrix::zeros(3, 3);
        let out = svd_commuting_pair(&zero, &Matrix::identity(3), &tol).unwrap();
        assert_eq!(out.sigma_a, vec![0.0, 0.0, 0.0]);
        assert_close_seq(&out.sigma_b, &[1.0, 1.0, 1.0], 1e-12);
        assert_eq!(out.residual_a, 0.0);
        assert!(out.residual_b <= 1e-12);
        assert_eq!(out.v_a, Matrix::identity(3));
    }

    #[test]
    fn verify_reports_violations() {
        let tol = ToleranceConfig::default();
        let id = Matrix::identity(2);
        let rep = verify_svd(&id, &id, &[1.0, 1.0], &id, &tol).unwrap();
        assert_eq!(rep.reconstruction_residual, 0.0);
        assert_eq!(rep.u_unitarity_residual, 0.0);
        assert_eq!(rep.v_unitarity_residual, 0.0);

        let mut bad_u = id.clone();
        bad_u[(0, 1)] += r(0.1);
        let rep = verify_svd(&id, &bad_u, &[1.0, 1.0], &id, &tol).unwrap();
        assert!(rep.u_unitarity_residual > tol.rtol);
    }

    #[test]
    fn sorting_keeps_factorization_valid() {
        let tol = ToleranceConfig::default();
        let out = svd_commuting_pair(&ex2_a(), &ex2_b(), &tol).unwrap();
        let sorted = sort_descending(&out);
        assert_eq!(sorted.sigma_a, sorted_desc(&out.sigma_a));
        let rep = verify_svd(&ex2_a(), &sorted.u, &sorted.sigma_a, &sorted.v_a, &tol).unwrap();
        assert!(rep.reconstruction_residual <= 1e-12);
        let rep = verify_svd(&ex2_b(), &sorted.u, &sorted.sigma_b, &sorted.v_b, &tol).unwrap();
        assert!(rep.reconstruction_residual <= 1e-12);
    }

    #[test]
    fn singular_values_standalone() {
        let tol = ToleranceConfig::default();
        let sv = singular_values(&ex3_a(), &tol).unwrap();
        assert_close_seq(&sv, &[10.0, 10.0, 4.0, 4.0, 2.0, 0.0], 1e-9);
        let wide = Matrix::from_rows(&[vec![r(1.0), r(0.0), r(0.0)], vec![r(0.0), r(2.0), r(0.0)]])
            .unwrap();
        let sv = singular_values(&wide, &tol).unwrap();
        assert_close_seq(&sv, &[2.0, 1.0], 1e-12);
        let sv = singular_values(&Matrix::zeros(2, 2), &tol).unwrap();
        assert_eq!(sv, vec![0.0, 0.0]);
    }

    #[test]
    fn svd_rejects_non_star_commuting() {
        let tol = ToleranceConfig::default();
        // Commutes with itself but fails the star condition.
        let nil = Matrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(0.0), r(0.0)]]).unwrap();
        let err = svd_commuting_pair(&nil, &nil, &tol).unwrap_err();
        assert!(matches!(err, Error::NotStarCommuting { .. }));
    }
}
