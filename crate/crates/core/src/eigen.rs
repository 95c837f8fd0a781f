//! Complex eigendecomposition: Hessenberg reduction followed by an implicit
//! single-shift QR iteration, eigenvectors by back-substitution on the
//! triangular Schur factor.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::{mgs_orthonormalize_columns, ComplexScalar, Matrix};
use crate::simdiag::SpectralPartition;
use crate::tolerance::ToleranceConfig;

const EPS: f64 = f64::EPSILON;

/// QR sweeps allowed without any deflation before giving up, the
/// conventional per-eigenvalue safety factor.
const WINDOW_SWEEP_BUDGET: usize = 30;

/// After this many fruitless sweeps on one window the deflation scan retries
/// with the threshold widened by `STAGNATION_RELAX`. Matrices with tightly
/// repeated eigenvalues can freeze a subdiagonal a few ulps above the strict
/// line; zeroing it is still a backward-stable perturbation.
const STAGNATION_SWEEPS: usize = 20;
const STAGNATION_RELAX: f64 = 64.0;

/// Eigenvector matrix, eigenvalues, and diagnostics for one matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Eigenvector matrix; columns have unit 2-norm and canonical phase.
    pub s: Matrix,
    /// Eigenvalues aligned with the columns of `s`, in canonical order
    /// (descending real part, ties by descending imaginary part).
    pub eigenvalues: Vec<ComplexScalar>,
    /// `||a*s - s*diag(eigenvalues)||_F / ||a||_F`.
    pub residual: f64,
    /// `||s||_F * ||s^-1||_F`.
    pub cond_estimate: f64,
    /// Whether `s^H s = I` holds within `rtol * n`.
    pub is_unitary: bool,
}

/// Canonical eigenvalue comparison: descending real part, ties broken by
/// descending imaginary part.
pub fn canonical_cmp(a: &ComplexScalar, b: &ComplexScalar) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

/// Full eigendecomposition of a square complex matrix.
///
/// Fails with `NotDiagonalizable` when the eigenvector matrix is singular to
/// tolerance, its condition estimate exceeds `cond_max`, or the
/// diagonalization residual exceeds `rtol`; with `NonConvergence` when the
/// QR iteration exhausts its sweep budget of `30 * n`.
pub fn eigendecompose(a: &Matrix, tol: &ToleranceConfig) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let (t, z) = schur(a)?;
    let eigenvalues: Vec<ComplexScalar> = (0..n).map(|i| t[(i, i)]).collect();
    let y = eigenvectors_from_schur(&t);
    let mut s = z.matmul(&y)?;
    normalize_columns(&mut s);
    canonicalize_column_phases(&mut s);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| canonical_cmp(&eigenvalues[i], &eigenvalues[j]));
    let s = s.select_columns(&order);
    let eigenvalues: Vec<ComplexScalar> = order.iter().map(|&i| eigenvalues[i]).collect();

    let residual = diagonalization_residual(a, &s, &eigenvalues)?;
    let s_inv = s.inverse(tol).map_err(|e| match e {
        Error::SingularMatrix { pivot, .. } => Error::NotDiagonalizable(format!(
            "eigenvector matrix is singular to tolerance (pivot {pivot:.3e})"
        )),
        other => other,
    })?;
    let cond_estimate = s.frobenius_norm() * s_inv.frobenius_norm();
    if cond_estimate > tol.cond_max {
        return Err(Error::NotDiagonalizable(format!(
            "eigenvector condition estimate {cond_estimate:.3e} exceeds cond_max {:.3e}",
            tol.cond_max
        )));
    }
    if residual > tol.rtol {
        return Err(Error::NotDiagonalizable(format!(
            "diagonalization residual {residual:.3e} exceeds rtol {:.3e}",
            tol.rtol
        )));
    }
    let is_unitary = unitarity_defect(&s) <= tol.rtol * n as f64;
    Ok(EigenDecomposition {
        s,
        eigenvalues,
        residual,
        cond_estimate,
        is_unitary,
    })
}

/// Eigenvalues alone, in canonical order. Works for defective matrices too,
/// since no eigenvectors are extracted.
pub fn eigenvalues_only(a: &Matrix) -> Result<Vec<ComplexScalar>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let (t, _) = schur(a)?;
    let mut eigenvalues: Vec<ComplexScalar> = (0..a.rows()).map(|i| t[(i, i)]).collect();
    eigenvalues.sort_by(canonical_cmp);
    Ok(eigenvalues)
}

/// Whether `a a^H = a^H a` within `rtol * ||a||_F^2`.
pub fn is_normal(a: &Matrix, tol: &ToleranceConfig) -> bool {
    if !a.is_square() {
        return false;
    }
    let ah = a.conj_transpose();
    let lhs = a.matmul(&ah).expect("square product");
    let rhs = ah.matmul(a).expect("square product");
    let defect = lhs.sub(&rhs).expect("same shape").frobenius_norm();
    let scale = a.frobenius_norm();
    defect <= tol.rtol * scale * scale
}

/// Replaces each cluster's eigenvector columns with an orthonormal basis of
/// the same span (modified Gram-Schmidt in ascending column order), then
/// re-canonicalizes phases. Intended for decompositions of normal matrices,
/// whose distinct eigenspaces are already orthogonal.
///
/// The `residual` field is carried over from the input: rotating columns
/// within an eigenspace preserves the diagonalization identity.
pub fn orthonormalize_within_eigenspaces(
    d: &EigenDecomposition,
    partition: &SpectralPartition,
    tol: &ToleranceConfig,
) -> Result<EigenDecomposition> {
    let n = d.s.rows();
    let mut seen = vec![false; n];
    for cluster in &partition.clusters {
        for &idx in &cluster.indices {
            if idx >= n || seen[idx] {
                return Err(Error::Dimension(
                    "partition does not match the decomposition order".into(),
                ));
            }
            seen[idx] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::Dimension(
            "partition does not cover every eigenvector column".into(),
        ));
    }

    let mut s = d.s.clone();
    for (ci, cluster) in partition.clusters.iter().enumerate() {
        mgs_orthonormalize_columns(&mut s, &cluster.indices, tol.rtol)
            .map_err(|_| Error::RankDeficientCluster { index: ci })?;
    }
    canonicalize_column_phases(&mut s);

    let s_inv = s.inverse(tol)?;
    let cond_estimate = s.frobenius_norm() * s_inv.frobenius_norm();
    let is_unitary = unitarity_defect(&s) <= tol.rtol * n as f64;
    Ok(EigenDecomposition {
        s,
        eigenvalues: d.eigenvalues.clone(),
        residual: d.residual,
        cond_estimate,
        is_unitary,
    })
}

/// `||a*s - s*D||_F / ||a||_F`, with a zero-matrix guard.
pub(crate) fn diagonalization_residual(
    a: &Matrix,
    s: &Matrix,
    diag: &[ComplexScalar],
) -> Result<f64> {
    let mut defect = a.matmul(s)?;
    for j in 0..s.cols() {
        for i in 0..s.rows() {
            defect[(i, j)] -= s[(i, j)] * diag[j];
        }
    }
    let num = defect.frobenius_norm();
    let den = a.frobenius_norm();
    Ok(if den == 0.0 { num } else { num / den })
}

/// `||s^H s - I||_F`.
pub(crate) fn unitarity_defect(s: &Matrix) -> f64 {
    let gram = s.conj_transpose().matmul(s).expect("square product");
    gram.sub(&Matrix::identity(s.cols()))
        .expect("same shape")
        .frobenius_norm()
}

/// Scales every column to unit 2-norm (zero columns are left alone).
pub(crate) fn normalize_columns(m: &mut Matrix) {
    for j in 0..m.cols() {
        let nrm = m.col_norm(j);
        if nrm > 0.0 {
            let inv = ComplexScalar::new(1.0 / nrm, 0.0);
            for i in 0..m.rows() {
                m[(i, j)] *= inv;
            }
        }
    }
}

/// Rotates each column so its largest-magnitude entry (lowest row index on
/// ties) is real and positive.
pub(crate) fn canonicalize_column_phases(m: &mut Matrix) {
    for j in 0..m.cols() {
        let mut imax = 0;
        let mut best = 0.0;
        for i in 0..m.rows() {
            let mag = m[(i, j)].norm();
            if mag > best {
                best = mag;
                imax = i;
            }
        }
        if best == 0.0 {
            continue;
        }
        let phase = m[(imax, j)] / ComplexScalar::new(best, 0.0);
        let rot = phase.conj();
        for i in 0..m.rows() {
            m[(i, j)] *= rot;
        }
        m[(imax, j)] = ComplexScalar::new(best, 0.0);
    }
}

/// Unitary similarity to upper Hessenberg form by Householder reflectors.
/// Returns `(h, q)` with `a = q h q^H`.
fn hessenberg(a: &Matrix) -> (Matrix, Matrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    if n <= 2 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let m = n - k - 1;
        let mut v: Vec<ComplexScalar> = (0..m).map(|i| h[(k + 1 + i, k)]).collect();
        let xnorm = v.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let alpha = v[0];
        let phase = if alpha.norm() == 0.0 {
            ComplexScalar::new(1.0, 0.0)
        } else {
            alpha / ComplexScalar::new(alpha.norm(), 0.0)
        };
        v[0] += phase * xnorm;
        let vnorm_sqr: f64 = v.iter().map(|e| e.norm_sqr()).sum();
        if vnorm_sqr == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sqr;

        // Left: rows k+1..n of h.
        for j in k..n {
            let mut s = ComplexScalar::new(0.0, 0.0);
            for i in 0..m {
                s += v[i].conj() * h[(k + 1 + i, j)];
            }
            s *= beta;
            for i in 0..m {
                let upd = v[i] * s;
                h[(k + 1 + i, j)] -= upd;
            }
        }
        // Right: columns k+1..n of h and of q.
        for i in 0..n {
            let mut s = ComplexScalar::new(0.0, 0.0);
            for j in 0..m {
                s += h[(i, k + 1 + j)] * v[j];
            }
            s *= beta;
            for j in 0..m {
                let upd = s * v[j].conj();
                h[(i, k + 1 + j)] -= upd;
            }
        }
        for i in 0..n {
            let mut s = ComplexScalar::new(0.0, 0.0);
            for j in 0..m {
                s += q[(i, k + 1 + j)] * v[j];
            }
            s *= beta;
            for j in 0..m {
                let upd = s * v[j].conj();
                q[(i, k + 1 + j)] -= upd;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ComplexScalar::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Schur decomposition `a = z t z^H` with `t` upper triangular, by implicit
/// single-shift QR with Wilkinson shifts and occasional exceptional shifts.
fn schur(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = a.rows();
    let (mut h, mut z) = hessenberg(a);
    if n == 1 {
        return Ok((h, z));
    }
    let hnorm = h.frobenius_norm();
    let mut sweeps = 0usize;
    let mut window_iters = 0usize;
    let mut last_window = (usize::MAX, usize::MAX);
    let mut hi = n - 1;
    while hi > 0 {
        // Deflate negligible subdiagonal entries and find the active window.
        let relax = if window_iters >= STAGNATION_SWEEPS {
            STAGNATION_RELAX
        } else {
            1.0
        };
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let sub = h[(k, k - 1)].norm();
            let scale = h[(k - 1, k - 1)].norm() + h[(k, k)].norm();
            let thr = relax
                * if scale > 0.0 {
                    EPS * scale
                } else {
                    EPS * hnorm
                };
            if sub <= thr {
                h[(k, k - 1)] = ComplexScalar::new(0.0, 0.0);
                lo = k;
                break;
            }
        }
        if lo == hi {
            hi -= 1;
            continue;
        }
        // The stagnation counter restarts whenever the active window shrinks
        // (deflated entries stay exactly zero, so windows never reopen and
        // the total sweep count stays linear in n).
        if (lo, hi) != last_window {
            last_window = (lo, hi);
            window_iters = 0;
        }
        if window_iters >= WINDOW_SWEEP_BUDGET {
            return Err(Error::NonConvergence { sweeps });
        }
        sweeps += 1;
        window_iters += 1;

        let shift = if window_iters.is_multiple_of(10) {
            h[(hi, hi)] + ComplexScalar::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        // Start the chase below any interior coupling weak enough that a
        // bulge passing through it would only inject roundoff into the
        // trailing block (two consecutive small subdiagonals, as in LAPACK's
        // zlahqr). Skipping the coupling perturbs the matrix by at most a
        // few ulps of the local scale.
        let mut start = lo;
        for m in (lo + 1..hi).rev() {
            let h11s = (h[(m, m)] - shift).norm();
            let h21 = h[(m + 1, m)].norm();
            let s = h11s + h21;
            if s == 0.0 {
                continue;
            }
            let h10 = h[(m, m - 1)].norm();
            let scale = h[(m, m)].norm() + h[(m + 1, m + 1)].norm();
            if h10 * (h21 / s) <= EPS * (h11s / s) * scale {
                start = m;
                break;
            }
        }

        // Implicit bulge chase over the window.
        let mut x = h[(start, start)] - shift;
        let mut y = h[(start + 1, start)];
        for k in start..hi {
            if k > start {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            if r == 0.0 {
                continue;
            }
            let inv = ComplexScalar::new(1.0 / r, 0.0);
            let u = x.conj() * inv;
            let v = y.conj() * inv;
            // Rows k and k+1 from the left by [[u, v], [-conj(v), conj(u)]].
            // The first rotation leaves the column holding the skipped
            // coupling untouched; later ones start at the bulge column.
            let jstart = if k == start { start } else { k - 1 };
            for j in jstart..n {
                let hk = h[(k, j)];
                let hk1 = h[(k + 1, j)];
                h[(k, j)] = u * hk + v * hk1;
                h[(k + 1, j)] = u.conj() * hk1 - v.conj() * hk;
            }
            // The skipped coupling still picks up the rotation's diagonal
            // factor; only the fill below it is dropped, and the start
            // criterion bounds that fill by a few ulps of the local scale.
            if k == start && start > lo {
                h[(start, start - 1)] *= u;
            }
            // Columns k and k+1 from the right by the conjugate transpose.
            for i in 0..n {
                let hk = h[(i, k)];
                let hk1 = h[(i, k + 1)];
                h[(i, k)] = hk * u.conj() + hk1 * v.conj();
                h[(i, k + 1)] = hk1 * u - hk * v;
            }
            for i in 0..n {
                let zk = z[(i, k)];
                let zk1 = z[(i, k + 1)];
                z[(i, k)] = zk * u.conj() + zk1 * v.conj();
                z[(i, k + 1)] = zk1 * u - zk * v;
            }
        }
    }
    // Clear below-diagonal dust so the returned factor is exactly triangular.
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ComplexScalar::new(0.0, 0.0);
        }
    }
    Ok((h, z))
}

/// Eigenvalue of the trailing 2x2 of the active window closest to the
/// bottom-right entry.
fn wilkinson_shift(h: &Matrix, hi: usize) -> ComplexScalar {
    let t11 = h[(hi - 1, hi - 1)];
    let t12 = h[(hi - 1, hi)];
    let t21 = h[(hi, hi - 1)];
    let t22 = h[(hi, hi)];
    let p = (t11 - t22) * ComplexScalar::new(0.5, 0.0);
    let q = (p * p + t12 * t21).sqrt();
    let den_plus = p + q;
    let den_minus = p - q;
    let den = if den_plus.norm() >= den_minus.norm() {
        den_plus
    } else {
        den_minus
    };
    if den.norm() == 0.0 {
        return t22;
    }
    t22 - t12 * t21 / den
}

/// Unit-diagonal eigenvector matrix of an upper-triangular factor by
/// back-substitution, with near-zero divisors floored at the machine
/// precision scale of `t`.
fn eigenvectors_from_schur(t: &Matrix) -> Matrix {
    let n = t.rows();
    let tnorm = t.frobenius_norm();
    let floor = EPS * if tnorm > 0.0 { tnorm } else { 1.0 };
    let mut y = Matrix::zeros(n, n);
    for j in 0..n {
        let lambda = t[(j, j)];
        y[(j, j)] = ComplexScalar::new(1.0, 0.0);
        for i in (0..j).rev() {
            let mut num = ComplexScalar::new(0.0, 0.0);
            for k in i + 1..=j {
                num += t[(i, k)] * y[(k, j)];
            }
            let mut den = t[(i, i)] - lambda;
            if den.norm() < floor {
                den = ComplexScalar::new(floor, 0.0);
            }
            let val = -num / den;
            y[(i, j)] = val;
            // Guard against growth through near-singular divisors.
            if val.norm() > 1e100 {
                let inv = ComplexScalar::new(1.0 / val.norm(), 0.0);
                for k in i..=j {
                    y[(k, j)] *= inv;
                }
            }
        }
    }
    y
}
