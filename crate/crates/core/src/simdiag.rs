//! Simultaneous diagonalization of a commuting pair: eigendecompose the
//! first matrix, cluster its eigenvalues, restrict the second matrix to each
//! eigenspace, and diagonalize the restriction blocks.

use num_complex::Complex64;

use crate::eigen::{
    canonical_cmp, canonicalize_column_phases, diagonalization_residual, eigendecompose,
    normalize_columns, EigenDecomposition,
};
use crate::error::{Error, Result};
use crate::matrix::{ComplexScalar, Matrix};
use crate::tolerance::ToleranceConfig;

/// One eigenvalue cluster: its representative value and the columns it owns.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    /// Mean of the clustered eigenvalues.
    pub representative: ComplexScalar,
    /// Column indices belonging to this cluster, ascending.
    pub indices: Vec<usize>,
}

/// Eigenvalue clusters in canonical order of their representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPartition {
    pub clusters: Vec<Cluster>,
}

impl SpectralPartition {
    /// Number of clusters.
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    /// True when every eigenvalue sits in its own cluster.
    pub fn all_singletons(&self) -> bool {
        self.clusters.iter().all(|c| c.indices.len() == 1)
    }
}

/// Restrictions of the second matrix to the eigenspaces of the first.
#[derive(Clone, Debug)]
pub struct RestrictionBlocks {
    /// One block per cluster, in cluster order.
    pub blocks: Vec<Matrix>,
    /// Frobenius norm of the entries outside the block structure.
    pub off_block_residual: f64,
}

/// Output of `simultaneous_diagonalize`.
#[derive(Clone, Debug)]
pub struct SimDiagResult {
    /// Common eigenvector matrix; columns have unit 2-norm and canonical
    /// phase, ordered cluster-major.
    pub s_common: Matrix,
    /// Eigenvalues of `a` per column, snapped to cluster representatives.
    pub diag_a: Vec<ComplexScalar>,
    /// Eigenvalues of `b` per column.
    pub diag_b: Vec<ComplexScalar>,
    /// Clusters of `diag_a`, re-indexed to the output column order (each
    /// cluster owns a contiguous index range).
    pub partition: SpectralPartition,
    /// `||a*s - s*diag_a||_F / ||a||_F`.
    pub residual_a: f64,
    /// `||b*s - s*diag_b||_F / ||b||_F`.
    pub residual_b: f64,
    /// True when `a` had all-distinct eigenvalues and its eigenvector matrix
    /// was reused unchanged.
    pub used_shortcut: bool,
}

/// Correspondence between the columns of two eigenvector matrices:
/// `s2.column(j) ~ scales[j] * s1.column(permutation[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnCorrespondence {
    pub permutation: Vec<usize>,
    pub scales: Vec<ComplexScalar>,
}

/// Relative commutator residual `||ab - ba||_F / (||a||_F ||b||_F + atol)`
/// and whether it passes at `rtol`.
pub fn check_commute(a: &Matrix, b: &Matrix, tol: &ToleranceConfig) -> Result<(bool, f64)> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::Dimension(format!(
            "commutator needs square matrices of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    let num = ab.sub(&ba)?.frobenius_norm();
    let residual = num / (a.frobenius_norm() * b.frobenius_norm() + tol.atol);
    Ok((residual <= tol.rtol, residual))
}

/// Groups eigenvalues by single-linkage at radius `cluster_tol * scale`,
/// where `scale` is the largest eigenvalue magnitude. Errors with
/// `AmbiguousClustering` when a cluster's diameter exceeds ten times the
/// linkage radius or two cluster representatives sit within one radius.
pub fn cluster_eigenvalues(
    eigenvalues: &[ComplexScalar],
    tol: &ToleranceConfig,
) -> Result<SpectralPartition> {
    let n = eigenvalues.len();
    let scale = eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let radius = tol.cluster_tol * scale;

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigenvalues[i] - eigenvalues[j]).norm() <= radius {
                let ri = find(&mut parent, i);
                let rj = find(&mut parent, j);
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if group_of[root] == usize::MAX {
            group_of[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of[root]].push(i);
    }

    let mut clusters = Vec::with_capacity(groups.len());
    for members in groups {
        let mut diameter = 0.0f64;
        for (pos, &i) in members.iter().enumerate() {
            for &j in &members[pos + 1..] {
                diameter = diameter.max((eigenvalues[i] - eigenvalues[j]).norm());
            }
        }
        if diameter > 10.0 * radius {
            return Err(Error::AmbiguousClustering {
                spread: diameter,
                limit: 10.0 * radius,
            });
        }
        let sum: ComplexScalar = members.iter().map(|&i| eigenvalues[i]).sum();
        let representative = sum / Complex64::new(members.len() as f64, 0.0);
        clusters.push(Cluster {
            representative,
            indices: members,
        });
    }
    clusters.sort_by(|x, y| canonical_cmp(&x.representative, &y.representative));

    for (pos, ca) in clusters.iter().enumerate() {
        for cb in &clusters[pos + 1..] {
            let sep = (ca.representative - cb.representative).norm();
            if sep <= radius {
                return Err(Error::AmbiguousClustering {
                    spread: sep,
                    limit: radius,
                });
            }
        }
    }
    Ok(SpectralPartition { clusters })
}

/// Computes `t = s_a^-1 b s_a` from the eigendecomposition of `a` and
/// slices out the diagonal blocks belonging to each cluster. Errors with
/// `BlockLeakage` when the mass outside the blocks exceeds `rtol * ||b||_F`.
pub fn restriction_blocks(
    b: &Matrix,
    eig_a: &EigenDecomposition,
    partition: &SpectralPartition,
    tol: &ToleranceConfig,
) -> Result<RestrictionBlocks> {
    let n = b.rows();
    let s_a = &eig_a.s;
    if !b.is_square() || s_a.rows() != n {
        return Err(Error::Dimension(format!(
            "restriction needs square matrices of equal size, got {}x{} and {}x{}",
            b.rows(),
            b.cols(),
            s_a.rows(),
            s_a.cols()
        )));
    }
    let cluster_of = cluster_index_map(partition, n)?;
    let t = s_a.solve(&b.matmul(s_a)?, tol)?;

    let mut off_sqr = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if cluster_of[i] != cluster_of[j] {
                off_sqr += t[(i, j)].norm_sqr();
            }
        }
    }
    let off_block_residual = off_sqr.sqrt();
    let bound = tol.rtol * b.frobenius_norm();
    if off_block_residual > bound {
        return Err(Error::BlockLeakage {
            residual: off_block_residual,
            bound,
        });
    }

    let blocks = partition
        .clusters
        .iter()
        .map(|cluster| {
            let m = cluster.indices.len();
            Matrix::from_fn(m, m, |r, c| t[(cluster.indices[r], cluster.indices[c])])
                .expect("gathered block entries are finite")
        })
        .collect();
    Ok(RestrictionBlocks {
        blocks,
        off_block_residual,
    })
}

/// Simultaneously diagonalizes a commuting pair. When every eigenvalue of
/// `a` is distinct, the eigenvector matrix of `a` is returned unchanged and
/// `used_shortcut` is set.
pub fn simultaneous_diagonalize(
    a: &Matrix,
    b: &Matrix,
    tol: &ToleranceConfig,
) -> Result<SimDiagResult> {
    simdiag_impl(a, b, tol, false)
}

/// Same as `simultaneous_diagonalize` but always runs the full restriction
/// pipeline, even for distinct eigenvalues or already-diagonal blocks.
pub fn simultaneous_diagonalize_full(
    a: &Matrix,
    b: &Matrix,
    tol: &ToleranceConfig,
) -> Result<SimDiagResult> {
    simdiag_impl(a, b, tol, true)
}

fn simdiag_impl(
    a: &Matrix,
    b: &Matrix,
    tol: &ToleranceConfig,
    force_full: bool,
) -> Result<SimDiagResult> {
    let (commutes, commute_residual) = check_commute(a, b, tol)?;
    if !commutes {
        return Err(Error::NotCommuting {
            residual: commute_residual,
        });
    }
    let n = a.rows();
    let ed = eigendecompose(a, tol)?;
    let partition = cluster_eigenvalues(&ed.eigenvalues, tol)?;
    let shortcut = partition.all_singletons() && !force_full;
    let restriction = restriction_blocks(b, &ed, &partition, tol)?;

    let zero = ComplexScalar::new(0.0, 0.0);
    let mut s_t = Matrix::identity(n);
    let mut diag_b = vec![zero; n];
    for (ci, cluster) in partition.clusters.iter().enumerate() {
        let block = &restriction.blocks[ci];
        let m = cluster.indices.len();
        if m == 1 {
            diag_b[cluster.indices[0]] = block[(0, 0)];
            continue;
        }
        if !force_full && block.off_diagonal_norm() <= tol.rtol * block.frobenius_norm() + tol.atol
        {
            for (loc, &g) in cluster.indices.iter().enumerate() {
                diag_b[g] = block[(loc, loc)];
            }
            continue;
        }
        let bed = eigendecompose(block, tol)?;
        for (lc, &gc) in cluster.indices.iter().enumerate() {
            diag_b[gc] = bed.eigenvalues[lc];
            for (lr, &gr) in cluster.indices.iter().enumerate() {
                s_t[(gr, gc)] = bed.s[(lr, lc)];
            }
        }
    }

    let mut s_common = if shortcut {
        ed.s.clone()
    } else {
        let mut product = ed.s.matmul(&s_t)?;
        normalize_columns(&mut product);
        canonicalize_column_phases(&mut product);
        product
    };

    let mut diag_a = vec![zero; n];
    for cluster in &partition.clusters {
        for &g in &cluster.indices {
            diag_a[g] = cluster.representative;
        }
    }

    // Cluster-major output order; within a cluster, canonical order of the
    // b-eigenvalues with the pre-sort index as tie-break.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut out_clusters = Vec::with_capacity(partition.k());
    for cluster in &partition.clusters {
        let mut members = cluster.indices.clone();
        members.sort_by(|&i, &j| canonical_cmp(&diag_b[i], &diag_b[j]).then(i.cmp(&j)));
        let start = order.len();
        order.extend_from_slice(&members);
        out_clusters.push(Cluster {
            representative: cluster.representative,
            indices: (start..start + members.len()).collect(),
        });
    }
    s_common = s_common.select_columns(&order);
    let diag_a: Vec<ComplexScalar> = order.iter().map(|&i| diag_a[i]).collect();
    let diag_b: Vec<ComplexScalar> = order.iter().map(|&i| diag_b[i]).collect();

    let s_inv = s_common.inverse(tol).map_err(|e| match e {
        Error::SingularMatrix { pivot, .. } => Error::NotDiagonalizable(format!(
            "common eigenvector matrix is singular to tolerance (pivot {pivot:.3e})"
        )),
        other => other,
    })?;
    let cond = s_common.frobenius_norm() * s_inv.frobenius_norm();
    if cond > tol.cond_max {
        return Err(Error::NotDiagonalizable(format!(
            "common eigenvector condition estimate {cond:.3e} exceeds cond_max {:.3e}",
            tol.cond_max
        )));
    }
    let residual_a = diagonalization_residual(a, &s_common, &diag_a)?;
    let residual_b = diagonalization_residual(b, &s_common, &diag_b)?;
    if residual_a > tol.rtol {
        return Err(Error::NotDiagonalizable(format!(
            "residual for the first matrix {residual_a:.3e} exceeds rtol {:.3e}",
            tol.rtol
        )));
    }
    if residual_b > tol.rtol {
        return Err(Error::NotDiagonalizable(format!(
            "residual for the second matrix {residual_b:.3e} exceeds rtol {:.3e}",
            tol.rtol
        )));
    }
    Ok(SimDiagResult {
        s_common,
        diag_a,
        diag_b,
        partition: SpectralPartition {
            clusters: out_clusters,
        },
        residual_a,
        residual_b,
        used_shortcut: shortcut,
    })
}

/// Matches each column of `s2` to the unique parallel, not-yet-matched
/// column of `s1`, so `s2.column(j) ~ scales[j] * s1.column(permutation[j])`.
/// Errors with `NoCorrespondence` when a column is numerically zero, has no
/// parallel partner, or has more than one.
pub fn column_correspondence(
    s1: &Matrix,
    s2: &Matrix,
    tol: &ToleranceConfig,
) -> Result<ColumnCorrespondence> {
    if s1.rows() != s2.rows() || s1.cols() != s2.cols() {
        return Err(Error::Dimension(format!(
            "column correspondence needs equal shapes, got {}x{} and {}x{}",
            s1.rows(),
            s1.cols(),
            s2.rows(),
            s2.cols()
        )));
    }
    let rows = s1.rows();
    let n = s1.cols();
    let norms1: Vec<f64> = (0..n).map(|j| s1.col_norm(j)).collect();
    let norms2: Vec<f64> = (0..n).map(|j| s2.col_norm(j)).collect();
    for j in 0..n {
        if norms1[j] <= tol.atol || norms2[j] <= tol.atol {
            return Err(Error::NoCorrespondence(format!(
                "column {j} is numerically zero"
            )));
        }
    }

    let mut taken = vec![false; n];
    let mut permutation = vec![0usize; n];
    let mut scales = vec![ComplexScalar::new(0.0, 0.0); n];
    for j in 0..n {
        let mut found: Option<usize> = None;
        for k in 0..n {
            // Distance from the normalized s2 column to its projection onto
            // the normalized s1 column.
            let mut dot = ComplexScalar::new(0.0, 0.0);
            for i in 0..rows {
                dot += s1[(i, k)].conj() * s2[(i, j)];
            }
            dot /= ComplexScalar::new(norms1[k] * norms2[j], 0.0);
            let mut defect_sqr = 0.0f64;
            for i in 0..rows {
                let w = s2[(i, j)] / ComplexScalar::new(norms2[j], 0.0)
                    - dot * s1[(i, k)] / ComplexScalar::new(norms1[k], 0.0);
                defect_sqr += w.norm_sqr();
            }
            if defect_sqr.sqrt() <= tol.rtol {
                if found.is_some() {
                    return Err(Error::NoCorrespondence(format!(
                        "column {j} is parallel to more than one column"
                    )));
                }
                found = Some(k);
            }
        }
        let k = found.ok_or_else(|| {
            Error::NoCorrespondence(format!("column {j} has no parallel partner"))
        })?;
        if taken[k] {
            return Err(Error::NoCorrespondence(format!(
                "column {k} matched more than once"
            )));
        }
        taken[k] = true;
        permutation[j] = k;
        let mut dot = ComplexScalar::new(0.0, 0.0);
        for i in 0..rows {
            dot += s1[(i, k)].conj() * s2[(i, j)];
        }
        scales[j] = dot / ComplexScalar::new(norms1[k] * norms1[k], 0.0);
    }
    Ok(ColumnCorrespondence {
        permutation,
        scales,
    })
}

/// Maps column index to cluster index, validating that the partition covers
/// `0..n` exactly once.
fn cluster_index_map(partition: &SpectralPartition, n: usize) -> Result<Vec<usize>> {
    let mut cluster_of = vec![usize::MAX; n];
    for (ci, cluster) in partition.clusters.iter().enumerate() {
        for &idx in &cluster.indices {
            if idx >= n || cluster_of[idx] != usize::MAX {
                return Err(Error::Dimension(
                    "partition does not match the matrix size".into(),
                ));
            }
            cluster_of[idx] = ci;
        }
    }
    if cluster_of.contains(&usize::MAX) {
        return Err(Error::Dimension(
            "partition does not cover every column".into(),
        ));
    }
    Ok(cluster_of)
}
