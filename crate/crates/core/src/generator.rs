//! Seeded synthesis of commuting and star-commuting test pairs with a
//! prescribed eigenvalue multiplicity structure.

use crate::error::{Error, Result};
use crate::matrix::{mgs_orthonormalize_columns, ComplexScalar, Matrix};

/// RNG identifier embedded in emitted fixtures so the "same seed, same
/// matrices" contract survives reimplementation.
pub const RNG_ALGORITHM: &str = "splitmix64/box-muller-v1";

/// Eigenvalue sampling domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenvalueMode {
    /// Uniform in the complex disk of radius 10.
    Complex,
    /// Uniform real in [-10, 10].
    Real,
    /// Uniform real in [0, 10].
    Nonneg,
}

/// Similarity basis construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisMode {
    /// Random unitary basis (orthonormalized complex Gaussian).
    Unitary,
    /// Basis with Frobenius condition number near `cond_target`.
    General { cond_target: f64 },
}

/// Recipe for one generated pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSpec {
    pub n: usize,
    /// Eigenvalue multiplicities of the first matrix; must sum to `n`.
    pub multiplicities_a: Vec<usize>,
    pub eigenvalue_mode: EigenvalueMode,
    pub basis_mode: BasisMode,
    pub seed: u64,
}

impl PairSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("matrix order must be positive".into()));
        }
        if self.multiplicities_a.is_empty() || self.multiplicities_a.contains(&0) {
            return Err(Error::InvalidSpec(
                "multiplicities must be positive and non-empty".into(),
            ));
        }
        let total: usize = self.multiplicities_a.iter().sum();
        if total != self.n {
            return Err(Error::InvalidSpec(format!(
                "multiplicities sum to {total}, expected {}",
                self.n
            )));
        }
        if let BasisMode::General { cond_target } = self.basis_mode {
            if !(cond_target >= 1.0 && cond_target.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "cond_target must be a finite value >= 1, got {cond_target}"
                )));
            }
        }
        Ok(())
    }
}

/// SplitMix64: a tiny counter-based generator with a stable, documented
/// algorithm (see `RNG_ALGORITHM`).
pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub(crate) fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; u1 is kept in (0, 1] so the log is
    /// finite.
    pub(crate) fn gaussian(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Commuting pair `a = s d_a s^-1`, `b = s d_b s^-1` over a shared basis.
/// `a` carries the prescribed multiplicities; `b` has all-distinct
/// eigenvalues. Deterministic per seed.
pub fn generate_commuting_pair(spec: &PairSpec) -> Result<(Matrix, Matrix)> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let reps = draw_eigenvalues(
        &mut rng,
        spec.multiplicities_a.len(),
        spec.eigenvalue_mode,
        false,
    )?;
    let d_a = expand_multiplicities(&reps, &spec.multiplicities_a);
    let d_b = draw_eigenvalues(&mut rng, spec.n, spec.eigenvalue_mode, false)?;
    let (s, s_inv) = draw_basis(&mut rng, spec.n, spec.basis_mode, false)?;
    let a = similarity(&s, &d_a, &s_inv)?;
    let b = similarity(&s, &d_b, &s_inv)?;
    Ok((a, b))
}

/// Star-commuting pair: `a` real symmetric over a real orthogonal basis,
/// `b` sharing the basis with eigenvalues per `eigenvalue_mode`. Requires
/// the unitary basis mode.
pub fn generate_star_commuting_pair(spec: &PairSpec) -> Result<(Matrix, Matrix)> {
    generate_star_commuting_pair_singular(spec, 0, 0)
}

/// Star-commuting pair with exact zeros injected: the first
/// `zero_clusters_a` eigenvalue clusters of `a` (at most one) and the first
/// `zero_entries_b` diagonal entries of `b` are set to zero, producing
/// singular factors for SVD edge-case tests.
pub fn generate_star_commuting_pair_singular(
    spec: &PairSpec,
    zero_clusters_a: usize,
    zero_entries_b: usize,
) -> Result<(Matrix, Matrix)> {
    spec.validate()?;
    if spec.basis_mode != BasisMode::Unitary {
        return Err(Error::InvalidSpec(
            "star-commuting generation requires the unitary basis mode".into(),
        ));
    }
    if zero_clusters_a > 1 {
        return Err(Error::InvalidSpec(
            "at most one eigenvalue cluster of a can be zeroed".into(),
        ));
    }
    if zero_clusters_a > spec.multiplicities_a.len() || zero_entries_b > spec.n {
        return Err(Error::InvalidSpec(
            "zero counts exceed the available clusters or entries".into(),
        ));
    }
    let inject = zero_clusters_a > 0 || zero_entries_b > 0;
    let mut rng = SplitMix64::new(spec.seed);
    let mut reps = draw_eigenvalues(
        &mut rng,
        spec.multiplicities_a.len(),
        EigenvalueMode::Real,
        inject,
    )?;
    for rep in reps.iter_mut().take(zero_clusters_a) {
        *rep = ComplexScalar::new(0.0, 0.0);
    }
    let d_a = expand_multiplicities(&reps, &spec.multiplicities_a);
    let mut d_b = draw_eigenvalues(&mut rng, spec.n, spec.eigenvalue_mode, inject)?;
    for entry in d_b.iter_mut().take(zero_entries_b) {
        *entry = ComplexScalar::new(0.0, 0.0);
    }
    let (s, s_inv) = draw_basis(&mut rng, spec.n, BasisMode::Unitary, true)?;
    let mut a = similarity(&s, &d_a, &s_inv)?;
    symmetrize(&mut a);
    let b = similarity(&s, &d_b, &s_inv)?;
    Ok((a, b))
}

/// Eigenvalues with pairwise gaps of at least `min_gap`; `avoid_zero` also
/// keeps them `min_gap` away from the origin so zeros can be injected later
/// without creating near-degeneracies.
fn draw_eigenvalues(
    rng: &mut SplitMix64,
    k: usize,
    mode: EigenvalueMode,
    avoid_zero: bool,
) -> Result<Vec<ComplexScalar>> {
    // Gap scaled to keep rejection viable when the domain gets crowded.
    let min_gap = match mode {
        EigenvalueMode::Nonneg => (4.0 / k as f64).min(0.5),
        _ => (8.0 / k as f64).min(0.5),
    };
    let mut out: Vec<ComplexScalar> = Vec::with_capacity(k);
    let mut attempts = 0usize;
    while out.len() < k {
        attempts += 1;
        if attempts > 10_000 * k.max(1) {
            return Err(Error::InternalDiagnostic(
                "eigenvalue rejection sampling exhausted its attempt budget".into(),
            ));
        }
        let cand = match mode {
            EigenvalueMode::Complex => {
                let re = (2.0 * rng.next_f64() - 1.0) * 10.0;
                let im = (2.0 * rng.next_f64() - 1.0) * 10.0;
                let z = ComplexScalar::new(re, im);
                if z.norm() > 10.0 {
                    continue;
                }
                z
            }
            EigenvalueMode::Real => ComplexScalar::new((2.0 * rng.next_f64() - 1.0) * 10.0, 0.0),
            EigenvalueMode::Nonneg => ComplexScalar::new(rng.next_f64() * 10.0, 0.0),
        };
        if avoid_zero && cand.norm() < min_gap {
            continue;
        }
        if out.iter().any(|prev| (cand - prev).norm() < min_gap) {
            continue;
        }
        out.push(cand);
    }
    Ok(out)
}

fn expand_multiplicities(reps: &[ComplexScalar], mults: &[usize]) -> Vec<ComplexScalar> {
    let mut out = Vec::new();
    for (rep, &m) in reps.iter().zip(mults) {
        out.extend(std::iter::repeat_n(*rep, m));
    }
    out
}

/// Basis and its inverse. Unitary mode returns `(q, q^H)`; general mode
/// builds `q1 d q2` with geometrically spaced singular values, whose inverse
/// `q2^H d^-1 q1^H` is assembled explicitly rather than solved for.
fn draw_basis(
    rng: &mut SplitMix64,
    n: usize,
    mode: BasisMode,
    real: bool,
) -> Result<(Matrix, Matrix)> {
    match mode {
        BasisMode::Unitary => {
            let q = draw_orthonormal(rng, n, real)?;
            let q_inv = q.conj_transpose();
            Ok((q, q_inv))
        }
        BasisMode::General { cond_target } => {
            let q1 = draw_orthonormal(rng, n, real)?;
            let q2 = draw_orthonormal(rng, n, real)?;
            let sv: Vec<f64> = (0..n)
                .map(|i| {
                    if n == 1 {
                        1.0
                    } else {
                        cond_target.powf(i as f64 / (n - 1) as f64)
                    }
                })
                .collect();
            let mut s = q1.clone();
            scale_columns(&mut s, &sv, false);
            let s = s.matmul(&q2)?;
            let mut s_inv = q2.conj_transpose();
            // Rows of q2^H scale by 1/sv, i.e. columns of its transpose.
            let mut q1h = q1.conj_transpose();
            scale_rows(&mut q1h, &sv, true);
            s_inv = s_inv.matmul(&q1h)?;
            Ok((s, s_inv))
        }
    }
}

fn draw_orthonormal(rng: &mut SplitMix64, n: usize, real: bool) -> Result<Matrix> {
    let cols: Vec<usize> = (0..n).collect();
    for _ in 0..100 {
        let mut g = Matrix::from_fn(n, n, |_, _| {
            if real {
                ComplexScalar::new(rng.gaussian(), 0.0)
            } else {
                ComplexScalar::new(rng.gaussian(), rng.gaussian())
            }
        })?;
        if mgs_orthonormalize_columns(&mut g, &cols, 1e-8).is_ok() {
            return Ok(g);
        }
    }
    Err(Error::InternalDiagnostic(
        "random basis generation kept producing singular matrices".into(),
    ))
}

fn scale_columns(m: &mut Matrix, sv: &[f64], invert: bool) {
    for j in 0..m.cols() {
        let f = if invert { 1.0 / sv[j] } else { sv[j] };
        let f = ComplexScalar::new(f, 0.0);
        for i in 0..m.rows() {
            m[(i, j)] *= f;
        }
    }
}

fn scale_rows(m: &mut Matrix, sv: &[f64], invert: bool) {
    for i in 0..m.rows() {
        let f = if invert { 1.0 / sv[i] } else { sv[i] };
        let f = ComplexScalar::new(f, 0.0);
        for j in 0..m.cols() {
            m[(i, j)] *= f;
        }
    }
}

/// `s diag(d) s_inv`.
fn similarity(s: &Matrix, diag: &[ComplexScalar], s_inv: &Matrix) -> Result<Matrix> {
    let mut sd = s.clone();
    for j in 0..sd.cols() {
        for i in 0..sd.rows() {
            sd[(i, j)] *= diag[j];
        }
    }
    sd.matmul(s_inv)
}

/// Averages a matrix with its transpose so symmetry holds bitwise.
fn symmetrize(m: &mut Matrix) {
    let n = m.rows();
    for i in 0..n {
        for j in i + 1..n {
            let avg = (m[(i, j)] + m[(j, i)]) * ComplexScalar::new(0.5, 0.0);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
