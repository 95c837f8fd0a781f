//! Command-line front end.
//!
//! Every subcommand loads matrix files, runs one pipeline, and emits a
//! `VerificationReport` (text or canonical JSON per `--format`). Exit codes:
//! 0 all checks passed, 1 a check failed, 2 bad input or configuration,
//! 3 the computation itself failed.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};

use crate::eigen::{eigendecompose, eigenvalues_only};
use crate::error::{Error, Result};
use crate::generator::{
    generate_commuting_pair, generate_star_commuting_pair, generate_star_commuting_pair_singular,
    BasisMode, EigenvalueMode, PairSpec, RNG_ALGORITHM,
};
use crate::io::{render_matrix, MatrixFile};
use crate::matrix::Matrix;
use crate::permutation::{conjugate, general_permute, invariance_report, PermutationSpec};
use crate::report::{ReportStatus, VerificationReport};
use crate::simdiag::{check_commute, simultaneous_diagonalize};
use crate::svd::{
    check_star_commute, singular_values, sort_descending, svd_commuting_pair, verify_svd,
};
use crate::tolerance::ToleranceConfig;

#[derive(Parser)]
#[command(
    name = "simdiag",
    version,
    about = "Simultaneous diagonalization, shared-basis SVD, and permutation checks for commuting matrix pairs"
)]
struct Cli {
    /// Relative residual tolerance (falls back to $SIMDIAG_TOL, then 1e-10).
    #[arg(long, global = true)]
    rtol: Option<f64>,
    /// Absolute floor (default 1e-12).
    #[arg(long, global = true)]
    atol: Option<f64>,
    /// Eigenvalue grouping radius (default 1e-8).
    #[arg(long = "cluster-tol", global = true)]
    cluster_tol: Option<f64>,
    /// Maximum admissible eigenvector condition estimate (default 1e8).
    #[arg(long = "cond-max", global = true)]
    cond_max: Option<f64>,
    /// Report rendering.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether two matrices commute.
    Commute { a: String, b: String },
    /// Eigendecompose one matrix and report its spectrum.
    Eigen { a: String },
    /// Simultaneously diagonalize a commuting pair.
    Simdiag { a: String, b: String },
    /// Joint SVD of a star-commuting pair over shared left singular vectors.
    Svd {
        a: String,
        b: String,
        /// Reorder columns by descending sigma_a before reporting.
        #[arg(long)]
        sort_sigma: bool,
    },
    /// Apply a permutation and check spectral invariance.
    Permute {
        a: String,
        /// Permutation matrix file.
        p: String,
        /// Conjugate: P A P^T (the default action).
        #[arg(long, conflicts_with = "general")]
        conjugate: bool,
        /// Two-sided action P A Q^T with an independent column permutation.
        #[arg(long, value_name = "Q")]
        general: Option<String>,
        /// Write the permuted matrix to this path.
        #[arg(long, value_name = "PATH")]
        out: Option<String>,
    },
    /// Generate a seeded commuting or star-commuting pair.
    Gen {
        /// Recipe, e.g. "n=8,mult=3+3+2,eig=complex,basis=unitary,seed=42,kind=commuting".
        #[arg(long)]
        spec: String,
        #[arg(long, value_name = "PATH")]
        out_a: String,
        #[arg(long, value_name = "PATH")]
        out_b: String,
    },
    /// Re-check a previously written JSON report for internal coherence.
    Verify { report: String },
}

/// Entry point; returns the process exit code.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let tol = match resolve_tolerances(&cli) {
        Ok(tol) => tol,
        Err(e) => {
            eprintln!("simdiag: {e}");
            return 2;
        }
    };
    let command_line = argv.iter().skip(1).cloned().collect::<Vec<_>>().join(" ");
    let mut report = VerificationReport::new(&command_line, tol);
    let outcome = dispatch(&cli.command, &tol, &mut report);
    finish(cli.format, report, outcome)
}

/// Flags override the environment fallback, which overrides the defaults.
fn resolve_tolerances(cli: &Cli) -> Result<ToleranceConfig> {
    let mut tol = ToleranceConfig::default();
    if let Some(rtol) = cli.rtol {
        tol.rtol = rtol;
    } else if let Ok(text) = std::env::var("SIMDIAG_TOL") {
        tol.rtol = text.trim().parse().map_err(|_| {
            Error::InvalidTolerance(format!("SIMDIAG_TOL (`{text}`) is not a number"))
        })?;
    }
    if let Some(atol) = cli.atol {
        tol.atol = atol;
    }
    if let Some(cluster_tol) = cli.cluster_tol {
        tol.cluster_tol = cluster_tol;
    }
    if let Some(cond_max) = cli.cond_max {
        tol.cond_max = cond_max;
    }
    tol.validate()?;
    Ok(tol)
}

/// Failure class behind each exit code.
fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NotCommuting { .. } | Error::NotStarCommuting { .. } => 1,
        Error::Parse { .. }
        | Error::NonFinite { .. }
        | Error::Io { .. }
        | Error::Dimension(_)
        | Error::InvalidPermutation(_)
        | Error::InvalidSpec(_)
        | Error::MalformedReport(_)
        | Error::InvalidTolerance(_) => 2,
        Error::SingularMatrix { .. }
        | Error::NonConvergence { .. }
        | Error::NotDiagonalizable(_)
        | Error::AmbiguousClustering { .. }
        | Error::BlockLeakage { .. }
        | Error::RankDeficientCluster { .. }
        | Error::NoCorrespondence(_)
        | Error::InternalDiagnostic(_) => 3,
    }
}

/// Renders the report and maps the outcome to an exit code. Input errors
/// (exit 2) produce no report; check failures and numerical errors still
/// report whatever was computed.
fn finish(format: Format, mut report: VerificationReport, outcome: Result<i32>) -> i32 {
    let code = match outcome {
        Ok(code) => code,
        Err(err) => {
            let code = exit_code_for(&err);
            match code {
                1 => {
                    if let Error::NotCommuting { residual } = err {
                        report.set_residual("commute", residual);
                    }
                    if let Error::NotStarCommuting { residual } = err {
                        report.set_residual("star_commute", residual);
                    }
                    report.resolve_status();
                }
                2 => {
                    eprintln!("simdiag: {err}");
                    return 2;
                }
                _ => {
                    eprintln!("simdiag: {err}");
                    report.mark_error(&err.to_string());
                }
            }
            code
        }
    };
    let rendered = match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(rendered.as_bytes());
    code
}

/// Runs one subcommand, filling the report. `Ok(code)` is the exit code for
/// completed runs; errors are classified by `finish`.
fn dispatch(
    command: &Command,
    tol: &ToleranceConfig,
    report: &mut VerificationReport,
) -> Result<i32> {
    match command {
        Command::Commute { a, b } => {
            let a = load(a, "a", report)?;
            let b = load(b, "b", report)?;
            let (ok, residual) = check_commute(&a, &b, tol)?;
            report.set_residual("commute", residual);
            report.resolve_status();
            Ok(if ok { 0 } else { 1 })
        }
        Command::Eigen { a } => {
            let a = load(a, "a", report)?;
            let ed = eigendecompose(&a, tol)?;
            report.set_residual("residual", ed.residual);
            report.set_residual("cond_estimate", ed.cond_estimate);
            report.set_spectrum("eigenvalues", &ed.eigenvalues);
            report.resolve_status();
            Ok(status_code(report))
        }
        Command::Simdiag { a, b } => {
            let a = load(a, "a", report)?;
            let b = load(b, "b", report)?;
            let (_, commute) = check_commute(&a, &b, tol)?;
            report.set_residual("commute", commute);
            let out = simultaneous_diagonalize(&a, &b, tol)?;
            report.set_residual("residual_a", out.residual_a);
            report.set_residual("residual_b", out.residual_b);
            report.set_spectrum("diag_a", &out.diag_a);
            report.set_spectrum("diag_b", &out.diag_b);
            report.resolve_status();
            Ok(status_code(report))
        }
        Command::Svd { a, b, sort_sigma } => {
            let a = load(a, "a", report)?;
            let b = load(b, "b", report)?;
            let (_, star) = check_star_commute(&a, &b, tol)?;
            report.set_residual("star_commute", star);
            let mut out = svd_commuting_pair(&a, &b, tol)?;
            if *sort_sigma {
                out = sort_descending(&out);
            }
            let check_a = verify_svd(&a, &out.u, &out.sigma_a, &out.v_a, tol)?;
            let check_b = verify_svd(&b, &out.u, &out.sigma_b, &out.v_b, tol)?;
            report.set_residual("residual_a", check_a.reconstruction_residual);
            report.set_residual("residual_b", check_b.reconstruction_residual);
            report.set_residual("unitarity_u", check_a.u_unitarity_residual);
            report.set_residual("unitarity_va", check_a.v_unitarity_residual);
            report.set_residual("unitarity_vb", check_b.v_unitarity_residual);
            report.set_real_spectrum("sigma_a", &out.sigma_a);
            report.set_real_spectrum("sigma_b", &out.sigma_b);
            report.resolve_status();
            Ok(status_code(report))
        }
        Command::Permute {
            a,
            p,
            conjugate: _,
            general,
            out,
        } => {
            let a = load(a, "a", report)?;
            let p_matrix = load(p, "p", report)?;
            let p_spec = PermutationSpec::from_matrix(&p_matrix, tol)?;
            let permuted = match general {
                Some(q_path) => {
                    let q_matrix = load(q_path, "q", report)?;
                    let q_spec = PermutationSpec::from_matrix(&q_matrix, tol)?;
                    let permuted = general_permute(&a, &p_spec, &q_spec)?;
                    let sv_in = singular_values(&a, tol)?;
                    let sv_out = singular_values(&permuted, tol)?;
                    report.set_residual("singular_pairing_gap", pairing_gap(&sv_in, &sv_out));
                    report.set_real_spectrum("singular_values_input", &sv_in);
                    report.set_real_spectrum("singular_values_permuted", &sv_out);
                    permuted
                }
                None => {
                    let permuted = conjugate(&a, &p_spec)?;
                    let inv = invariance_report(&a, &permuted, tol)?;
                    report.set_residual("eigen_pairing_gap", inv.max_pairing_gap);
                    let mut eig_in = eigenvalues_only(&a)?;
                    let mut eig_out = eigenvalues_only(&permuted)?;
                    eig_in.sort_by(crate::eigen::canonical_cmp);
                    eig_out.sort_by(crate::eigen::canonical_cmp);
                    report.set_spectrum("eigenvalues_input", &eig_in);
                    report.set_spectrum("eigenvalues_permuted", &eig_out);
                    let sv_in = singular_values(&a, tol)?;
                    let sv_out = singular_values(&permuted, tol)?;
                    report.set_residual("singular_pairing_gap", pairing_gap(&sv_in, &sv_out));
                    report.set_real_spectrum("singular_values_input", &sv_in);
                    report.set_real_spectrum("singular_values_permuted", &sv_out);
                    permuted
                }
            };
            if let Some(path) = out {
                write_file(path, &render_matrix(&permuted))?;
            }
            report.resolve_status();
            Ok(status_code(report))
        }
        Command::Gen { spec, out_a, out_b } => {
            let recipe = GenRecipe::parse(spec)?;
            let (a, b) = recipe.generate()?;
            let header = format!(
                "# generated: {spec}\n# rng: {RNG_ALGORITHM} seed={}\n",
                recipe.pair.seed
            );
            let text_a = format!("{header}{}", render_matrix(&a));
            let text_b = format!("{header}{}", render_matrix(&b));
            write_file(out_a, &text_a)?;
            write_file(out_b, &text_b)?;
            report.add_input("a", out_a, text_a.as_bytes());
            report.add_input("b", out_b, text_b.as_bytes());
            if recipe.star() {
                let (_, star) = check_star_commute(&a, &b, tol)?;
                report.set_residual("star_commute", star);
            }
            let (_, commute) = check_commute(&a, &b, tol)?;
            report.set_residual("commute", commute);
            report.resolve_status();
            Ok(status_code(report))
        }
        Command::Verify { report: path } => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let stored = VerificationReport::from_json(&text)?;
            let derived = if stored.all_residuals_pass() {
                ReportStatus::Ok
            } else {
                ReportStatus::CheckFailed
            };
            // Error reports record a failure, not a residual verdict, so they
            // are coherent by construction; others must match their residuals.
            let coherent = stored.status == ReportStatus::Error || stored.status == derived;
            let stored_status = stored.status;
            *report = stored;
            if !coherent {
                return Err(Error::MalformedReport(format!(
                    "status `{}` contradicts the recorded residuals (expected `{}`)",
                    stored_status.as_str(),
                    derived.as_str()
                )));
            }
            Ok(if stored_status == ReportStatus::Ok {
                0
            } else {
                1
            })
        }
    }
}

fn status_code(report: &VerificationReport) -> i32 {
    if report.status == ReportStatus::Ok {
        0
    } else {
        1
    }
}

fn load(path: &str, name: &str, report: &mut VerificationReport) -> Result<Matrix> {
    let file = MatrixFile::load(path)?;
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })?;
    report.add_input(name, path, &bytes);
    Ok(file.parsed)
}

fn write_file(path: &str, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}

/// Largest positional gap between two descending singular value lists,
/// relative to their scale.
fn pairing_gap(sv_in: &[f64], sv_out: &[f64]) -> f64 {
    let scale = sv_in
        .iter()
        .chain(sv_out)
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if scale == 0.0 || sv_in.len() != sv_out.len() {
        return if sv_in.len() == sv_out.len() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    sv_in
        .iter()
        .zip(sv_out)
        .fold(0.0f64, |acc, (&x, &y)| acc.max((x - y).abs()))
        / scale
}

/// Parsed `--spec` recipe for `gen`.
struct GenRecipe {
    pair: PairSpec,
    kind: GenKind,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum GenKind {
    Commuting,
    Star,
    StarSingular,
}

impl GenRecipe {
    /// Grammar: comma-separated `key=value` with keys `n` (required), `seed`
    /// (required), `mult` (plus-separated, default all ones), `eig`
    /// (complex|real|nonneg), `basis` (unitary|general), `cond` (required
    /// with basis=general), `kind` (commuting|star|star-singular).
    fn parse(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidSpec(format!("{msg} in `{text}`"));
        let mut n = None;
        let mut seed = None;
        let mut mult: Option<Vec<usize>> = None;
        let mut eig = EigenvalueMode::Complex;
        let mut basis_general = false;
        let mut cond = None;
        let mut kind = GenKind::Commuting;
        for field in text.split(',') {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| bad(&format!("`{field}` is not key=value")))?;
            match key.trim() {
                "n" => {
                    n = Some(
                        value
                            .trim()
                            .parse::<usize>()
                            .map_err(|_| bad(&format!("`{value}` is not a matrix order")))?,
                    );
                }
                "seed" => {
                    seed = Some(
                        value
                            .trim()
                            .parse::<u64>()
                            .map_err(|_| bad(&format!("`{value}` is not a seed")))?,
                    );
                }
                "mult" => {
                    let parsed: std::result::Result<Vec<usize>, _> =
                        value.trim().split('+').map(str::parse).collect();
                    mult = Some(parsed.map_err(|_| {
                        bad(&format!(
                            "`{value}` is not a plus-separated multiplicity list"
                        ))
                    })?);
                }
                "eig" => {
                    eig = match value.trim() {
                        "complex" => EigenvalueMode::Complex,
                        "real" => EigenvalueMode::Real,
                        "nonneg" => EigenvalueMode::Nonneg,
                        other => return Err(bad(&format!("unknown eigenvalue mode `{other}`"))),
                    };
                }
                "basis" => {
                    basis_general = match value.trim() {
                        "unitary" => false,
                        "general" => true,
                        other => return Err(bad(&format!("unknown basis mode `{other}`"))),
                    };
                }
                "cond" => {
                    cond = Some(
                        value
                            .trim()
                            .parse::<f64>()
                            .map_err(|_| bad(&format!("`{value}` is not a condition target")))?,
                    );
                }
                "kind" => {
                    kind = match value.trim() {
                        "commuting" => GenKind::Commuting,
                        "star" => GenKind::Star,
                        "star-singular" => GenKind::StarSingular,
                        other => return Err(bad(&format!("unknown kind `{other}`"))),
                    };
                }
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| bad("missing required key `n`"))?;
        let seed = seed.ok_or_else(|| bad("missing required key `seed`"))?;
        let basis_mode = if basis_general {
            let cond_target = cond.ok_or_else(|| bad("basis=general requires `cond`"))?;
            BasisMode::General { cond_target }
        } else {
            if cond.is_some() {
                return Err(bad("`cond` only applies to basis=general"));
            }
            BasisMode::Unitary
        };
        Ok(Self {
            pair: PairSpec {
                n,
                multiplicities_a: mult.unwrap_or_else(|| vec![1; n]),
                eigenvalue_mode: eig,
                basis_mode,
                seed,
            },
            kind,
        })
    }

    fn star(&self) -> bool {
        self.kind != GenKind::Commuting
    }

    fn generate(&self) -> Result<(Matrix, Matrix)> {
        match self.kind {
            GenKind::Commuting => generate_commuting_pair(&self.pair),
            GenKind::Star => generate_star_commuting_pair(&self.pair),
            // Fixed injection: one zero eigenvalue cluster in a, two zero
            // diagonal entries in b.
            GenKind::StarSingular => generate_star_commuting_pair_singular(&self.pair, 1, 2),
        }
    }
}
