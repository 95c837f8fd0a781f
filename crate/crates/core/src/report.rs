//! Verification reports: the structured record every CLI subcommand emits.
//!
//! The JSON rendering is canonical: keys sorted, numbers printed with 17
//! significant digits, no locale or hash-order dependence, so identical
//! invocations are byte-identical and reports diff cleanly in CI.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::render_complex;
use crate::matrix::ComplexScalar;
use crate::tolerance::ToleranceConfig;

/// Outcome class of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportStatus {
    /// Every recorded residual is within its governing tolerance.
    Ok,
    /// A check the subcommand exists to perform failed.
    CheckFailed,
    /// The computation itself failed before producing a verdict.
    Error,
}

impl ReportStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportStatus::Ok => "ok",
            ReportStatus::CheckFailed => "check_failed",
            ReportStatus::Error => "error",
        }
    }

    fn parse(text: &str) -> Option<Self> {
        match text {
            "ok" => Some(ReportStatus::Ok),
            "check_failed" => Some(ReportStatus::CheckFailed),
            "error" => Some(ReportStatus::Error),
            _ => None,
        }
    }
}

/// Identity of one input file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDigest {
    pub path: String,
    /// Lowercase hex SHA-256 of the file contents.
    pub sha256: String,
}

impl InputDigest {
    pub fn from_bytes(path: &str, bytes: &[u8]) -> Self {
        let digest = Sha256::digest(bytes);
        let mut sha256 = String::with_capacity(64);
        for byte in digest {
            sha256.push_str(&format!("{byte:02x}"));
        }
        Self {
            path: path.to_string(),
            sha256,
        }
    }
}

/// Structured output of one subcommand invocation.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub command: String,
    pub inputs: BTreeMap<String, InputDigest>,
    pub residuals: BTreeMap<String, f64>,
    pub spectra: BTreeMap<String, Vec<ComplexScalar>>,
    pub status: ReportStatus,
    pub tolerances: ToleranceConfig,
    /// Present only when `status` is `error`.
    pub error: Option<String>,
}

/// Tolerance a named residual is judged against: condition estimates are
/// gated by `cond_max`, pairing gaps by `cluster_tol`, everything else by
/// `rtol`.
pub fn governing_tolerance(name: &str, tol: &ToleranceConfig) -> f64 {
    if name.starts_with("cond") {
        tol.cond_max
    } else if name.ends_with("_gap") {
        tol.cluster_tol
    } else {
        tol.rtol
    }
}

impl VerificationReport {
    pub fn new(command: &str, tolerances: ToleranceConfig) -> Self {
        Self {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            residuals: BTreeMap::new(),
            spectra: BTreeMap::new(),
            status: ReportStatus::Ok,
            tolerances,
            error: None,
        }
    }

    pub fn add_input(&mut self, name: &str, path: &str, bytes: &[u8]) {
        self.inputs
            .insert(name.to_string(), InputDigest::from_bytes(path, bytes));
    }

    pub fn set_residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.to_string(), value);
    }

    pub fn set_spectrum(&mut self, name: &str, values: &[ComplexScalar]) {
        self.spectra.insert(name.to_string(), values.to_vec());
    }

    pub fn set_real_spectrum(&mut self, name: &str, values: &[f64]) {
        let lifted: Vec<ComplexScalar> =
            values.iter().map(|&v| ComplexScalar::new(v, 0.0)).collect();
        self.spectra.insert(name.to_string(), lifted);
    }

    /// True when every recorded residual is within its governing tolerance.
    pub fn all_residuals_pass(&self) -> bool {
        self.residuals
            .iter()
            .all(|(name, &value)| value <= governing_tolerance(name, &self.tolerances))
    }

    /// Sets `status` from the recorded residuals; an `error` status set
    /// beforehand is preserved.
    pub fn resolve_status(&mut self) {
        if self.status == ReportStatus::Error {
            return;
        }
        self.status = if self.all_residuals_pass() {
            ReportStatus::Ok
        } else {
            ReportStatus::CheckFailed
        };
    }

    pub fn mark_error(&mut self, message: &str) {
        self.status = ReportStatus::Error;
        self.error = Some(message.to_string());
    }

    /// Canonical JSON rendering.
    pub fn to_json(&self) -> String {
        let mut w = JsonWriter::new();
        w.open_object();
        w.key("command");
        w.string(&self.command);
        if let Some(error) = &self.error {
            w.key("error");
            w.string(error);
        }
        w.key("inputs");
        w.open_object();
        for (name, digest) in &self.inputs {
            w.key(name);
            w.open_object();
            w.key("path");
            w.string(&digest.path);
            w.key("sha256");
            w.string(&digest.sha256);
            w.close_object();
        }
        w.close_object();
        w.key("residuals");
        w.open_object();
        for (name, value) in &self.residuals {
            w.key(name);
            w.number(*value);
        }
        w.close_object();
        w.key("spectra");
        w.open_object();
        for (name, values) in &self.spectra {
            w.key(name);
            w.open_array();
            for v in values {
                w.open_object();
                w.key("im");
                w.number(v.im);
                w.key("re");
                w.number(v.re);
                w.close_object();
            }
            w.close_array();
        }
        w.close_object();
        w.key("status");
        w.string(self.status.as_str());
        w.key("tolerances");
        w.open_object();
        w.key("atol");
        w.number(self.tolerances.atol);
        w.key("cluster_tol");
        w.number(self.tolerances.cluster_tol);
        w.key("cond_max");
        w.number(self.tolerances.cond_max);
        w.key("rtol");
        w.number(self.tolerances.rtol);
        w.close_object();
        w.close_object();
        w.finish()
    }

    /// Plain-text rendering, equally deterministic.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!("status: {}\n", self.status.as_str()));
        if let Some(error) = &self.error {
            out.push_str(&format!("error: {error}\n"));
        }
        let t = &self.tolerances;
        out.push_str(&format!(
            "tolerances: rtol={:e} atol={:e} cluster_tol={:e} cond_max={:e}\n",
            t.rtol, t.atol, t.cluster_tol, t.cond_max
        ));
        if !self.inputs.is_empty() {
            out.push_str("inputs:\n");
            for (name, digest) in &self.inputs {
                out.push_str(&format!(
                    "  {name}: {} sha256={}\n",
                    digest.path, digest.sha256
                ));
            }
        }
        if !self.residuals.is_empty() {
            out.push_str("residuals:\n");
            for (name, value) in &self.residuals {
                let bound = governing_tolerance(name, &self.tolerances);
                let verdict = if *value <= bound { "pass" } else { "FAIL" };
                out.push_str(&format!("  {name}: {value:e} (<= {bound:e}: {verdict})\n"));
            }
        }
        if !self.spectra.is_empty() {
            out.push_str("spectra:\n");
            for (name, values) in &self.spectra {
                let rendered: Vec<String> = values.iter().map(|&v| render_complex(v)).collect();
                out.push_str(&format!("  {name}: {}\n", rendered.join(" ")));
            }
        }
        out
    }

    /// Strict parse of the canonical JSON form. Unknown or missing keys are
    /// malformations, so a tampered or truncated report never passes.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::MalformedReport(format!("not valid JSON: {e}")))?;
        let top = as_object(&value, "report")?;
        for key in top.keys() {
            if !matches!(
                key.as_str(),
                "command" | "error" | "inputs" | "residuals" | "spectra" | "status" | "tolerances"
            ) {
                return Err(Error::MalformedReport(format!("unknown key `{key}`")));
            }
        }
        let command = as_string(require(top, "command")?, "command")?;
        let error = match top.get("error") {
            Some(v) => Some(as_string(v, "error")?),
            None => None,
        };
        let status = ReportStatus::parse(&as_string(require(top, "status")?, "status")?)
            .ok_or_else(|| Error::MalformedReport("unrecognized status".into()))?;

        let mut inputs = BTreeMap::new();
        for (name, entry) in as_object(require(top, "inputs")?, "inputs")? {
            let entry = as_object(entry, name)?;
            for key in entry.keys() {
                if !matches!(key.as_str(), "path" | "sha256") {
                    return Err(Error::MalformedReport(format!(
                        "unknown key `{key}` in input `{name}`"
                    )));
                }
            }
            inputs.insert(
                name.clone(),
                InputDigest {
                    path: as_string(require(entry, "path")?, "path")?,
                    sha256: as_string(require(entry, "sha256")?, "sha256")?,
                },
            );
        }

        let mut residuals = BTreeMap::new();
        for (name, entry) in as_object(require(top, "residuals")?, "residuals")? {
            residuals.insert(name.clone(), as_number(entry, name)?);
        }

        let mut spectra = BTreeMap::new();
        for (name, entry) in as_object(require(top, "spectra")?, "spectra")? {
            let list = entry
                .as_array()
                .ok_or_else(|| Error::MalformedReport(format!("`{name}` is not an array")))?;
            let mut values = Vec::with_capacity(list.len());
            for item in list {
                let item = as_object(item, name)?;
                for key in item.keys() {
                    if !matches!(key.as_str(), "im" | "re") {
                        return Err(Error::MalformedReport(format!(
                            "unknown key `{key}` in spectrum `{name}`"
                        )));
                    }
                }
                values.push(ComplexScalar::new(
                    as_number(require(item, "re")?, "re")?,
                    as_number(require(item, "im")?, "im")?,
                ));
            }
            spectra.insert(name.clone(), values);
        }

        let tol = as_object(require(top, "tolerances")?, "tolerances")?;
        for key in tol.keys() {
            if !matches!(key.as_str(), "atol" | "cluster_tol" | "cond_max" | "rtol") {
                return Err(Error::MalformedReport(format!(
                    "unknown key `{key}` in tolerances"
                )));
            }
        }
        let tolerances = ToleranceConfig {
            rtol: as_number(require(tol, "rtol")?, "rtol")?,
            atol: as_number(require(tol, "atol")?, "atol")?,
            cluster_tol: as_number(require(tol, "cluster_tol")?, "cluster_tol")?,
            cond_max: as_number(require(tol, "cond_max")?, "cond_max")?,
        };
        tolerances
            .validate()
            .map_err(|e| Error::MalformedReport(format!("bad tolerances: {e}")))?;

        Ok(Self {
            command,
            inputs,
            residuals,
            spectra,
            status,
            tolerances,
            error,
        })
    }
}

fn require<'a>(
    map: &'a serde_json::Map<String, serde_json::Value>,
    key: &str,
) -> Result<&'a serde_json::Value> {
    map.get(key)
        .ok_or_else(|| Error::MalformedReport(format!("missing key `{key}`")))
}

fn as_object<'a>(
    value: &'a serde_json::Value,
    what: &str,
) -> Result<&'a serde_json::Map<String, serde_json::Value>> {
    value
        .as_object()
        .ok_or_else(|| Error::MalformedReport(format!("`{what}` is not an object")))
}

fn as_string(value: &serde_json::Value, what: &str) -> Result<String> {
    value
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::MalformedReport(format!("`{what}` is not a string")))
}

fn as_number(value: &serde_json::Value, what: &str) -> Result<f64> {
    value
        .as_f64()
        .ok_or_else(|| Error::MalformedReport(format!("`{what}` is not a number")))
}

/// Minimal pretty-printer emitting two-space indentation and sorted-key
/// object bodies (callers pass keys in order).
struct JsonWriter {
    out: String,
    depth: usize,
    needs_comma: bool,
}

impl JsonWriter {
    fn new() -> Self {
        Self {
            out: String::new(),
            depth: 0,
            needs_comma: false,
        }
    }

    fn pad(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
    }

    fn before_value(&mut self) {
        if self.needs_comma {
            self.out.push_str(",\n");
        }
        self.pad();
        self.needs_comma = true;
    }

    fn key(&mut self, name: &str) {
        self.before_value();
        self.out.push('"');
        escape_into(&mut self.out, name);
        self.out.push_str("\": ");
        self.needs_comma = false;
    }

    fn open_object(&mut self) {
        if !self.out.is_empty() && !self.out.ends_with(": ") {
            self.before_value();
        }
        self.out.push_str("{\n");
        self.depth += 1;
        self.needs_comma = false;
    }

    fn close_object(&mut self) {
        self.out.push('\n');
        self.depth -= 1;
        self.pad();
        self.out.push('}');
        self.needs_comma = true;
    }

    fn open_array(&mut self) {
        self.out.push_str("[\n");
        self.depth += 1;
        self.needs_comma = false;
    }

    fn close_array(&mut self) {
        self.out.push('\n');
        self.depth -= 1;
        self.pad();
        self.out.push(']');
        self.needs_comma = true;
    }

    fn string(&mut self, value: &str) {
        self.out.push('"');
        escape_into(&mut self.out, value);
        self.out.push('"');
        self.needs_comma = true;
    }

    fn number(&mut self, value: f64) {
        self.out.push_str(&format_number(value));
        self.needs_comma = true;
    }

    fn finish(mut self) -> String {
        self.out.push('\n');
        self.out
    }
}

/// 17 significant digits, always round-trippable.
fn format_number(value: f64) -> String {
    format!("{value:.16e}")
}

fn escape_into(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let mut rep = VerificationReport::new("simdiag a.txt b.txt", ToleranceConfig::default());
        rep.add_input("a", "a.txt", b"3 3\n1 0 0\n");
        rep.add_input("b", "b.txt", b"3 3\n0 1 0\n");
        rep.set_residual("commute", 2.5e-16);
        rep.set_residual("residual_a", 1.0e-12);
        rep.set_spectrum(
            "diag_a",
            &[ComplexScalar::new(2.0, 0.0), ComplexScalar::new(-2.0, 1.0)],
        );
        rep.resolve_status();
        rep
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let rep = sample();
        let json = rep.to_json();
        let back = VerificationReport::from_json(&json).unwrap();
        assert_eq!(back.command, rep.command);
        assert_eq!(back.status, ReportStatus::Ok);
        assert_eq!(back.inputs, rep.inputs);
        assert_eq!(back.residuals, rep.residuals);
        assert_eq!(back.spectra.get("diag_a"), rep.spectra.get("diag_a"));
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(sample().to_json(), sample().to_json());
        assert_eq!(sample().to_text(), sample().to_text());
    }

    #[test]
    fn status_follows_residuals() {
        let mut rep = sample();
        rep.set_residual("commute", 1.0);
        rep.resolve_status();
        assert_eq!(rep.status, ReportStatus::CheckFailed);
        assert!(!rep.all_residuals_pass());
    }

    #[test]
    fn governing_tolerances_by_name() {
        let tol = ToleranceConfig::default();
        assert_eq!(governing_tolerance("cond_estimate", &tol), tol.cond_max);
        assert_eq!(
            governing_tolerance("eigen_pairing_gap", &tol),
            tol.cluster_tol
        );
        assert_eq!(governing_tolerance("residual_a", &tol), tol.rtol);
    }

    #[test]
    fn rejects_unknown_and_missing_keys() {
        let json = sample().to_json();
        let with_extra = json.replacen("\"command\"", "\"payload\": 1,\n  \"command\"", 1);
        assert!(matches!(
            VerificationReport::from_json(&with_extra),
            Err(Error::MalformedReport(_))
        ));
        let without_status = json.replacen("\"status\": \"ok\",\n", "", 1);
        assert!(matches!(
            VerificationReport::from_json(&without_status),
            Err(Error::MalformedReport(_))
        ));
        assert!(VerificationReport::from_json("not json").is_err());
    }

    #[test]
    fn numbers_render_with_full_precision() {
        let mut rep = VerificationReport::new("eigen a.txt", ToleranceConfig::default());
        rep.set_residual("residual", 0.1 + 0.2);
        let back = VerificationReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(
            back.residuals["residual"].to_bits(),
            (0.1f64 + 0.2).to_bits()
        );
    }

    #[test]
    fn error_reports_roundtrip() {
        let mut rep = VerificationReport::new("svd a.txt b.txt", ToleranceConfig::default());
        rep.mark_error("matrix is not diagonalizable to tolerance: cluster 2");
        let back = VerificationReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back.status, ReportStatus::Error);
        assert_eq!(back.error.as_deref(), rep.error.as_deref());
    }
}
