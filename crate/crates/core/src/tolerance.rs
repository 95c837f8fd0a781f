//! Tolerances governing residual checks, clustering, and conditioning gates.

use crate::error::{Error, Result};

/// Tolerance configuration threaded through every pipeline.
///
/// All residual checks in the crate are relative Frobenius-norm defects
/// compared against `rtol`, with `atol` as an absolute floor where a relative
/// bound would degenerate. Eigenvalues within `cluster_tol` of each other
/// (relative to the spectral scale) are treated as one repeated eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceConfig {
    /// Relative residual tolerance.
    pub rtol: f64,
    /// Absolute floor.
    pub atol: f64,
    /// Eigenvalue grouping radius, applied relative to the spectral scale.
    pub cluster_tol: f64,
    /// Maximum admissible condition estimate for an eigenvector matrix.
    pub cond_max: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            cluster_tol: 1e-8,
            cond_max: 1e8,
        }
    }
}

impl ToleranceConfig {
    /// Checks that every field is strictly positive and `rtol >= atol`.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("cluster_tol", self.cluster_tol),
            ("cond_max", self.cond_max),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be strictly positive and finite, got {value}"
                )));
            }
        }
        if self.rtol < self.atol {
            return Err(Error::InvalidTolerance(format!(
                "rtol ({}) must be at least atol ({})",
                self.rtol, self.atol
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ToleranceConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_nonpositive_fields() {
        let tol = ToleranceConfig {
            rtol: 0.0,
            ..ToleranceConfig::default()
        };
        assert!(tol.validate().is_err());
        let tol = ToleranceConfig {
            cond_max: -1.0,
            ..ToleranceConfig::default()
        };
        assert!(tol.validate().is_err());
    }

    #[test]
    fn rejects_rtol_below_atol() {
        let tol = ToleranceConfig {
            rtol: 1e-14,
            atol: 1e-12,
            ..ToleranceConfig::default()
        };
        assert!(tol.validate().is_err());
    }
}
