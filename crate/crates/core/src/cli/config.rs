//! JSON study configuration.
//!
//! Quasimomenta and `ε` are dimensionless; the cell is `[-π, π]^d`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficient::{ModelParams, PeriodicCoefficient};
use crate::error::{Error, Result};
use crate::homogenization::{log_space, XiGridSpec};

/// One Fourier mode `(k, l)` of the coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRecord {
    pub k: Vec<i32>,
    pub l: Vec<i32>,
    pub re: f64,
    pub im: f64,
}

/// Values of `ε` for a rate study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    /// Logarithmic rather than linear spacing.
    pub log_spacing: bool,
}

impl EpsilonSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.log_spacing {
            log_space(self.min.log10(), self.max.log10(), self.count)
        } else if self.count == 1 {
            vec![self.min]
        } else {
            let step = (self.max - self.min) / (self.count - 1) as f64;
            (0..self.count).map(|i| self.min + step * i as f64).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the quadrature oracle comparison.
    pub oracle_rel: f64,
    /// Largest accepted `‖F_riesz - F_eig‖`.
    pub projector_abs: f64,
    /// Allowed shortfall of a fitted slope below its predicted exponent.
    pub slope_margin: f64,
}

/// Radial sweep along the first axis for the `thresholds` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSweep {
    pub xi_min: f64,
    pub xi_max: f64,
    pub count: usize,
}

impl ThresholdSweep {
    pub fn radii(&self) -> Vec<f64> {
        log_space(self.xi_min.log10(), self.xi_max.log10(), self.count)
    }
}

/// Cases for the `oracle-check` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    /// Entries `(m, n)` with `|m|, |n| <= truncation` are compared.
    pub truncation: usize,
    pub xi: Vec<f64>,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub dimension: usize,
    pub alpha: f64,
    pub coefficient: Vec<ModeRecord>,
    /// Mode truncation `N`: modes with `|n|_∞ <= N`.
    pub truncation: usize,
    pub xi_grid: XiGridSpec,
    /// Rerun the rate study on the doubled grid.
    pub grid_check: bool,
    pub epsilon: EpsilonSpec,
    pub tolerances: Tolerances,
    pub positivity_grid: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_sweep: Option<ThresholdSweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 2), got {alpha}")))
    }
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks ranges; symmetry and positivity are left to certification.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimension) {
            return Err(invalid(format!("dimension must be 1, 2 or 3, got {}", self.dimension)));
        }
        check_alpha(self.alpha)?;
        if self.coefficient.is_empty() {
            return Err(invalid("coefficient has no modes"));
        }
        if !(1..=256).contains(&self.truncation) {
            return Err(invalid(format!(
                "truncation must lie in 1..=256, got {}",
                self.truncation
            )));
        }
        let g = &self.xi_grid;
        if g.points_per_dim < 2 || g.radial_min_exp > g.radial_max_exp || g.radial_max_exp > 0.0 {
            return Err(invalid(
                "xi_grid needs points_per_dim >= 2 and radial_min_exp <= radial_max_exp <= 0",
            ));
        }
        let e = &self.epsilon;
        if !(e.min > 0.0 && e.min <= e.max && e.max.is_finite()) || e.count == 0 {
            return Err(invalid("epsilon needs 0 < min <= max and count >= 1"));
        }
        let t = &self.tolerances;
        if [t.oracle_rel, t.projector_abs, t.slope_margin]
            .iter()
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(invalid("tolerances must be positive"));
        }
        if self.positivity_grid < 16 {
            return Err(invalid(format!(
                "positivity_grid must be at least 16, got {}",
                self.positivity_grid
            )));
        }
        if let Some(s) = &self.threshold_sweep {
            if !(s.xi_min > 0.0 && s.xi_min <= s.xi_max && s.xi_max <= std::f64::consts::PI) || s.count == 0 {
                return Err(invalid(
                    "threshold_sweep needs 0 < xi_min <= xi_max <= π and count >= 1",
                ));
            }
        }
        if let Some(o) = &self.oracle {
            if o.truncation > 4 || o.xi.is_empty() || o.alphas.is_empty() {
                return Err(invalid("oracle needs truncation <= 4 and non-empty xi and alphas"));
            }
            if o.xi.iter().any(|x| !x.is_finite() || x.abs() > std::f64::consts::PI) {
                return Err(invalid("oracle xi values must lie in [-π, π]"));
            }
            for &a in &o.alphas {
                check_alpha(a)?;
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.dimension, self.alpha)
    }

    pub fn periodic_coefficient(&self) -> Result<PeriodicCoefficient> {
        PeriodicCoefficient::new(
            self.dimension,
            self.coefficient
                .iter()
                .map(|m| (m.k.clone(), m.l.clone(), Complex64::new(m.re, m.im))),
        )
    }

    /// SHA-256 of the canonical compact serialization, in hex.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn sample_json() -> &'static str {
        r#"{
            "dimension": 1,
            "alpha": 0.5,
            "coefficient": [
                {"k": [0], "l": [0], "re": 1.0, "im": 0.0},
                {"k": [1], "l": [1], "re": 0.125, "im": 0.0},
                {"k": [1], "l": [-1], "re": 0.125, "im": 0.0},
                {"k": [-1], "l": [1], "re": 0.125, "im": 0.0},
                {"k": [-1], "l": [-1], "re": 0.125, "im": 0.0}
            ],
            "truncation": 16,
            "xi_grid": {"points_per_dim": 32, "radial_min_exp": -4.0, "radial_max_exp": -0.5,
                        "radial_count": 10, "diagonals": true, "boundary": true},
            "grid_check": false,
            "epsilon": {"min": 0.001, "max": 0.1, "count": 12, "log_spacing": true},
            "tolerances": {"oracle_rel": 0.001, "projector_abs": 1e-8, "slope_margin": 0.1},
            "positivity_grid": 256,
            "seed": 7,
            "threshold_sweep": {"xi_min": 0.001, "xi_max": 0.1, "count": 12}
        }"#
    }

    #[test]
    fn round_trip_is_lossless() {
        let c = StudyConfig::from_json(sample_json()).unwrap();
        let back = StudyConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.digest(), back.digest());
        assert_eq!(c.digest().len(), 64);
    }

    #[test]
    fn digest_tracks_content() {
        let c = StudyConfig::from_json(sample_json()).unwrap();
        let mut d = c.clone();
        d.truncation = 32;
        assert_ne!(c.digest(), d.digest());
    }

    #[test]
    fn rejects_out_of_range_and_unknown_fields() {
        let mut c = StudyConfig::from_json(sample_json()).unwrap();
        c.alpha = 2.0;
        assert!(c.validate().is_err());
        let text = sample_json().replace("\"seed\": 7", "\"seed\": 7, \"extra\": 1");
        assert!(StudyConfig::from_json(&text).is_err());
        let text = sample_json().replace("\"positivity_grid\": 256,", "");
        assert!(StudyConfig::from_json(&text).is_err());
    }

    #[test]
    fn epsilon_values() {
        let c = StudyConfig::from_json(sample_json()).unwrap();
        let e = c.epsilon.values();
        assert_eq!(e.len(), 12);
        assert!((e[0] - 1e-3).abs() < 1e-15 && (e[11] - 0.1).abs() < 1e-15);
    }
}
