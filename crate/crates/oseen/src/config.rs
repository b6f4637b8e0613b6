//! Flat `key = value` run configuration files.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` or `;`
//! are ignored. Unknown keys are rejected so typos surface immediately.

use std::path::Path;

use thiserror::Error;

use crate::spaces::{ElementFamily, VorticityContinuity};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("i/o error reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {0}: expected 'key = value', got '{1}'")]
    Malformed(usize, String),
    #[error("line {0}: unknown key '{1}'")]
    UnknownKey(usize, String),
    #[error("line {0}: invalid value '{2}' for key '{1}'")]
    InvalidValue(usize, String, String),
}

/// Run parameters shared by the CLI subcommands; command-line flags override
/// anything read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Manufactured case name.
    pub case: String,
    /// "taylor-hood" or "mini".
    pub family: String,
    /// Polynomial order k >= 1.
    pub order: usize,
    /// "continuous" or "discontinuous".
    pub vorticity: String,
    /// Cells per side of the initial structured mesh.
    pub initial_n: usize,
    /// Number of meshes in a uniform study.
    pub levels: usize,
    /// Maximum adaptive steps.
    pub max_steps: usize,
    /// Adaptive stopping tolerance on the estimator.
    pub theta_tol: f64,
    /// Optional quadrature degree override.
    pub quadrature_degree: Option<usize>,
    /// Optional overrides of the augmentation parameters.
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            case: "example1_nu_a".to_string(),
            family: "taylor-hood".to_string(),
            order: 1,
            vorticity: "continuous".to_string(),
            initial_n: 2,
            levels: 5,
            max_steps: 10,
            theta_tol: 0.0,
            quadrature_degree: None,
            kappa1: None,
            kappa2: None,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let no = lineno + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Malformed(no, line.to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::InvalidValue(no, key.to_string(), value.to_string());
            match key {
                "case" => cfg.case = value.to_string(),
                "family" => match value {
                    "taylor-hood" | "mini" => cfg.family = value.to_string(),
                    _ => return Err(bad()),
                },
                "order" => cfg.order = value.parse().map_err(|_| bad())?,
                "vorticity" => match value {
                    "continuous" | "discontinuous" => cfg.vorticity = value.to_string(),
                    _ => return Err(bad()),
                },
                "initial_n" => cfg.initial_n = value.parse().map_err(|_| bad())?,
                "levels" => cfg.levels = value.parse().map_err(|_| bad())?,
                "max_steps" => cfg.max_steps = value.parse().map_err(|_| bad())?,
                "theta_tol" => cfg.theta_tol = value.parse().map_err(|_| bad())?,
                "quadrature_degree" => {
                    cfg.quadrature_degree = Some(value.parse().map_err(|_| bad())?)
                }
                "kappa1" => cfg.kappa1 = Some(value.parse().map_err(|_| bad())?),
                "kappa2" => cfg.kappa2 = Some(value.parse().map_err(|_| bad())?),
                _ => return Err(ConfigError::UnknownKey(no, key.to_string())),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn element_family(&self) -> ElementFamily {
        let vorticity = if self.vorticity == "discontinuous" {
            VorticityContinuity::Discontinuous
        } else {
            VorticityContinuity::Continuous
        };
        if self.family == "mini" {
            ElementFamily::mini(self.order, vorticity)
        } else {
            ElementFamily::taylor_hood(self.order, vorticity)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let text = "\
# study setup
case = example3_nu_d
family = mini
order = 1
vorticity = discontinuous

; adapt section
max_steps = 12
theta_tol = 1e-3
kappa2 = 0.05
";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.case, "example3_nu_d");
        assert_eq!(cfg.family, "mini");
        assert_eq!(cfg.vorticity, "discontinuous");
        assert_eq!(cfg.max_steps, 12);
        assert_eq!(cfg.theta_tol, 1e-3);
        assert_eq!(cfg.kappa2, Some(0.05));
        assert_eq!(cfg.kappa1, None);
        assert!(cfg.element_family().has_bubbles());
    }

    #[test]
    fn defaults_when_empty() {
        let cfg = Config::parse("").unwrap();
        assert_eq!(cfg, Config::default());
    }

    #[test]
    fn rejects_unknown_key_and_bad_values() {
        assert!(matches!(
            Config::parse("colour = red"),
            Err(ConfigError::UnknownKey(1, _))
        ));
        assert!(matches!(
            Config::parse("order = two"),
            Err(ConfigError::InvalidValue(1, _, _))
        ));
        assert!(matches!(
            Config::parse("family = p2p1"),
            Err(ConfigError::InvalidValue(1, _, _))
        ));
        assert!(matches!(
            Config::parse("just a line"),
            Err(ConfigError::Malformed(1, _))
        ));
    }
}
