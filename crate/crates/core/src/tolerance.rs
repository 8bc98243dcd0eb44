use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thresholds for treating floating-point quantities as zero.
///
/// `eps_zero` is an absolute threshold on outputs, gaps and projections.
/// `eps_rank` is relative: a singular value counts toward rank only when it
/// exceeds `eps_rank` times the largest singular value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub eps_zero: f64,
    pub eps_rank: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps_zero: 1e-9,
            eps_rank: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn new(eps_zero: f64, eps_rank: f64) -> Result<Self> {
        let cfg = Self { eps_zero, eps_rank };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps_zero", self.eps_zero), ("eps_rank", self.eps_rank)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}
