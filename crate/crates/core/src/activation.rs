use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Unit activation. Only `Relu` and `Linear` are used by the constructions;
/// `Sigmoid` and `Tanh` are supported for evaluation and analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    Linear,
    Sigmoid,
    Tanh,
}

impl ActivationKind {
    #[inline]
    pub fn apply(self, s: f64) -> f64 {
        match self {
            ActivationKind::Relu => s.max(0.0),
            ActivationKind::Linear => s,
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-s).exp()),
            ActivationKind::Tanh => s.tanh(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::Linear => "linear",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relu" => Ok(ActivationKind::Relu),
            "linear" => Ok(ActivationKind::Linear),
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            other => Err(format!("unknown activation {other:?}")),
        }
    }
}
