//! Generalization verdicts for a pair of inputs: whether they share a
//! region of the ReLU arrangement, and whether the network maps them to the
//! same output.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::linalg;
use crate::network::FeedforwardNetwork;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locality {
    /// Same strict sign pattern at every ReLU unit.
    Local,
    Nonlocal,
    /// Some ReLU pre-activation is within `eps_zero` of zero.
    Boundary,
    /// The network has no ReLU units, or has sigmoid/tanh units, so regions
    /// are not defined.
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlap {
    Overlapping,
    NonOverlapping,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCause {
    /// The layer's pre-activations already coincide: the difference of its
    /// inputs lies in its minor-feature space.
    MinorFeature,
    /// Pre-activations differ but the activation clamps them together.
    Clamped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralizationVerdict {
    pub locality: Locality,
    pub overlap: Overlap,
    /// 1-based index of the first layer at which the two images coincide.
    pub first_violation_layer: Option<usize>,
    pub cause: Option<ViolationCause>,
}

fn sign_pattern(pre: &[DVector<f64>], relu_layers: &[usize], eps: f64) -> Option<Vec<bool>> {
    let mut out = Vec::new();
    for &k in relu_layers {
        for &s in pre[k].iter() {
            if s.abs() <= eps {
                return None;
            }
            out.push(s > 0.0);
        }
    }
    Some(out)
}

/// Verdict for `x` relative to the reference `x0`. Overlap is decided at
/// the final layer of `net`; pass the encoder (or hidden stack) whose output
/// is the representation of interest.
pub fn classify_generalization(
    net: &FeedforwardNetwork,
    x0: &DVector<f64>,
    x: &DVector<f64>,
    tol: &ToleranceConfig,
) -> Result<GeneralizationVerdict> {
    if x.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            expected: x0.len(),
            got: x.len(),
        });
    }
    let t0 = net.trace(x0)?;
    let t1 = net.trace(x)?;
    let acts: Vec<ActivationKind> = net.layers().iter().map(|l| l.activation()).collect();
    let relu_layers: Vec<usize> = (0..acts.len()).filter(|&k| acts[k] == ActivationKind::Relu).collect();
    let smooth = acts
        .iter()
        .any(|a| matches!(a, ActivationKind::Sigmoid | ActivationKind::Tanh));
    let locality = if relu_layers.is_empty() || smooth {
        Locality::NotApplicable
    } else {
        let pre0: Vec<DVector<f64>> = t0.iter().map(|t| t.pre.clone()).collect();
        let pre1: Vec<DVector<f64>> = t1.iter().map(|t| t.pre.clone()).collect();
        match (
            sign_pattern(&pre0, &relu_layers, tol.eps_zero),
            sign_pattern(&pre1, &relu_layers, tol.eps_zero),
        ) {
            (Some(a), Some(b)) if a == b => Locality::Local,
            (Some(_), Some(_)) => Locality::Nonlocal,
            _ => Locality::Boundary,
        }
    };
    let mut first = None;
    for k in 0..t0.len() {
        if linalg::max_abs_diff(&t0[k].post, &t1[k].post) <= tol.eps_zero {
            let cause = if linalg::max_abs_diff(&t0[k].pre, &t1[k].pre) <= tol.eps_zero {
                ViolationCause::MinorFeature
            } else {
                ViolationCause::Clamped
            };
            first = Some((k + 1, cause));
            break;
        }
    }
    let last = t0.len() - 1;
    let overlapping = linalg::max_abs_diff(&t0[last].post, &t1[last].post) <= tol.eps_zero;
    Ok(GeneralizationVerdict {
        locality,
        overlap: if overlapping {
            Overlap::Overlapping
        } else {
            Overlap::NonOverlapping
        },
        first_violation_layer: if overlapping { first.map(|f| f.0) } else { None },
        cause: if overlapping { first.map(|f| f.1) } else { None },
    })
}
