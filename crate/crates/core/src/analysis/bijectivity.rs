//! Injectivity of a network on a dataset, layer collapse, and the
//! linear-regime certificate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::geometry::{dataset_dimensionality, line_direction_set, Dataset};
use crate::linalg;
use crate::network::{FeedforwardNetwork, Layer};
use crate::tolerance::ToleranceConfig;

/// Pairs of images whose Chebyshev distance is at most `eps`, and the
/// smallest Chebyshev distance between any two images.
pub fn image_collisions(images: &[DVector<f64>], eps: f64) -> (Vec<(usize, usize)>, Option<f64>) {
    let mut pairs = Vec::new();
    let mut min_gap: Option<f64> = None;
    for i in 0..images.len() {
        for j in (i + 1)..images.len() {
            let g = linalg::max_abs_diff(&images[i], &images[j]);
            if g <= eps {
                pairs.push((i, j));
            }
            min_gap = Some(min_gap.map_or(g, |m: f64| m.min(g)));
        }
    }
    (pairs, min_gap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerStatus {
    /// 1-based layer index.
    pub layer: usize,
    pub injective: bool,
    pub colliding_pairs: usize,
    pub min_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BijectivityReport {
    pub bijective: bool,
    /// Colliding pairs at the final layer.
    pub colliding_pairs: Vec<(usize, usize)>,
    /// Smallest Chebyshev distance between final-layer images.
    pub min_gap: Option<f64>,
    pub layers: Vec<LayerStatus>,
}

/// Whether the network's final-layer images of `d` pairwise differ in some
/// coordinate by more than `eps_zero`, with the same check for every layer.
pub fn verify_bijective(net: &FeedforwardNetwork, d: &Dataset, tol: &ToleranceConfig) -> Result<BijectivityReport> {
    let traces = d.points().iter().map(|x| net.forward(x)).collect::<Result<Vec<_>>>()?;
    let mut layers = Vec::with_capacity(net.depth());
    let mut last = (Vec::new(), None);
    for k in 0..net.depth() {
        let images: Vec<DVector<f64>> = traces.iter().map(|t| t[k].clone()).collect();
        let (pairs, gap) = image_collisions(&images, tol.eps_zero);
        layers.push(LayerStatus {
            layer: k + 1,
            injective: pairs.is_empty(),
            colliding_pairs: pairs.len(),
            min_gap: gap,
        });
        last = (pairs, gap);
    }
    Ok(BijectivityReport {
        bijective: last.0.is_empty(),
        colliding_pairs: last.0,
        min_gap: last.1,
        layers,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub collapsed: bool,
    /// Largest Chebyshev distance from the first image to any other.
    pub spread: f64,
    pub dataset_dimensionality: usize,
    /// `m - rank(W)`: the dimension of the intersection of the layer's hyperplanes.
    pub intersection_dimension: usize,
    pub all_chords_parallel: bool,
    /// Collapse implies both the dimension bound and chord parallelism.
    pub certificate_holds: bool,
}

/// Whether a layer maps all of `d` to a single point. Requires `d` to lie on
/// the positive side of every unit.
pub fn check_collapse(layer: &Layer, d: &Dataset, tol: &ToleranceConfig) -> Result<CollapseReport> {
    if layer.input_dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: layer.input_dim(),
            got: d.dim(),
        });
    }
    let mut images = Vec::with_capacity(d.len());
    for (i, x) in d.points().iter().enumerate() {
        let pre = layer.pre_activation(x)?;
        if let Some(u) = pre.iter().position(|&s| s <= 0.0) {
            return Err(Error::Precondition(format!(
                "point {i} is not on the positive side of unit {u} (output {})",
                pre[u]
            )));
        }
        images.push(layer.apply(x)?);
    }
    let spread = images
        .iter()
        .map(|y| linalg::max_abs_diff(y, &images[0]))
        .fold(0.0, f64::max);
    let collapsed = spread <= tol.eps_zero;
    let rank = linalg::rank(layer.weights(), tol.eps_rank);
    let bound = d.dim() - rank;
    let dim = dataset_dimensionality(d, tol);
    let all_chords_parallel = if d.len() < 2 {
        true
    } else {
        let l = line_direction_set(d, tol)?;
        let w = layer.weights();
        let row_norms: Vec<f64> = w.row_iter().map(|r| r.norm()).collect();
        l.directions().iter().all(|dir| {
            let p = w * dir;
            p.iter().zip(&row_norms).all(|(v, n)| v.abs() <= tol.eps_zero * n)
        })
    };
    Ok(CollapseReport {
        collapsed,
        spread,
        dataset_dimensionality: dim,
        intersection_dimension: bound,
        all_chords_parallel,
        certificate_holds: !collapsed || (dim <= bound && all_chords_parallel),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRegimeReport {
    pub holds: bool,
    /// Smallest ReLU pre-activation over the dataset (infinite if none).
    pub min_pre_activation: f64,
    /// `(point, layer, unit)` triples, 1-based layer, with a non-positive
    /// ReLU pre-activation or a saturating activation.
    pub violations: Vec<(usize, usize, usize)>,
}

/// Whether every unit acts linearly on `d`: ReLU pre-activations are all at
/// least `threshold`, and no sigmoid or tanh unit is present.
pub fn linear_regime_certificate(net: &FeedforwardNetwork, d: &Dataset, threshold: f64) -> Result<LinearRegimeReport> {
    let mut violations = Vec::new();
    let mut min_pre = f64::INFINITY;
    for (i, x) in d.points().iter().enumerate() {
        for (k, t) in net.trace(x)?.iter().enumerate() {
            match net.layer(k).activation() {
                ActivationKind::Linear => {}
                ActivationKind::Relu => {
                    for (u, &s) in t.pre.iter().enumerate() {
                        min_pre = min_pre.min(s);
                        if s < threshold {
                            violations.push((i, k + 1, u));
                        }
                    }
                }
                ActivationKind::Sigmoid | ActivationKind::Tanh => {
                    violations.extend((0..t.pre.len()).map(|u| (i, k + 1, u)));
                }
            }
        }
    }
    Ok(LinearRegimeReport {
        holds: violations.is_empty(),
        min_pre_activation: min_pre,
        violations,
    })
}

/// Affine map `x -> A x + c` computed by a network in which every unit is in
/// its linear regime.
pub fn composed_affine_map(net: &FeedforwardNetwork) -> (DMatrix<f64>, DVector<f64>) {
    let m = net.input_dim();
    let mut a = DMatrix::identity(m, m);
    let mut c = DVector::zeros(m);
    for l in net.layers() {
        c = l.weights() * c + l.bias();
        a = l.weights() * a;
    }
    (a, c)
}
