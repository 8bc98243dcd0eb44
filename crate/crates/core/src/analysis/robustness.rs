//! Recovery of a data point from a perturbed input through an encoder and
//! its lookup decoder.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::builder::LookupDecoder;
use crate::error::{Error, Result};
use crate::linalg;
use crate::network::FeedforwardNetwork;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCase {
    pub direction: usize,
    pub magnitude: f64,
    pub encoding_unchanged: bool,
    pub recovered: bool,
    /// First layer (1-based) whose pre-activations ignore the perturbation.
    pub pure_minor_layer: Option<usize>,
    /// Every unit before that layer keeps a strictly positive (or linear)
    /// pre-activation at both points.
    pub linear_regime: bool,
    /// Recovery follows from the two flags above.
    pub guaranteed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub cases: Vec<RobustnessCase>,
    /// Every guaranteed case was in fact recovered.
    pub guarantees_hold: bool,
}

/// Perturbs `x0` by `magnitude * direction / |direction|` for every pair and
/// reports whether the encoding and the decoded point change.
pub fn perturbation_robustness(
    enc: &FeedforwardNetwork,
    dec: &LookupDecoder,
    x0: &DVector<f64>,
    directions: &[DVector<f64>],
    magnitudes: &[f64],
    tol: &ToleranceConfig,
) -> Result<RobustnessReport> {
    let base = enc.trace(x0)?;
    let z0 = &base[base.len() - 1].post;
    let target = dec.decode_index(z0)?;
    if linalg::max_abs_diff(&dec.encodings()[target], z0) > tol.eps_zero {
        return Err(Error::Precondition("x0 is not a point the decoder was built on".into()));
    }
    let mut cases = Vec::with_capacity(directions.len() * magnitudes.len());
    for (di, dir) in directions.iter().enumerate() {
        let n = dir.norm();
        if n == 0.0 {
            return Err(Error::Precondition(format!("direction {di} is zero")));
        }
        let unit = dir / n;
        for &mag in magnitudes {
            let x = x0 + &unit * mag;
            let tr = enc.trace(&x)?;
            let z = &tr[tr.len() - 1].post;
            let encoding_unchanged = linalg::max_abs_diff(z, z0) <= tol.eps_zero;
            let recovered = dec.decode_index(z)? == target;
            let pure_minor_layer = (0..tr.len())
                .find(|&k| linalg::max_abs_diff(&tr[k].pre, &base[k].pre) <= tol.eps_zero)
                .map(|k| k + 1);
            let linear_regime = match pure_minor_layer {
                Some(k) => (0..k - 1).all(|j| {
                    enc.layer(j).activation() == ActivationKind::Linear
                        || (enc.layer(j).activation() == ActivationKind::Relu
                            && tr[j].pre.iter().chain(base[j].pre.iter()).all(|&s| s > tol.eps_zero))
                }),
                None => false,
            };
            cases.push(RobustnessCase {
                direction: di,
                magnitude: mag,
                encoding_unchanged,
                recovered,
                pure_minor_layer,
                linear_regime,
                guaranteed: pure_minor_layer.is_some() && linear_regime,
            });
        }
    }
    Ok(RobustnessReport {
        guarantees_hold: cases.iter().all(|c| !c.guaranteed || c.recovered),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::minor::minor_feature_space;
    use crate::builder::{build_bijective_encoder, build_lookup_decoder, BuildConfig, EncoderMethod, EncoderSpec};
    use crate::geometry::Dataset;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Dataset, FeedforwardNetwork, LookupDecoder) {
        let t = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let d = Dataset::from_rows(&rows, None, &t).unwrap();
        let spec = EncoderSpec::new(6, vec![3, 2], EncoderMethod::Discriminating).unwrap();
        let enc = build_bijective_encoder(&d, &spec, &BuildConfig::with_seed(1)).unwrap();
        let dec = build_lookup_decoder(&enc, &d, &t).unwrap();
        (d, enc, dec)
    }

    #[test]
    fn minor_direction_is_recovered() {
        let t = ToleranceConfig::default();
        let (d, enc, dec) = setup();
        let mfs = minor_feature_space(enc.layer(0), &t);
        assert_eq!(mfs.dim, 3);
        let r = perturbation_robustness(&enc, &dec, d.point(0), &mfs.basis, &[0.0, 0.1, 5.0], &t).unwrap();
        assert!(r.guarantees_hold);
        for c in &r.cases {
            assert!(c.encoding_unchanged && c.recovered && c.guaranteed);
            assert_eq!(c.pure_minor_layer, Some(1));
        }
    }

    #[test]
    fn visible_direction_is_reported_only() {
        let t = ToleranceConfig::default();
        let (d, enc, dec) = setup();
        let w0 = enc.layer(0).weights().row(0).transpose();
        let gap = dec.min_encoding_gap().unwrap();
        let r = perturbation_robustness(&enc, &dec, d.point(0), &[w0], &[100.0 * gap], &t).unwrap();
        let c = &r.cases[0];
        assert!(!c.encoding_unchanged);
        assert!(!c.guaranteed);
        assert_eq!(c.pure_minor_layer, None);
    }
}
