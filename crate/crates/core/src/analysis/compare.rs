//! Baselines: PCA reconstruction against a constructed encoder with its
//! lookup decoder, and encoder parameter counts against the decision-tree
//! count `(m + 1) * n_b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::analysis::separability::separability_of;
use crate::builder::{
    build_bijective_encoder, build_category_encoder, build_distinguishable_encoder, build_linear_encoder,
    build_lookup_decoder, default_widths, BuildConfig, EncoderMethod, EncoderSpec,
};
use crate::error::{Error, Result};
use crate::geometry::Dataset;
use crate::network::FeedforwardNetwork;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub method: String,
    /// Mean squared reconstruction error over the dataset.
    pub reconstruction_error: Option<f64>,
    /// Per-category separability of the reduced representation (labelled data only).
    pub separable_after_reduction: Option<bool>,
    pub parameter_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pca {
    pub mean: DVector<f64>,
    /// Principal directions, by decreasing eigenvalue.
    pub components: Vec<DVector<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl Pca {
    /// Fits the top `n_e` components of the mean-centred covariance. Equal
    /// eigenvalues keep the solver's index order.
    pub fn fit(d: &Dataset, n_e: usize) -> Result<Self> {
        let m = d.dim();
        if n_e == 0 || n_e >= m {
            return Err(Error::Precondition(format!(
                "need 1 <= n_e < m, got n_e = {n_e}, m = {m}"
            )));
        }
        let mean = d.centroid();
        let x = DMatrix::from_fn(d.len(), m, |i, j| d.point(i)[j] - mean[j]);
        let cov = x.transpose() * &x / d.len() as f64;
        let eig = SymmetricEigen::new(cov);
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let components = idx[..n_e]
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect();
        let eigenvalues = idx[..n_e].iter().map(|&i| eig.eigenvalues[i]).collect();
        Ok(Self {
            mean,
            components,
            eigenvalues,
        })
    }

    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = x - &self.mean;
        DVector::from_iterator(self.components.len(), self.components.iter().map(|v| v.dot(&c)))
    }

    pub fn reconstruct(&self, z: &DVector<f64>) -> DVector<f64> {
        self.components
            .iter()
            .zip(z.iter())
            .fold(self.mean.clone(), |acc, (v, &c)| acc + v * c)
    }

    /// `m * n_e` weights plus `m` offsets.
    pub fn parameter_count(&self) -> usize {
        self.mean.len() * (self.components.len() + 1)
    }
}

fn separable(images: &[DVector<f64>], d: &Dataset, cfg: &BuildConfig) -> Result<Option<bool>> {
    match d.labels() {
        Some(l) if d.categories().len() >= 2 => Ok(Some(separability_of(images, l, &cfg.tol)?.separable)),
        _ => Ok(None),
    }
}

/// Constructed encoder of encoding width `n_e` for `method`.
pub fn encoder_for(d: &Dataset, n_e: usize, method: EncoderMethod, cfg: &BuildConfig) -> Result<FeedforwardNetwork> {
    match method {
        EncoderMethod::Discriminating | EncoderMethod::Linear => {
            let spec = EncoderSpec::new(d.dim(), default_widths(d.dim(), n_e)?, method)?;
            if method == EncoderMethod::Linear {
                build_linear_encoder(d, &spec, cfg)
            } else {
                build_bijective_encoder(d, &spec, cfg)
            }
        }
        EncoderMethod::Disentangling => build_category_encoder(d, n_e, cfg),
        EncoderMethod::Distinguishable => {
            if n_e != d.len() {
                return Err(Error::InvalidSpec(format!(
                    "distinguishable encoding width is |D| = {}, not {n_e}",
                    d.len()
                )));
            }
            Ok(build_distinguishable_encoder(d, 0, cfg)?.network)
        }
    }
}

/// Autoencoder (constructed encoder + lookup decoder) against PCA, both
/// reducing to `n_e` dimensions.
pub fn pca_compare(
    d: &Dataset,
    n_e: usize,
    method: EncoderMethod,
    cfg: &BuildConfig,
) -> Result<(ComparisonReport, ComparisonReport)> {
    let pca = Pca::fit(d, n_e)?;
    let enc = encoder_for(d, n_e, method, cfg)?;
    let dec = build_lookup_decoder(&enc, d, &cfg.tol)?;
    let mut ae_err = 0.0;
    let mut pca_err = 0.0;
    let mut ae_images = Vec::with_capacity(d.len());
    let mut pca_images = Vec::with_capacity(d.len());
    for x in d.points() {
        let z = enc.output(x)?;
        ae_err += (dec.decode(&z)? - x).norm_squared();
        ae_images.push(z);
        let p = pca.project(x);
        pca_err += (pca.reconstruct(&p) - x).norm_squared();
        pca_images.push(p);
    }
    let n = d.len() as f64;
    Ok((
        ComparisonReport {
            method: format!("autoencoder ({method})"),
            reconstruction_error: Some(ae_err / n),
            separable_after_reduction: separable(&ae_images, d, cfg)?,
            parameter_count: enc.parameter_count(),
        },
        ComparisonReport {
            method: "pca".into(),
            reconstruction_error: Some(pca_err / n),
            separable_after_reduction: separable(&pca_images, d, cfg)?,
            parameter_count: pca.parameter_count(),
        },
    ))
}

/// Parameters of a decision tree with `n_b` branch nodes over `R^m`.
pub fn decision_tree_parameters(m: usize, n_b: usize) -> usize {
    (m + 1) * n_b
}

/// Encoder parameter count (`sum n_out * (n_in + 1)`) against the decision-tree count.
pub fn parameter_comparison(
    m: usize,
    n_b: usize,
    enc: &FeedforwardNetwork,
) -> Result<(ComparisonReport, ComparisonReport)> {
    if m == 0 || n_b == 0 {
        return Err(Error::Precondition("m and n_b must be at least 1".into()));
    }
    let report = |method: &str, count| ComparisonReport {
        method: method.into(),
        reconstruction_error: None,
        separable_after_reduction: None,
        parameter_count: count,
    };
    Ok((
        report("encoder", enc.parameter_count()),
        report("decision_tree", decision_tree_parameters(m, n_b)),
    ))
}
