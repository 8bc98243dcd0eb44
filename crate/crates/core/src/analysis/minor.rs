//! Minor-feature spaces: directions a layer cannot see (the nullspace of its
//! weight matrix), and the split of a displacement into its visible and
//! invisible parts.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::HyperplaneImplicit;
use crate::linalg;
use crate::network::Layer;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorFeatureSpace {
    /// Orthonormal basis of the nullspace.
    pub basis: Vec<DVector<f64>>,
    pub dim: usize,
    pub ambient_dim: usize,
}

pub fn minor_feature_space_of(weights: &DMatrix<f64>, tol: &ToleranceConfig) -> MinorFeatureSpace {
    let basis = linalg::nullspace(weights, tol.eps_rank);
    MinorFeatureSpace {
        dim: basis.len(),
        basis,
        ambient_dim: weights.ncols(),
    }
}

pub fn minor_feature_space(layer: &Layer, tol: &ToleranceConfig) -> MinorFeatureSpace {
    minor_feature_space_of(layer.weights(), tol)
}

/// Minor-feature dimension of `layer` before and after appending `h` as a
/// unit. Fails if `h`'s normal is already in the layer's row space, since the
/// dimension would then not drop.
pub fn add_hyperplane_effect(layer: &Layer, h: &HyperplaneImplicit, tol: &ToleranceConfig) -> Result<(usize, usize)> {
    let w = layer.weights();
    if h.dim() != w.ncols() {
        return Err(Error::DimensionMismatch {
            expected: w.ncols(),
            got: h.dim(),
        });
    }
    let mut stacked = w.clone().insert_row(w.nrows(), 0.0);
    stacked.set_row(w.nrows(), &h.normal().transpose());
    let before = linalg::rank(w, tol.eps_rank);
    let after = linalg::rank(&stacked, tol.eps_rank);
    if after != before + 1 {
        return Err(Error::NormalInRowSpace);
    }
    let m = w.ncols();
    Ok((m - before, m - after))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorFeatureDecomposition {
    /// Component inside the minor-feature space.
    pub x_l: DVector<f64>,
    /// Orthogonal complement, the part the layer sees.
    pub x_perp: DVector<f64>,
    pub norm_l: f64,
    /// The layer ignores the displacement entirely.
    pub pure_minor: bool,
}

pub fn decompose_minor_feature(
    displacement: &DVector<f64>,
    mfs: &MinorFeatureSpace,
    tol: &ToleranceConfig,
) -> Result<MinorFeatureDecomposition> {
    if displacement.len() != mfs.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: mfs.ambient_dim,
            got: displacement.len(),
        });
    }
    let x_l = linalg::project(&mfs.basis, displacement);
    let x_perp = displacement - &x_l;
    let pure_minor = x_perp.norm() <= tol.eps_zero * displacement.norm().max(1.0);
    Ok(MinorFeatureDecomposition {
        norm_l: x_l.norm(),
        x_l,
        x_perp,
        pure_minor,
    })
}
