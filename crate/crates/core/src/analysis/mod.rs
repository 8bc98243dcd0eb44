//! Checks of bijectivity, collapse, separability, minor-feature spaces,
//! generalization and robustness on concrete networks and datasets, plus
//! the PCA and decision-tree baselines.

pub mod bijectivity;
pub mod compare;
pub mod generalization;
pub mod minor;
pub mod robustness;
pub mod separability;

pub use bijectivity::{check_collapse, linear_regime_certificate, verify_bijective};
pub use compare::{parameter_comparison, pca_compare, ComparisonReport};
pub use generalization::{classify_generalization, GeneralizationVerdict, Locality, Overlap};
pub use minor::{add_hyperplane_effect, decompose_minor_feature, minor_feature_space, MinorFeatureSpace};
pub use robustness::perturbation_robustness;
pub use separability::{is_disentangled, is_linearly_separable};
