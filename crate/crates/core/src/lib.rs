//! Constructive synthesis of bijective and disentangling encoder networks,
//! and geometric analysis of piecewise-linear networks on finite datasets.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: hyperplanes, parallelism, line-direction sets.
//! - [`discriminator`]: hyperplanes unparallel to a dataset's chords and
//!   hyperplanes whose outputs separate every pair of points.
//! - [`network`] and [`builder`]: layers, networks and the encoder
//!   constructions, plus the exact lookup decoder and [`conv`] lowering.
//! - [`analysis`]: bijectivity, collapse, separability, minor-feature
//!   spaces, generalization verdicts, robustness and baselines.
//! - [`experiments`]: seeded, reproducible property experiments.

pub mod activation;
pub mod analysis;
pub mod builder;
pub mod conv;
pub mod discriminator;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod network;
pub mod report;
pub mod rng;
pub mod tolerance;

pub use activation::ActivationKind;
pub use error::{Error, Result};
pub use geometry::{Dataset, HyperplaneImplicit, HyperplaneParametric, LineDirectionSet};
pub use network::{FeedforwardNetwork, Layer, NetworkMeta, Role};
pub use tolerance::ToleranceConfig;

pub use nalgebra::{DMatrix, DVector};
