//! Seeded property experiments. Each returns a [`Report`] that is a pure
//! function of its [`ExperimentConfig`].

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::analysis::bijectivity::{check_collapse, linear_regime_certificate};
use crate::analysis::generalization::{classify_generalization, Overlap};
use crate::analysis::minor::{add_hyperplane_effect, minor_feature_space};
use crate::analysis::robustness::perturbation_robustness;
use crate::analysis::separability::{is_disentangled, is_linearly_separable};
use crate::builder::{
    build_bijective_encoder, build_linear_encoder, build_lookup_decoder, default_widths, BuildConfig, EncoderMethod,
    EncoderSpec,
};
use crate::discriminator::{random_discrimination_trial, sample_unit_sphere};
use crate::error::{Error, Result};
use crate::geometry::{translate_to_positive_side, Dataset, HyperplaneImplicit};
use crate::network::{FeedforwardNetwork, Layer, NetworkMeta, Role};
use crate::report::{CheckRecord, Report};
use crate::rng::{self, StreamRng};
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    /// Collapse on a dataset parallel to a layer's hyperplane intersection,
    /// and its absence on random instances.
    #[serde(rename = "thm1")]
    ParallelCollapse,
    /// Linear-regime encoders never disentangle embedded XOR.
    #[serde(rename = "thm6")]
    LinearRegimeXor,
    /// Frequency with which sphere-uniform hyperplanes discriminate a fixed dataset.
    #[serde(rename = "thm7")]
    RandomDiscrimination,
    /// Adding an independent hyperplane shrinks the minor-feature space by one.
    #[serde(rename = "prop6")]
    NullityDrop,
    /// The two-network minor-feature example in R^3.
    #[serde(rename = "fig1")]
    MinorFeatureExample,
    #[serde(rename = "robustness")]
    Robustness,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::ParallelCollapse,
        Self::LinearRegimeXor,
        Self::RandomDiscrimination,
        Self::NullityDrop,
        Self::MinorFeatureExample,
        Self::Robustness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ParallelCollapse => "thm1",
            Self::LinearRegimeXor => "thm6",
            Self::RandomDiscrimination => "thm7",
            Self::NullityDrop => "prop6",
            Self::MinorFeatureExample => "fig1",
            Self::Robustness => "robustness",
        }
    }

    /// Trial count used when the config does not override it.
    pub fn default_trials(self) -> usize {
        match self {
            Self::ParallelCollapse | Self::LinearRegimeXor => 100,
            Self::RandomDiscrimination => 10_000,
            Self::NullityDrop => 200,
            Self::MinorFeatureExample => 1,
            Self::Robustness => 20,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown experiment '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_trials: Option<usize>,
    pub tol: ToleranceConfig,
    pub margin: f64,
}

impl ExperimentConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            n_trials: None,
            tol: ToleranceConfig::default(),
            margin: 1.0,
        }
    }

    fn trials(&self, e: Experiment) -> usize {
        self.n_trials.unwrap_or_else(|| e.default_trials())
    }

    fn build(&self, name: &str, i: usize) -> BuildConfig {
        let mut b = BuildConfig::with_seed(rng::derive_seed(self.seed, name, i as u64));
        b.margin = self.margin;
        b.tol = self.tol;
        b
    }
}

pub fn run(e: Experiment, cfg: &ExperimentConfig) -> Result<Report> {
    cfg.tol.validate()?;
    if cfg.n_trials == Some(0) {
        return Err(Error::InvalidSpec("n_trials must be at least 1".into()));
    }
    let mut report = Report::new(e.name(), cfg.seed);
    match e {
        Experiment::ParallelCollapse => parallel_collapse(cfg, &mut report)?,
        Experiment::LinearRegimeXor => linear_regime_xor(cfg, &mut report)?,
        Experiment::RandomDiscrimination => random_discrimination(cfg, &mut report)?,
        Experiment::NullityDrop => nullity_drop(cfg, &mut report)?,
        Experiment::MinorFeatureExample => minor_feature_example(cfg, &mut report)?,
        Experiment::Robustness => robustness(cfg, &mut report)?,
    }
    Ok(report)
}

pub fn uniform_dataset(r: &mut StreamRng, n: usize, m: usize, tol: &ToleranceConfig) -> Result<Dataset> {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    Dataset::from_rows(&rows, None, tol)
}

/// XOR on the first two coordinates of `R^m`: categories `a` at (0,0), (1,1)
/// and `b` at (0,1), (1,0).
pub fn embedded_xor(m: usize, tol: &ToleranceConfig) -> Result<Dataset> {
    if m < 2 {
        return Err(Error::Precondition("embedded XOR needs m >= 2".into()));
    }
    let pts = [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)];
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|&(a, b)| {
            let mut r = vec![0.0; m];
            r[0] = a;
            r[1] = b;
            r
        })
        .collect();
    let labels = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
    Dataset::from_rows(&rows, Some(labels), tol)
}

/// Layer of `n` random unit-normal ReLU units, shifted so `d` lies at least
/// `margin` on every positive side.
pub fn random_positive_layer(
    r: &mut StreamRng,
    d: &Dataset,
    n: usize,
    margin: f64,
    tol: &ToleranceConfig,
) -> Result<Layer> {
    let hs = (0..n)
        .map(|_| {
            let h = HyperplaneImplicit::new(sample_unit_sphere(r, d.dim()), 0.0, tol)?;
            translate_to_positive_side(&h, d, margin)
        })
        .collect::<Result<Vec<_>>>()?;
    Layer::from_hyperplanes(&hs, ActivationKind::Relu)
}

/// Two planes in `R^3` meeting in a line along `x_2`, and points on a line
/// parallel to it.
pub fn parallel_collapse_instance(tol: &ToleranceConfig) -> Result<(Layer, Dataset)> {
    let layer = Layer::from_rows(
        &[vec![1.0, 0.0, 1.0], vec![1.0, 0.0, -1.0]],
        &[1.0, 1.0],
        ActivationKind::Relu,
    )?;
    let rows: Vec<Vec<f64>> = (-3..=3).map(|t| vec![0.5, f64::from(t), 0.25]).collect();
    Ok((layer, Dataset::from_rows(&rows, None, tol)?))
}

fn parallel_collapse(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let (layer, d) = parallel_collapse_instance(&cfg.tol)?;
    let c = check_collapse(&layer, &d, &cfg.tol)?;
    report.push(
        CheckRecord::new("parallel_instance_collapses", c.collapsed && c.spread <= 1e-9)
            .metric("spread", c.spread)
            .metric("dataset_dimensionality", c.dataset_dimensionality as f64)
            .metric("intersection_dimension", c.intersection_dimension as f64),
    );
    let n = cfg.trials(Experiment::ParallelCollapse);
    let mut collapsed = Vec::new();
    let mut bound_violations = Vec::new();
    for i in 0..n {
        let mut r = rng::substream(cfg.seed, "thm1", i as u64);
        let m = r.random_range(3..=8);
        let units = r.random_range(1..m);
        let size = r.random_range(2..=10);
        let d = uniform_dataset(&mut r, size, m, &cfg.tol)?;
        let layer = random_positive_layer(&mut r, &d, units, cfg.margin, &cfg.tol)?;
        let c = check_collapse(&layer, &d, &cfg.tol)?;
        if c.collapsed {
            collapsed.push(i);
        }
        if !c.certificate_holds {
            bound_violations.push(i);
        }
    }
    report.push(
        CheckRecord::new("random_instances_do_not_collapse", collapsed.is_empty())
            .witness("collapsed_instances", &collapsed)
            .metric("instances", n as f64),
    );
    report.push(
        CheckRecord::new(
            "collapse_certificate_holds",
            bound_violations.is_empty() && c.certificate_holds,
        )
        .witness("violations", &bound_violations),
    );
    Ok(())
}

fn linear_regime_xor(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let d = embedded_xor(10, &cfg.tol)?;
    let input = is_linearly_separable(&d, &cfg.tol)?;
    report.push(CheckRecord::new("input_inseparable", !input.separable));
    let n = cfg.trials(Experiment::LinearRegimeXor);
    let mut disentangled = Vec::new();
    let mut not_linear = Vec::new();
    for i in 0..n {
        let mut r = rng::substream(cfg.seed, "thm6", i as u64);
        let n_e = r.random_range(1..10);
        let method = if i % 2 == 0 {
            EncoderMethod::Discriminating
        } else {
            EncoderMethod::Linear
        };
        let spec = EncoderSpec::new(10, default_widths(10, n_e)?, method)?;
        let b = cfg.build("xor-encoder", i);
        let enc = if method == EncoderMethod::Linear {
            build_linear_encoder(&d, &spec, &b)?
        } else {
            build_bijective_encoder(&d, &spec, &b)?
        };
        if !linear_regime_certificate(&enc, &d, cfg.margin - cfg.tol.eps_zero)?.holds
            && method == EncoderMethod::Discriminating
        {
            not_linear.push(i);
        }
        if is_disentangled(&enc, &d, &cfg.tol)?.disentangled {
            disentangled.push(i);
        }
    }
    report
        .push(CheckRecord::new("linear_regime_precondition", not_linear.is_empty()).witness("violations", &not_linear));
    report.push(
        CheckRecord::new("never_disentangled", disentangled.is_empty())
            .witness("disentangled_runs", &disentangled)
            .metric("runs", n as f64),
    );
    Ok(())
}

/// The fixed 50-point dataset in `R^10` used by the Monte-Carlo experiment.
pub fn discrimination_dataset(seed: u64, tol: &ToleranceConfig) -> Result<Dataset> {
    uniform_dataset(&mut rng::substream(seed, "discrimination-data", 0), 50, 10, tol)
}

fn random_discrimination(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let d = discrimination_dataset(cfg.seed, &cfg.tol)?;
    let n = cfg.trials(Experiment::RandomDiscrimination);
    let t = random_discrimination_trial(&d, n, rng::derive_seed(cfg.seed, "discrimination-trials", 0), &cfg.tol)?;
    report.push(
        CheckRecord::new("discrimination_frequency", t.frequency >= 0.999)
            .metric("frequency", t.frequency)
            .metric("successes", t.successes as f64)
            .metric("failures", t.failures as f64)
            .metric("min_gap", t.min_gap.unwrap_or(f64::INFINITY)),
    );
    Ok(())
}

fn nullity_drop(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let n = cfg.trials(Experiment::NullityDrop);
    let mut wrong = Vec::new();
    let mut rejected = 0usize;
    for i in 0..n {
        let mut r = rng::substream(cfg.seed, "prop6", i as u64);
        let m = r.random_range(2..=12);
        let units = r.random_range(1..m);
        let rows: Vec<Vec<f64>> = (0..units)
            .map(|_| sample_unit_sphere(&mut r, m).iter().copied().collect())
            .collect();
        let layer = Layer::from_rows(&rows, &vec![0.0; units], ActivationKind::Relu)?;
        let h = HyperplaneImplicit::new(sample_unit_sphere(&mut r, m), r.random_range(-1.0..1.0), &cfg.tol)?;
        match add_hyperplane_effect(&layer, &h, &cfg.tol) {
            Ok((before, after)) if before == after + 1 => {}
            Ok(_) => wrong.push(i),
            Err(Error::NormalInRowSpace) => rejected += 1,
            Err(e) => return Err(e),
        }
    }
    report.push(
        CheckRecord::new("nullity_drops_by_one", wrong.is_empty() && rejected == 0)
            .witness("wrong_instances", &wrong)
            .metric("instances", n as f64)
            .metric("rejected_dependent_normals", rejected as f64),
    );
    Ok(())
}

/// The one-unit network on `R^3` whose plane `x_1 + x_3 = 0` is parallel to
/// the `x_2` axis, and the same network with the plane `x_2 + x_3 = 0` added.
pub fn minor_feature_networks() -> Result<(FeedforwardNetwork, FeedforwardNetwork, HyperplaneImplicit)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let l1 = Layer::from_rows(&[vec![s, 0.0, s]], &[0.0], ActivationKind::Relu)?;
    let l12 = Layer::from_rows(&[vec![s, 0.0, s], vec![0.0, s, s]], &[0.0, 0.0], ActivationKind::Relu)?;
    let h2 = HyperplaneImplicit::new(
        DVector::from_column_slice(&[0.0, s, s]),
        0.0,
        &ToleranceConfig::default(),
    )?;
    Ok((
        FeedforwardNetwork::new(Role::Generic, vec![l1], NetworkMeta::default())?,
        FeedforwardNetwork::new(Role::Generic, vec![l12], NetworkMeta::default())?,
        h2,
    ))
}

fn minor_feature_example(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let tol = &cfg.tol;
    let (one, two, h2) = minor_feature_networks()?;
    let p = DVector::from_column_slice(&[1.0, 1.0, 1.0]);
    let p1 = DVector::from_column_slice(&[1.0, 1.0, 1.5]);
    let p2 = DVector::from_column_slice(&[1.0, 1.5, 1.0]);
    let mfs = minor_feature_space(one.layer(0), tol);
    report.push(CheckRecord::new("minor_space_dim_is_2", mfs.dim == 2).metric("dim", mfs.dim as f64));
    let g2 = classify_generalization(&one, &p, &p2, tol)?;
    report.push(
        CheckRecord::new(
            "x2_displacement_overlaps_at_layer_1",
            g2.overlap == Overlap::Overlapping && g2.first_violation_layer == Some(1),
        )
        .witness("verdict", &g2),
    );
    let g1 = classify_generalization(&one, &p, &p1, tol)?;
    report.push(
        CheckRecord::new("x3_displacement_preserved", g1.overlap == Overlap::NonOverlapping).witness("verdict", &g1),
    );
    let (before, after) = add_hyperplane_effect(one.layer(0), &h2, tol)?;
    report.push(
        CheckRecord::new("adding_l2_drops_dim_to_1", before == 2 && after == 1)
            .metric("before", before as f64)
            .metric("after", after as f64),
    );
    let g = classify_generalization(&two, &p, &p2, tol)?;
    report.push(
        CheckRecord::new(
            "x2_displacement_preserved_with_l2",
            g.overlap == Overlap::NonOverlapping,
        )
        .witness("verdict", &g)
        .metric("minor_dim", minor_feature_space(two.layer(0), tol).dim as f64),
    );
    Ok(())
}

fn robustness(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let mut r = rng::substream(cfg.seed, "robustness-data", 0);
    let size = cfg.trials(Experiment::Robustness).max(1);
    let d = uniform_dataset(&mut r, size, 8, &cfg.tol)?;
    let spec = EncoderSpec::new(8, vec![4, 2], EncoderMethod::Discriminating)?;
    let enc = build_bijective_encoder(&d, &spec, &cfg.build("robustness-encoder", 0))?;
    let dec = build_lookup_decoder(&enc, &d, &cfg.tol)?;
    let mfs = minor_feature_space(enc.layer(0), &cfg.tol);
    let x0 = d.point(0);
    let magnitudes = [0.0, 1e-3, 0.1, 1.0];
    let minor = perturbation_robustness(&enc, &dec, x0, &mfs.basis, &magnitudes, &cfg.tol)?;
    let all_recovered = minor.cases.iter().all(|c| c.recovered && c.guaranteed);
    report.push(
        CheckRecord::new("minor_perturbations_recovered", all_recovered && minor.guarantees_hold)
            .metric("cases", minor.cases.len() as f64),
    );
    let visible: Vec<DVector<f64>> = (0..3).map(|_| sample_unit_sphere(&mut r, 8)).collect();
    let gap = dec.min_encoding_gap().unwrap_or(1.0);
    let other = perturbation_robustness(&enc, &dec, x0, &visible, &[0.25 * gap, 10.0 * gap], &cfg.tol)?;
    report.push(
        CheckRecord::new("guarantees_hold_for_generic_directions", other.guarantees_hold)
            .metric("recovered", other.cases.iter().filter(|c| c.recovered).count() as f64)
            .metric("guaranteed", other.cases.iter().filter(|c| c.guaranteed).count() as f64)
            .metric("cases", other.cases.len() as f64),
    );
    Ok(())
}
