//! `aeframe`: build, verify and compare constructed encoders, and run the
//! seeded property experiments.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 invalid spec or
//! arguments, 3 construction failure, 4 I/O, parse or dimension error.

mod dataset;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aeframe::analysis::bijectivity::verify_bijective;
use aeframe::analysis::compare::{encoder_for, parameter_comparison, pca_compare, ComparisonReport};
use aeframe::analysis::separability::is_disentangled;
use aeframe::builder::{
    build_bijective_encoder, build_disentangling_encoder, build_distinguishable_encoder, build_linear_encoder,
    build_lookup_decoder, default_widths, BuildConfig, EncoderMethod, EncoderSpec, PolytopeCover,
};
use aeframe::experiments::{self, Experiment, ExperimentConfig};
use aeframe::report::{CheckRecord, Report};
use aeframe::{Error, FeedforwardNetwork, ToleranceConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_CHECK: u8 = 1;
const EXIT_SPEC: u8 = 2;
const EXIT_CONSTRUCTION: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    fn spec(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_SPEC,
            message: message.into(),
        }
    }

    /// Classifies a library error raised while building or analysing.
    fn from_core(e: Error) -> Self {
        let code = match &e {
            Error::InvalidSpec(_)
            | Error::InvalidTolerance(_)
            | Error::InvalidCover(_)
            | Error::InsufficientDimension { .. }
            | Error::Precondition(_) => EXIT_SPEC,
            Error::DimensionMismatch { .. } | Error::InvalidDataset(_) | Error::DuplicatePoint(..) | Error::Json(_) => {
                EXIT_IO
            }
            _ => EXIT_CONSTRUCTION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Discriminating,
    Distinguishable,
    Disentangling,
    Linear,
}

impl From<MethodArg> for EncoderMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Discriminating => Self::Discriminating,
            MethodArg::Distinguishable => Self::Distinguishable,
            MethodArg::Disentangling => Self::Disentangling,
            MethodArg::Linear => Self::Linear,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "aeframe",
    version,
    about = "Constructive encoder synthesis and geometric network analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Common {
    /// Zero threshold for distances and outputs.
    #[arg(long, default_value_t = 1e-9)]
    eps_zero: f64,
    /// Relative singular-value cutoff for ranks.
    #[arg(long, default_value_t = 1e-8)]
    eps_rank: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl Common {
    fn tol(&self) -> Result<ToleranceConfig, Failure> {
        ToleranceConfig::new(self.eps_zero, self.eps_rank).map_err(Failure::from_core)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an encoder for a dataset and write it as JSON.
    Build {
        /// Dataset file (CSV, or JSON by extension).
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Discriminating)]
        method: MethodArg,
        /// Comma-separated layer widths, strictly decreasing and below m.
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<usize>>,
        /// Encoding width; halving widths are derived when --widths is absent.
        #[arg(long)]
        n_e: Option<usize>,
        /// Hidden layers before the encoding layer (distinguishable only).
        #[arg(long, default_value_t = 0)]
        depth: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        /// Network output path.
        #[arg(long)]
        out: PathBuf,
        /// Also write the build report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a saved network against a dataset.
    Verify {
        network: PathBuf,
        dataset: PathBuf,
        /// Also require the output to disentangle the dataset's labels.
        #[arg(long)]
        disentangled: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named property experiment.
    Experiment {
        /// One of thm1, thm6, thm7, prop6, fig1, robustness.
        name: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n_trials: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare an autoencoder with PCA and a decision tree's parameter count.
    Compare {
        dataset: PathBuf,
        #[arg(long)]
        n_e: usize,
        /// Branch nodes of the decision tree to compare parameter counts with.
        #[arg(long)]
        n_b: Option<usize>,
        #[arg(long, value_enum, default_value_t = MethodArg::Discriminating)]
        method: MethodArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn build_config(seed: u64, margin: f64, tol: ToleranceConfig) -> BuildConfig {
    let mut cfg = BuildConfig::with_seed(seed);
    cfg.margin = margin;
    cfg.tol = tol;
    cfg
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Prints or writes a rendered report.
fn emit(text: String, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(report: &Report, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => Ok(report.to_json().map_err(Failure::from_core)? + "\n"),
        Format::Table => Ok(report.to_table()),
    }
}

fn verdict(report: &Report) -> u8 {
    if report.passed() {
        0
    } else {
        EXIT_CHECK
    }
}

fn load_dataset(path: &Path, tol: &ToleranceConfig) -> Result<aeframe::Dataset, Failure> {
    dataset::load(path, tol).map_err(Failure::io)
}

/// One record for overall bijectivity and one per layer.
fn bijectivity_records(
    net: &FeedforwardNetwork,
    d: &aeframe::Dataset,
    tol: &ToleranceConfig,
    report: &mut Report,
) -> Result<(), Failure> {
    let b = verify_bijective(net, d, tol).map_err(Failure::from_core)?;
    let mut rec = CheckRecord::new("bijective", b.bijective)
        .witness("colliding_pairs", &b.colliding_pairs)
        .metric("points", d.len() as f64);
    if let Some(g) = b.min_gap {
        rec = rec.metric("min_gap", g);
    }
    report.push(rec);
    for l in &b.layers {
        let mut rec = CheckRecord::new(format!("layer_{}_injective", l.layer), l.injective)
            .metric("colliding_pairs", l.colliding_pairs as f64);
        if let Some(g) = l.min_gap {
            rec = rec.metric("min_gap", g);
        }
        report.push(rec);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_build(
    dataset: &Path,
    method: EncoderMethod,
    widths: Option<Vec<usize>>,
    n_e: Option<usize>,
    depth: usize,
    cfg: &BuildConfig,
    out: &Path,
    report_path: Option<&Path>,
    format: Format,
) -> Result<u8, Failure> {
    let d = load_dataset(dataset, &cfg.tol)?;
    let m = d.dim();
    let spec_widths = || -> Result<Vec<usize>, Failure> {
        match (widths.clone(), n_e) {
            (Some(w), _) => Ok(w),
            (None, Some(n)) => default_widths(m, n).map_err(Failure::from_core),
            (None, None) => Err(Failure::spec(format!("{method} needs --widths or --n-e"))),
        }
    };
    let net = match method {
        EncoderMethod::Discriminating | EncoderMethod::Linear => {
            let spec = EncoderSpec::new(m, spec_widths()?, method).map_err(Failure::from_core)?;
            if method == EncoderMethod::Linear {
                build_linear_encoder(&d, &spec, cfg)
            } else {
                build_bijective_encoder(&d, &spec, cfg)
            }
            .map_err(Failure::from_core)?
        }
        EncoderMethod::Distinguishable => {
            build_distinguishable_encoder(&d, depth, cfg)
                .map_err(Failure::from_core)?
                .network
        }
        EncoderMethod::Disentangling => {
            if d.labels().is_none() {
                return Err(Failure::spec("disentangling needs a labelled dataset"));
            }
            match n_e {
                Some(n) => encoder_for(&d, n, method, cfg),
                None => PolytopeCover::per_point_simplices(&d, &cfg.tol)
                    .and_then(|cover| build_disentangling_encoder(&d, &cover, cfg)),
            }
            .map_err(Failure::from_core)?
        }
    };
    write_text(out, &(net.to_json().map_err(Failure::from_core)? + "\n"))?;

    let mut report = Report::new(format!("build ({method})"), cfg.seed());
    bijectivity_records(&net, &d, &cfg.tol, &mut report)?;
    report.push(
        CheckRecord::new("lookup_decoder", build_lookup_decoder(&net, &d, &cfg.tol).is_ok())
            .witness("widths", net.widths())
            .metric("parameters", net.parameter_count() as f64),
    );
    emit(render(&report, format)?, report_path)?;
    Ok(verdict(&report))
}

fn cmd_verify(
    network: &Path,
    dataset: &Path,
    disentangled: bool,
    common: &Common,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let tol = common.tol()?;
    let text = fs::read_to_string(network).map_err(|e| Failure::io(format!("{}: {e}", network.display())))?;
    let net = FeedforwardNetwork::from_json(&text).map_err(|e| Failure::io(format!("{}: {e}", network.display())))?;
    let d = load_dataset(dataset, &tol)?;
    if net.input_dim() != d.dim() {
        return Err(Failure::io(format!(
            "network expects inputs of dimension {}, dataset has {}",
            net.input_dim(),
            d.dim()
        )));
    }
    let mut report = Report::new("verify", net.meta().seed);
    bijectivity_records(&net, &d, &tol, &mut report)?;
    if disentangled {
        let r = is_disentangled(&net, &d, &tol).map_err(Failure::from_core)?;
        report.push(
            CheckRecord::new("disentangled", r.disentangled)
                .witness("input_separable", r.input_separable)
                .witness("output_separable", r.output_separable),
        );
    }
    emit(render(&report, common.format)?, out)?;
    Ok(verdict(&report))
}

fn cmd_experiment(name: &str, cfg: &ExperimentConfig, format: Format, out: Option<&Path>) -> Result<u8, Failure> {
    let e: Experiment = name.parse().map_err(Failure::from_core)?;
    let report = experiments::run(e, cfg).map_err(Failure::from_core)?;
    emit(render(&report, format)?, out)?;
    Ok(verdict(&report))
}

#[derive(Serialize)]
struct Comparison {
    seed: u64,
    reduction: [ComparisonReport; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    parameters: Option<[ComparisonReport; 2]>,
}

fn cell(r: &ComparisonReport) -> String {
    match r.reconstruction_error {
        Some(e) => format!("{e:.6e}"),
        None => "-".into(),
    }
}

fn comparison_table(c: &Comparison) -> String {
    let [ae, pca] = &c.reduction;
    let mut rows = vec![
        ("", ae.method.clone(), pca.method.clone()),
        ("reconstruction_error", cell(ae), cell(pca)),
        (
            "parameters",
            ae.parameter_count.to_string(),
            pca.parameter_count.to_string(),
        ),
    ];
    if let (Some(a), Some(b)) = (ae.separable_after_reduction, pca.separable_after_reduction) {
        rows.push(("separable", a.to_string(), b.to_string()));
    }
    if let Some([enc, tree]) = &c.parameters {
        rows.push(("", enc.method.clone(), tree.method.clone()));
        rows.push((
            "parameters",
            enc.parameter_count.to_string(),
            tree.parameter_count.to_string(),
        ));
    }
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(a, b, c)| format!("{a:<w0$}  {b:<w1$}  {c}\n"))
        .collect()
}

fn cmd_compare(
    dataset: &Path,
    n_e: usize,
    n_b: Option<usize>,
    method: EncoderMethod,
    cfg: &BuildConfig,
    format: Format,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let d = load_dataset(dataset, &cfg.tol)?;
    let (ae, pca) = pca_compare(&d, n_e, method, cfg).map_err(Failure::from_core)?;
    let parameters = match n_b {
        Some(n_b) => {
            let enc = encoder_for(&d, n_e, method, cfg).map_err(Failure::from_core)?;
            let (e, t) = parameter_comparison(d.dim(), n_b, &enc).map_err(Failure::from_core)?;
            Some([e, t])
        }
        None => None,
    };
    let c = Comparison {
        seed: cfg.seed(),
        reduction: [ae, pca],
        parameters,
    };
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&c).map_err(|e| Failure::io(e.to_string()))? + "\n",
        Format::Table => comparison_table(&c),
    };
    emit(text, out)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Build {
            dataset,
            method,
            widths,
            n_e,
            depth,
            seed,
            margin,
            out,
            report,
            common,
        } => {
            let cfg = build_config(seed, margin, common.tol()?);
            cmd_build(
                &dataset,
                method.into(),
                widths,
                n_e,
                depth,
                &cfg,
                &out,
                report.as_deref(),
                common.format,
            )
        }
        Command::Verify {
            network,
            dataset,
            disentangled,
            out,
            common,
        } => cmd_verify(&network, &dataset, disentangled, &common, out.as_deref()),
        Command::Experiment {
            name,
            seed,
            n_trials,
            margin,
            out,
            common,
        } => {
            let cfg = ExperimentConfig {
                seed,
                n_trials,
                tol: common.tol()?,
                margin,
            };
            cmd_experiment(&name, &cfg, common.format, out.as_deref())
        }
        Command::Compare {
            dataset,
            n_e,
            n_b,
            method,
            seed,
            margin,
            out,
            common,
        } => {
            let cfg = build_config(seed, margin, common.tol()?);
            cmd_compare(&dataset, n_e, n_b, method.into(), &cfg, common.format, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
