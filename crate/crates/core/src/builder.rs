//! Encoder synthesis: bijective encoders from discriminating hyperplanes,
//! staircase ("distinguishable") encoders, disentangling encoders driven by
//! a polytope cover, linear encoders, and the exact lookup decoder.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::analysis::bijectivity::image_collisions;
use crate::discriminator::{construct_discriminating_hyperplane, sample_unit_sphere, PerturbationConfig};
use crate::error::{Error, Result};
use crate::geometry::{translate_to_positive_side, Dataset, HyperplaneImplicit};
use crate::linalg;
use crate::network::{FeedforwardNetwork, Layer, NetworkMeta, Role};
use crate::rng;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderMethod {
    Discriminating,
    Distinguishable,
    Disentangling,
    Linear,
}

impl EncoderMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Discriminating => "discriminating",
            Self::Distinguishable => "distinguishable",
            Self::Disentangling => "disentangling",
            Self::Linear => "linear",
        }
    }
}

impl fmt::Display for EncoderMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncoderMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discriminating" => Ok(Self::Discriminating),
            "distinguishable" => Ok(Self::Distinguishable),
            "disentangling" => Ok(Self::Disentangling),
            "linear" => Ok(Self::Linear),
            other => Err(Error::InvalidSpec(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub m: usize,
    pub widths: Vec<usize>,
    pub method: EncoderMethod,
}

impl EncoderSpec {
    pub fn new(m: usize, widths: Vec<usize>, method: EncoderMethod) -> Result<Self> {
        let s = Self { m, widths, method };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(&first) = self.widths.first() else {
            return Err(Error::InvalidSpec("widths must not be empty".into()));
        };
        if self.m <= first {
            return Err(Error::InvalidSpec(format!(
                "first width {first} must be smaller than the input dimension {}",
                self.m
            )));
        }
        if let Some(p) = self.widths.windows(2).find(|p| p[1] >= p[0]) {
            return Err(Error::InvalidSpec(format!(
                "widths must strictly decrease, but {} is followed by {}",
                p[0], p[1]
            )));
        }
        if self.widths.contains(&0) {
            return Err(Error::InvalidSpec("encoding width must be at least 1".into()));
        }
        Ok(())
    }

    pub fn encoding_width(&self) -> usize {
        self.widths[self.widths.len() - 1]
    }
}

/// Roughly halving widths from `m` down to exactly `n_e`.
pub fn default_widths(m: usize, n_e: usize) -> Result<Vec<usize>> {
    if n_e == 0 || n_e >= m {
        return Err(Error::InvalidSpec(format!(
            "need 1 <= n_e < m, got n_e = {n_e}, m = {m}"
        )));
    }
    let mut out = Vec::new();
    let mut cur = m;
    while cur > n_e {
        cur = (cur / 2).max(n_e);
        out.push(cur);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub perturbation: PerturbationConfig,
    /// Minimum pre-activation of every shifted unit on the running image.
    pub margin: f64,
    pub tol: ToleranceConfig,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            perturbation: PerturbationConfig::default(),
            margin: 1.0,
            tol: ToleranceConfig::default(),
        }
    }
}

impl BuildConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            perturbation: PerturbationConfig::with_seed(seed),
            ..Self::default()
        }
    }

    pub fn seed(&self) -> u64 {
        self.perturbation.seed
    }

    fn validate(&self) -> Result<()> {
        self.perturbation.validate()?;
        self.tol.validate()?;
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::Precondition(format!(
                "margin must be positive, got {}",
                self.margin
            )));
        }
        Ok(())
    }

    fn meta(&self, method: EncoderMethod) -> NetworkMeta {
        NetworkMeta {
            seed: self.seed(),
            method: method.name().into(),
            margin: self.margin,
        }
    }

    fn layer_perturbation(&self, layer: usize) -> PerturbationConfig {
        PerturbationConfig {
            seed: rng::derive_seed(self.seed(), "layer", layer as u64),
            ..self.perturbation
        }
    }
}

fn check_dim(d: &Dataset, m: usize) -> Result<()> {
    if d.dim() == m {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: m,
            got: d.dim(),
        })
    }
}

fn in_layer<T>(layer: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::LayerConstruction {
        layer,
        source: Box::new(e),
    })
}

fn image_of(layer: &Layer, d: &Dataset) -> Result<Dataset> {
    let pts = d.points().iter().map(|x| layer.apply(x)).collect::<Result<Vec<_>>>()?;
    Dataset::from_images(pts, d.labels().map(<[String]>::to_vec))
}

/// `count` random unit-normal hyperplanes for layer `layer`, each shifted so
/// that `d` lies at least `margin` on its positive side (when `margin` is set).
fn random_units(
    d: &Dataset,
    count: usize,
    seed: u64,
    stream: &str,
    layer: usize,
    margin: Option<f64>,
    tol: &ToleranceConfig,
) -> Result<Vec<HyperplaneImplicit>> {
    let mut r = rng::substream(seed, stream, layer as u64);
    (0..count)
        .map(|_| {
            let h = HyperplaneImplicit::new(sample_unit_sphere(&mut r, d.dim()), 0.0, tol)?;
            match margin {
                Some(mg) => translate_to_positive_side(&h, d, mg),
                None => Ok(h),
            }
        })
        .collect()
}

fn layered_encoder(d: &Dataset, spec: &EncoderSpec, cfg: &BuildConfig, linear: bool) -> Result<FeedforwardNetwork> {
    spec.validate()?;
    cfg.validate()?;
    check_dim(d, spec.m)?;
    let act = if linear {
        ActivationKind::Linear
    } else {
        ActivationKind::Relu
    };
    let mut image = d.clone();
    let mut layers = Vec::with_capacity(spec.widths.len());
    for (idx, &width) in spec.widths.iter().enumerate() {
        let j = idx + 1;
        let layer = in_layer(
            j,
            (|| {
                let disc = construct_discriminating_hyperplane(
                    &image,
                    &cfg.layer_perturbation(j),
                    cfg.margin,
                    None,
                    &cfg.tol,
                )?;
                let shift = (!linear).then_some(cfg.margin);
                let mut units = vec![disc];
                units.extend(random_units(
                    &image,
                    width - 1,
                    cfg.seed(),
                    "layer-units",
                    j,
                    shift,
                    &cfg.tol,
                )?);
                Layer::from_hyperplanes(&units, act)
            })(),
        )?;
        image = image_of(&layer, &image)?;
        layers.push(layer);
    }
    let method = if linear {
        EncoderMethod::Linear
    } else {
        EncoderMethod::Discriminating
    };
    FeedforwardNetwork::new(Role::Encoder, layers, cfg.meta(method))
}

/// ReLU encoder that is injective on `d` at every layer. Each layer's first
/// unit discriminates the running image; the rest are random. Every unit is
/// shifted so all pre-activations on the running image are at least
/// `cfg.margin`.
pub fn build_bijective_encoder(d: &Dataset, spec: &EncoderSpec, cfg: &BuildConfig) -> Result<FeedforwardNetwork> {
    layered_encoder(d, spec, cfg, false)
}

/// As [`build_bijective_encoder`] with linear activations and unshifted
/// random units.
pub fn build_linear_encoder(d: &Dataset, spec: &EncoderSpec, cfg: &BuildConfig) -> Result<FeedforwardNetwork> {
    layered_encoder(d, spec, cfg, true)
}

/// A staircase encoder and, per layer, the order of `d` along that layer's
/// discriminating direction.
#[derive(Clone, Debug)]
pub struct DistinguishableEncoder {
    pub network: FeedforwardNetwork,
    /// `orders[j][ν]` is the index in `d` of the `ν`-th point at layer `j`.
    pub orders: Vec<Vec<usize>>,
}

/// Staircase units over `d`: unit `ν` is positive on the `ν`-th point (in
/// discriminating order) and every later one, and clamps every earlier one.
fn staircase_units(
    d: &Dataset,
    cfg: &BuildConfig,
    layer: usize,
) -> Result<(Vec<HyperplaneImplicit>, Vec<usize>, Vec<f64>)> {
    let h = construct_discriminating_hyperplane(d, &cfg.layer_perturbation(layer), cfg.margin, None, &cfg.tol)?;
    let outs = d
        .points()
        .iter()
        .map(|x| h.original_output(x))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| outs[a].total_cmp(&outs[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| outs[i]).collect();
    let mut units = vec![h.clone()];
    for nu in 1..sorted.len() {
        let cut = 0.5 * (sorted[nu - 1] + sorted[nu]);
        units.push(h.with_offset(h.offset() - cut));
    }
    Ok((units, order, sorted))
}

/// Encoder with `depth` hidden layers of widths `|D| + depth, …, |D| + 1` and
/// an encoding layer of width `|D|`. Every layer is a staircase over the
/// running image, padded with random positive-side units.
pub fn build_distinguishable_encoder(d: &Dataset, depth: usize, cfg: &BuildConfig) -> Result<DistinguishableEncoder> {
    cfg.validate()?;
    let n = d.len();
    let m = d.dim();
    if m <= n + depth {
        return Err(Error::InvalidSpec(format!(
            "distinguishable encoder needs m > |D| + depth, got m = {m}, |D| = {n}, depth = {depth}"
        )));
    }
    let mut image = d.clone();
    let mut layers = Vec::with_capacity(depth + 1);
    let mut orders = Vec::with_capacity(depth + 1);
    for j in 1..=depth + 1 {
        let width = n + depth + 1 - j;
        let layer = in_layer(
            j,
            (|| {
                let (mut units, order, _) = staircase_units(&image, cfg, j)?;
                units.extend(random_units(
                    &image,
                    width - n,
                    cfg.seed(),
                    "layer-units",
                    j,
                    Some(cfg.margin),
                    &cfg.tol,
                )?);
                Ok((Layer::from_hyperplanes(&units, ActivationKind::Relu)?, order))
            })(),
        )?;
        image = image_of(&layer.0, &image)?;
        layers.push(layer.0);
        orders.push(layer.1);
    }
    Ok(DistinguishableEncoder {
        network: FeedforwardNetwork::new(Role::Encoder, layers, cfg.meta(EncoderMethod::Distinguishable))?,
        orders,
    })
}

/// An open convex polytope: the intersection of the positive sides of its faces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub category: String,
    pub faces: Vec<HyperplaneImplicit>,
}

impl Polytope {
    /// Smallest face output at `x`; positive iff `x` is inside.
    pub fn depth(&self, x: &DVector<f64>) -> Result<f64> {
        let mut min = f64::INFINITY;
        for f in &self.faces {
            min = min.min(f.original_output(x)?);
        }
        Ok(min)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolytopeCover {
    pub polytopes: Vec<Polytope>,
}

impl PolytopeCover {
    pub fn face_count(&self) -> usize {
        self.polytopes.iter().map(|p| p.faces.len()).sum()
    }

    /// Checks that every polytope contains only points of its own category,
    /// each of them strictly inside, and that every point of a covered
    /// category lies in one of its polytopes. At most one category may be
    /// left uncovered; its points are recognised by lying in no polytope.
    pub fn validate(&self, d: &Dataset, tol: &ToleranceConfig) -> Result<()> {
        let Some(labels) = d.labels() else {
            return Err(Error::InvalidCover("dataset has no labels".into()));
        };
        if self.polytopes.is_empty() {
            return Err(Error::InvalidCover("cover has no polytopes".into()));
        }
        for (k, p) in self.polytopes.iter().enumerate() {
            if p.faces.is_empty() {
                return Err(Error::InvalidCover(format!("polytope {k} has no faces")));
            }
            if let Some(f) = p.faces.iter().find(|f| f.dim() != d.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: d.dim(),
                    got: f.dim(),
                });
            }
            for (i, x) in d.points().iter().enumerate() {
                let depth = p.depth(x)?;
                if labels[i] != p.category && depth > -tol.eps_zero {
                    return Err(Error::InvalidCover(format!(
                        "point {i} (category '{}') is not strictly outside polytope {k} of category '{}'",
                        labels[i], p.category
                    )));
                }
            }
        }
        let categories = d.categories();
        let uncovered: Vec<&String> = categories
            .iter()
            .filter(|c| !self.polytopes.iter().any(|p| &p.category == *c))
            .collect();
        if uncovered.len() > 1 {
            return Err(Error::InvalidCover(format!(
                "{} categories have no polytope; at most one may be left uncovered",
                uncovered.len()
            )));
        }
        if let Some(p) = self.polytopes.iter().find(|p| !categories.contains(&p.category)) {
            return Err(Error::InvalidCover(format!("unknown category '{}'", p.category)));
        }
        for (i, x) in d.points().iter().enumerate() {
            if uncovered.contains(&&labels[i]) {
                continue;
            }
            let mut inside = false;
            for p in self.polytopes.iter().filter(|p| p.category == labels[i]) {
                if p.depth(x)? > tol.eps_zero {
                    inside = true;
                    break;
                }
            }
            if !inside {
                return Err(Error::InvalidCover(format!(
                    "point {i} (category '{}') lies in none of its category's polytopes",
                    labels[i]
                )));
            }
        }
        Ok(())
    }

    /// One regular simplex per point, inside the affine hull of `d`, with
    /// circumradius half the distance to the nearest point of another
    /// category. A hull of dimension `k` gives `k + 1` faces per point.
    pub fn per_point_simplices(d: &Dataset, tol: &ToleranceConfig) -> Result<Self> {
        let Some(labels) = d.labels() else {
            return Err(Error::InvalidCover("dataset has no labels".into()));
        };
        let m = d.dim();
        let c = d.centroid();
        let centered = DMatrix::from_fn(d.len(), m, |i, j| d.point(i)[j] - c[j]);
        let mut hull = linalg::row_space(&centered, tol.eps_rank);
        if hull.is_empty() {
            hull.push(DVector::from_fn(m, |i, _| f64::from(u8::from(i == 0))));
        }
        let kk = hull.len();
        let normals = regular_simplex_normals(kk, tol);
        let mut polytopes = Vec::with_capacity(d.len());
        for (i, p) in d.points().iter().enumerate() {
            let nearest_other = d
                .points()
                .iter()
                .enumerate()
                .filter(|(j, _)| labels[*j] != labels[i])
                .map(|(_, q)| (p - q).norm())
                .fold(f64::INFINITY, f64::min);
            let circum = if nearest_other.is_finite() {
                nearest_other / 2.0
            } else {
                1.0
            };
            let inradius = circum / kk as f64;
            let faces = normals
                .iter()
                .map(|n| {
                    let dir = hull
                        .iter()
                        .zip(n.iter())
                        .fold(DVector::zeros(m), |acc, (u, &c)| acc + u * c);
                    // inside when n . (x - p) < inradius
                    HyperplaneImplicit::new(-&dir, inradius + dir.dot(p), tol)
                })
                .collect::<Result<Vec<_>>>()?;
            polytopes.push(Polytope {
                category: labels[i].clone(),
                faces,
            });
        }
        Ok(Self { polytopes })
    }
}

/// Unit outward normals of a regular simplex in `R^k` (`k + 1` of them).
fn regular_simplex_normals(k: usize, tol: &ToleranceConfig) -> Vec<DVector<f64>> {
    if k == 1 {
        return vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)];
    }
    let ones = DMatrix::from_element(1, k + 1, 1.0);
    let basis = linalg::nullspace(&ones, tol.eps_rank);
    (0..=k)
        .map(|i| {
            let coords = DVector::from_fn(k, |r, _| basis[r][i]);
            coords.normalize()
        })
        .collect()
}

/// How the disentangling encoder computes its polytope indicators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorGadget {
    /// One unit `relu(-s_i)` per face, then `relu(margin - K * sum)` per polytope.
    Faces,
    /// Piecewise-linear interpolation of the indicator along a
    /// discriminating direction; width depends on `|D|`, not on faces.
    Interpolation,
    /// `Faces` if the input dimension allows it, else `Interpolation`.
    Auto,
}

/// First-layer width needed by each gadget.
pub fn gadget_width(gadget: IndicatorGadget, cover: &PolytopeCover, n_points: usize) -> usize {
    let p = cover.polytopes.len();
    match gadget {
        IndicatorGadget::Faces => (cover.face_count() + 1).max(p + 2),
        IndicatorGadget::Interpolation | IndicatorGadget::Auto => n_points.saturating_sub(1).max(1).max(p + 2),
    }
}

/// Encoder with two layers: the second outputs one indicator per polytope
/// (equal to `margin` on that polytope's points of `d`, zero on every other
/// point) followed by a discriminating coordinate that keeps the map
/// injective.
pub fn build_disentangling_encoder(
    d: &Dataset,
    cover: &PolytopeCover,
    cfg: &BuildConfig,
) -> Result<FeedforwardNetwork> {
    build_disentangling_encoder_with(d, cover, IndicatorGadget::Auto, cfg)
}

pub fn build_disentangling_encoder_with(
    d: &Dataset,
    cover: &PolytopeCover,
    gadget: IndicatorGadget,
    cfg: &BuildConfig,
) -> Result<FeedforwardNetwork> {
    cfg.validate()?;
    cover.validate(d, &cfg.tol)?;
    let m = d.dim();
    let p = cover.polytopes.len();
    let faces = cover.face_count();
    let gadget = match gadget {
        IndicatorGadget::Auto if m > gadget_width(IndicatorGadget::Faces, cover, d.len()) => IndicatorGadget::Faces,
        IndicatorGadget::Auto => IndicatorGadget::Interpolation,
        g => g,
    };
    let width_a = gadget_width(gadget, cover, d.len());
    if m <= width_a {
        return Err(Error::InsufficientDimension {
            m,
            required: width_a,
            polytopes: p,
            faces,
        });
    }
    let mut membership = vec![vec![false; d.len()]; p];
    for (k, poly) in cover.polytopes.iter().enumerate() {
        for (i, x) in d.points().iter().enumerate() {
            membership[k][i] = poly.depth(x)? > cfg.tol.eps_zero;
        }
    }
    let (first, second) = in_layer(
        1,
        match gadget {
            IndicatorGadget::Faces => faces_gadget(d, cover, &membership, width_a, cfg),
            _ => interpolation_gadget(d, &membership, width_a, cfg),
        },
    )?;
    FeedforwardNetwork::new(
        Role::Encoder,
        vec![first, second],
        cfg.meta(EncoderMethod::Disentangling),
    )
}

fn faces_gadget(
    d: &Dataset,
    cover: &PolytopeCover,
    membership: &[Vec<bool>],
    width: usize,
    cfg: &BuildConfig,
) -> Result<(Layer, Layer)> {
    let m = d.dim();
    let faces = cover.face_count();
    let disc = construct_discriminating_hyperplane(d, &cfg.layer_perturbation(1), cfg.margin, None, &cfg.tol)?;
    let mut w1 = DMatrix::zeros(width, m);
    let mut b1 = DVector::zeros(width);
    let mut row = 0;
    for poly in &cover.polytopes {
        for f in &poly.faces {
            w1.set_row(row, &(-f.normal()).transpose());
            b1[row] = -f.offset();
            row += 1;
        }
    }
    w1.set_row(faces, &disc.normal().transpose());
    b1[faces] = disc.offset();
    let pad = random_units(
        d,
        width - faces - 1,
        cfg.seed(),
        "gadget-padding",
        1,
        Some(cfg.margin),
        &cfg.tol,
    )?;
    for (r, h) in pad.iter().enumerate() {
        w1.set_row(faces + 1 + r, &h.normal().transpose());
        b1[faces + 1 + r] = h.offset();
    }
    let first = Layer::new(w1, b1, ActivationKind::Relu)?;

    let p = cover.polytopes.len();
    let mut w2 = DMatrix::zeros(p + 1, width);
    let mut b2 = DVector::zeros(p + 1);
    let mut start = 0;
    for (k, poly) in cover.polytopes.iter().enumerate() {
        let nf = poly.faces.len();
        // smallest total violation among points outside this polytope
        let mut min_violation = f64::INFINITY;
        for (i, x) in d.points().iter().enumerate() {
            if !membership[k][i] {
                let mut v = 0.0;
                for f in &poly.faces {
                    v += (-f.original_output(x)?).max(0.0);
                }
                min_violation = min_violation.min(v);
            }
        }
        let gain = if min_violation.is_finite() {
            2.0 * cfg.margin / min_violation
        } else {
            1.0
        };
        for c in start..start + nf {
            w2[(k, c)] = -gain;
        }
        b2[k] = cfg.margin;
        start += nf;
    }
    w2[(p, faces)] = 1.0;
    Ok((first, Layer::new(w2, b2, ActivationKind::Relu)?))
}

fn interpolation_gadget(
    d: &Dataset,
    membership: &[Vec<bool>],
    width: usize,
    cfg: &BuildConfig,
) -> Result<(Layer, Layer)> {
    let m = d.dim();
    let disc = construct_discriminating_hyperplane(d, &cfg.layer_perturbation(1), cfg.margin, None, &cfg.tol)?;
    let outs = d
        .points()
        .iter()
        .map(|x| disc.original_output(x))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| outs[a].total_cmp(&outs[b]).then(a.cmp(&b)));
    let o: Vec<f64> = order.iter().map(|&i| outs[i]).collect();
    let n = o.len();
    // unit 0 is relu(o) = o on d; unit k (1..n-2) is relu(o - o_(k)), a knot
    // at the k-th sorted output
    let knots = n.saturating_sub(2);
    let mut w1 = DMatrix::zeros(width, m);
    let mut b1 = DVector::zeros(width);
    w1.set_row(0, &disc.normal().transpose());
    b1[0] = disc.offset();
    for k in 1..=knots {
        w1.set_row(k, &disc.normal().transpose());
        b1[k] = disc.offset() - o[k];
    }
    let pad = random_units(
        d,
        width - knots - 1,
        cfg.seed(),
        "gadget-padding",
        1,
        Some(cfg.margin),
        &cfg.tol,
    )?;
    for (r, h) in pad.iter().enumerate() {
        w1.set_row(knots + 1 + r, &h.normal().transpose());
        b1[knots + 1 + r] = h.offset();
    }
    let first = Layer::new(w1, b1, ActivationKind::Relu)?;

    let p = membership.len();
    let mut w2 = DMatrix::zeros(p + 1, width);
    let mut b2 = DVector::zeros(p + 1);
    for (k, member) in membership.iter().enumerate() {
        let t: Vec<f64> = order
            .iter()
            .map(|&i| if member[i] { cfg.margin } else { -cfg.margin })
            .collect();
        if n == 1 {
            b2[k] = t[0];
            continue;
        }
        let slope = |j: usize| (t[j + 1] - t[j]) / (o[j + 1] - o[j]);
        // g(o) = t_0 + s_0 (o - o_0) + sum_k (s_k - s_{k-1}) relu(o - o_k)
        w2[(k, 0)] = slope(0);
        b2[k] = t[0] - slope(0) * o[0];
        for j in 1..=knots {
            w2[(k, j)] = slope(j) - slope(j - 1);
        }
    }
    w2[(p, 0)] = 1.0;
    Ok((first, Layer::new(w2, b2, ActivationKind::Relu)?))
}

/// Disentangling encoder with one indicator per category (the last category
/// is left implicit), a discriminating coordinate, and random positive-side
/// units padding the encoding layer to width `n_e`. Needs no polytope cover:
/// indicators are interpolated along a discriminating direction.
pub fn build_category_encoder(d: &Dataset, n_e: usize, cfg: &BuildConfig) -> Result<FeedforwardNetwork> {
    cfg.validate()?;
    let Some(labels) = d.labels() else {
        return Err(Error::Precondition("dataset has no labels".into()));
    };
    let cats = d.categories();
    if cats.len() < 2 {
        return Err(Error::Precondition("need at least 2 categories".into()));
    }
    if n_e < cats.len() {
        return Err(Error::InvalidSpec(format!(
            "encoding width {n_e} is below the number of categories {}",
            cats.len()
        )));
    }
    let m = d.dim();
    let width_a = d.len().saturating_sub(1).max(n_e + 1);
    if m <= width_a {
        return Err(Error::InsufficientDimension {
            m,
            required: width_a,
            polytopes: cats.len() - 1,
            faces: 0,
        });
    }
    let membership: Vec<Vec<bool>> = cats[..cats.len() - 1]
        .iter()
        .map(|c| labels.iter().map(|l| l == c).collect())
        .collect();
    let (first, second) = in_layer(1, interpolation_gadget(d, &membership, width_a, cfg))?;
    let extra = n_e - cats.len();
    let second = if extra == 0 {
        second
    } else {
        in_layer(
            2,
            (|| {
                let image = image_of(&first, d)?;
                let pad = random_units(
                    &image,
                    extra,
                    cfg.seed(),
                    "encoding-padding",
                    2,
                    Some(cfg.margin),
                    &cfg.tol,
                )?;
                let mut w = second.weights().clone().resize_vertically(n_e, 0.0);
                let mut b = second.bias().clone().resize_vertically(n_e, 0.0);
                for (r, h) in pad.iter().enumerate() {
                    w.set_row(cats.len() + r, &h.normal().transpose());
                    b[cats.len() + r] = h.offset();
                }
                Layer::new(w, b, ActivationKind::Relu)
            })(),
        )?
    };
    FeedforwardNetwork::new(
        Role::Encoder,
        vec![first, second],
        cfg.meta(EncoderMethod::Disentangling),
    )
}

/// Exact inverse of an injective encoder on its dataset: decodes to the
/// point whose encoding is nearest (ties to the lowest index).
#[derive(Clone, Debug)]
pub struct LookupDecoder {
    encodings: Vec<DVector<f64>>,
    points: Vec<DVector<f64>>,
    min_gap: Option<f64>,
}

impl LookupDecoder {
    pub fn decode_index(&self, z: &DVector<f64>) -> Result<usize> {
        let dim = self.encodings[0].len();
        if z.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: z.len(),
            });
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, e) in self.encodings.iter().enumerate() {
            let dist = (e - z).norm_squared();
            if dist < best_d {
                best = i;
                best_d = dist;
            }
        }
        Ok(best)
    }

    pub fn decode(&self, z: &DVector<f64>) -> Result<&DVector<f64>> {
        Ok(&self.points[self.decode_index(z)?])
    }

    pub fn encodings(&self) -> &[DVector<f64>] {
        &self.encodings
    }

    /// Smallest Euclidean distance between two encodings.
    pub fn min_encoding_gap(&self) -> Option<f64> {
        self.min_gap
    }
}

pub fn build_lookup_decoder(enc: &FeedforwardNetwork, d: &Dataset, tol: &ToleranceConfig) -> Result<LookupDecoder> {
    let encodings = d.points().iter().map(|x| enc.output(x)).collect::<Result<Vec<_>>>()?;
    let (pairs, _) = image_collisions(&encodings, tol.eps_zero);
    if !pairs.is_empty() {
        return Err(Error::NotBijective(pairs.len()));
    }
    let mut min_gap: Option<f64> = None;
    for i in 0..encodings.len() {
        for j in (i + 1)..encodings.len() {
            let g = (&encodings[i] - &encodings[j]).norm();
            min_gap = Some(min_gap.map_or(g, |m: f64| m.min(g)));
        }
    }
    Ok(LookupDecoder {
        encodings,
        points: d.points().to_vec(),
        min_gap,
    })
}
