//! Linear geometry over finite datasets: hyperplanes in implicit and
//! parametric form, parallelism, intersections, line-direction sets and
//! dataset dimensionality.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::linalg;
use crate::tolerance::ToleranceConfig;

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Finite point set in `R^m`, optionally labelled by category.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    points: Vec<DVector<f64>>,
    labels: Option<Vec<String>>,
    dim: usize,
}

impl Dataset {
    /// Validates the points and rejects duplicates (distance `<= eps_zero`).
    pub fn new(points: Vec<DVector<f64>>, labels: Option<Vec<String>>, tol: &ToleranceConfig) -> Result<Self> {
        let ds = Self::from_images(points, labels)?;
        for i in 0..ds.points.len() {
            for j in (i + 1)..ds.points.len() {
                if (&ds.points[i] - &ds.points[j]).norm() <= tol.eps_zero {
                    return Err(Error::DuplicatePoint(i, j));
                }
            }
        }
        Ok(ds)
    }

    /// Like [`Dataset::new`] but allows coincident points. Used for images of
    /// a dataset under a map, where collisions are what we want to detect.
    pub fn from_images(points: Vec<DVector<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidDataset("dataset is empty".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidDataset("points must have at least one coordinate".into()));
        }
        for (i, p) in points.iter().enumerate() {
            check_dim(dim, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("point {i} has a non-finite coordinate")));
            }
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(Error::InvalidDataset(format!(
                    "{} labels for {} points",
                    l.len(),
                    points.len()
                )));
            }
        }
        Ok(Self { points, labels, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<String>>, tol: &ToleranceConfig) -> Result<Self> {
        let pts = rows.iter().map(|r| DVector::from_column_slice(r)).collect();
        Self::new(pts, labels, tol)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &DVector<f64> {
        &self.points[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Distinct labels in order of first occurrence.
    pub fn categories(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        if let Some(labels) = &self.labels {
            for l in labels {
                if !out.contains(l) {
                    out.push(l.clone());
                }
            }
        }
        out
    }

    pub fn indices_of(&self, category: &str) -> Vec<usize> {
        match &self.labels {
            Some(l) => (0..l.len()).filter(|&i| l[i] == category).collect(),
            None => Vec::new(),
        }
    }

    pub fn centroid(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim);
        for p in &self.points {
            c += p;
        }
        c / self.points.len() as f64
    }

    /// Smallest Euclidean distance between two distinct points (`None` if `|D| < 2`).
    pub fn min_pairwise_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let d = (&self.points[i] - &self.points[j]).norm();
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }

    /// Same labels, new coordinates (duplicates allowed).
    pub fn with_points(&self, points: Vec<DVector<f64>>) -> Result<Self> {
        Self::from_images(points, self.labels.clone())
    }
}

/// Hyperplane `w^T x + b = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneImplicit {
    w: DVector<f64>,
    b: f64,
}

impl HyperplaneImplicit {
    pub fn new(w: DVector<f64>, b: f64, tol: &ToleranceConfig) -> Result<Self> {
        let n = w.norm();
        if n.is_nan() || n <= tol.eps_zero || !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateNormal(n));
        }
        Ok(Self { w, b })
    }

    pub fn from_slice(w: &[f64], b: f64, tol: &ToleranceConfig) -> Result<Self> {
        Self::new(DVector::from_column_slice(w), b, tol)
    }

    pub fn normal(&self) -> &DVector<f64> {
        &self.w
    }

    pub fn offset(&self) -> f64 {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn with_offset(&self, b: f64) -> Self {
        Self { w: self.w.clone(), b }
    }

    /// The affine value `w^T x + b`; its sign tells which side `x` is on.
    pub fn original_output(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.w.len(), x.len())?;
        Ok(self.w.dot(x) + self.b)
    }

    pub fn unit_output(&self, x: &DVector<f64>, act: ActivationKind) -> Result<f64> {
        Ok(act.apply(self.original_output(x)?))
    }

    /// Parametric form: foot of the perpendicular from the origin plus an
    /// orthonormal basis of the direction space.
    pub fn to_parametric(&self, tol: &ToleranceConfig) -> Result<HyperplaneParametric> {
        let m = self.w.len();
        if m < 2 {
            return Err(Error::InvalidDataset(
                "a hyperplane of R^1 has no parametric form".into(),
            ));
        }
        let x0 = &self.w * (-self.b / self.w.norm_squared());
        let wt = DMatrix::from_row_slice(1, m, self.w.as_slice());
        let basis = linalg::nullspace(&wt, tol.eps_rank);
        HyperplaneParametric::new(x0, basis, tol)
    }
}

/// Flat `x = x0 + sum_i t_i lambda_i` with `1 <= k <= m-1` independent directions.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperplaneParametric {
    x0: DVector<f64>,
    basis: Vec<DVector<f64>>,
}

impl HyperplaneParametric {
    pub fn new(x0: DVector<f64>, basis: Vec<DVector<f64>>, tol: &ToleranceConfig) -> Result<Self> {
        let m = x0.len();
        let k = basis.len();
        if k == 0 || k >= m {
            return Err(Error::InvalidDataset(format!(
                "parametric flat needs 1 <= k <= m-1 directions, got k = {k}, m = {m}"
            )));
        }
        for b in &basis {
            check_dim(m, b.len())?;
        }
        let r = linalg::rank(&linalg::rows_to_matrix(&basis, m), tol.eps_rank);
        if r != k {
            return Err(Error::RankDeficient { rank: r, expected: k });
        }
        Ok(Self { x0, basis })
    }

    pub fn base_point(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    pub fn flat_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.x0.len()
    }

    pub fn point_at(&self, t: &[f64]) -> DVector<f64> {
        let mut x = self.x0.clone();
        for (ti, l) in t.iter().zip(&self.basis) {
            x.axpy(*ti, l, 1.0);
        }
        x
    }

    /// Whether `x` lies on the flat (distance `<= eps_zero`).
    pub fn contains(&self, x: &DVector<f64>, tol: &ToleranceConfig) -> bool {
        let q = orthonormalize(&self.basis);
        linalg::residual(&q, &(x - &self.x0)).norm() <= tol.eps_zero * (1.0 + x.norm())
    }
}

pub(crate) fn orthonormalize(vs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut q: Vec<DVector<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let r = linalg::residual(&q, v);
        let n = r.norm();
        if n > 0.0 {
            q.push(r / n);
        }
    }
    q
}

/// Whether the unit direction lies in the hyperplane's direction space:
/// `|w^T lambda| <= eps_zero * |w|`.
pub fn is_parallel(line_dir: &DVector<f64>, h: &HyperplaneImplicit, tol: &ToleranceConfig) -> Result<bool> {
    check_dim(h.dim(), line_dir.len())?;
    Ok(h.w.dot(line_dir).abs() <= tol.eps_zero * h.w.norm())
}

/// Dimension of the intersection of a set of hyperplanes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intersection {
    Dimension(usize),
    Empty,
}

pub fn intersection_dimension(hs: &[HyperplaneImplicit], tol: &ToleranceConfig) -> Result<Intersection> {
    let first = hs.first().ok_or(Error::EmptyHyperplaneList)?;
    let m = first.dim();
    for h in hs {
        check_dim(m, h.dim())?;
    }
    let a = DMatrix::from_fn(hs.len(), m, |i, j| hs[i].w[j]);
    let aug = DMatrix::from_fn(hs.len(), m + 1, |i, j| if j < m { hs[i].w[j] } else { -hs[i].b });
    let r = linalg::rank(&a, tol.eps_rank);
    if linalg::rank(&aug, tol.eps_rank) > r {
        return Ok(Intersection::Empty);
    }
    Ok(Intersection::Dimension(m - r))
}

/// Unit chord directions of a dataset, identified up to sign.
#[derive(Clone, Debug, PartialEq)]
pub struct LineDirectionSet {
    directions: Vec<DVector<f64>>,
}

impl LineDirectionSet {
    pub fn directions(&self) -> &[DVector<f64>] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, |d| d.len())
    }
}

fn canonical_sign(v: &mut DVector<f64>, eps: f64) {
    if let Some(first) = v.iter().copied().find(|c| c.abs() > eps) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

pub fn line_direction_set(d: &Dataset, tol: &ToleranceConfig) -> Result<LineDirectionSet> {
    if d.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: d.len(),
        });
    }
    let mut raw = Vec::with_capacity(d.len() * (d.len() - 1) / 2);
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            let mut v = d.point(j) - d.point(i);
            v /= v.norm();
            canonical_sign(&mut v, tol.eps_zero);
            raw.push(v);
        }
    }
    // sort on the first coordinate, then only compare against kept entries
    // whose first coordinate lies within eps_zero
    raw.sort_by(|a, b| a[0].total_cmp(&b[0]).then_with(|| lex_cmp(a, b)));
    let mut kept: Vec<DVector<f64>> = Vec::new();
    for v in raw {
        let mut dup = false;
        for k in kept.iter().rev() {
            if v[0] - k[0] > tol.eps_zero {
                break;
            }
            if linalg::max_abs_diff(k, &v) <= tol.eps_zero {
                dup = true;
                break;
            }
        }
        if !dup {
            kept.push(v);
        }
    }
    Ok(LineDirectionSet { directions: kept })
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Split of a line-direction set into parallel (`Y_l`) and unparallel
/// (`N_l`) directions, as indices into the set.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DirectionPartition {
    pub parallel: Vec<usize>,
    pub unparallel: Vec<usize>,
}

pub fn line_direction_check(
    h: &HyperplaneImplicit,
    l: &LineDirectionSet,
    tol: &ToleranceConfig,
) -> Result<DirectionPartition> {
    let mut out = DirectionPartition::default();
    for (i, dir) in l.directions.iter().enumerate() {
        if is_parallel(dir, h, tol)? {
            out.parallel.push(i);
        } else {
            out.unparallel.push(i);
        }
    }
    Ok(out)
}

/// Shift `b` so that every point of `d` has original output at least
/// `margin`. The hyperplane is returned unchanged if that already holds;
/// otherwise the shift is minimal, so the smallest output equals `margin`.
pub fn translate_to_positive_side(h: &HyperplaneImplicit, d: &Dataset, margin: f64) -> Result<HyperplaneImplicit> {
    check_dim(h.dim(), d.dim())?;
    let min_out = d
        .points()
        .iter()
        .map(|x| h.w.dot(x) + h.b)
        .fold(f64::INFINITY, f64::min);
    if min_out >= margin {
        return Ok(h.clone());
    }
    let min_proj = d.points().iter().map(|x| h.w.dot(x)).fold(f64::INFINITY, f64::min);
    Ok(h.with_offset(margin - min_proj))
}

/// Dimension of the smallest affine flat containing `d`.
pub fn dataset_dimensionality(d: &Dataset, tol: &ToleranceConfig) -> usize {
    if d.len() < 2 {
        return 0;
    }
    let c = d.centroid();
    let centered = DMatrix::from_fn(d.len(), d.dim(), |i, j| d.point(i)[j] - c[j]);
    linalg::rank(&centered, tol.eps_rank)
}

/// Implicit form of a parametric hyperplane with `m-1` directions.
/// The returned normal has unit length.
pub fn parametric_to_implicit(p: &HyperplaneParametric, tol: &ToleranceConfig) -> Result<HyperplaneImplicit> {
    let m = p.ambient_dim();
    if p.flat_dim() != m - 1 {
        return Err(Error::RankDeficient {
            rank: p.flat_dim(),
            expected: m - 1,
        });
    }
    let basis = linalg::rows_to_matrix(&p.basis, m);
    let ns = linalg::nullspace(&basis, tol.eps_rank);
    if ns.len() != 1 {
        return Err(Error::RankDeficient {
            rank: m - ns.len(),
            expected: m - 1,
        });
    }
    let w = ns[0].normalize();
    let b = -w.dot(&p.x0);
    HyperplaneImplicit::new(w, b, tol)
}
