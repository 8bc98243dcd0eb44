//! Per-category linear separability by linear programming.
//!
//! For a category `C` the program is
//!
//! ```text
//! maximize t  s.t.  w.x + b >= t  (x in C),  w.x + b <= -t  (x not in C),
//!                   -1 <= w_j <= 1,  0 <= t <= 1
//! ```
//!
//! and `C` is separable from the rest iff the optimum `t*` is positive
//! (above a scale-aware threshold).

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Dataset;
use crate::network::FeedforwardNetwork;
use crate::tolerance::ToleranceConfig;

/// `t*` must exceed this multiple of `eps_zero * max(1, max |coordinate|)`.
pub const SEPARATION_THRESHOLD_FACTOR: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategorySeparation {
    pub category: String,
    pub separable: bool,
    /// Optimal margin variable `t*`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub separable: bool,
    pub categories: Vec<CategorySeparation>,
}

/// Optimal `t*` of the separation program for `positive` against the rest.
pub fn separation_margin(points: &[DVector<f64>], positive: &[bool]) -> Result<f64> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidDataset("no points".into()));
    };
    let m = first.len();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let w: Vec<_> = (0..m).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    let b = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let t = lp.add_var(1.0, (0.0, 1.0));
    for (x, &pos) in points.iter().zip(positive) {
        let mut expr: Vec<_> = w.iter().zip(x.iter()).map(|(&v, &c)| (v, c)).collect();
        expr.push((b, 1.0));
        if pos {
            expr.push((t, -1.0));
            lp.add_constraint(expr, ComparisonOp::Ge, 0.0);
        } else {
            expr.push((t, 1.0));
            lp.add_constraint(expr, ComparisonOp::Le, 0.0);
        }
    }
    match lp.solve() {
        Ok(sol) => Ok(sol[t]),
        // t = 0, w = 0 is always feasible; treat solver failure as inseparable
        Err(_) => Ok(0.0),
    }
}

fn threshold(points: &[DVector<f64>], tol: &ToleranceConfig) -> f64 {
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0_f64, |a, v| a.max(v.abs()));
    SEPARATION_THRESHOLD_FACTOR * tol.eps_zero * scale
}

/// Separability of points with the given labels, each category against the rest.
pub fn separability_of(
    points: &[DVector<f64>],
    labels: &[String],
    tol: &ToleranceConfig,
) -> Result<SeparabilityReport> {
    let mut cats: Vec<&String> = Vec::new();
    for l in labels {
        if !cats.contains(&l) {
            cats.push(l);
        }
    }
    if cats.len() < 2 {
        return Err(Error::Precondition(format!(
            "separability needs at least 2 categories, got {}",
            cats.len()
        )));
    }
    let thr = threshold(points, tol);
    let mut categories = Vec::with_capacity(cats.len());
    for c in cats {
        let positive: Vec<bool> = labels.iter().map(|l| l == c).collect();
        let margin = separation_margin(points, &positive)?;
        categories.push(CategorySeparation {
            category: c.clone(),
            separable: margin > thr,
            margin,
        });
    }
    Ok(SeparabilityReport {
        separable: categories.iter().all(|c| c.separable),
        categories,
    })
}

pub fn is_linearly_separable(d: &Dataset, tol: &ToleranceConfig) -> Result<SeparabilityReport> {
    let Some(labels) = d.labels() else {
        return Err(Error::Precondition("dataset has no labels".into()));
    };
    separability_of(d.points(), labels, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisentangleReport {
    pub input_separable: bool,
    pub output_separable: bool,
    /// Input inseparable and output separable.
    pub disentangled: bool,
}

pub fn is_disentangled(net: &FeedforwardNetwork, d: &Dataset, tol: &ToleranceConfig) -> Result<DisentangleReport> {
    let Some(labels) = d.labels() else {
        return Err(Error::Precondition("dataset has no labels".into()));
    };
    let input_separable = separability_of(d.points(), labels, tol)?.separable;
    let images = d.points().iter().map(|x| net.output(x)).collect::<Result<Vec<_>>>()?;
    let output_separable = separability_of(&images, labels, tol)?.separable;
    Ok(DisentangleReport {
        input_separable,
        output_separable,
        disentangled: !input_separable && output_separable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn labelled(rows: &[Vec<f64>], labels: &[&str]) -> Dataset {
        Dataset::from_rows(rows, Some(labels.iter().map(|s| s.to_string()).collect()), &tol()).unwrap()
    }

    #[test]
    fn two_singletons() {
        let d = labelled(&[vec![0.0, 0.0], vec![1.0, 0.5]], &["a", "b"]);
        assert!(is_linearly_separable(&d, &tol()).unwrap().separable);
    }

    #[test]
    fn planar_xor() {
        let d = labelled(
            &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            &["a", "a", "b", "b"],
        );
        let r = is_linearly_separable(&d, &tol()).unwrap();
        assert!(!r.separable);
        assert!(r.categories.iter().all(|c| c.margin < 1e-9));
    }

    #[test]
    fn middle_category_is_not_separable() {
        let d = labelled(&[vec![0.0], vec![1.0], vec![2.0]], &["a", "b", "a"]);
        let r = is_linearly_separable(&d, &tol()).unwrap();
        assert!(!r.separable);
    }

    #[test]
    fn gaussian_clusters_with_disjoint_boxes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let noise = Normal::new(0.0_f64, 0.1).unwrap();
        let centers = [[0.0, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0, 5.0, 5.0]];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (k, c) in centers.iter().enumerate() {
            for _ in 0..10 {
                rows.push(
                    c.iter()
                        .map(|&v| v + Distribution::<f64>::sample(&noise, &mut rng).clamp(-1.0, 1.0))
                        .collect::<Vec<_>>(),
                );
                labels.push(["a", "b", "c"][k]);
            }
        }
        let d = labelled(&rows, &labels);
        // independent oracle: a category whose box is disjoint along some axis
        // from every other point is cut off by an axis-aligned hyperplane
        let r = is_linearly_separable(&d, &tol()).unwrap();
        assert!(r.separable);
        assert!(r.categories.iter().all(|c| c.margin > 0.1));
    }

    #[test]
    fn needs_two_categories() {
        let d = labelled(&[vec![0.0], vec![1.0]], &["a", "a"]);
        assert!(matches!(is_linearly_separable(&d, &tol()), Err(Error::Precondition(_))));
    }

    #[test]
    fn margin_matches_known_value() {
        // 0 vs 2 on the line: best is w = 1, b = -1, t = 1 (capped)
        let pts = vec![DVector::from_element(1, 0.0), DVector::from_element(1, 2.0)];
        let t = separation_margin(&pts, &[false, true]).unwrap();
        assert!((t - 1.0).abs() < 1e-9);
        // 0 vs 0.5: w = 1, b = -0.25, t = 0.25
        let pts = vec![DVector::from_element(1, 0.0), DVector::from_element(1, 0.5)];
        let t = separation_margin(&pts, &[false, true]).unwrap();
        assert!((t - 0.25).abs() < 1e-9);
    }
}
