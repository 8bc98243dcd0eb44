//! Hyperplanes that are unparallel to every chord of a dataset, and the
//! discriminating hyperplanes obtained from them by translation.
//!
//! The unparallel construction grows a flag of flats `l_1 ⊂ l_2 ⊂ … ⊂ l_{m-1}`
//! through a common base point. At step `n` a new direction is appended; if
//! the enlarged flat contains some chord direction the new direction is
//! perturbed by `alpha * eps` with `eps` uniform on `(0,1)^m`, halving
//! `alpha` on every rejected draw.

use nalgebra::DVector;
use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    line_direction_set, translate_to_positive_side, Dataset, HyperplaneImplicit, HyperplaneParametric,
};
use crate::linalg;
use crate::rng::{self, StreamRng};
use crate::tolerance::ToleranceConfig;

/// Discriminating hyperplanes keep every pairwise output gap above this
/// multiple of `eps_zero`.
pub const MIN_GAP_FACTOR: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub seed: u64,
    pub alpha_init: f64,
    pub alpha_shrink: f64,
    pub max_retries: usize,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            alpha_init: 0.5,
            alpha_shrink: 0.5,
            max_retries: 64,
        }
    }
}

impl PerturbationConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_init > 0.0 && self.alpha_init.is_finite()) {
            return Err(Error::Precondition(format!(
                "alpha_init must be positive, got {}",
                self.alpha_init
            )));
        }
        if !(self.alpha_shrink > 0.0 && self.alpha_shrink < 1.0) {
            return Err(Error::Precondition(format!(
                "alpha_shrink must lie in (0, 1), got {}",
                self.alpha_shrink
            )));
        }
        if self.max_retries == 0 {
            return Err(Error::Precondition("max_retries must be at least 1".into()));
        }
        Ok(())
    }
}

/// A hyperplane to approximate, with the largest acceptable angle (radians)
/// between its normal and the constructed one.
#[derive(Clone, Debug)]
pub struct Prior {
    pub hyperplane: HyperplaneParametric,
    pub max_angle: f64,
}

/// Full trace of the unparallel construction.
#[derive(Clone, Debug)]
pub struct UnparallelConstruction {
    /// Flats of dimension `1..=m-1`, each containing the previous one.
    pub flats: Vec<HyperplaneParametric>,
    /// Perturbation magnitude used at each step (0 when none was needed).
    pub alphas: Vec<f64>,
    pub hyperplane: HyperplaneImplicit,
}

/// Angle in `[0, pi/2]` between two hyperplane normals (lines, so sign-free).
pub fn normal_angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0);
    c.acos()
}

fn best_axis(q: &[DVector<f64>], m: usize) -> DVector<f64> {
    let mut best = 0;
    let mut best_res = f64::NEG_INFINITY;
    for j in 0..m {
        let res = 1.0 - q.iter().map(|v| v[j] * v[j]).sum::<f64>();
        if res > best_res + 1e-15 {
            best = j;
            best_res = res;
        }
    }
    DVector::from_fn(m, |i, _| f64::from(u8::from(i == best)))
}

struct FlagState<'a> {
    m: usize,
    dirs: &'a [DVector<f64>],
    // residual of every chord direction against span(q)
    resid: Vec<DVector<f64>>,
    q: Vec<DVector<f64>>,
    threshold: f64,
    eps_rank: f64,
}

enum Candidate {
    Intermediate { qn: DVector<f64>, resid: Vec<DVector<f64>> },
    Final { w: DVector<f64> },
}

impl FlagState<'_> {
    fn try_direction(&self, cand: &DVector<f64>, last: bool) -> Option<Candidate> {
        let r = linalg::residual(&self.q, cand);
        let nr = r.norm();
        if nr <= self.eps_rank * cand.norm() {
            return None;
        }
        let qn = r / nr;
        if last {
            let mut full = self.q.clone();
            full.push(qn);
            let axis = best_axis(&full, self.m);
            let w = linalg::residual(&full, &axis).normalize();
            if self.dirs.iter().all(|g| w.dot(g).abs() > self.threshold) {
                Some(Candidate::Final { w })
            } else {
                None
            }
        } else {
            let mut resid = Vec::with_capacity(self.resid.len());
            for r in &self.resid {
                let c = qn.dot(r);
                let nr = r - &qn * c;
                if nr.norm() <= self.threshold {
                    return None;
                }
                resid.push(nr);
            }
            Some(Candidate::Intermediate { qn, resid })
        }
    }
}

fn construct_flag(
    d: &Dataset,
    cfg: &PerturbationConfig,
    prior: Option<&HyperplaneParametric>,
    tol: &ToleranceConfig,
    threshold: f64,
) -> Result<UnparallelConstruction> {
    cfg.validate()?;
    if d.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: d.len(),
        });
    }
    let m = d.dim();
    if let Some(p) = prior {
        if p.ambient_dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: p.ambient_dim(),
            });
        }
        if p.flat_dim() != m - 1 {
            return Err(Error::RankDeficient {
                rank: p.flat_dim(),
                expected: m - 1,
            });
        }
    }
    let x0 = prior.map_or_else(|| d.centroid(), |p| p.base_point().clone());
    let ldir = line_direction_set(d, tol)?;
    if m == 1 {
        let w = DVector::from_element(1, 1.0);
        let b = -x0[0];
        return Ok(UnparallelConstruction {
            flats: Vec::new(),
            alphas: Vec::new(),
            hyperplane: HyperplaneImplicit::new(w, b, tol)?,
        });
    }

    let mut rng = rng::substream(cfg.seed, "unparallel", 0);
    let mut state = FlagState {
        m,
        dirs: ldir.directions(),
        resid: ldir.directions().to_vec(),
        q: Vec::new(),
        threshold,
        eps_rank: tol.eps_rank,
    };
    let mut accepted: Vec<DVector<f64>> = Vec::new();
    let mut flats = Vec::with_capacity(m - 1);
    let mut alphas = Vec::with_capacity(m - 1);
    let mut normal = None;

    for step in 1..m {
        let last = step == m - 1;
        let base = match prior {
            Some(p) => p.basis()[step - 1].clone(),
            None => best_axis(&state.q, m),
        };
        let mut chosen = state.try_direction(&base, last).map(|c| (c, base.clone(), 0.0));
        if chosen.is_none() {
            let mut alpha = cfg.alpha_init;
            for _ in 0..cfg.max_retries {
                let eps = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(Open01));
                let cand = &base + &eps * alpha;
                if let Some(c) = state.try_direction(&cand, last) {
                    chosen = Some((c, cand, alpha));
                    break;
                }
                alpha *= cfg.alpha_shrink;
            }
        }
        let Some((cand_state, dir, alpha)) = chosen else {
            return Err(Error::RetriesExhausted {
                step,
                retries: cfg.max_retries,
            });
        };
        accepted.push(dir);
        alphas.push(alpha);
        match cand_state {
            Candidate::Intermediate { qn, resid } => {
                state.q.push(qn);
                state.resid = resid;
            }
            Candidate::Final { w } => normal = Some(w),
        }
        flats.push(HyperplaneParametric::new(x0.clone(), accepted.clone(), tol)?);
    }

    let w = normal.expect("final step sets the normal");
    let b = -w.dot(&x0);
    Ok(UnparallelConstruction {
        flats,
        alphas,
        hyperplane: HyperplaneImplicit::new(w, b, tol)?,
    })
}

/// Runs the flag construction with the plain parallelism threshold
/// `eps_zero` and returns its trace.
pub fn construct_unparallel_flag(
    d: &Dataset,
    cfg: &PerturbationConfig,
    prior: Option<&HyperplaneParametric>,
    tol: &ToleranceConfig,
) -> Result<UnparallelConstruction> {
    construct_flag(d, cfg, prior, tol, tol.eps_zero)
}

fn construct_near(
    d: &Dataset,
    cfg: &PerturbationConfig,
    prior: Option<&Prior>,
    tol: &ToleranceConfig,
    threshold: f64,
) -> Result<HyperplaneImplicit> {
    let Some(prior) = prior else {
        return Ok(construct_flag(d, cfg, None, tol, threshold)?.hyperplane);
    };
    let target = crate::geometry::parametric_to_implicit(&prior.hyperplane, tol)?;
    let mut attempt_cfg = *cfg;
    for _ in 0..cfg.max_retries {
        let h = construct_flag(d, &attempt_cfg, Some(&prior.hyperplane), tol, threshold)?.hyperplane;
        if normal_angle(h.normal(), target.normal()) <= prior.max_angle {
            return Ok(h);
        }
        attempt_cfg.alpha_init *= cfg.alpha_shrink;
    }
    Err(Error::RetriesExhausted {
        step: d.dim().saturating_sub(1),
        retries: cfg.max_retries,
    })
}

/// A hyperplane no chord of `d` is parallel to. With `prior`, the result
/// approximates the prior hyperplane to within `prior.max_angle`.
pub fn construct_unparallel_hyperplane(
    d: &Dataset,
    cfg: &PerturbationConfig,
    prior: Option<&Prior>,
    tol: &ToleranceConfig,
) -> Result<HyperplaneImplicit> {
    construct_near(d, cfg, prior, tol, tol.eps_zero)
}

/// A hyperplane whose original outputs on `d` are pairwise distinct and all
/// at least `margin`.
pub fn construct_discriminating_hyperplane(
    d: &Dataset,
    cfg: &PerturbationConfig,
    margin: f64,
    prior: Option<&Prior>,
    tol: &ToleranceConfig,
) -> Result<HyperplaneImplicit> {
    cfg.validate()?;
    if d.len() == 1 {
        let w = DVector::from_fn(d.dim(), |i, _| f64::from(u8::from(i == 0)));
        let h = HyperplaneImplicit::new(w, 0.0, tol)?;
        return translate_to_positive_side(&h, d, margin);
    }
    let min_dist = d.min_pairwise_distance().unwrap_or(1.0);
    let threshold = tol.eps_zero * (MIN_GAP_FACTOR / min_dist).max(1.0);
    let mut last_err = None;
    for attempt in 0..cfg.max_retries {
        let attempt_cfg = PerturbationConfig {
            seed: if attempt == 0 {
                cfg.seed
            } else {
                rng::derive_seed(cfg.seed, "discriminating-retry", attempt as u64)
            },
            ..*cfg
        };
        match construct_near(d, &attempt_cfg, prior, tol, threshold) {
            Ok(h) => {
                let h = translate_to_positive_side(&h, d, margin)?;
                if is_discriminating(&h, d, tol)?.discriminating {
                    return Ok(h);
                }
            }
            Err(e @ Error::RetriesExhausted { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::RetriesExhausted {
        step: d.dim().saturating_sub(1),
        retries: cfg.max_retries,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationReport {
    pub discriminating: bool,
    pub colliding_pairs: Vec<(usize, usize)>,
    /// Smallest pairwise output difference; `None` for a single point.
    pub min_gap: Option<f64>,
}

/// Pairs of values within `eps` of each other, plus the smallest gap.
pub(crate) fn scalar_collisions(values: &[f64], eps: f64) -> (Vec<(usize, usize)>, Option<f64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut pairs = Vec::new();
    let mut min_gap: Option<f64> = None;
    for (pos, &i) in order.iter().enumerate() {
        if let Some(&j) = order.get(pos + 1) {
            let g = values[j] - values[i];
            min_gap = Some(min_gap.map_or(g, |m: f64| m.min(g)));
        }
        for &j in &order[pos + 1..] {
            if values[j] - values[i] > eps {
                break;
            }
            pairs.push((i.min(j), i.max(j)));
        }
    }
    pairs.sort_unstable();
    (pairs, min_gap)
}

pub fn is_discriminating(h: &HyperplaneImplicit, d: &Dataset, tol: &ToleranceConfig) -> Result<DiscriminationReport> {
    let outs = d
        .points()
        .iter()
        .map(|x| h.original_output(x))
        .collect::<Result<Vec<f64>>>()?;
    let (colliding_pairs, min_gap) = scalar_collisions(&outs, tol.eps_zero);
    Ok(DiscriminationReport {
        discriminating: colliding_pairs.is_empty(),
        colliding_pairs,
        min_gap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    pub frequency: f64,
    /// Smallest pairwise output gap over all trials.
    pub min_gap: Option<f64>,
}

/// Uniform direction on the unit sphere of `R^m`.
pub fn sample_unit_sphere(rng: &mut StreamRng, m: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Monte-Carlo estimate of how often a random hyperplane, shifted so `d`
/// lies on its positive side, discriminates `d`.
pub fn random_discrimination_trial(
    d: &Dataset,
    n_trials: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<TrialReport> {
    discrimination_trials_with(d, n_trials, seed, 1.0, tol, sample_unit_sphere)
}

/// As [`random_discrimination_trial`] with a caller-supplied normal sampler.
/// Trial `i` draws from sub-stream `i` of `seed`, so results do not depend
/// on evaluation order.
pub fn discrimination_trials_with<F>(
    d: &Dataset,
    n_trials: usize,
    seed: u64,
    margin: f64,
    tol: &ToleranceConfig,
    sampler: F,
) -> Result<TrialReport>
where
    F: Fn(&mut StreamRng, usize) -> DVector<f64>,
{
    if n_trials == 0 {
        return Err(Error::Precondition("n_trials must be at least 1".into()));
    }
    let mut successes = 0;
    let mut min_gap: Option<f64> = None;
    for trial in 0..n_trials {
        let mut r = rng::substream(seed, "discrimination-trial", trial as u64);
        let w = sampler(&mut r, d.dim());
        let Ok(h) = HyperplaneImplicit::new(w, 0.0, tol) else {
            continue;
        };
        let h = translate_to_positive_side(&h, d, margin)?;
        let rep = is_discriminating(&h, d, tol)?;
        if rep.discriminating {
            successes += 1;
        }
        if let Some(g) = rep.min_gap {
            min_gap = Some(min_gap.map_or(g, |m: f64| m.min(g)));
        }
    }
    Ok(TrialReport {
        trials: n_trials,
        successes,
        failures: n_trials - successes,
        frequency: successes as f64 / n_trials as f64,
        min_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{line_direction_check, parametric_to_implicit};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn random_dataset(seed: u64, n: usize, m: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        Dataset::from_rows(&rows, None, &tol()).unwrap()
    }

    /// Integer lattice: many chords share directions with coordinate axes.
    fn lattice(m: usize) -> Dataset {
        let mut rows = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let mut r = vec![0.0; m];
                r[0] = f64::from(i);
                r[m - 1] = f64::from(j);
                rows.push(r);
            }
        }
        Dataset::from_rows(&rows, None, &tol()).unwrap()
    }

    fn no_parallel(h: &HyperplaneImplicit, d: &Dataset) -> bool {
        let l = line_direction_set(d, &tol()).unwrap();
        line_direction_check(h, &l, &tol()).unwrap().parallel.is_empty()
    }

    #[test]
    fn two_point_chord_forces_nonzero_first_component() {
        let d = Dataset::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]], None, &tol()).unwrap();
        let h = construct_unparallel_hyperplane(&d, &PerturbationConfig::default(), None, &tol()).unwrap();
        assert!(h.normal()[0].abs() > tol().eps_zero);
        assert!(no_parallel(&h, &d));
    }

    #[test]
    fn random_points_have_no_parallel_chord() {
        let d = random_dataset(4, 30, 8);
        let h = construct_unparallel_hyperplane(&d, &PerturbationConfig::with_seed(1), None, &tol()).unwrap();
        let l = line_direction_set(&d, &tol()).unwrap();
        assert_eq!(l.len(), 435);
        assert!(no_parallel(&h, &d));
    }

    #[test]
    fn lattice_needs_perturbation_and_succeeds() {
        let d = lattice(4);
        let c = construct_unparallel_flag(&d, &PerturbationConfig::with_seed(3), None, &tol()).unwrap();
        assert!(c.alphas.iter().any(|&a| a > 0.0));
        assert!(no_parallel(&c.hyperplane, &d));
    }

    #[test]
    fn flats_are_nested() {
        let d = lattice(5);
        let c = construct_unparallel_flag(&d, &PerturbationConfig::with_seed(8), None, &tol()).unwrap();
        assert_eq!(c.flats.len(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for pair in c.flats.windows(2) {
            for _ in 0..5 {
                let t: Vec<f64> = (0..pair[0].flat_dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
                let x = pair[0].point_at(&t);
                assert!(pair[1].contains(&x, &tol()));
            }
        }
        // the final hyperplane contains the last flat
        let last = c.flats.last().unwrap();
        let x = last.point_at(&[0.3, -1.0, 2.0, 0.5]);
        assert!(c.hyperplane.original_output(&x).unwrap().abs() < 1e-10);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let d = lattice(4);
        let a = construct_unparallel_hyperplane(&d, &PerturbationConfig::with_seed(5), None, &tol()).unwrap();
        let b = construct_unparallel_hyperplane(&d, &PerturbationConfig::with_seed(5), None, &tol()).unwrap();
        assert_eq!(a.normal().as_slice(), b.normal().as_slice());
        assert_eq!(a.offset().to_bits(), b.offset().to_bits());
    }

    #[test]
    fn prior_through_both_points_is_tilted_by_a_shrinkable_angle() {
        let t = tol();
        let d = Dataset::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]], None, &t).unwrap();
        // the line through both points is parallel to their chord
        let prior_flat = HyperplaneParametric::new(v(&[0.0, 0.0]), vec![v(&[1.0, 1.0])], &t).unwrap();
        let prior_normal = parametric_to_implicit(&prior_flat, &t).unwrap();
        let mut last_angle = f64::INFINITY;
        for alpha in [0.4, 0.04, 0.004, 0.0004] {
            let cfg = PerturbationConfig {
                alpha_init: alpha,
                ..PerturbationConfig::with_seed(2)
            };
            let prior = Prior {
                hyperplane: prior_flat.clone(),
                max_angle: std::f64::consts::FRAC_PI_2,
            };
            let h = construct_unparallel_hyperplane(&d, &cfg, Some(&prior), &t).unwrap();
            let angle = normal_angle(h.normal(), prior_normal.normal());
            assert!(angle > 0.0);
            assert!(angle < last_angle, "angle {angle} did not shrink below {last_angle}");
            assert!(no_parallel(&h, &d));
            last_angle = angle;
        }
    }

    #[test]
    fn prior_angle_bound_is_respected() {
        let t = tol();
        let d = lattice(3);
        let prior_flat =
            HyperplaneParametric::new(v(&[0.0, 0.0, 0.0]), vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])], &t).unwrap();
        let prior = Prior {
            hyperplane: prior_flat.clone(),
            max_angle: 1e-3,
        };
        let h = construct_unparallel_hyperplane(&d, &PerturbationConfig::with_seed(1), Some(&prior), &t).unwrap();
        let target = parametric_to_implicit(&prior_flat, &t).unwrap();
        assert!(normal_angle(h.normal(), target.normal()) <= 1e-3);
        assert!(no_parallel(&h, &d));
    }

    #[test]
    fn discriminating_single_point() {
        let d = Dataset::from_rows(&[vec![3.0, -2.0]], None, &tol()).unwrap();
        let h = construct_discriminating_hyperplane(&d, &PerturbationConfig::default(), 1.0, None, &tol()).unwrap();
        assert!(h.original_output(d.point(0)).unwrap() >= 1.0);
        assert!(is_discriminating(&h, &d, &tol()).unwrap().discriminating);
    }

    #[test]
    fn discriminating_collinear_points() {
        let d = Dataset::from_rows(
            &[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]],
            None,
            &tol(),
        )
        .unwrap();
        let h = construct_discriminating_hyperplane(&d, &PerturbationConfig::default(), 1.0, None, &tol()).unwrap();
        // oracle: project and sort
        let mut outs: Vec<f64> = d.points().iter().map(|x| h.original_output(x).unwrap()).collect();
        outs.sort_by(f64::total_cmp);
        assert!(outs[0] >= 1.0 - 1e-12);
        assert!(outs.windows(2).all(|w| w[1] - w[0] > 0.0));
    }

    #[test]
    fn discriminating_xor_lattice_in_r10() {
        // 100 points: 10x10 grid in the first two coordinates, labelled by XOR parity
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|k| {
                let mut r = vec![0.0; 10];
                r[0] = f64::from(k / 10);
                r[1] = f64::from(k % 10);
                r
            })
            .collect();
        let d = Dataset::from_rows(&rows, None, &tol()).unwrap();
        let h = construct_discriminating_hyperplane(&d, &PerturbationConfig::with_seed(9), 1.0, None, &tol()).unwrap();
        let outs: Vec<f64> = d.points().iter().map(|x| h.original_output(x).unwrap()).collect();
        for i in 0..outs.len() {
            assert!(outs[i] >= 1.0 - 1e-12);
            for j in (i + 1)..outs.len() {
                assert!((outs[i] - outs[j]).abs() > MIN_GAP_FACTOR * tol().eps_zero);
            }
        }
    }

    #[test]
    fn is_discriminating_examples() {
        let t = tol();
        let d = Dataset::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]], None, &t).unwrap();
        let h = HyperplaneImplicit::from_slice(&[1.0, -1.0], 0.0, &t).unwrap();
        let r = is_discriminating(&h, &d, &t).unwrap();
        assert!(!r.discriminating);
        assert_eq!(r.colliding_pairs, vec![(0, 1)]);
        let h = HyperplaneImplicit::from_slice(&[1.0, 1.0], 0.0, &t).unwrap();
        assert!(is_discriminating(&h, &d, &t).unwrap().discriminating);
    }

    #[test]
    fn collisions_report_every_pair() {
        let (pairs, gap) = scalar_collisions(&[0.0, 5.0, 1e-12, 5.0, 2e-12], 1e-9);
        assert_eq!(pairs, vec![(0, 2), (0, 4), (1, 3), (2, 4)]);
        assert_eq!(gap, Some(0.0));
    }

    #[test]
    fn trials_single_point_always_succeed() {
        let d = Dataset::from_rows(&[vec![0.5, 0.5]], None, &tol()).unwrap();
        let r = random_discrimination_trial(&d, 1, 3, &tol()).unwrap();
        assert_eq!(r.frequency, 1.0);
        assert_eq!(r.min_gap, None);
    }

    #[test]
    fn adversarial_sampler_fails() {
        // points differ only in coordinate 1; sampler zeroes that coordinate
        let d = Dataset::from_rows(&[vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], None, &tol()).unwrap();
        let r = discrimination_trials_with(&d, 50, 1, 1.0, &tol(), |rng, m| {
            let mut w = sample_unit_sphere(rng, m);
            w[1] = 0.0;
            w
        })
        .unwrap();
        assert_eq!(r.successes, 0);
        assert_eq!(r.failures, 50);
    }

    #[test]
    fn trials_require_at_least_one() {
        let d = Dataset::from_rows(&[vec![0.5, 0.5]], None, &tol()).unwrap();
        assert!(random_discrimination_trial(&d, 0, 3, &tol()).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let d = lattice(3);
        let cfg = PerturbationConfig {
            alpha_shrink: 1.0,
            ..PerturbationConfig::default()
        };
        assert!(construct_unparallel_hyperplane(&d, &cfg, None, &tol()).is_err());
    }
}
