//! GLC-L: a linear classifier drawn losslessly.
//!
//! Attribute `x_i` becomes a vector of length `x_i` at angle `Q_i` with
//! `cos Q_i = |a_i|`; the vectors are stacked head to tail and the last
//! node is projected onto the horizontal axis U. The projection is exactly
//! `Σ a_i x_i`, so the drawing *is* the discriminant, and every attribute
//! value is still recoverable from the stacked segments.
//!
//! Training searches over angles with random-restart hill climbing. For
//! every candidate direction the threshold on U is solved exactly by
//! sorting the projections and scanning the cuts between them.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, NormalizationSpec};
use crate::error::{GlcError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub threshold: f64,
    pub positive_class: String,
    pub negative_class: String,
}

impl LinearModel {
    /// Coefficients must lie in `[-1, 1]`; use
    /// [`canonicalized`](Self::canonicalized) for arbitrary scales.
    pub fn new(
        coefficients: Vec<f64>,
        threshold: f64,
        positive_class: impl Into<String>,
        negative_class: impl Into<String>,
    ) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(GlcError::InvalidInput("model without coefficients".into()));
        }
        if coefficients.iter().any(|a| !a.is_finite() || a.abs() > 1.0) || !threshold.is_finite() {
            return Err(GlcError::InvalidInput(
                "coefficients must be finite and within [-1, 1]".into(),
            ));
        }
        Ok(Self {
            coefficients,
            threshold,
            positive_class: positive_class.into(),
            negative_class: negative_class.into(),
        })
    }

    /// Scales coefficients and threshold by the same positive factor so that
    /// `max |a_i| = 1`. Classification is unchanged.
    pub fn canonicalized(
        coefficients: Vec<f64>,
        threshold: f64,
        positive_class: impl Into<String>,
        negative_class: impl Into<String>,
    ) -> Result<Self> {
        let scale = coefficients.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(GlcError::InvalidInput("all coefficients are zero".into()));
        }
        Self::new(
            coefficients.iter().map(|a| a / scale).collect(),
            threshold / scale,
            positive_class,
            negative_class,
        )
    }

    /// Builds `a_i = sign_i · cos Q_i`. Missing signs default to `+1`.
    pub fn from_angles(
        angles: &[f64],
        signs: Option<&[f64]>,
        threshold: f64,
        positive_class: impl Into<String>,
        negative_class: impl Into<String>,
    ) -> Result<Self> {
        if let Some(s) = signs {
            if s.len() != angles.len() {
                return Err(GlcError::DimensionMismatch {
                    expected: angles.len(),
                    found: s.len(),
                });
            }
        }
        let coefficients = angles
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let sign = signs.map_or(1.0, |s| if s[i] < 0.0 { -1.0 } else { 1.0 });
                sign * q.cos().abs()
            })
            .collect();
        Self::new(coefficients, threshold, positive_class, negative_class)
    }

    pub fn n(&self) -> usize {
        self.coefficients.len()
    }

    /// `Q_i = arccos |a_i|`, in `[0, π/2]`.
    pub fn angles(&self) -> Vec<f64> {
        self.coefficients.iter().map(|a| a.abs().min(1.0).acos()).collect()
    }

    pub fn signs(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|a| if *a < 0.0 { -1.0 } else { 1.0 })
            .collect()
    }

    /// `|a_i|`, the per-attribute score shown next to each angle. It is
    /// only comparable across attributes measured in the same units.
    pub fn informativeness(&self) -> Vec<f64> {
        self.coefficients.iter().map(|a| a.abs()).collect()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(GlcError::DimensionMismatch {
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Position on U: `Σ a_i x_i`.
pub fn project(x: &[f64], m: &LinearModel) -> Result<f64> {
    m.check(x)?;
    Ok(dot(&m.coefficients, x))
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

/// `u > t` is positive; a tie goes to the negative class.
pub fn classify<'m>(x: &[f64], m: &'m LinearModel) -> Result<&'m str> {
    Ok(if project(x, m)? > m.threshold {
        &m.positive_class
    } else {
        &m.negative_class
    })
}

pub fn accuracy(m: &LinearModel, d: &Dataset) -> Result<f64> {
    let mut correct = 0usize;
    for (x, label) in d.rows().iter().zip(d.labels()) {
        if classify(x, m)? == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / d.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlcLPolyline {
    /// `n + 1` stacked nodes starting at the origin.
    pub nodes: Vec<[f64; 2]>,
    pub u: f64,
    pub projection_foot: [f64; 2],
}

fn direction(a: f64) -> [f64; 2] {
    let c = a.abs().min(1.0);
    let sign = if a < 0.0 { -1.0 } else { 1.0 };
    [sign * c, (1.0 - c * c).max(0.0).sqrt()]
}

/// Stacks `x_i · (sign(a_i) cos Q_i, sin Q_i)` head to tail.
pub fn polyline(x: &[f64], m: &LinearModel) -> Result<GlcLPolyline> {
    m.check(x)?;
    let mut nodes = Vec::with_capacity(x.len() + 1);
    let mut at = [0.0, 0.0];
    nodes.push(at);
    for (v, a) in x.iter().zip(&m.coefficients) {
        let d = direction(*a);
        // the horizontal step is a_i x_i, exactly as in the dot product
        at = [at[0] + a * v, at[1] + v * d[1]];
        nodes.push(at);
    }
    Ok(GlcLPolyline {
        u: at[0],
        projection_foot: [at[0], 0.0],
        nodes,
    })
}

/// Recovers the point from its stacked segments by projecting each segment
/// back onto its unit direction.
pub fn reconstruct(line: &GlcLPolyline, m: &LinearModel) -> Result<Vec<f64>> {
    if line.nodes.len() != m.n() + 1 {
        return Err(GlcError::DimensionMismatch {
            expected: m.n() + 1,
            found: line.nodes.len(),
        });
    }
    Ok(line
        .nodes
        .windows(2)
        .zip(&m.coefficients)
        .map(|(w, a)| {
            let d = direction(*a);
            (w[1][0] - w[0][0]) * d[0] + (w[1][1] - w[0][1]) * d[1]
        })
        .collect())
}

/// Best cut of sorted projections for "positive iff u > threshold".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub threshold: f64,
    pub correct: usize,
}

/// Exact accuracy-optimal threshold. Candidates are one value below all
/// projections, every midpoint between consecutive distinct projections,
/// and the largest projection. Ties prefer the cut in the widest gap, then
/// the lowest threshold.
pub fn best_threshold(projections: &[f64], is_positive: &[bool]) -> Cut {
    let mut order: Vec<usize> = (0..projections.len()).collect();
    order.sort_by(|&a, &b| projections[a].total_cmp(&projections[b]));
    let total_pos = is_positive.iter().filter(|p| **p).count();
    // everything above the cut: all positives right, all negatives wrong
    let below_all = projections[order[0]] - 1.0;
    let mut best = Cut {
        threshold: below_all,
        correct: total_pos,
    };
    let mut best_gap = 0.0;
    let mut neg_below = 0usize;
    let mut pos_below = 0usize;
    let mut k = 0;
    while k < order.len() {
        let u = projections[order[k]];
        while k < order.len() && projections[order[k]] == u {
            if is_positive[order[k]] {
                pos_below += 1;
            } else {
                neg_below += 1;
            }
            k += 1;
        }
        let correct = neg_below + (total_pos - pos_below);
        let (threshold, gap) = if k < order.len() {
            let next = projections[order[k]];
            let mid = u + (next - u) / 2.0;
            (if mid < next { mid } else { u }, next - u)
        } else {
            (u, 0.0)
        };
        if correct > best.correct || (correct == best.correct && gap > best_gap) {
            best = Cut { threshold, correct };
            best_gap = gap;
        }
    }
    best
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub positive_class: Option<String>,
    /// After climbing, zero out coefficients whose removal costs no
    /// training accuracy.
    pub simplify: bool,
    /// Warm start for restart 0 (coefficients, not angles).
    pub initial: Option<Vec<f64>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 600,
            seed: 0,
            positive_class: None,
            simplify: true,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub model: LinearModel,
    pub accuracy: f64,
    pub restart: usize,
}

/// Hill-climbing score: training hits first, then (negated) total distance
/// of misses from the threshold, relative to the projection spread.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    correct: usize,
    slack: f64,
    threshold: f64,
    flipped: bool,
}

impl Score {
    fn better_than(&self, other: &Score) -> bool {
        match self.correct.cmp(&other.correct) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.slack > other.slack + 1e-12,
        }
    }
}

struct Problem<'a> {
    columns: Vec<Vec<f64>>,
    positive: Vec<bool>,
    rows: usize,
    _d: &'a Dataset,
}

impl<'a> Problem<'a> {
    fn new(d: &'a Dataset, positive_class: &str) -> Self {
        Self {
            columns: (0..d.n_attributes()).map(|j| d.column(j)).collect(),
            positive: d.labels().iter().map(|l| l == positive_class).collect(),
            rows: d.len(),
            _d: d,
        }
    }

    fn projections(&self, coef: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.rows];
        for (col, a) in self.columns.iter().zip(coef) {
            if *a != 0.0 {
                for (ui, x) in u.iter_mut().zip(col) {
                    *ui += a * x;
                }
            }
        }
        u
    }

    fn score(&self, u: &[f64]) -> Score {
        let up = best_threshold(u, &self.positive);
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        let down = best_threshold(&neg, &self.positive);
        let (cut, flipped, proj) = if down.correct > up.correct {
            (down, true, neg.as_slice())
        } else {
            (up, false, u)
        };
        let (lo, hi) = proj
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        let spread = if hi > lo { hi - lo } else { 1.0 };
        let miss: f64 = proj
            .iter()
            .zip(&self.positive)
            .filter(|(v, p)| (**v > cut.threshold) != **p)
            .map(|(v, _)| (v - cut.threshold).abs())
            .sum();
        Score {
            correct: cut.correct,
            slack: -miss / spread,
            threshold: cut.threshold,
            flipped,
        }
    }
}

fn coefficients_of(angles: &[f64]) -> Vec<f64> {
    angles.iter().map(|q| q.cos()).collect()
}

fn climb(problem: &Problem, mut angles: Vec<f64>, rng: &mut ChaCha8Rng, max_iters: usize) -> (Vec<f64>, Score) {
    let n = angles.len();
    let mut coef = coefficients_of(&angles);
    let mut u = problem.projections(&coef);
    let mut current = problem.score(&u);
    let mut step = 0.6;
    let mut improved_in_sweep = false;
    let mut cand_u = vec![0.0; u.len()];
    for it in 0..max_iters {
        let i = it % n;
        let delta = step * rng.random_range(-1.0..=1.0);
        let q = (angles[i] + delta).clamp(0.0, PI);
        let a = q.cos();
        let change = a - coef[i];
        if change != 0.0 {
            for ((c, base), x) in cand_u.iter_mut().zip(&u).zip(&problem.columns[i]) {
                *c = base + change * x;
            }
            let s = problem.score(&cand_u);
            if s.better_than(&current) {
                angles[i] = q;
                coef[i] = a;
                std::mem::swap(&mut u, &mut cand_u);
                current = s;
                improved_in_sweep = true;
            }
        }
        if i == n - 1 {
            if !improved_in_sweep {
                step *= 0.5;
                if step < 1e-3 {
                    step = 0.6;
                }
            }
            improved_in_sweep = false;
        }
    }
    (angles, current)
}

/// Zeroes the weakest coefficients one at a time while training hits do
/// not drop. At least one coefficient stays non-zero.
fn simplify(problem: &Problem, mut angles: Vec<f64>, mut current: Score) -> (Vec<f64>, Score) {
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| angles[a].cos().abs().total_cmp(&angles[b].cos().abs()).then(a.cmp(&b)));
    for i in order {
        let coef = coefficients_of(&angles);
        if coef[i] == 0.0 || coef.iter().filter(|a| **a != 0.0).count() <= 1 {
            continue;
        }
        let mut trial = angles.clone();
        trial[i] = PI / 2.0;
        let mut tc = coef;
        tc[i] = 0.0;
        let s = problem.score(&problem.projections(&tc));
        if s.correct >= current.correct {
            angles = trial;
            current = s;
        }
    }
    (angles, current)
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Trains a GLC-L model on a binary, normalized dataset.
pub fn train(d: &Dataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    if d.len() < 2 {
        return Err(GlcError::InvalidInput("need at least two rows".into()));
    }
    let (negative, positive) = d.binary_classes(cfg.positive_class.as_deref())?;
    let problem = Problem::new(d, &positive);
    let n = d.n_attributes();
    if let Some(init) = &cfg.initial {
        if init.len() != n {
            return Err(GlcError::DimensionMismatch {
                expected: n,
                found: init.len(),
            });
        }
    }
    let restarts = cfg.restarts.max(1);
    let results: Vec<(Vec<f64>, Score)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(cfg.seed, r);
            let start: Vec<f64> = match (r, &cfg.initial) {
                (0, Some(init)) => init.iter().map(|a| a.clamp(-1.0, 1.0).acos()).collect(),
                (0, None) => vec![0.0; n],
                _ => (0..n).map(|_| rng.random_range(0.0..=PI)).collect(),
            };
            let (angles, score) = climb(&problem, start, &mut rng, cfg.max_iters);
            if cfg.simplify {
                simplify(&problem, angles, score)
            } else {
                (angles, score)
            }
        })
        .collect();
    let (best_restart, (angles, score)) = results
        .into_iter()
        .enumerate()
        .reduce(|best, cand| if cand.1 .1.better_than(&best.1 .1) { cand } else { best })
        .expect("at least one restart");

    let mut coef = coefficients_of(&angles);
    // a flipped cut was found on -u, which is exactly the projection of the
    // negated coefficients
    if score.flipped {
        coef.iter_mut().for_each(|a| *a = -*a);
    }
    let model = LinearModel::canonicalized(coef, score.threshold, positive, negative)?;
    let accuracy = accuracy(&model, d)?;
    Ok(TrainedModel {
        model,
        accuracy,
        restart: best_restart,
    })
}

/// Projections and accuracy for analyst-chosen angles. Without a threshold
/// the accuracy-optimal cut for "positive above" is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleEvaluation {
    pub u: Vec<f64>,
    pub threshold: f64,
    pub accuracy: f64,
    pub model: LinearModel,
}

pub fn evaluate_angles(
    d: &Dataset,
    angles: &[f64],
    signs: Option<&[f64]>,
    threshold: Option<f64>,
    positive_class: Option<&str>,
) -> Result<AngleEvaluation> {
    if angles.len() != d.n_attributes() {
        return Err(GlcError::DimensionMismatch {
            expected: d.n_attributes(),
            found: angles.len(),
        });
    }
    let (negative, positive) = d.binary_classes(positive_class)?;
    let probe = LinearModel::from_angles(angles, signs, 0.0, positive.clone(), negative.clone())?;
    let u: Vec<f64> = d.rows().iter().map(|x| dot(&probe.coefficients, x)).collect();
    let t = match threshold {
        Some(t) => t,
        None => {
            let is_pos: Vec<bool> = d.labels().iter().map(|l| *l == positive).collect();
            best_threshold(&u, &is_pos).threshold
        }
    };
    let model = LinearModel { threshold: t, ..probe };
    let accuracy = accuracy(&model, d)?;
    Ok(AngleEvaluation {
        u,
        threshold: t,
        accuracy,
        model,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    pub removed_names: Vec<String>,
    pub accuracy_before: f64,
    pub accuracy_after: f64,
}

/// Default coefficient floor for pruning (relative to `max |a_i| = 1`).
pub const DEFAULT_PRUNE_EPS: f64 = 0.05;

/// Drops attributes with `|a_i| < eps` and retrains on the survivors, warm
/// started from the surviving coefficients.
pub fn prune_and_refit(
    m: &LinearModel,
    d: &Dataset,
    eps: f64,
    cfg: &TrainConfig,
) -> Result<(TrainedModel, PruneReport)> {
    m.check(&vec![0.0; d.n_attributes()])?;
    let before = accuracy(m, d)?;
    let (kept, removed): (Vec<usize>, Vec<usize>) =
        (0..m.n()).partition(|&i| m.coefficients[i].abs() >= eps);
    if kept.is_empty() {
        return Err(GlcError::InvalidInput(format!(
            "eps {eps} would remove every attribute"
        )));
    }
    let names = d.attribute_names();
    let report = |after: f64| PruneReport {
        kept: kept.clone(),
        removed: removed.clone(),
        removed_names: removed.iter().map(|&i| names[i].clone()).collect(),
        accuracy_before: before,
        accuracy_after: after,
    };
    if removed.is_empty() {
        let same = TrainedModel {
            model: m.clone(),
            accuracy: before,
            restart: 0,
        };
        return Ok((same, report(before)));
    }
    let reduced = d.subset_attributes(&kept)?;
    let cfg = TrainConfig {
        positive_class: Some(m.positive_class.clone()),
        initial: Some(kept.iter().map(|&i| m.coefficients[i]).collect()),
        ..cfg.clone()
    };
    let trained = train(&reduced, &cfg)?;
    let after = trained.accuracy;
    Ok((trained, report(after)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub row: usize,
    pub point: Vec<f64>,
    pub distance: f64,
    /// `neighbor - query` per attribute.
    pub deltas: Vec<f64>,
    pub changed: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationDiff {
    pub query: Vec<f64>,
    pub true_class: String,
    pub predicted_class: String,
    pub neighbors: Vec<Neighbor>,
}

/// Display tolerance for flagging an attribute as changed.
pub const CHANGE_TOLERANCE: f64 = 1e-9;

/// The `k` nearest correctly classified cases of the query's true class,
/// by L2 distance in the model's (normalized) space. Distance ties go to
/// the lower row index.
pub fn explain_misclassified(
    x: &[f64],
    true_class: &str,
    d: &Dataset,
    m: &LinearModel,
    k: usize,
) -> Result<ExplanationDiff> {
    let predicted = classify(x, m)?;
    if predicted == true_class {
        return Err(GlcError::InvalidInput("query is classified correctly".into()));
    }
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for (row, (p, label)) in d.rows().iter().zip(d.labels()).enumerate() {
        if label == true_class && classify(p, m)? == label {
            let dist = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            candidates.push((dist, row));
        }
    }
    if candidates.is_empty() {
        return Err(GlcError::Class(format!(
            "no correctly classified case of class `{true_class}`"
        )));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let neighbors = candidates
        .into_iter()
        .take(k)
        .map(|(distance, row)| {
            let point = d.row(row).to_vec();
            let deltas: Vec<f64> = point.iter().zip(x).map(|(p, q)| p - q).collect();
            let changed = deltas.iter().map(|v| v.abs() > CHANGE_TOLERANCE).collect();
            Neighbor {
                row,
                point,
                distance,
                deltas,
                changed,
            }
        })
        .collect();
    Ok(ExplanationDiff {
        query: x.to_vec(),
        true_class: true_class.to_string(),
        predicted_class: predicted.to_string(),
        neighbors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelClasses {
    pub positive: String,
    pub negative: String,
}

/// On-disk form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub coefficients: Vec<f64>,
    pub threshold: f64,
    pub classes: ModelClasses,
    pub attribute_names: Vec<String>,
    pub normalization: NormalizationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_accuracy: Option<f64>,
}

impl ModelArtifact {
    pub fn new(model: &LinearModel, attribute_names: Vec<String>, normalization: NormalizationSpec) -> Self {
        Self {
            coefficients: model.coefficients.clone(),
            threshold: model.threshold,
            classes: ModelClasses {
                positive: model.positive_class.clone(),
                negative: model.negative_class.clone(),
            },
            attribute_names,
            normalization,
            training_accuracy: None,
        }
    }

    pub fn model(&self) -> Result<LinearModel> {
        LinearModel::new(
            self.coefficients.clone(),
            self.threshold,
            self.classes.positive.clone(),
            self.classes.negative.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(a: &[f64], t: f64) -> LinearModel {
        LinearModel::new(a.to_vec(), t, "B", "A").unwrap()
    }

    fn toy(rows: Vec<Vec<f64>>, labels: &[&str]) -> Dataset {
        let n = rows[0].len();
        Dataset::new(
            (0..n).map(|j| format!("x{}", j + 1)).collect(),
            rows,
            labels.iter().map(|s| s.to_string()).collect(),
            "class",
        )
        .unwrap()
    }

    #[test]
    fn project_examples() {
        let x = [1.0, 0.8, 1.2, 1.0];
        let m = LinearModel::from_angles(&[0.0; 4], None, 0.0, "B", "A").unwrap();
        assert!((project(&x, &m).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(project(&x, &model(&[1.0, 0.0, 0.0, 0.0], 0.0)).unwrap(), 1.0);
        let u = project(&[0.5, 0.5], &model(&[0.6, -0.8], 0.0)).unwrap();
        assert!((u + 0.1).abs() < 1e-12);
        assert!(project(&[1.0], &model(&[0.6, -0.8], 0.0)).is_err());
    }

    #[test]
    fn angles_match_coefficients() {
        let m = model(&[0.6, -0.8, 0.0, 1.0], 0.0);
        for (q, a) in m.angles().iter().zip(&m.coefficients) {
            assert!((q.cos() - a.abs()).abs() < 1e-12);
        }
        assert_eq!(m.signs(), vec![1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn polyline_examples() {
        let m = model(&[1.0, 0.5, -0.3, 0.0], 0.0);
        let zero = polyline(&[0.0; 4], &m).unwrap();
        assert!(zero.nodes.iter().all(|n| *n == [0.0, 0.0]));
        assert_eq!(zero.u, 0.0);
        let line = polyline(&[1.0, 0.8, 1.2, 1.0], &m).unwrap();
        assert_eq!(line.nodes.len(), 5);
        assert_eq!(line.projection_foot, [line.u, 0.0]);
        let back = reconstruct(&line, &m).unwrap();
        for (a, b) in back.iter().zip([1.0, 0.8, 1.2, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_form() {
        let m = LinearModel::canonicalized(vec![2.0, -4.0], 1.0, "B", "A").unwrap();
        assert_eq!(m.coefficients, vec![0.5, -1.0]);
        assert_eq!(m.threshold, 0.25);
        assert!(LinearModel::canonicalized(vec![0.0, 0.0], 1.0, "B", "A").is_err());
        assert!(LinearModel::new(vec![1.5], 0.0, "B", "A").is_err());
    }

    #[test]
    fn tie_goes_to_negative() {
        let m = model(&[1.0], 0.5);
        assert_eq!(classify(&[0.5], &m).unwrap(), "A");
        assert_eq!(classify(&[0.6], &m).unwrap(), "B");
    }

    #[test]
    fn separable_pair_trains_perfectly() {
        let d = toy(vec![vec![0.0, 0.0], vec![1.0, 1.0]], &["A", "B"]);
        let t = train(&d, &TrainConfig::default()).unwrap();
        assert_eq!(t.accuracy, 1.0);
        assert_eq!(classify(&[0.0, 0.0], &t.model).unwrap(), "A");
        assert_eq!(classify(&[1.0, 1.0], &t.model).unwrap(), "B");
        let max = t.model.coefficients.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_orientation_is_learned() {
        // the positive class sits at the low end
        let d = toy(vec![vec![1.0], vec![0.9], vec![0.1], vec![0.0]], &["A", "A", "B", "B"]);
        let t = train(&d, &TrainConfig::default()).unwrap();
        assert_eq!(t.accuracy, 1.0);
        assert!(t.model.coefficients[0] < 0.0);
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        let d = toy(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            &["A", "A", "B", "B"],
        );
        let t = train(&d, &TrainConfig::default()).unwrap();
        assert!(t.accuracy <= 0.75);
        // exhaustive oracle over a fine grid of directions and all cuts
        let is_pos = [false, false, true, true];
        let mut best = 0;
        for k in 0..360 {
            let th = (k as f64).to_radians();
            let u: Vec<f64> = d.rows().iter().map(|r| th.cos() * r[0] + th.sin() * r[1]).collect();
            best = best.max(brute_force_best(&u, &is_pos));
        }
        assert_eq!(best, 3);
    }

    fn brute_force_best(u: &[f64], is_pos: &[bool]) -> usize {
        let mut cuts: Vec<f64> = u.to_vec();
        cuts.sort_by(f64::total_cmp);
        let mut candidates = vec![cuts[0] - 1.0];
        candidates.extend(cuts.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        candidates.push(*cuts.last().unwrap());
        candidates
            .iter()
            .map(|t| u.iter().zip(is_pos).filter(|(v, p)| (**v > *t) == **p).count())
            .max()
            .unwrap()
    }

    #[test]
    fn threshold_scan_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.random_range(1..30);
            let u: Vec<f64> = (0..n).map(|_| (rng.random_range(0..10) as f64) / 3.0).collect();
            let is_pos: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let cut = best_threshold(&u, &is_pos);
            let realized = u.iter().zip(&is_pos).filter(|(v, p)| (**v > cut.threshold) == **p).count();
            assert_eq!(realized, cut.correct);
            assert_eq!(cut.correct, brute_force_best(&u, &is_pos));
        }
    }

    #[test]
    fn classify_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = model(&[0.3, -1.0, 0.7], 0.1);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
            let s = 0.3 * x[0] - x[1] + 0.7 * x[2] - 0.1;
            let expected = if s > 0.0 { "B" } else { "A" };
            assert_eq!(classify(&x, &m).unwrap(), expected);
        }
    }

    #[test]
    fn train_needs_two_classes() {
        let d = toy(vec![vec![0.0], vec![1.0]], &["A", "A"]);
        assert!(train(&d, &TrainConfig::default()).is_err());
        let d = toy(vec![vec![0.0]], &["A"]);
        assert!(train(&d, &TrainConfig::default()).is_err());
    }

    #[test]
    fn angle_what_if_with_zero_angles_gives_row_sums() {
        let d = toy(vec![vec![0.1, 0.2], vec![0.5, 0.9], vec![1.0, 1.0]], &["A", "B", "B"]);
        let e = evaluate_angles(&d, &[0.0, 0.0], None, None, None).unwrap();
        for (u, r) in e.u.iter().zip(d.rows()) {
            assert!((u - (r[0] + r[1])).abs() < 1e-12);
        }
        assert_eq!(e.accuracy, 1.0);
    }

    #[test]
    fn prune_examples() {
        let d = toy(
            vec![vec![0.0, 0.3, 0.0], vec![1.0, 0.6, 1.0], vec![0.2, 0.1, 0.1], vec![0.9, 0.9, 0.8]],
            &["A", "B", "A", "B"],
        );
        let m = model(&[1.0, 0.0, 0.5], 0.5);
        let (_, report) = prune_and_refit(&m, &d, 0.1, &TrainConfig::default()).unwrap();
        assert_eq!(report.removed, vec![1]);
        assert_eq!(report.removed_names, vec!["x2"]);
        let (same, report) = prune_and_refit(&m, &d, 0.0, &TrainConfig::default()).unwrap();
        assert!(report.removed.is_empty());
        assert_eq!(same.model, m);
        assert!(prune_and_refit(&m, &d, 2.0, &TrainConfig::default()).is_err());
    }

    #[test]
    fn explanation_flags_single_changed_attribute() {
        let d = toy(
            vec![vec![0.2, 0.2, 0.2], vec![0.9, 0.9, 0.9], vec![0.1, 0.1, 0.1]],
            &["A", "B", "A"],
        );
        let m = model(&[1.0, 1.0, 1.0], 1.0);
        // row 0 with x3 raised: pushed across the threshold
        let query = [0.2, 0.2, 0.8];
        let e = explain_misclassified(&query, "A", &d, &m, 2).unwrap();
        assert_eq!(e.predicted_class, "B");
        assert_eq!(e.neighbors.len(), 2);
        assert_eq!(e.neighbors[0].row, 0);
        assert_eq!(e.neighbors[0].changed, vec![false, false, true]);
        assert!(explain_misclassified(&[0.1, 0.1, 0.1], "A", &d, &m, 2).is_err());
    }

    #[test]
    fn model_artifact_json_keys() {
        let m = model(&[1.0, -0.5], 0.2);
        let art = ModelArtifact::new(&m, vec!["a".into(), "b".into()], NormalizationSpec { maps: vec![] });
        let v = serde_json::to_value(&art).unwrap();
        for key in ["coefficients", "threshold", "classes", "attribute_names", "normalization"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(art.model().unwrap(), m);
    }
}
