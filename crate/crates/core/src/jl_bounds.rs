//! Johnson–Lindenstrauss dimension bounds and an empirical check of how
//! well random linear maps preserve pairwise squared distances.
//!
//! For `m` points and tolerance `ε`, a map into `k > 8 ln(m) / ε²`
//! dimensions exists keeping every squared distance within a factor
//! `1 ± ε`. At the boundary case `ε = 1` projected distances stay below
//! `√2 · S`, so they can shrink to zero but never exceed about 142% of the
//! original `S`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coords::mapping_distortion;
use crate::error::{GlcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JlEstimate {
    pub m: u64,
    pub epsilon: f64,
    pub k_min: u64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(GlcError::Domain(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

fn bound(m: u64, eps: f64) -> f64 {
    8.0 * (m as f64).ln() / (eps * eps)
}

/// Smallest integer strictly greater than `8 ln(m) / ε²`.
pub fn min_dimension(m: u64, eps: f64) -> Result<JlEstimate> {
    check_eps(eps)?;
    if m < 1 {
        return Err(GlcError::Domain("m must be at least 1".into()));
    }
    Ok(JlEstimate {
        m,
        epsilon: eps,
        k_min: bound(m, eps).floor() as u64 + 1,
    })
}

/// Largest `m` with `min_dimension(m, eps) <= k`.
pub fn max_points(k: u64, eps: f64) -> Result<u64> {
    check_eps(eps)?;
    if k < 1 {
        return Err(GlcError::Domain("k must be at least 1".into()));
    }
    let guess = (k as f64 * eps * eps / 8.0).exp().floor();
    if !guess.is_finite() || guess > 1e15 {
        return Ok(u64::MAX);
    }
    let fits = |m: u64| (bound(m, eps).floor() as u64) < k;
    let mut m = (guess as u64).max(1);
    // the closed form can be off by one at exact powers
    while m > 1 && !fits(m) {
        m -= 1;
    }
    while fits(m + 1) {
        m += 1;
    }
    Ok(m)
}

/// Published dimension estimates for roughly 30% distance error. These come
/// from formulas not reproduced here; [`reference_comparison`] sets them
/// against the plain bound.
pub const PUBLISHED_ESTIMATES: [(u64, f64, u64); 2] = [(10, 0.3, 1900), (300, 0.3, 4500)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub m: u64,
    pub epsilon: f64,
    pub published_k: u64,
    pub bound_k: u64,
}

pub fn reference_comparison() -> Vec<ReferenceRow> {
    PUBLISHED_ESTIMATES
        .iter()
        .map(|&(m, epsilon, published_k)| ReferenceRow {
            m,
            epsilon,
            published_k,
            bound_k: min_dimension(m, epsilon).expect("valid constants").k_min,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub max_deviation: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub k_used: usize,
    /// `k_used >= n`: points are kept as they are (zero padding is an
    /// isometry) and no random map is drawn.
    pub identity: bool,
    pub trials: Vec<TrialOutcome>,
    pub success: bool,
    pub best_trial: Option<usize>,
}

fn validate_points(points: &[Vec<f64>]) -> Result<usize> {
    if points.len() < 2 {
        return Err(GlcError::InvalidInput("need at least two points".into()));
    }
    let n = points[0].len();
    if n == 0 {
        return Err(GlcError::InvalidInput("points have no coordinates".into()));
    }
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(GlcError::DimensionMismatch {
            expected: n,
            found: p.len(),
        });
    }
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(GlcError::InvalidInput("duplicate points".into()));
    }
    Ok(n)
}

fn project(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points[0].len();
    let scale = 1.0 / (k as f64).sqrt();
    let matrix: Vec<f64> = (0..k * n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z * scale
        })
        .collect();
    points
        .iter()
        .map(|p| {
            matrix
                .chunks(n)
                .map(|row| row.iter().zip(p).map(|(a, x)| a * x).sum())
                .collect()
        })
        .collect()
}

/// Projects to `k = min_dimension(m, eps)` capped at `n`.
pub fn verify_random_projection(points: &[Vec<f64>], eps: f64, trials: usize, seed: u64) -> Result<ProjectionReport> {
    let n = validate_points(points)?;
    let k = min_dimension(points.len() as u64, eps)?.k_min;
    verify_random_projection_at(points, (k as usize).min(n), eps, trials, seed)
}

/// Same check at an explicit target dimension. Trial `t` draws its map from
/// the ChaCha stream `t` of `seed`, so results do not depend on scheduling.
pub fn verify_random_projection_at(
    points: &[Vec<f64>],
    k: usize,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<ProjectionReport> {
    check_eps(eps)?;
    let n = validate_points(points)?;
    if k == 0 {
        return Err(GlcError::Domain("k must be at least 1".into()));
    }
    if trials == 0 {
        return Err(GlcError::InvalidInput("trials must be at least 1".into()));
    }
    let outcome = |low: &[Vec<f64>]| -> Result<TrialOutcome> {
        let r = mapping_distortion(points, low)?;
        Ok(TrialOutcome {
            min_ratio: r.min_ratio,
            max_ratio: r.max_ratio,
            max_deviation: r.max_deviation(),
            within: r.min_ratio >= 1.0 - eps && r.max_ratio <= 1.0 + eps,
        })
    };
    let identity = k >= n;
    let trials: Vec<TrialOutcome> = if identity {
        vec![outcome(points)?]
    } else {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                outcome(&project(points, k, &mut rng))
            })
            .collect::<Result<_>>()?
    };
    let best_trial = trials
        .iter()
        .enumerate()
        .filter(|(_, t)| t.within)
        .min_by(|a, b| a.1.max_deviation.total_cmp(&b.1.max_deviation))
        .map(|(i, _)| i);
    Ok(ProjectionReport {
        m: points.len(),
        n,
        epsilon: eps,
        k_used: k,
        identity,
        success: best_trial.is_some(),
        best_trial,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_points(m: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn min_dimension_examples() {
        assert_eq!(min_dimension(1, 0.3).unwrap().k_min, 1);
        assert_eq!(min_dimension(10, 0.5).unwrap().k_min, 74);
        assert_eq!(min_dimension(300, 0.5).unwrap().k_min, 183);
        assert!(min_dimension(10, 1.0).is_err());
        assert!(min_dimension(10, 0.0).is_err());
        assert!(min_dimension(0, 0.5).is_err());
    }

    #[test]
    fn max_points_examples() {
        assert_eq!(max_points(8, 0.999).unwrap(), 2);
        assert_eq!(max_points(1, 0.1).unwrap(), 1);
        assert!(max_points(0, 0.5).is_err());
    }

    #[test]
    fn published_estimates_differ_from_bound() {
        let rows = reference_comparison();
        assert_eq!(rows[0].bound_k, 205);
        assert!(rows.iter().all(|r| r.published_k > r.bound_k));
    }

    proptest! {
        #[test]
        fn min_dimension_is_minimal(m in 1u64..100_000, eps in 0.01f64..0.99) {
            let k = min_dimension(m, eps).unwrap().k_min as f64;
            let b = bound(m, eps);
            prop_assert!(k > b);
            prop_assert!(k - 1.0 <= b);
        }

        #[test]
        fn min_dimension_is_monotone(m in 1u64..10_000, eps in 0.05f64..0.95) {
            let k = min_dimension(m, eps).unwrap().k_min;
            prop_assert!(min_dimension(m + 1, eps).unwrap().k_min >= k);
            prop_assert!(min_dimension(m, eps * 0.9).unwrap().k_min >= k);
        }

        #[test]
        fn max_points_inverts(m in 1u64..5_000, eps in 0.2f64..0.95) {
            let k = min_dimension(m, eps).unwrap().k_min;
            let mp = max_points(k, eps).unwrap();
            prop_assert!(mp >= m);
            prop_assert!(min_dimension(mp, eps).unwrap().k_min <= k);
            prop_assert!(min_dimension(mp + 1, eps).unwrap().k_min > k);
        }
    }

    #[test]
    fn identity_when_k_reaches_n() {
        let pts = random_points(5, 3, 1);
        let r = verify_random_projection_at(&pts, 3, 0.1, 4, 0).unwrap();
        assert!(r.identity && r.success);
        assert!((r.trials[0].max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_maps_preserve_high_dimensional_distances() {
        let pts = random_points(20, 500, 7);
        let r = verify_random_projection(&pts, 0.5, 20, 42).unwrap();
        assert_eq!(r.k_used, 96);
        assert!(r.success);
    }

    #[test]
    fn two_dimensions_cannot_hold_distances() {
        let pts = random_points(50, 100, 3);
        let r = verify_random_projection_at(&pts, 2, 0.3, 20, 42).unwrap();
        assert!(!r.success);
        assert_eq!(r.trials.len(), 20);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let pts = random_points(10, 40, 2);
        let a = verify_random_projection_at(&pts, 8, 0.5, 6, 11).unwrap();
        let b = verify_random_projection_at(&pts, 8, 0.5, 6, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_duplicates() {
        let pts = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0]];
        assert!(verify_random_projection(&pts, 0.5, 3, 0).is_err());
    }
}
