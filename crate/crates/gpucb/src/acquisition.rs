//! Selection policies over finite candidate sets: deterministic and
//! randomized UCB, expected improvement, and Thompson sampling.

use crate::confidence::ConfidenceSchedule;
use crate::error::{Error, Result};
use crate::gp::Posterior;
use crate::rng::Stream;
use crate::stats::{normal_cdf, normal_pdf};

/// An acquisition policy.
#[derive(Debug, Clone)]
pub enum Policy {
    /// UCB with a confidence schedule: `score = mean + sqrt(zeta) * sd`.
    Ucb(ConfidenceSchedule),
    ExpectedImprovement,
    ThompsonSampling,
}

/// Where a candidate set came from.
#[derive(Debug, Clone, PartialEq)]
pub enum PoolProvenance {
    ExplicitGrid,
    SampledPool { size: usize, seed: u64 },
}

/// A finite, non-empty set of candidate points.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    points: Vec<Vec<f64>>,
    provenance: PoolProvenance,
}

impl CandidateSet {
    pub fn from_grid(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::input("candidate set must be non-empty"));
        }
        Ok(CandidateSet {
            points,
            provenance: PoolProvenance::ExplicitGrid,
        })
    }

    /// A fixed low-discrepancy pool inside a box, built from the additive
    /// golden-ratio recurrence with a seeded random offset.
    pub fn sampled_pool(bounds: &[(f64, f64)], size: usize, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::input("candidate set must be non-empty"));
        }
        if bounds.is_empty() || bounds.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::input("pool bounds must be non-empty with lo < hi"));
        }
        let points = low_discrepancy_unit(bounds.len(), size, seed)
            .into_iter()
            .map(|u| {
                u.iter()
                    .zip(bounds)
                    .map(|(ui, (lo, hi))| lo + ui * (hi - lo))
                    .collect()
            })
            .collect();
        Ok(CandidateSet {
            points,
            provenance: PoolProvenance::SampledPool { size, seed },
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn provenance(&self) -> &PoolProvenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Points of the generalized golden-ratio sequence in the unit cube.
fn low_discrepancy_unit(dim: usize, size: usize, seed: u64) -> Vec<Vec<f64>> {
    // phi_d is the unique positive root of x^(d+1) = x + 1.
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=dim).map(|j| (1.0 / phi).powi(j as i32)).collect();
    use rand::Rng;
    let mut rng = crate::rng::stream(seed, &[crate::rng::tag::POOL]);
    let offsets: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (0..size)
        .map(|n| {
            (0..dim)
                .map(|j| (offsets[j] + (n as f64 + 1.0) * alphas[j]).fract())
                .collect()
        })
        .collect()
}

/// UCB score for one candidate.
pub fn ucb_score(mean: f64, variance: f64, zeta: f64) -> f64 {
    mean + zeta.sqrt() * variance.max(0.0).sqrt()
}

/// UCB scores `mean + sqrt(zeta) * sd` for every candidate.
pub fn ucb_scores(
    posterior: &Posterior,
    candidates: &CandidateSet,
    zeta: f64,
) -> Result<Vec<f64>> {
    if !(zeta >= 0.0) {
        return Err(Error::input("confidence parameter must be nonnegative"));
    }
    Ok(posterior
        .predict_batch(candidates.points())?
        .into_iter()
        .map(|(m, v)| ucb_score(m, v, zeta))
        .collect())
}

/// Expected improvement over `incumbent` for one candidate.
///
/// `sd * (z Phi(z) + phi(z))` with `z = (mean - incumbent) / sd`; the
/// zero-variance limit is the positive part of `mean - incumbent`.
pub fn ei_score(mean: f64, variance: f64, incumbent: f64) -> f64 {
    let sd = variance.max(0.0).sqrt();
    if sd == 0.0 {
        return (mean - incumbent).max(0.0);
    }
    let z = (mean - incumbent) / sd;
    sd * (z * normal_cdf(z) + normal_pdf(z))
}

/// Expected-improvement scores for every candidate; `incumbent` is the best
/// observed value so far (negative infinity when there is no data).
pub fn ei_scores(
    posterior: &Posterior,
    candidates: &CandidateSet,
    incumbent: f64,
) -> Result<Vec<f64>> {
    Ok(posterior
        .predict_batch(candidates.points())?
        .into_iter()
        .map(|(m, v)| ei_score(m, v, incumbent))
        .collect())
}

/// Argmax with ties broken by the lowest index.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in scores.iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Outcome of one selection step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    /// Confidence parameter used; present for UCB policies only.
    pub zeta: Option<f64>,
}

/// Chooses the next query among the candidates.
///
/// UCB draws its confidence parameter exactly once per call and reports it;
/// EI maximizes expected improvement over the best observed value; Thompson
/// sampling maximizes one exact joint posterior draw.
pub fn select_next(
    policy: &Policy,
    posterior: &Posterior,
    candidates: &CandidateSet,
    t: u64,
    rng: &mut Stream,
) -> Result<Selection> {
    if t < 1 {
        return Err(Error::input("iterations are 1-based"));
    }
    match policy {
        Policy::Ucb(schedule) => {
            let zeta = schedule.sample_zeta(t, rng);
            let scores = ucb_scores(posterior, candidates, zeta)?;
            Ok(Selection {
                index: argmax(&scores),
                zeta: Some(zeta),
            })
        }
        Policy::ExpectedImprovement => {
            let incumbent = posterior.max_observed().unwrap_or(f64::NEG_INFINITY);
            let scores = ei_scores(posterior, candidates, incumbent)?;
            Ok(Selection {
                index: argmax(&scores),
                zeta: None,
            })
        }
        Policy::ThompsonSampling => {
            let draw = posterior.sample_joint(candidates.points(), 1, rng)?;
            let scores: Vec<f64> = draw.row(0).iter().cloned().collect();
            Ok(Selection {
                index: argmax(&scores),
                zeta: None,
            })
        }
    }
}
