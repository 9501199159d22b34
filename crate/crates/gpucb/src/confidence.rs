//! Confidence-parameter machinery: deterministic GP-UCB schedules,
//! randomized confidence samplers (Gamma, two-parameter exponential,
//! truncated normal), their analytic means and MGFs, and the schedule
//! constructors used by the regret bounds.

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::stats::normal_cdf;

/// Rate parameter of the two-parameter exponential schedules; fixed at 1/2.
pub const IRGP_UCB_RATE: f64 = 0.5;

/// Description of the optimization domain as seen by the schedules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainInfo {
    /// Finite candidate set of known cardinality.
    Finite { cardinality: usize },
    /// Compact subset of `[0, r]^d` under the sample-path derivative tail
    /// condition with constants `a`, `b`.
    Continuous { a: f64, b: f64, r: f64, dim: usize },
}

impl DomainInfo {
    pub fn finite(cardinality: usize) -> Result<Self> {
        if cardinality < 1 {
            return Err(Error::input("finite domain needs cardinality >= 1"));
        }
        Ok(DomainInfo::Finite { cardinality })
    }

    pub fn continuous(a: f64, b: f64, r: f64, dim: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && r > 0.0) {
            return Err(Error::input("continuous domain needs a, b, r > 0"));
        }
        if dim < 1 {
            return Err(Error::input("continuous domain needs dim >= 1"));
        }
        Ok(DomainInfo::Continuous { a, b, r, dim })
    }
}

/// `sqrt(log(ad)) + sqrt(pi)/2`, the expected-supremum factor of the
/// derivative bound. The log is clamped at zero: for `ad < 1` the integral
/// bound `a d b sqrt(pi) / 2 <= b sqrt(pi) / 2` already holds, so the
/// clamped value remains a valid upper-bound factor.
fn lmax_factor(a: f64, dim: usize) -> f64 {
    (a * dim as f64).ln().max(0.0).sqrt() + std::f64::consts::PI.sqrt() / 2.0
}

/// Per-dimension grid refinement `tau_t = b d r t^2 (sqrt(log(ad)) + sqrt(pi)/2)`.
pub fn discretization_tau(domain: &DomainInfo, t: u64) -> Result<f64> {
    match *domain {
        DomainInfo::Continuous { a, b, r, dim } => {
            assert!(t >= 1, "iterations are 1-based");
            let t = t as f64;
            Ok(b * dim as f64 * r * t * t * lmax_factor(a, dim))
        }
        DomainInfo::Finite { .. } => Err(Error::input(
            "discretization applies to continuous domains only",
        )),
    }
}

/// Discretization cardinality `ceil(tau_t)^d` for a continuous domain.
pub fn discretization_size(domain: &DomainInfo, t: u64) -> Result<u128> {
    let tau = discretization_tau(domain, t)?;
    let per_dim = tau.ceil();
    if per_dim > u64::MAX as f64 {
        return Err(Error::input("discretization size overflows"));
    }
    let per_dim = per_dim as u128;
    let dim = match *domain {
        DomainInfo::Continuous { dim, .. } => dim,
        DomainInfo::Finite { .. } => unreachable!(),
    };
    per_dim
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::input("discretization size overflows"))
}

/// Natural log of the effective domain size at iteration `t`:
/// `log |X|` for finite domains, `d log(ceil(tau_t))` for continuous ones.
fn log_domain_size(domain: &DomainInfo, t: u64) -> f64 {
    match *domain {
        DomainInfo::Finite { cardinality } => (cardinality as f64).ln(),
        DomainInfo::Continuous { dim, .. } => {
            let tau = discretization_tau(domain, t).expect("continuous domain");
            dim as f64 * tau.ceil().ln()
        }
    }
}

/// Deterministic GP-UCB confidence parameter.
///
/// Finite domains: `beta_t = 2 log(|X| t^2 / sqrt(2 pi))`. Continuous
/// domains: `beta_t = 2 d log(b d r t^2 (sqrt(log(ad)) + sqrt(pi)/2))
/// + 2 log(t^2 / sqrt(2 pi))`. Values are clamped at zero (relevant only
/// for tiny finite domains at t = 1).
pub fn beta_gpucb(domain: &DomainInfo, t: u64) -> f64 {
    assert!(t >= 1, "iterations are 1-based");
    let t = t as f64;
    let log_sqrt_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let beta = match *domain {
        DomainInfo::Finite { cardinality } => {
            2.0 * ((cardinality as f64).ln() + 2.0 * t.ln() - log_sqrt_2pi)
        }
        DomainInfo::Continuous { a, b, r, dim } => {
            let d = dim as f64;
            2.0 * d * (b * d * r * t * t * lmax_factor(a, dim)).ln()
                + 2.0 * (2.0 * t.ln() - log_sqrt_2pi)
        }
    };
    beta.max(0.0)
}

/// How the two-parameter exponential shift is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IrgpUcbMode {
    /// `s = 2 log(|X| / 2)`, constant in `t`.
    Finite,
    /// `s_t = 2 d log(b d r t^2 (sqrt(log(ad)) + sqrt(pi)/2)) - 2 log 2`.
    ContinuousAtT(u64),
    /// `s_eta = 2 d log(2 b d r (sqrt(log(ad)) + sqrt(pi)/2) / eta) - 2 log 2`,
    /// constant in `t` for a required accuracy `eta`.
    Accuracy(f64),
}

/// Shift and rate of a two-parameter exponential confidence distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrgpUcbParams {
    pub shift: f64,
    pub rate: f64,
    /// True when the raw shift was negative and clamped to zero
    /// (only possible for finite domains with `|X| <= 2`).
    pub clamped: bool,
}

/// Two-parameter exponential schedule parameters; the rate is always 1/2.
pub fn irgpucb_params(domain: &DomainInfo, mode: IrgpUcbMode) -> Result<IrgpUcbParams> {
    let raw = match (mode, domain) {
        (IrgpUcbMode::Finite, DomainInfo::Finite { cardinality }) => {
            2.0 * (*cardinality as f64 / 2.0).ln()
        }
        (IrgpUcbMode::ContinuousAtT(t), DomainInfo::Continuous { a, b, r, dim }) => {
            if t < 1 {
                return Err(Error::input("iterations are 1-based"));
            }
            let (d, t) = (*dim as f64, t as f64);
            2.0 * d * (b * d * r * t * t * lmax_factor(*a, *dim)).ln() - 2.0 * 2.0f64.ln()
        }
        (IrgpUcbMode::Accuracy(eta), DomainInfo::Continuous { a, b, r, dim }) => {
            if !(eta > 0.0) {
                return Err(Error::input("accuracy eta must be positive"));
            }
            let d = *dim as f64;
            2.0 * d * (2.0 * b * d * r * lmax_factor(*a, *dim) / eta).ln() - 2.0 * 2.0f64.ln()
        }
        _ => {
            return Err(Error::input(
                "schedule mode does not match the domain kind",
            ))
        }
    };
    Ok(IrgpUcbParams {
        shift: raw.max(0.0),
        rate: IRGP_UCB_RATE,
        clamped: raw < 0.0,
    })
}

/// Gamma schedule shape `kappa_t = log(|X_t| t^2) / log(1 + theta/2)`.
pub fn gamma_kappa(domain_size: u128, t: u64, theta: f64) -> f64 {
    assert!(domain_size >= 1 && t >= 1 && theta > 0.0);
    gamma_kappa_from_log((domain_size as f64).ln(), t, theta)
}

fn gamma_kappa_from_log(log_domain_size: f64, t: u64, theta: f64) -> f64 {
    let t = t as f64;
    (log_domain_size + 2.0 * t.ln()) / (1.0 + theta / 2.0).ln()
}

// Closed-form moments of the supported confidence distributions.

pub fn gamma_mean(kappa: f64, theta: f64) -> f64 {
    kappa * theta
}

pub fn gamma_mgf_at_minus_half(kappa: f64, theta: f64) -> f64 {
    (1.0 + theta / 2.0).powf(-kappa)
}

pub fn two_param_exp_mean(shift: f64, rate: f64) -> f64 {
    shift + 1.0 / rate
}

pub fn two_param_exp_mgf_at_minus_half(shift: f64, rate: f64) -> f64 {
    rate / (rate + 0.5) * (-shift / 2.0).exp()
}

pub fn trunc_normal_mean(location: f64) -> f64 {
    location
}

/// MGF at -1/2 of a unit-scale normal centered at `location`, truncated to
/// `[location - 1, location + 1]`.
pub fn trunc_normal_mgf_at_minus_half(location: f64) -> f64 {
    (-location / 2.0 + 0.125).exp() * (normal_cdf(1.5) - normal_cdf(-0.5))
        / (normal_cdf(1.0) - normal_cdf(-1.0))
}

/// Confidence-schedule variants.
///
/// The heuristic variants carry the input dimension explicitly because they
/// are defined through it regardless of the domain kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScheduleVariant {
    /// GP-UCB theorem value for a finite domain.
    DeterministicFinite,
    /// GP-UCB theorem value for a continuous domain.
    DeterministicContinuous,
    /// Gamma confidence with the MGF-condition shape schedule.
    Gamma { theta: f64 },
    /// Two-parameter exponential with `s = 2 log(|X|/2)`.
    TwoParamExpFinite,
    /// Two-parameter exponential with the iteration-refined shift.
    TwoParamExpContinuous,
    /// Two-parameter exponential with the accuracy-driven constant shift.
    TwoParamExpAccuracy { eta: f64 },
    /// Truncated normal `N(m_t, 1)` on `[m_t - 1, m_t + 1]`
    /// with `m_t = 2 log(|X_t| t^2) + 1`.
    TruncNormal,
    /// Deterministic heuristic `beta_t = c d log(2t)`.
    FixedHeuristic { c: f64, dim: usize },
    /// Gamma confidence with heuristic shape `kappa_t = c d log(2t)`.
    HeuristicGamma { c: f64, theta: f64, dim: usize },
    /// Two-parameter exponential with heuristic shift `s = d/2`.
    HeuristicTwoParamExp { dim: usize },
}

/// A confidence-parameter generator: either a deterministic function of the
/// iteration or the law of a randomized confidence parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceSchedule {
    variant: ScheduleVariant,
    domain: DomainInfo,
}

impl ConfidenceSchedule {
    pub fn new(variant: ScheduleVariant, domain: DomainInfo) -> Result<Self> {
        use ScheduleVariant::*;
        let ok = match (&variant, &domain) {
            (DeterministicFinite | TwoParamExpFinite, DomainInfo::Finite { .. }) => true,
            (
                DeterministicContinuous | TwoParamExpContinuous | TwoParamExpAccuracy { .. },
                DomainInfo::Continuous { .. },
            ) => true,
            (Gamma { .. } | TruncNormal, _) => true,
            (
                FixedHeuristic { .. } | HeuristicGamma { .. } | HeuristicTwoParamExp { .. },
                _,
            ) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::input(format!(
                "schedule variant {variant:?} does not match domain {domain:?}"
            )));
        }
        match variant {
            Gamma { theta } | HeuristicGamma { theta, .. } if !(theta > 0.0) => {
                return Err(Error::input("gamma scale theta must be positive"));
            }
            TwoParamExpAccuracy { eta } if !(eta > 0.0) => {
                return Err(Error::input("accuracy eta must be positive"));
            }
            FixedHeuristic { dim, .. }
            | HeuristicGamma { dim, .. }
            | HeuristicTwoParamExp { dim }
                if dim < 1 =>
            {
                return Err(Error::input("heuristic schedules need dim >= 1"));
            }
            _ => {}
        }
        Ok(ConfidenceSchedule { variant, domain })
    }

    pub fn variant(&self) -> &ScheduleVariant {
        &self.variant
    }

    pub fn domain(&self) -> &DomainInfo {
        &self.domain
    }

    /// True when the schedule is a deterministic function of `t`.
    pub fn is_deterministic(&self) -> bool {
        matches!(
            self.variant,
            ScheduleVariant::DeterministicFinite
                | ScheduleVariant::DeterministicContinuous
                | ScheduleVariant::FixedHeuristic { .. }
        )
    }

    fn deterministic_value(&self, t: u64) -> Option<f64> {
        match self.variant {
            ScheduleVariant::DeterministicFinite | ScheduleVariant::DeterministicContinuous => {
                Some(beta_gpucb(&self.domain, t))
            }
            ScheduleVariant::FixedHeuristic { c, dim } => {
                Some(c * dim as f64 * (2.0 * t as f64).ln())
            }
            _ => None,
        }
    }

    fn gamma_params(&self, t: u64) -> Option<(f64, f64)> {
        match self.variant {
            ScheduleVariant::Gamma { theta } => Some((
                gamma_kappa_from_log(log_domain_size(&self.domain, t), t, theta),
                theta,
            )),
            ScheduleVariant::HeuristicGamma { c, theta, dim } => {
                Some((c * dim as f64 * (2.0 * t as f64).ln(), theta))
            }
            _ => None,
        }
    }

    fn two_param_params(&self, t: u64) -> Option<IrgpUcbParams> {
        match self.variant {
            ScheduleVariant::TwoParamExpFinite => {
                Some(irgpucb_params(&self.domain, IrgpUcbMode::Finite).expect("validated"))
            }
            ScheduleVariant::TwoParamExpContinuous => Some(
                irgpucb_params(&self.domain, IrgpUcbMode::ContinuousAtT(t)).expect("validated"),
            ),
            ScheduleVariant::TwoParamExpAccuracy { eta } => Some(
                irgpucb_params(&self.domain, IrgpUcbMode::Accuracy(eta)).expect("validated"),
            ),
            ScheduleVariant::HeuristicTwoParamExp { dim } => Some(IrgpUcbParams {
                shift: dim as f64 / 2.0,
                rate: IRGP_UCB_RATE,
                clamped: false,
            }),
            _ => None,
        }
    }

    fn trunc_normal_location(&self, t: u64) -> f64 {
        2.0 * (log_domain_size(&self.domain, t) + 2.0 * (t as f64).ln()) + 1.0
    }

    /// Draws the confidence parameter for iteration `t`. Deterministic
    /// variants return their schedule value exactly; every returned value is
    /// nonnegative.
    pub fn sample_zeta(&self, t: u64, rng: &mut Stream) -> f64 {
        assert!(t >= 1, "iterations are 1-based");
        if let Some(v) = self.deterministic_value(t) {
            return v;
        }
        if let Some((kappa, theta)) = self.gamma_params(t) {
            if kappa <= 0.0 {
                return 0.0;
            }
            return rand_distr::Gamma::new(kappa, theta)
                .expect("positive shape and scale")
                .sample(rng);
        }
        if let Some(p) = self.two_param_params(t) {
            let z = rand_distr::Exp::new(p.rate).expect("positive rate").sample(rng);
            return p.shift + z;
        }
        // Truncated normal by rejection; acceptance probability ~0.68.
        let m = self.trunc_normal_location(t);
        loop {
            let z: f64 = rand_distr::StandardNormal.sample(rng);
            if z.abs() <= 1.0 {
                return m + z;
            }
        }
    }

    /// Analytic mean of the confidence distribution at iteration `t`.
    /// Fails for deterministic variants, which have no distribution.
    pub fn expected_zeta(&self, t: u64) -> Result<f64> {
        assert!(t >= 1, "iterations are 1-based");
        if self.is_deterministic() {
            return Err(Error::input(
                "deterministic schedule has no confidence distribution",
            ));
        }
        if let Some((kappa, theta)) = self.gamma_params(t) {
            return Ok(gamma_mean(kappa, theta));
        }
        if let Some(p) = self.two_param_params(t) {
            return Ok(two_param_exp_mean(p.shift, p.rate));
        }
        Ok(trunc_normal_mean(self.trunc_normal_location(t)))
    }

    /// Analytic MGF at -1/2 of the confidence distribution at iteration `t`.
    /// Fails for deterministic variants.
    pub fn mgf_at_minus_half(&self, t: u64) -> Result<f64> {
        assert!(t >= 1, "iterations are 1-based");
        if self.is_deterministic() {
            return Err(Error::input(
                "deterministic schedule has no confidence distribution",
            ));
        }
        if let Some((kappa, theta)) = self.gamma_params(t) {
            return Ok(gamma_mgf_at_minus_half(kappa, theta));
        }
        if let Some(p) = self.two_param_params(t) {
            return Ok(two_param_exp_mgf_at_minus_half(p.shift, p.rate));
        }
        Ok(trunc_normal_mgf_at_minus_half(self.trunc_normal_location(t)))
    }

    /// Schedule value to plot against iterations: the deterministic value or
    /// the analytic mean.
    pub fn nominal_value(&self, t: u64) -> f64 {
        self.deterministic_value(t)
            .unwrap_or_else(|| self.expected_zeta(t).expect("randomized variant"))
    }
}
