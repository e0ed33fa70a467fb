//! Monte-Carlo estimate of how many seed clusters it takes to grow a linear
//! cluster of a target length when every fusion attempt can fail or lose
//! photons in lossy active components.
//!
//! Growth rules per attempt (one fresh seed each):
//! - `Type1Greedy`: type-I fusion of the chain end with a seed. Success adds
//!   one vertex; failure removes the chain end (Z measurement). A chain that
//!   drops to zero vertices restarts from the next seed.
//! - `Type2Redundant`: type-II fusion on a redundantly encoded chain end.
//!   Success adds one vertex; failure leaves the chain length unchanged (X
//!   measurement of the redundant photons keeps the cluster intact).
//!
//! With certain success both rules need `n - 1` seeds for length `n`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::circuits::{build_named, CircuitParams};
use crate::elements::ElementKind;

/// Attempts after which a trial is abandoned and counted as censored.
pub const MAX_ATTEMPTS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResourceError {
    #[error("target length must be at least 2, got {0}")]
    InvalidTarget(usize),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("loss probability for {0} must lie in [0, 1), got {1}")]
    InvalidLoss(&'static str, f64),
    #[error("success probability must lie in (0, 1], got {0}")]
    InvalidSuccess(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    Type1Greedy,
    Type2Redundant,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Type1Greedy => "TYPE1_GREEDY",
            Strategy::Type2Redundant => "TYPE2_REDUNDANT",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "TYPE1_GREEDY" => Some(Strategy::Type1Greedy),
            "TYPE2_REDUNDANT" => Some(Strategy::Type2Redundant),
            _ => None,
        }
    }

    /// Catalog circuit whose components each attempt passes through.
    pub fn circuit(self) -> &'static str {
        match self {
            Strategy::Type1Greedy => "fusion1_tb",
            Strategy::Type2Redundant => "fusion2_tb",
        }
    }
}

/// Per-kind loss probability of one pass through a component.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LossModel {
    pub per_kind: BTreeMap<String, f64>,
}

impl LossModel {
    pub fn lossless() -> Self {
        Self::default()
    }

    /// The same loss on every active component (switches and phase modulators).
    pub fn active(p: f64) -> Self {
        let per_kind = ElementKind::ALL
            .iter()
            .filter(|k| k.is_active())
            .map(|k| (k.name().to_string(), p))
            .collect();
        LossModel { per_kind }
    }

    pub fn get(&self, kind: ElementKind) -> f64 {
        self.per_kind.get(kind.name()).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), ResourceError> {
        for k in ElementKind::ALL {
            let p = self.get(k);
            if !(0.0..1.0).contains(&p) {
                return Err(ResourceError::InvalidLoss(k.name(), p));
            }
        }
        Ok(())
    }

    pub fn by_kind(&self) -> BTreeMap<ElementKind, f64> {
        ElementKind::ALL
            .iter()
            .map(|&k| (k, self.get(k)))
            .filter(|(_, p)| *p > 0.0)
            .collect()
    }
}

/// Probability that one fusion attempt heralds success: one half times the
/// transmission of every component the attempt passes through.
pub fn heralding_probability(strategy: Strategy, loss: &LossModel) -> f64 {
    let c = build_named(strategy.circuit(), &CircuitParams::default()).expect("catalog circuit");
    c.component_counts()
        .iter()
        .fold(0.5, |acc, (&k, &n)| acc * (1.0 - loss.get(k)).powi(n as i32))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateConfig {
    pub target: usize,
    pub strategy: Strategy,
    pub loss: LossModel,
    pub trials: u64,
    pub seed: u64,
    /// Replaces the computed heralding probability.
    pub success_override: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceReport {
    pub target: usize,
    pub strategy: Strategy,
    pub trials: u64,
    pub seed: u64,
    pub heralding_probability: f64,
    pub expected_seeds: f64,
    pub std_error: f64,
    pub p50: u64,
    pub p90: u64,
    pub p99: u64,
    pub max: u64,
    pub censored: u64,
}

/// Seeds used by one growth run, or `None` if it hit [`MAX_ATTEMPTS`].
pub fn simulate_trial<R: Rng>(target: usize, strategy: Strategy, p: f64, rng: &mut R) -> Option<u64> {
    let mut len = 2usize;
    let mut seeds = 1u64;
    let mut attempts = 0u64;
    while len < target {
        if attempts == MAX_ATTEMPTS {
            return None;
        }
        seeds += 1;
        if len == 0 {
            len = 2;
            continue;
        }
        attempts += 1;
        if rng.gen::<f64>() < p {
            len += 1;
        } else if strategy == Strategy::Type1Greedy {
            len -= 1;
        }
    }
    Some(seeds)
}

fn percentile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Runs the Monte-Carlo estimate. Trial `i` draws from stream `i` of a
/// generator seeded with `seed`, so results do not depend on thread count.
pub fn estimate_resources(cfg: &EstimateConfig) -> Result<ResourceReport, ResourceError> {
    if cfg.target < 2 {
        return Err(ResourceError::InvalidTarget(cfg.target));
    }
    if cfg.trials == 0 {
        return Err(ResourceError::NoTrials);
    }
    cfg.loss.validate()?;
    let p = match cfg.success_override {
        Some(p) if p > 0.0 && p <= 1.0 => p,
        Some(p) => return Err(ResourceError::InvalidSuccess(p)),
        None => heralding_probability(cfg.strategy, &cfg.loss),
    };
    let results: Vec<Option<u64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i);
            simulate_trial(cfg.target, cfg.strategy, p, &mut rng)
        })
        .collect();
    let mut done: Vec<u64> = results.iter().flatten().copied().collect();
    let censored = cfg.trials - done.len() as u64;
    done.sort_unstable();
    let n = done.len() as f64;
    let mean = if done.is_empty() {
        f64::NAN
    } else {
        done.iter().map(|&s| s as f64).sum::<f64>() / n
    };
    let var = if done.len() > 1 {
        done.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(ResourceReport {
        target: cfg.target,
        strategy: cfg.strategy,
        trials: cfg.trials,
        seed: cfg.seed,
        heralding_probability: p,
        expected_seeds: mean,
        std_error: (var / n).sqrt(),
        p50: percentile(&done, 0.5),
        p90: percentile(&done, 0.9),
        p99: percentile(&done, 0.99),
        max: done.last().copied().unwrap_or(0),
        censored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(target: usize, strategy: Strategy) -> EstimateConfig {
        EstimateConfig {
            target,
            strategy,
            loss: LossModel::lossless(),
            trials: 500,
            seed: 3,
            success_override: None,
        }
    }

    #[test]
    fn target_two_needs_one_seed() {
        let r = estimate_resources(&cfg(2, Strategy::Type1Greedy)).unwrap();
        assert_eq!(r.expected_seeds, 1.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn certain_success_follows_recurrence() {
        for strategy in [Strategy::Type1Greedy, Strategy::Type2Redundant] {
            for n in 2..10 {
                let mut c = cfg(n, strategy);
                c.success_override = Some(1.0);
                let r = estimate_resources(&c).unwrap();
                assert_eq!(r.expected_seeds, (n - 1) as f64);
                assert_eq!(r.max, (n - 1) as u64);
            }
        }
    }

    #[test]
    fn lossless_heralding_is_half() {
        assert_eq!(heralding_probability(Strategy::Type1Greedy, &LossModel::lossless()), 0.5);
        assert!(heralding_probability(Strategy::Type2Redundant, &LossModel::active(0.3)) < 0.5);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(
            estimate_resources(&cfg(1, Strategy::Type1Greedy)),
            Err(ResourceError::InvalidTarget(1))
        );
        let mut c = cfg(3, Strategy::Type1Greedy);
        c.loss = LossModel::active(1.0);
        assert!(matches!(estimate_resources(&c), Err(ResourceError::InvalidLoss(..))));
        c.loss = LossModel::lossless();
        c.trials = 0;
        assert_eq!(estimate_resources(&c), Err(ResourceError::NoTrials));
    }

    #[test]
    fn repeatable() {
        let c = cfg(4, Strategy::Type1Greedy);
        assert_eq!(estimate_resources(&c).unwrap(), estimate_resources(&c).unwrap());
    }
}
