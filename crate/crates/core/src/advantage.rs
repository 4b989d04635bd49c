//! Group-relative advantages over binary reward groups.
//!
//! A rollout group's rewards are centered on the group mean and then either
//! divided by the group standard deviation (the classic normalization),
//! rescaled by a difficulty weight, or both. Groups where every member agrees
//! carry no signal: their advantages are all zero and the surrogate gradient
//! vanishes end to end.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{CoreError, Result};
use crate::reweight::{self, ReweightConfig, WeightFamily};

/// Numerical-stability constant added to the standard deviation.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// The binary rewards of one prompt's rollout group.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardGroup {
    rewards: Vec<bool>,
    epsilon: f64,
}

impl RewardGroup {
    /// Builds a group from per-rollout correctness flags.
    pub fn new(rewards: Vec<bool>) -> Result<Self> {
        Self::with_epsilon(rewards, DEFAULT_EPSILON)
    }

    pub fn with_epsilon(rewards: Vec<bool>, epsilon: f64) -> Result<Self> {
        if rewards.is_empty() {
            return Err(CoreError::domain("reward group must not be empty"));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(CoreError::config(alloc::format!(
                "epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        Ok(RewardGroup { rewards, epsilon })
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty groups
    }

    pub fn rewards(&self) -> &[bool] {
        &self.rewards
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn successes(&self) -> usize {
        self.rewards.iter().filter(|&&r| r).count()
    }

    /// Empirical accuracy, identical to the reward mean for binary rewards.
    pub fn accuracy(&self) -> f64 {
        self.successes() as f64 / self.len() as f64
    }

    /// Reward mean.
    pub fn mean(&self) -> f64 {
        self.accuracy()
    }

    /// Population standard deviation; `sqrt(p(1-p))` for binary rewards.
    pub fn std_dev(&self) -> f64 {
        let p = self.accuracy();
        sqrt(p * (1.0 - p))
    }

    /// True when every member agrees (all correct or all wrong).
    pub fn is_degenerate(&self) -> bool {
        let first = self.rewards[0];
        self.rewards.iter().all(|&r| r == first)
    }
}

/// Group-wise empirical accuracy: the fraction of rewards equal to 1.
pub fn group_accuracy(group: &RewardGroup) -> f64 {
    group.accuracy()
}

/// Advantage computation scheme: an optional difficulty weight combined with
/// an optional standard-deviation normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvantageScheme {
    pub reweight: ReweightConfig,
    pub use_std_norm: bool,
}

impl AdvantageScheme {
    /// Unweighted, std-normalized: plain GRPO.
    pub fn vanilla() -> Self {
        AdvantageScheme {
            reweight: ReweightConfig::flat(),
            use_std_norm: true,
        }
    }

    /// Difficulty-weighted with the std normalization replaced by the weight.
    pub fn reweighted(reweight: ReweightConfig) -> Self {
        AdvantageScheme {
            reweight,
            use_std_norm: false,
        }
    }

    pub fn new(family: WeightFamily, use_std_norm: bool) -> Self {
        AdvantageScheme {
            reweight: ReweightConfig::preset(family),
            use_std_norm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.reweight.validate()
    }
}

/// Std-normalized advantages: `(r_i - mean) / (std + epsilon)`.
///
/// Degenerate groups return all zeros: the centered numerator is identically
/// zero, so no division is attempted even at `epsilon = 0`.
pub fn std_norm_advantages(group: &RewardGroup) -> Vec<f64> {
    if group.is_degenerate() {
        return vec![0.0; group.len()];
    }
    let mean = group.mean();
    let denom = group.std_dev() + group.epsilon();
    group
        .rewards()
        .iter()
        .map(|&r| (reward_value(r) - mean) / denom)
        .collect()
}

/// Advantages under `scheme`.
///
/// With `use_std_norm` off this is `w * (r_i - mean)`; with it on, the weight
/// multiplies the std-normalized advantage. The flat family with std
/// normalization reproduces [`std_norm_advantages`] exactly.
pub fn reweighted_advantages(group: &RewardGroup, scheme: &AdvantageScheme) -> Result<Vec<f64>> {
    scheme.validate()?;
    if group.is_degenerate() {
        return Ok(vec![0.0; group.len()]);
    }
    let w = reweight::weight(group.accuracy(), &scheme.reweight)?;
    let mean = group.mean();
    let denom = group.std_dev() + group.epsilon();
    Ok(group
        .rewards()
        .iter()
        .map(|&r| {
            let centered = reward_value(r) - mean;
            if scheme.use_std_norm {
                w * (centered / denom)
            } else {
                w * centered
            }
        })
        .collect())
}

fn reward_value(correct: bool) -> f64 {
    if correct {
        1.0
    } else {
        0.0
    }
}
