//! Linear-softmax sequence policy and the clipped surrogate objective.
//!
//! The policy maps each step's feature row through a weight matrix to logits
//! over `alphabet + 1` actions; the extra action is SUBMIT, which ends the
//! episode early. An episode runs for at most `task.len()` steps, so a
//! response is the emitted symbol prefix, terminated either by SUBMIT or by
//! reaching the horizon.
//!
//! Training maximizes the clipped importance-weighted surrogate
//! `mean_groups (1/G) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i)`
//! with a sequence-level ratio `rho_i` and an optional k3 KL penalty against
//! a reference policy. Gradients are exact up to the min/clip subgradient
//! choice: ties take the unclipped branch.

use alloc::vec::Vec;

use libm::exp;
use rand::Rng;

use crate::advantage::RewardGroup;
use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::rng::{rng_from, GROUP_STREAM};
use crate::taskbank::{verify, TaskRecord};

/// Linear softmax policy over per-step features.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxPolicy {
    weights: Matrix,
    temperature: f64,
}

impl SoftmaxPolicy {
    /// Zero-initialized policy: uniform over all actions at every step.
    pub fn new(feature_width: usize, alphabet: usize, temperature: f64) -> Result<Self> {
        Self::with_weights(Matrix::zeros(feature_width, alphabet + 1), temperature)
    }

    pub fn with_weights(weights: Matrix, temperature: f64) -> Result<Self> {
        if weights.cols() < 2 {
            return Err(CoreError::config(
                "policy needs at least one symbol action plus SUBMIT",
            ));
        }
        if !weights.is_finite() {
            return Err(CoreError::config("policy weights must be finite"));
        }
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(CoreError::config(alloc::format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        Ok(SoftmaxPolicy {
            weights,
            temperature,
        })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn feature_width(&self) -> usize {
        self.weights.rows()
    }

    /// Number of actions, including SUBMIT.
    pub fn action_count(&self) -> usize {
        self.weights.cols()
    }

    pub fn alphabet(&self) -> usize {
        self.action_count() - 1
    }

    /// Index of the SUBMIT action.
    pub fn submit_action(&self) -> usize {
        self.alphabet()
    }

    fn logits(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.feature_width() {
            return Err(CoreError::domain(alloc::format!(
                "feature width {} does not match policy width {}",
                features.len(),
                self.feature_width()
            )));
        }
        let mut logits = alloc::vec![0.0; self.action_count()];
        for (value, row) in features.iter().zip(0..self.feature_width()) {
            if *value == 0.0 {
                continue;
            }
            for (logit, weight) in logits.iter_mut().zip(self.weights.row(row)) {
                *logit += value * weight;
            }
        }
        for logit in &mut logits {
            *logit /= self.temperature;
        }
        Ok(logits)
    }

    /// Log-probabilities of every action at one step.
    pub fn log_probs(&self, features: &[f64]) -> Result<Vec<f64>> {
        let mut logits = self.logits(features)?;
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logits.iter().map(|&z| exp(z - max)).sum();
        let lse = max + libm::log(sum);
        for z in &mut logits {
            *z -= lse;
        }
        Ok(logits)
    }

    pub fn log_prob(&self, features: &[f64], action: usize) -> Result<f64> {
        if action >= self.action_count() {
            return Err(CoreError::domain(alloc::format!(
                "action {action} outside action space of size {}",
                self.action_count()
            )));
        }
        Ok(self.log_probs(features)?[action])
    }

    /// Normalized action distribution at one step.
    pub fn action_probabilities(&self, features: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .log_probs(features)?
            .iter()
            .map(|&lp| exp(lp))
            .collect())
    }

    /// Shannon entropy of the step distribution (nats).
    pub fn step_entropy(&self, features: &[f64]) -> Result<f64> {
        Ok(self
            .log_probs(features)?
            .iter()
            .map(|&lp| -exp(lp) * lp)
            .sum())
    }

    /// Greedy action; exact logit ties go to the lowest index.
    pub fn greedy_action(&self, features: &[f64]) -> Result<usize> {
        let logits = self.logits(features)?;
        let mut best = 0;
        for (action, &z) in logits.iter().enumerate() {
            if z > logits[best] {
                best = action;
            }
        }
        Ok(best)
    }

    /// Log-probability of an action sequence on `task`, summed over steps.
    ///
    /// SUBMIT may only appear as the final action; symbol steps consume one
    /// feature row each, so the sequence cannot exceed the task horizon.
    pub fn sequence_log_prob(&self, task: &TaskRecord, actions: &[usize]) -> Result<f64> {
        if actions.is_empty() {
            return Err(CoreError::domain("action sequence must not be empty"));
        }
        if actions.len() > task.len() {
            return Err(CoreError::domain(alloc::format!(
                "action sequence length {} exceeds task horizon {}",
                actions.len(),
                task.len()
            )));
        }
        let submit = self.submit_action();
        let mut total = 0.0;
        for (t, &action) in actions.iter().enumerate() {
            if action == submit && t + 1 != actions.len() {
                return Err(CoreError::domain("SUBMIT may only end a sequence"));
            }
            total += self.log_prob(&task.features[t], action)?;
        }
        Ok(total)
    }

    /// Exact probability that a sampled episode reproduces the target:
    /// the product over steps of the target symbol's probability.
    pub fn success_probability(&self, task: &TaskRecord) -> Result<f64> {
        let mut log_total = 0.0;
        for (row, &symbol) in task.features.iter().zip(&task.target) {
            log_total += self.log_prob(row, symbol)?;
        }
        Ok(exp(log_total))
    }

    /// Samples a rollout group of `group_size` episodes for `task`.
    ///
    /// Member `j` draws from the stream `(seed, task.id, j)`, so groups are
    /// reproducible and members are order-independent. Rewards come from the
    /// exact-match verifier and the recorded log-probabilities are this
    /// (sampling) policy's.
    pub fn sample_group(
        &self,
        task: &TaskRecord,
        group_size: usize,
        seed: u64,
    ) -> Result<RolloutGroupSample> {
        if group_size < 1 {
            return Err(CoreError::config("group size must be >= 1"));
        }
        let mut rollouts = Vec::with_capacity(group_size);
        let mut rewards = Vec::with_capacity(group_size);
        for member in 0..group_size {
            let rollout = self.sample_rollout(
                task,
                &mut rng_from(&[GROUP_STREAM, seed, task.id, member as u64]),
            )?;
            rewards.push(verify(rollout.symbols(), task));
            rollouts.push(rollout);
        }
        Ok(RolloutGroupSample {
            task: task.clone(),
            rollouts,
            rewards: RewardGroup::new(rewards)?,
        })
    }

    fn sample_rollout(&self, task: &TaskRecord, rng: &mut impl Rng) -> Result<Rollout> {
        let submit = self.submit_action();
        let mut actions = Vec::with_capacity(task.len());
        let mut step_log_probs = Vec::with_capacity(task.len());
        let mut submitted = false;
        for row in &task.features {
            let log_probs = self.log_probs(row)?;
            let action = sample_from_log_probs(rng, &log_probs);
            actions.push(action);
            step_log_probs.push(log_probs[action]);
            if action == submit {
                submitted = true;
                break;
            }
        }
        Ok(Rollout {
            actions,
            step_log_probs,
            submitted,
        })
    }

    /// Greedy (argmax) episode; returns the emitted symbols.
    pub fn greedy_symbols(&self, task: &TaskRecord) -> Result<Vec<usize>> {
        let submit = self.submit_action();
        let mut symbols = Vec::with_capacity(task.len());
        for row in &task.features {
            let action = self.greedy_action(row)?;
            if action == submit {
                break;
            }
            symbols.push(action);
        }
        Ok(symbols)
    }
}

fn sample_from_log_probs(rng: &mut impl Rng, log_probs: &[f64]) -> usize {
    let draw: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (action, &lp) in log_probs.iter().enumerate() {
        cumulative += exp(lp);
        if draw < cumulative {
            return action;
        }
    }
    log_probs.len() - 1
}

/// One sampled episode: the action sequence (including a trailing SUBMIT if
/// one was chosen) and the sampling policy's per-step log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub actions: Vec<usize>,
    pub step_log_probs: Vec<f64>,
    submitted: bool,
}

impl Rollout {
    pub fn new(actions: Vec<usize>, step_log_probs: Vec<f64>, submitted: bool) -> Self {
        Rollout {
            actions,
            step_log_probs,
            submitted,
        }
    }

    /// The emitted symbols, i.e. the actions minus any trailing SUBMIT.
    pub fn symbols(&self) -> &[usize] {
        if self.submitted {
            &self.actions[..self.actions.len() - 1]
        } else {
            &self.actions
        }
    }

    pub fn submitted(&self) -> bool {
        self.submitted
    }

    /// Sequence log-probability under the sampling policy.
    pub fn old_log_prob(&self) -> f64 {
        self.step_log_probs.iter().sum()
    }
}

/// A task's rollout group: episodes plus their binary rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutGroupSample {
    pub task: TaskRecord,
    pub rollouts: Vec<Rollout>,
    pub rewards: RewardGroup,
}

impl RolloutGroupSample {
    pub fn task_id(&self) -> u64 {
        self.task.id
    }

    pub fn group_size(&self) -> usize {
        self.rollouts.len()
    }
}

/// Evaluates the clipped surrogate objective and its exact gradient with
/// respect to `policy`'s weights.
///
/// `advantages` must be shaped like `batch` (one value per rollout). The KL
/// penalty uses the k3 estimator per response and requires `reference`
/// whenever `kl_beta > 0`.
pub fn surrogate_loss_and_grad(
    policy: &SoftmaxPolicy,
    old: &SoftmaxPolicy,
    reference: Option<&SoftmaxPolicy>,
    batch: &[RolloutGroupSample],
    advantages: &[Vec<f64>],
    clip_eps: f64,
    kl_beta: f64,
) -> Result<(f64, Matrix)> {
    if !(clip_eps.is_finite() && clip_eps > 0.0) {
        return Err(CoreError::config(alloc::format!(
            "clip epsilon must be positive, got {clip_eps}"
        )));
    }
    if !(kl_beta.is_finite() && kl_beta >= 0.0) {
        return Err(CoreError::config(alloc::format!(
            "kl beta must be >= 0, got {kl_beta}"
        )));
    }
    if kl_beta > 0.0 && reference.is_none() {
        return Err(CoreError::config(
            "a reference policy is required when kl_beta > 0",
        ));
    }
    if !policy.weights.same_shape(&old.weights) {
        return Err(CoreError::domain("policy and old policy shapes differ"));
    }
    if batch.is_empty() {
        return Err(CoreError::domain("batch must contain at least one group"));
    }
    if batch.len() != advantages.len() {
        return Err(CoreError::domain(alloc::format!(
            "batch has {} groups but advantages has {}",
            batch.len(),
            advantages.len()
        )));
    }

    let group_count = batch.len() as f64;
    let mut objective = 0.0;
    let mut gradient = Matrix::zeros(policy.feature_width(), policy.action_count());

    for (sample, group_advantages) in batch.iter().zip(advantages) {
        if group_advantages.len() != sample.rollouts.len() {
            return Err(CoreError::domain(alloc::format!(
                "group for task {} has {} rollouts but {} advantages",
                sample.task_id(),
                sample.rollouts.len(),
                group_advantages.len()
            )));
        }
        let scale = 1.0 / (sample.rollouts.len() as f64 * group_count);
        for (rollout, &advantage) in sample.rollouts.iter().zip(group_advantages) {
            let new_lp = policy.sequence_log_prob(&sample.task, &rollout.actions)?;
            let old_lp = rollout.old_log_prob();
            let ratio = exp(new_lp - old_lp);
            if !ratio.is_finite() || ratio <= 0.0 {
                return Err(CoreError::numerical(
                    alloc::format!("importance ratio is {ratio}"),
                    Some(sample.task_id()),
                ));
            }
            let clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps);
            let unclipped_value = ratio * advantage;
            let clipped_value = clipped * advantage;
            // Ties take the unclipped branch, whose gradient flows.
            let (value, mut coefficient) = if unclipped_value <= clipped_value {
                (unclipped_value, ratio * advantage)
            } else {
                (clipped_value, 0.0)
            };
            let mut contribution = value;
            if kl_beta > 0.0 {
                let ref_lp = reference
                    .expect("checked above")
                    .sequence_log_prob(&sample.task, &rollout.actions)?;
                let log_u = ref_lp - new_lp;
                let u = exp(log_u);
                if !u.is_finite() || u <= 0.0 {
                    return Err(CoreError::numerical(
                        alloc::format!("KL likelihood ratio is {u}"),
                        Some(sample.task_id()),
                    ));
                }
                contribution -= kl_beta * (u - log_u - 1.0);
                coefficient += kl_beta * (u - 1.0);
            }
            objective += scale * contribution;
            if coefficient != 0.0 {
                accumulate_log_prob_gradient(
                    policy,
                    &sample.task,
                    &rollout.actions,
                    scale * coefficient,
                    &mut gradient,
                )?;
            }
        }
    }
    Ok((objective, gradient))
}

/// Adds `scale * d(log pi(actions | task))/d(weights)` into `gradient`.
fn accumulate_log_prob_gradient(
    policy: &SoftmaxPolicy,
    task: &TaskRecord,
    actions: &[usize],
    scale: f64,
    gradient: &mut Matrix,
) -> Result<()> {
    let temperature = policy.temperature();
    for (t, &action) in actions.iter().enumerate() {
        let features = &task.features[t];
        let probs = policy.action_probabilities(features)?;
        for (row, &value) in features.iter().enumerate() {
            if value == 0.0 {
                continue;
            }
            let base = scale * value / temperature;
            let grad_row = gradient.row_mut(row);
            for (column, &prob) in probs.iter().enumerate() {
                let indicator = if column == action { 1.0 } else { 0.0 };
                grad_row[column] += base * (indicator - prob);
            }
        }
    }
    Ok(())
}

/// k3 KL estimate `u - log u - 1` with `u = pi_ref(o) / pi_theta(o)` at the
/// sequence level. Zero exactly when the sequence log-probs coincide.
pub fn kl_k3(
    policy: &SoftmaxPolicy,
    reference: &SoftmaxPolicy,
    actions: &[usize],
    task: &TaskRecord,
) -> Result<f64> {
    let lp = policy.sequence_log_prob(task, actions)?;
    let ref_lp = reference.sequence_log_prob(task, actions)?;
    let log_u = ref_lp - lp;
    let u = exp(log_u);
    if !u.is_finite() || u <= 0.0 {
        return Err(CoreError::numerical(
            alloc::format!("KL likelihood ratio is {u}"),
            Some(task.id),
        ));
    }
    // Mathematically >= 0; the floor absorbs last-ulp rounding.
    Ok((u - log_u - 1.0).max(0.0))
}

/// One gradient-ascent step: `weights + learning_rate * gradient`.
pub fn update(
    policy: &SoftmaxPolicy,
    gradient: &Matrix,
    learning_rate: f64,
) -> Result<SoftmaxPolicy> {
    if !learning_rate.is_finite() || learning_rate < 0.0 {
        return Err(CoreError::config(alloc::format!(
            "learning rate must be finite and >= 0, got {learning_rate}"
        )));
    }
    if !policy.weights.same_shape(gradient) {
        return Err(CoreError::domain(alloc::format!(
            "gradient shape {}x{} does not match weights {}x{}",
            gradient.rows(),
            gradient.cols(),
            policy.weights.rows(),
            policy.weights.cols()
        )));
    }
    let mut weights = policy.weights.clone();
    weights.add_scaled(gradient, learning_rate)?;
    SoftmaxPolicy::with_weights(weights, policy.temperature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskbank::{generate_bank, BankConfig};
    use alloc::vec;

    fn small_bank(difficulty: f64, count: usize, seed: u64) -> Vec<TaskRecord> {
        let cfg = BankConfig {
            task_count: count,
            difficulty_mix: vec![(difficulty, 1.0)],
            ..BankConfig::default()
        };
        generate_bank(&cfg, seed).unwrap()
    }

    /// Policy that all but deterministically emits each task's observed
    /// symbol (huge diagonal logits, suppressed SUBMIT).
    fn sharp_reader(alphabet: usize) -> SoftmaxPolicy {
        let width = alphabet + crate::taskbank::HINT_SLOTS;
        let mut weights = Matrix::zeros(width, alphabet + 1);
        for s in 0..alphabet {
            weights.set(s, s, 60.0);
        }
        SoftmaxPolicy::with_weights(weights, 1.0).unwrap()
    }

    #[test]
    fn zero_weights_are_uniform() {
        let task = &small_bank(0.0, 1, 1)[0];
        let policy = SoftmaxPolicy::new(task.feature_width(), task.alphabet(), 1.0).unwrap();
        let expected = -libm::log(9.0);
        for a in 0..policy.action_count() {
            let lp = policy.log_prob(&task.features[0], a).unwrap();
            assert!((lp - expected).abs() < 1e-12);
        }
        let total: f64 = policy
            .action_probabilities(&task.features[0])
            .unwrap()
            .iter()
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((policy.step_entropy(&task.features[0]).unwrap() - libm::log(9.0)).abs() < 1e-12);
    }

    #[test]
    fn temperature_preserves_greedy_action() {
        let task = &small_bank(0.3, 1, 5)[0];
        let mut rng = rng_from(&[77]);
        let mut weights = Matrix::zeros(task.feature_width(), task.alphabet() + 1);
        for value in weights.data_mut() {
            *value = rng.gen::<f64>() * 2.0 - 1.0;
        }
        let actions: Vec<usize> = [0.25, 1.0, 4.0]
            .iter()
            .map(|&t| {
                SoftmaxPolicy::with_weights(weights.clone(), t)
                    .unwrap()
                    .greedy_action(&task.features[0])
                    .unwrap()
            })
            .collect();
        assert_eq!(actions[0], actions[1]);
        assert_eq!(actions[1], actions[2]);
    }

    #[test]
    fn greedy_tie_break_is_lowest_index() {
        let policy = SoftmaxPolicy::new(11, 8, 1.0).unwrap();
        let features = vec![0.0; 11];
        assert_eq!(policy.greedy_action(&features).unwrap(), 0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let task = &small_bank(0.4, 1, 9)[0];
        let policy = SoftmaxPolicy::new(task.feature_width(), task.alphabet(), 1.0).unwrap();
        let a = policy.sample_group(task, 6, 42).unwrap();
        let b = policy.sample_group(task, 6, 42).unwrap();
        assert_eq!(a, b);
        let c = policy.sample_group(task, 6, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sharp_reader_solves_clean_tasks() {
        let bank = small_bank(0.0, 3, 2);
        let policy = sharp_reader(bank[0].alphabet());
        for task in &bank {
            let sample = policy.sample_group(task, 8, 7).unwrap();
            assert_eq!(sample.rewards.accuracy(), 1.0);
        }
    }

    #[test]
    fn uniform_policy_single_symbol_accuracy() {
        // Horizon-1 tasks: success iff the single sampled action is the
        // target symbol, probability 1/9 under the uniform policy.
        let cfg = BankConfig {
            task_count: 60,
            difficulty_mix: vec![(0.0, 1.0)],
            len_min: 1,
            len_max: 1,
            ..BankConfig::default()
        };
        let bank = generate_bank(&cfg, 4).unwrap();
        let policy = SoftmaxPolicy::new(cfg.feature_width(), cfg.alphabet, 1.0).unwrap();
        let mut total = 0.0;
        let mut groups = 0.0;
        for task in &bank {
            let sample = policy.sample_group(task, 24, 100 + task.id).unwrap();
            total += sample.rewards.accuracy();
            groups += 1.0;
        }
        let mean = total / groups;
        assert!((mean - 1.0 / 9.0).abs() < 0.03, "mean accuracy {mean}");
    }

    #[test]
    fn sequence_log_prob_rejects_bad_sequences() {
        let task = &small_bank(0.0, 1, 3)[0];
        let policy = SoftmaxPolicy::new(task.feature_width(), task.alphabet(), 1.0).unwrap();
        let submit = policy.submit_action();
        assert!(policy.sequence_log_prob(task, &[]).is_err());
        assert!(policy
            .sequence_log_prob(task, &vec![0; task.len() + 1])
            .is_err());
        assert!(policy.sequence_log_prob(task, &[submit, 0]).is_err());
        assert!(policy.sequence_log_prob(task, &[0, submit]).is_ok());
    }

    #[test]
    fn ratio_one_objective_is_mean_advantage() {
        let task = &small_bank(0.2, 1, 6)[0];
        let policy = SoftmaxPolicy::new(task.feature_width(), task.alphabet(), 1.0).unwrap();
        let sample = policy.sample_group(task, 4, 11).unwrap();
        let advantages = vec![vec![0.5, -0.25, 1.0, -1.25]];
        let (objective, _) =
            surrogate_loss_and_grad(&policy, &policy, None, &[sample], &advantages, 0.2, 0.0)
                .unwrap();
        assert!((objective - 0.0).abs() < 1e-12);
    }

    #[test]
    fn clip_bounds_the_contribution() {
        // A single response with advantage 1 and ratio 2 contributes
        // min(2, 1 + eps) = 1.2 at eps = 0.2.
        let task = &small_bank(0.0, 1, 8)[0];
        let policy = SoftmaxPolicy::new(task.feature_width(), task.alphabet(), 1.0).unwrap();
        let actions = task.target.clone();
        let new_lp = policy.sequence_log_prob(task, &actions).unwrap();
        let fake_old = new_lp - libm::log(2.0);
        let mut step_log_probs = vec![0.0; actions.len()];
        step_log_probs[0] = fake_old;
        let rollout = Rollout::new(actions, step_log_probs, false);
        let sample = RolloutGroupSample {
            task: task.clone(),
            rollouts: vec![rollout],
            rewards: RewardGroup::new(vec![true]).unwrap(),
        };
        let (objective, _) =
            surrogate_loss_and_grad(&policy, &policy, None, &[sample], &[vec![1.0]], 0.2, 0.0)
                .unwrap();
        assert!((objective - 1.2).abs() < 1e-12, "objective {objective}");
    }

    #[test]
    fn kl_matches_direct_evaluation() {
        // One-symbol alphabet gives two actions; tune weights so the
        // likelihood ratio of the SUBMIT action is exactly 2.
        let cfg = BankConfig {
            task_count: 1,
            difficulty_mix: vec![(0.0, 1.0)],
            alphabet: 1,
            len_min: 1,
            len_max: 1,
        };
        let task = generate_bank(&cfg, 1).unwrap().remove(0);
        let mut weights = Matrix::zeros(task.feature_width(), 2);
        weights.set(0, 0, libm::log(3.0));
        let policy = SoftmaxPolicy::with_weights(weights, 1.0).unwrap(); // pi(submit) = 1/4
        let reference = SoftmaxPolicy::new(task.feature_width(), 1, 1.0).unwrap(); // 1/2
        let submit = policy.submit_action();
        let kl = kl_k3(&policy, &reference, &[submit], &task).unwrap();
        assert!((kl - 0.3068528194400546).abs() < 1e-12, "kl {kl}");
        assert_eq!(kl_k3(&policy, &policy, &[submit], &task).unwrap(), 0.0);
        assert!(kl_k3(&reference, &policy, &[submit], &task).unwrap() >= 0.0);
    }

    #[test]
    fn update_applies_scaled_gradient() {
        let policy = SoftmaxPolicy::new(4, 2, 1.0).unwrap();
        let mut gradient = Matrix::zeros(4, 3);
        gradient.set(1, 2, 2.0);
        let stepped = update(&policy, &gradient, 0.5).unwrap();
        assert_eq!(stepped.weights().get(1, 2), 1.0);
        assert_eq!(update(&policy, &gradient, 0.0).unwrap(), policy);
        assert_eq!(update(&policy, &Matrix::zeros(4, 3), 1.0).unwrap(), policy);
        assert!(update(&policy, &Matrix::zeros(2, 3), 1.0).is_err());
    }

    #[test]
    fn ascent_step_does_not_decrease_linearized_surrogate() {
        // Re-evaluate with the min branch frozen at the linearization point;
        // at ratio 1 everything is unclipped, so the frozen surrogate is
        // mean(rho * A) and a small ascent step must not decrease it.
        for seed in [1u64, 2, 3] {
            let task = &small_bank(0.3, 1, 30 + seed)[0];
            let policy = SoftmaxPolicy::new(task.feature_width(), task.alphabet(), 1.0).unwrap();
            let sample = policy.sample_group(task, 6, seed).unwrap();
            let advantages: Vec<f64> = (0..6).map(|i| (i as f64) - 2.5).collect();
            let frozen = |p: &SoftmaxPolicy| -> f64 {
                sample
                    .rollouts
                    .iter()
                    .zip(&advantages)
                    .map(|(r, &a)| {
                        exp(p.sequence_log_prob(task, &r.actions).unwrap() - r.old_log_prob()) * a
                    })
                    .sum::<f64>()
                    / 6.0
            };
            let before = frozen(&policy);
            let (_, grad) = surrogate_loss_and_grad(
                &policy,
                &policy,
                None,
                core::slice::from_ref(&sample),
                core::slice::from_ref(&advantages),
                0.2,
                0.0,
            )
            .unwrap();
            let stepped = update(&policy, &grad, 1e-3).unwrap();
            let after = frozen(&stepped);
            assert!(after + 1e-12 >= before, "{after} < {before}");
        }
    }
}
