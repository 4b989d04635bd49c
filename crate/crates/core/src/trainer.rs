//! Two-stage curriculum training loop.
//!
//! Stage 1 trains on the moderate dataset without hints; stage 2 continues
//! on the moderate-hard dataset, optionally with the difficulty hint band
//! injected into every prompt. Each optimization step samples fresh rollout
//! groups under the current policy (which therefore doubles as the old
//! policy of the surrogate), computes advantages under the configured
//! scheme, takes one ascent step, and appends one metrics row.

use alloc::format;
use alloc::vec::Vec;

use libm::{exp, fabs};
use rand::seq::SliceRandom;

use crate::advantage::{reweighted_advantages, AdvantageScheme};
use crate::curation::CuratedDatasets;
use crate::error::{CoreError, Result};
use crate::policy::{self, RolloutGroupSample, SoftmaxPolicy};
use crate::rng::{rng_from, stream_seed, SHUFFLE_STREAM, STEP_STREAM};
use crate::taskbank::{inject_hint, verify, HintBand, TaskRecord};

/// Curriculum stage label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    One,
    Two,
}

impl Stage {
    pub fn index(&self) -> u8 {
        match self {
            Stage::One => 1,
            Stage::Two => 2,
        }
    }

    pub fn steps(&self, cfg: &TrainerConfig) -> usize {
        match self {
            Stage::One => cfg.stage1_steps,
            Stage::Two => cfg.stage2_steps,
        }
    }
}

/// Default ascent step size.
///
/// The objective averages over groups and group members, so per-response
/// gradients are tiny; a linear softmax over one-hot features needs steps of
/// this magnitude to reach useful logit gaps within a 60+30-step schedule.
pub const DEFAULT_LEARNING_RATE: f64 = 25.0;

/// Trainer parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    /// Rollouts per prompt (G).
    pub group_size: usize,
    /// Upper bound on tasks sampled per rollout phase.
    pub rollout_batch: usize,
    /// Responses consumed per optimization step.
    pub global_batch: usize,
    pub learning_rate: f64,
    pub clip_eps: f64,
    pub kl_beta: f64,
    pub scheme: AdvantageScheme,
    pub stage1_steps: usize,
    pub stage2_steps: usize,
    /// Inject the stage-2 accuracy band as a hint during stage 2.
    pub hint_stage2: bool,
    /// Rollout sampling temperature.
    pub temperature: f64,
    pub seed: u64,
}

impl TrainerConfig {
    pub fn new(scheme: AdvantageScheme, seed: u64) -> Self {
        TrainerConfig {
            group_size: 12,
            rollout_batch: 64,
            global_batch: 128,
            learning_rate: DEFAULT_LEARNING_RATE,
            clip_eps: 0.2,
            kl_beta: 0.0,
            scheme,
            stage1_steps: 60,
            stage2_steps: 30,
            hint_stage2: false,
            temperature: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.group_size < 1 || self.rollout_batch < 1 || self.global_batch < 1 {
            return Err(CoreError::config(
                "group size, rollout batch and global batch must all be >= 1",
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(CoreError::config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !self.clip_eps.is_finite() || self.clip_eps <= 0.0 {
            return Err(CoreError::config(format!(
                "clip epsilon must be positive, got {}",
                self.clip_eps
            )));
        }
        if !self.kl_beta.is_finite() || self.kl_beta < 0.0 {
            return Err(CoreError::config(format!(
                "kl beta must be >= 0, got {}",
                self.kl_beta
            )));
        }
        if !self.temperature.is_finite() || self.temperature <= 0.0 {
            return Err(CoreError::config(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        self.scheme.validate()
    }

    /// Tasks sampled per optimization step: enough groups of `group_size` to
    /// cover `global_batch` responses, capped by `rollout_batch`.
    pub fn tasks_per_step(&self) -> usize {
        let needed = self.global_batch.div_ceil(self.group_size).max(1);
        needed.min(self.rollout_batch)
    }
}

/// One row of training dynamics; tier accuracies are NaN when the step's
/// batch contains no task of that tier.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub stage: u8,
    pub step: usize,
    pub mean_reward: f64,
    pub acc_simple: f64,
    pub acc_moderate: f64,
    pub acc_hard: f64,
    /// Mean symbols emitted before SUBMIT (or the horizon).
    pub resp_len: f64,
    /// Mean per-step policy entropy over the visited steps (nats).
    pub entropy: f64,
    /// Mean k3 KL of the sampling policy against the stage-start snapshot.
    pub kl: f64,
    /// Mean |rho - 1| of the post-update policy against the sampling policy.
    pub ratio_dev: f64,
}

/// Difficulty tier used for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Simple,
    Moderate,
    Hard,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Simple, Tier::Moderate, Tier::Hard];

    pub fn name(&self) -> &'static str {
        match self {
            Tier::Simple => "simple",
            Tier::Moderate => "moderate",
            Tier::Hard => "hard",
        }
    }
}

/// Estimated accuracy above which a task counts as simple.
pub const SIMPLE_ACCURACY_FLOOR: f64 = 0.87;
/// Estimated accuracy at or below which a task counts as hard.
pub const HARD_ACCURACY_CEIL: f64 = 0.25;

/// Tier of a task: by curated accuracy estimate when present, otherwise by
/// the difficulty knob split in thirds.
pub fn tier_of(task: &TaskRecord) -> Tier {
    match task.accuracy_estimate {
        Some(estimate) => {
            if estimate > SIMPLE_ACCURACY_FLOOR {
                Tier::Simple
            } else if estimate <= HARD_ACCURACY_CEIL {
                Tier::Hard
            } else {
                Tier::Moderate
            }
        }
        None => {
            if task.difficulty <= 1.0 / 3.0 {
                Tier::Simple
            } else if task.difficulty >= 2.0 / 3.0 {
                Tier::Hard
            } else {
                Tier::Moderate
            }
        }
    }
}

/// Runs one curriculum stage, returning the updated policy and one metrics
/// row per optimization step.
pub fn run_stage(
    policy: &SoftmaxPolicy,
    dataset: &[TaskRecord],
    cfg: &TrainerConfig,
    stage: Stage,
) -> Result<(SoftmaxPolicy, Vec<MetricsRow>)> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(CoreError::config(format!(
            "stage {} dataset is empty",
            stage.index()
        )));
    }
    let steps = stage.steps(cfg);
    if steps == 0 {
        return Ok((policy.clone(), Vec::new()));
    }

    let mut current = SoftmaxPolicy::with_weights(policy.weights().clone(), cfg.temperature)?;
    let reference = current.clone();

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng_from(&[
        SHUFFLE_STREAM,
        cfg.seed,
        stage.index() as u64,
    ]));

    let tasks_per_step = cfg.tasks_per_step();
    let mut cursor = 0usize;
    let mut rows = Vec::with_capacity(steps);

    for step in 1..=steps {
        let mut batch: Vec<RolloutGroupSample> = Vec::with_capacity(tasks_per_step);
        let mut advantages: Vec<Vec<f64>> = Vec::with_capacity(tasks_per_step);
        for _ in 0..tasks_per_step {
            let task = &dataset[order[cursor]];
            cursor = (cursor + 1) % order.len();
            let group_seed = stream_seed(&[
                STEP_STREAM,
                cfg.seed,
                stage.index() as u64,
                step as u64,
                task.id,
            ]);
            let sample = current
                .sample_group(task, cfg.group_size, group_seed)
                .map_err(|e| at_step(e, stage, step))?;
            advantages.push(
                reweighted_advantages(&sample.rewards, &cfg.scheme)
                    .map_err(|e| at_step(e, stage, step))?,
            );
            batch.push(sample);
        }

        // The rollouts above were sampled by `current`, so it is the frozen
        // old policy of this step's surrogate.
        let reference_for_kl = (cfg.kl_beta > 0.0).then_some(&reference);
        let (_, gradient) = policy::surrogate_loss_and_grad(
            &current,
            &current,
            reference_for_kl,
            &batch,
            &advantages,
            cfg.clip_eps,
            cfg.kl_beta,
        )
        .map_err(|e| at_step(e, stage, step))?;
        let next = policy::update(&current, &gradient, cfg.learning_rate)
            .map_err(|e| at_step(e, stage, step))?;

        rows.push(
            metrics_row(stage, step, &batch, &current, &next, &reference)
                .map_err(|e| at_step(e, stage, step))?,
        );
        current = next;
    }
    Ok((current, rows))
}

fn at_step(error: CoreError, stage: Stage, step: usize) -> CoreError {
    match error {
        CoreError::Numerical { message, task } => CoreError::Numerical {
            message: format!("stage {} step {step}: {message}", stage.index()),
            task,
        },
        other => other,
    }
}

fn metrics_row(
    stage: Stage,
    step: usize,
    batch: &[RolloutGroupSample],
    sampling_policy: &SoftmaxPolicy,
    updated_policy: &SoftmaxPolicy,
    reference: &SoftmaxPolicy,
) -> Result<MetricsRow> {
    let mut responses = 0usize;
    let mut hits = 0usize;
    let mut tier_hits = [0usize; 3];
    let mut tier_counts = [0usize; 3];
    let mut symbol_steps = 0usize;
    let mut entropy_sum = 0.0;
    let mut entropy_steps = 0usize;
    let mut kl_sum = 0.0;
    let mut ratio_dev_sum = 0.0;

    for sample in batch {
        let tier = tier_of(&sample.task) as usize;
        for (rollout, &reward) in sample.rollouts.iter().zip(sample.rewards.rewards()) {
            responses += 1;
            hits += reward as usize;
            tier_counts[tier] += 1;
            tier_hits[tier] += reward as usize;
            symbol_steps += rollout.symbols().len();
            for t in 0..rollout.actions.len() {
                entropy_sum += sampling_policy.step_entropy(&sample.task.features[t])?;
                entropy_steps += 1;
            }
            kl_sum += policy::kl_k3(sampling_policy, reference, &rollout.actions, &sample.task)?;
            let new_lp = updated_policy.sequence_log_prob(&sample.task, &rollout.actions)?;
            ratio_dev_sum += fabs(exp(new_lp - rollout.old_log_prob()) - 1.0);
        }
    }

    let n = responses as f64;
    let tier_accuracy = |tier: Tier| {
        let i = tier as usize;
        if tier_counts[i] == 0 {
            f64::NAN
        } else {
            tier_hits[i] as f64 / tier_counts[i] as f64
        }
    };
    Ok(MetricsRow {
        stage: stage.index(),
        step,
        mean_reward: hits as f64 / n,
        acc_simple: tier_accuracy(Tier::Simple),
        acc_moderate: tier_accuracy(Tier::Moderate),
        acc_hard: tier_accuracy(Tier::Hard),
        resp_len: symbol_steps as f64 / n,
        entropy: entropy_sum / entropy_steps.max(1) as f64,
        kl: kl_sum / n,
        ratio_dev: ratio_dev_sum / n,
    })
}

/// Outcome of a full curriculum run.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageResult {
    /// Policy at the stage boundary (after stage 1).
    pub stage1_policy: SoftmaxPolicy,
    /// Final policy after stage 2.
    pub policy: SoftmaxPolicy,
    /// Per-step metrics, stage 1 rows first.
    pub metrics: Vec<MetricsRow>,
}

/// Runs the full curriculum: stage 1 on `d1` without hints, then stage 2 on
/// `d2`, injecting the stage-2 band as an active hint iff `cfg.hint_stage2`.
pub fn run_two_stage(
    base_policy: &SoftmaxPolicy,
    curated: &CuratedDatasets,
    cfg: &TrainerConfig,
) -> Result<TwoStageResult> {
    cfg.validate()?;
    if curated.d1.is_empty() {
        return Err(CoreError::config("stage 1 dataset is empty"));
    }
    if curated.d2.is_empty() {
        return Err(CoreError::config("stage 2 dataset is empty"));
    }
    let stage1_data: Vec<TaskRecord> = curated
        .d1
        .iter()
        .map(|task| inject_hint(task, HintBand::INACTIVE))
        .collect();
    let (stage1_policy, mut rows) = run_stage(base_policy, &stage1_data, cfg, Stage::One)?;

    let band = if cfg.hint_stage2 {
        HintBand::new(curated.d2_band.lower, curated.d2_band.upper)?
    } else {
        HintBand::INACTIVE
    };
    let stage2_data: Vec<TaskRecord> = curated
        .d2
        .iter()
        .map(|task| inject_hint(task, band))
        .collect();
    let (final_policy, stage2_rows) = run_stage(&stage1_policy, &stage2_data, cfg, Stage::Two)?;
    rows.extend(stage2_rows);
    Ok(TwoStageResult {
        stage1_policy,
        policy: final_policy,
        metrics: rows,
    })
}

/// Greedy evaluation tallies per tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalReport {
    hits: [usize; 3],
    counts: [usize; 3],
}

impl EvalReport {
    pub fn accuracy(&self, tier: Tier) -> Option<f64> {
        let i = tier as usize;
        (self.counts[i] > 0).then(|| self.hits[i] as f64 / self.counts[i] as f64)
    }

    pub fn accuracy_or_nan(&self, tier: Tier) -> f64 {
        self.accuracy(tier).unwrap_or(f64::NAN)
    }

    pub fn count(&self, tier: Tier) -> usize {
        self.counts[tier as usize]
    }

    pub fn overall(&self) -> f64 {
        let hits: usize = self.hits.iter().sum();
        let counts: usize = self.counts.iter().sum();
        if counts == 0 {
            f64::NAN
        } else {
            hits as f64 / counts as f64
        }
    }
}

/// Greedy (argmax) accuracy per difficulty tier and overall.
///
/// Greedy decoding is deterministic, so `per_task_samples` and `seed` do not
/// influence the result; they are part of the interface for samplers that
/// are not.
pub fn evaluate(
    policy: &SoftmaxPolicy,
    bank: &[TaskRecord],
    per_task_samples: usize,
    seed: u64,
) -> Result<EvalReport> {
    if per_task_samples < 1 {
        return Err(CoreError::config("per-task sample count must be >= 1"));
    }
    let _ = seed;
    let mut report = EvalReport {
        hits: [0; 3],
        counts: [0; 3],
    };
    for task in bank {
        let tier = tier_of(task) as usize;
        let symbols = policy.greedy_symbols(task)?;
        report.counts[tier] += 1;
        report.hits[tier] += verify(&symbols, task) as usize;
    }
    Ok(report)
}

/// Mean exact success probability of sampled episodes over `tasks`.
///
/// A smooth, sampling-free accuracy measure used to compare schemes.
pub fn mean_success_probability(policy: &SoftmaxPolicy, tasks: &[TaskRecord]) -> Result<f64> {
    if tasks.is_empty() {
        return Err(CoreError::domain("task list must not be empty"));
    }
    let mut total = 0.0;
    for task in tasks {
        total += policy.success_probability(task)?;
    }
    Ok(total / tasks.len() as f64)
}
