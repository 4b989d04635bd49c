//! Synthetic verifiable-reward task bank.
//!
//! A task is a hidden target sequence over a small alphabet plus per-step
//! feature vectors that reveal the target through noise: each position shows
//! the true symbol as a one-hot, independently replaced by a uniformly random
//! one-hot with probability `difficulty`. Difficulty also stretches the
//! target length, so harder tasks need longer correct chains. The reward is
//! exact match, checked by [`verify`].
//!
//! Three trailing feature slots carry an optional difficulty hint
//! `(active, lower, upper)`; they are all zero until [`inject_hint`] fills
//! them, and they never affect the answer key.

use alloc::vec;
use alloc::vec::Vec;

use libm::floor;
use rand::Rng;

use crate::error::{CoreError, Result};
use crate::rng::{rng_from, BANK_STREAM};

/// Number of trailing hint slots in every feature row.
pub const HINT_SLOTS: usize = 3;

/// Accuracy band prepended to stage-2 prompts as a difficulty hint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HintBand {
    pub lower: f64,
    pub upper: f64,
    pub active: bool,
}

impl HintBand {
    /// The no-hint encoding: all-zero slots.
    pub const INACTIVE: HintBand = HintBand {
        lower: 0.0,
        upper: 0.0,
        active: false,
    };

    /// An active hint advertising the accuracy band `[lower, upper]`.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
            return Err(CoreError::config(alloc::format!(
                "hint band must satisfy 0 <= lower <= upper <= 1, got [{lower}, {upper}]"
            )));
        }
        Ok(HintBand {
            lower,
            upper,
            active: true,
        })
    }

    /// The three feature-slot values this band encodes to.
    pub fn slots(&self) -> [f64; HINT_SLOTS] {
        if self.active {
            [1.0, self.lower, self.upper]
        } else {
            [0.0; HINT_SLOTS]
        }
    }
}

/// Parameters for generating a bank.
#[derive(Debug, Clone, PartialEq)]
pub struct BankConfig {
    /// Number of tasks to generate.
    pub task_count: usize,
    /// `(difficulty, proportion)` pairs; proportions must sum to 1.
    pub difficulty_mix: Vec<(f64, f64)>,
    /// Alphabet size (number of answer symbols).
    pub alphabet: usize,
    /// Target length at difficulty 0.
    pub len_min: usize,
    /// Target length at difficulty 1.
    pub len_max: usize,
}

impl Default for BankConfig {
    fn default() -> Self {
        BankConfig {
            task_count: 200,
            difficulty_mix: vec![(0.05, 0.5), (0.95, 0.5)],
            alphabet: 8,
            len_min: 2,
            len_max: 8,
        }
    }
}

impl BankConfig {
    pub fn validate(&self) -> Result<()> {
        if self.task_count < 1 {
            return Err(CoreError::config("task count must be >= 1"));
        }
        if self.alphabet < 1 {
            return Err(CoreError::config("alphabet size must be >= 1"));
        }
        if !(1 <= self.len_min && self.len_min <= self.len_max) {
            return Err(CoreError::config(alloc::format!(
                "target lengths must satisfy 1 <= min <= max, got [{}, {}]",
                self.len_min,
                self.len_max
            )));
        }
        if self.difficulty_mix.is_empty() {
            return Err(CoreError::config("difficulty mix must not be empty"));
        }
        let mut total = 0.0;
        for &(d, p) in &self.difficulty_mix {
            if !(0.0..=1.0).contains(&d) {
                return Err(CoreError::config(alloc::format!(
                    "difficulty must lie in [0, 1], got {d}"
                )));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(CoreError::config(alloc::format!(
                    "mix proportion must be >= 0, got {p}"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(CoreError::config(alloc::format!(
                "mix proportions must sum to 1 (+- 1e-9), got {total}"
            )));
        }
        Ok(())
    }

    /// Feature width: one slot per alphabet symbol plus the hint slots.
    pub fn feature_width(&self) -> usize {
        self.alphabet + HINT_SLOTS
    }
}

/// Target length at a given difficulty: `len_min + floor(d * (len_max - len_min))`.
pub fn target_len(difficulty: f64, len_min: usize, len_max: usize) -> usize {
    len_min + floor(difficulty * (len_max - len_min) as f64) as usize
}

/// One synthetic prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub id: u64,
    /// Difficulty knob in [0, 1]: corruption probability and length driver.
    pub difficulty: f64,
    /// Hidden answer key; symbols in `[0, alphabet)`.
    pub target: Vec<usize>,
    /// `target.len()` rows of width `alphabet + HINT_SLOTS`.
    pub features: Vec<Vec<f64>>,
    pub hint: HintBand,
    /// Merged empirical accuracy from offline curation, when estimated.
    pub accuracy_estimate: Option<f64>,
    /// Total rollouts behind the accuracy estimate.
    pub rollout_count: u64,
}

impl TaskRecord {
    /// Episode horizon: the number of target symbols.
    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn feature_width(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn alphabet(&self) -> usize {
        self.feature_width().saturating_sub(HINT_SLOTS)
    }
}

/// Generates a deterministic bank of `cfg.task_count` tasks.
///
/// Mix proportions are converted to counts by cumulative rounding, so exact
/// proportions are honored whenever the count divides evenly. Each task's
/// noise stream is derived from `(seed, id)`, making generation
/// order-independent.
pub fn generate_bank(cfg: &BankConfig, seed: u64) -> Result<Vec<TaskRecord>> {
    cfg.validate()?;
    let counts = mix_counts(&cfg.difficulty_mix, cfg.task_count);
    let mut bank = Vec::with_capacity(cfg.task_count);
    let mut id: u64 = 0;
    for (bucket, &(difficulty, _)) in cfg.difficulty_mix.iter().enumerate() {
        for _ in 0..counts[bucket] {
            bank.push(generate_task(cfg, id, difficulty, seed));
            id += 1;
        }
    }
    Ok(bank)
}

fn mix_counts(mix: &[(f64, f64)], n: usize) -> Vec<usize> {
    let mut counts = Vec::with_capacity(mix.len());
    let mut cumulative = 0.0;
    let mut assigned = 0usize;
    for (i, &(_, proportion)) in mix.iter().enumerate() {
        cumulative += proportion;
        let upto = if i + 1 == mix.len() {
            n
        } else {
            floor(cumulative * n as f64 + 0.5) as usize
        };
        let upto = upto.min(n).max(assigned);
        counts.push(upto - assigned);
        assigned = upto;
    }
    counts
}

fn generate_task(cfg: &BankConfig, id: u64, difficulty: f64, seed: u64) -> TaskRecord {
    let mut rng = rng_from(&[BANK_STREAM, seed, id]);
    let len = target_len(difficulty, cfg.len_min, cfg.len_max);
    let target: Vec<usize> = (0..len).map(|_| rng.gen_range(0..cfg.alphabet)).collect();
    let width = cfg.feature_width();
    let features = target
        .iter()
        .map(|&symbol| {
            let corrupted = rng.gen::<f64>() < difficulty;
            let observed = if corrupted {
                rng.gen_range(0..cfg.alphabet)
            } else {
                symbol
            };
            let mut row = vec![0.0; width];
            row[observed] = 1.0;
            row
        })
        .collect();
    TaskRecord {
        id,
        difficulty,
        target,
        features,
        hint: HintBand::INACTIVE,
        accuracy_estimate: None,
        rollout_count: 0,
    }
}

/// Exact-match reward: 1 iff the submitted symbols equal the target.
///
/// Malformed responses (wrong length, foreign symbols) simply score 0; the
/// format check folds into the reward.
pub fn verify(response: &[usize], task: &TaskRecord) -> bool {
    response == task.target.as_slice()
}

/// Returns a copy of `task` carrying `band`, with the trailing hint slots of
/// every feature row rewritten accordingly. Target and difficulty are
/// untouched, so the reward function is unaffected.
pub fn inject_hint(task: &TaskRecord, band: HintBand) -> TaskRecord {
    let slots = band.slots();
    let mut out = task.clone();
    out.hint = band;
    for row in &mut out.features {
        let width = row.len();
        row[width - HINT_SLOTS..].copy_from_slice(&slots);
    }
    out
}
