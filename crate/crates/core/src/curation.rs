//! Offline difficulty curation.
//!
//! Each task is probed with several independent rollout batches of different
//! sizes under a frozen base policy; pooling every prediction gives a merged
//! empirical accuracy that proxies static difficulty. Accuracy histograms
//! expose the distribution (typically U-shaped on mixed banks), and closed
//! accuracy bands split the bank into the stage-1 dataset, the harder
//! stage-2 dataset, and the removed too-simple / unsolvable extremes.

use alloc::vec;
use alloc::vec::Vec;

use libm::floor;

use crate::error::{CoreError, Result};
use crate::policy::SoftmaxPolicy;
use crate::rng::{stream_seed, CURATION_STREAM};
use crate::taskbank::TaskRecord;

/// Closed accuracy interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
}

impl Band {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
            return Err(CoreError::config(alloc::format!(
                "band must satisfy 0 <= lower <= upper <= 1, got [{lower}, {upper}]"
            )));
        }
        Ok(Band { lower, upper })
    }

    /// Closed-interval membership.
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Default rollout batch sizes pooled into the merged accuracy estimate.
pub const DEFAULT_SAMPLE_SIZES: [u32; 10] = [6, 12, 16, 18, 24, 32, 36, 48, 72, 96];

/// Stage-1 accuracy band: moderate difficulty.
pub const DEFAULT_D1_BAND: Band = Band {
    lower: 0.10,
    upper: 0.87,
};

/// Stage-2 accuracy band: moderate-hard but not unsolvable.
pub const DEFAULT_D2_BAND: Band = Band {
    lower: 0.084,
    upper: 0.25,
};

/// Curation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CurationConfig {
    /// Rollout batch sizes; one independently seeded batch per entry.
    pub sample_sizes: Vec<u32>,
    pub d1_band: Band,
    pub d2_band: Band,
    pub histogram_bins: usize,
    pub seed: u64,
}

impl CurationConfig {
    pub fn new(seed: u64) -> Self {
        CurationConfig {
            sample_sizes: DEFAULT_SAMPLE_SIZES.to_vec(),
            d1_band: DEFAULT_D1_BAND,
            d2_band: DEFAULT_D2_BAND,
            histogram_bins: 20,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_sizes.is_empty() {
            return Err(CoreError::config("sample sizes must not be empty"));
        }
        if self.sample_sizes.iter().any(|&k| k < 1) {
            return Err(CoreError::config("every sample size must be >= 1"));
        }
        if self.histogram_bins < 2 {
            return Err(CoreError::config("histogram needs at least 2 bins"));
        }
        Ok(())
    }
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig::new(0)
    }
}

/// Per-batch hit counts for one task under the base policy.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyProfile {
    /// `(batch size k, rewarded rollouts)` in the order sampled.
    pub per_batch: Vec<(u32, u32)>,
}

impl AccuracyProfile {
    /// Pooled accuracy over every batch and the pool size.
    pub fn merged(&self) -> (f64, u64) {
        let hits: u64 = self.per_batch.iter().map(|&(_, h)| h as u64).sum();
        let total: u64 = self.per_batch.iter().map(|&(k, _)| k as u64).sum();
        (hits as f64 / total as f64, total)
    }

    /// Accuracy of each individual batch.
    pub fn batch_accuracies(&self) -> Vec<(u32, f64)> {
        self.per_batch
            .iter()
            .map(|&(k, hits)| (k, hits as f64 / k as f64))
            .collect()
    }
}

/// Samples one batch of size `k` per configured sample size, each batch on
/// its own `(seed, task id, k)` stream, and records the hit counts.
pub fn accuracy_profile(
    task: &TaskRecord,
    base_policy: &SoftmaxPolicy,
    cfg: &CurationConfig,
) -> Result<AccuracyProfile> {
    cfg.validate()?;
    let mut per_batch = Vec::with_capacity(cfg.sample_sizes.len());
    for &k in &cfg.sample_sizes {
        let batch_seed = stream_seed(&[CURATION_STREAM, cfg.seed, task.id, k as u64]);
        let sample = base_policy.sample_group(task, k as usize, batch_seed)?;
        per_batch.push((k, sample.rewards.successes() as u32));
    }
    Ok(AccuracyProfile { per_batch })
}

/// Merged empirical accuracy and the total number of pooled rollouts.
pub fn merged_accuracy(
    task: &TaskRecord,
    base_policy: &SoftmaxPolicy,
    cfg: &CurationConfig,
) -> Result<(f64, u64)> {
    Ok(accuracy_profile(task, base_policy, cfg)?.merged())
}

/// Copy of `task` carrying the merged accuracy estimate.
pub fn annotate(
    task: &TaskRecord,
    base_policy: &SoftmaxPolicy,
    cfg: &CurationConfig,
) -> Result<TaskRecord> {
    let (estimate, total) = merged_accuracy(task, base_policy, cfg)?;
    let mut out = task.clone();
    out.accuracy_estimate = Some(estimate);
    out.rollout_count = total;
    Ok(out)
}

/// One equal-width histogram bin over `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Equal-width accuracy histogram; the last bin is right-closed so 1.0 lands
/// in it. Empty input produces all-zero counts.
pub fn build_histogram(accuracies: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if bins < 2 {
        return Err(CoreError::config("histogram needs at least 2 bins"));
    }
    let mut counts = vec![0usize; bins];
    for &p in accuracies {
        if !(0.0..=1.0).contains(&p) {
            return Err(CoreError::domain(alloc::format!(
                "accuracy {p} outside [0, 1]"
            )));
        }
        let index = (floor(p * bins as f64) as usize).min(bins - 1);
        counts[index] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lower: i as f64 / bins as f64,
            upper: (i + 1) as f64 / bins as f64,
            count,
        })
        .collect())
}

/// Band-filtered stage datasets plus the removed extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct CuratedDatasets {
    /// Stage-1 (moderate) tasks.
    pub d1: Vec<TaskRecord>,
    /// Stage-2 (moderate-hard) tasks; may overlap `d1`.
    pub d2: Vec<TaskRecord>,
    /// Tasks above the stage-1 band: too simple to carry gradient.
    pub removed_simple: Vec<TaskRecord>,
    /// Tasks below the stage-2 band: currently unsolvable.
    pub removed_unsolvable: Vec<TaskRecord>,
    /// Bands that produced the split, kept for downstream hint injection.
    pub d1_band: Band,
    pub d2_band: Band,
}

/// Partitions annotated records by closed-interval comparison of their
/// accuracy estimates. Records may belong to both stage datasets; removal is
/// strictly above the stage-1 band or strictly below the stage-2 band.
pub fn filter_stages(records: &[TaskRecord], cfg: &CurationConfig) -> Result<CuratedDatasets> {
    cfg.validate()?;
    let mut curated = CuratedDatasets {
        d1: Vec::new(),
        d2: Vec::new(),
        removed_simple: Vec::new(),
        removed_unsolvable: Vec::new(),
        d1_band: cfg.d1_band,
        d2_band: cfg.d2_band,
    };
    for record in records {
        let estimate = record.accuracy_estimate.ok_or_else(|| {
            CoreError::domain(alloc::format!(
                "task {} has no accuracy estimate; run curation sampling first",
                record.id
            ))
        })?;
        if cfg.d1_band.contains(estimate) {
            curated.d1.push(record.clone());
        }
        if cfg.d2_band.contains(estimate) {
            curated.d2.push(record.clone());
        }
        if estimate > cfg.d1_band.upper {
            curated.removed_simple.push(record.clone());
        }
        if estimate < cfg.d2_band.lower {
            curated.removed_unsolvable.push(record.clone());
        }
    }
    Ok(curated)
}
