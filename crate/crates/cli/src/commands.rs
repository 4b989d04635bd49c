//! Implementations of the `dgrpo` subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dgrpo_core::advantage::AdvantageScheme;
use dgrpo_core::curation::{
    accuracy_profile, build_histogram, filter_stages, CuratedDatasets, HistogramBin,
};
use dgrpo_core::policy::SoftmaxPolicy;
use dgrpo_core::reweight::{ReweightConfig, WeightFamily};
use dgrpo_core::taskbank::{generate_bank, TaskRecord, HINT_SLOTS};
use dgrpo_core::trainer::{evaluate, run_two_stage, EvalReport, Tier, TrainerConfig};

use crate::bank_format::{read_bank, write_bank};
use crate::checkpoint::{load_policy, save_policy};
use crate::config::Experiment;
use crate::error::{CliError, Result};
use crate::histogram::{write_histogram_csv, write_histogram_svg};
use crate::metrics::write_metrics;

/// `genbank`: generate a task bank and write it to `out`.
pub fn genbank(experiment: &Experiment, out: &Path) -> Result<()> {
    let bank = generate_bank(&experiment.bank, experiment.seed)?;
    write_bank(&bank, out)?;
    println!("wrote {} tasks to {}", bank.len(), out.display());
    let mut by_difficulty: BTreeMap<u64, usize> = BTreeMap::new();
    for task in &bank {
        *by_difficulty.entry(task.difficulty.to_bits()).or_default() += 1;
    }
    for (bits, count) in by_difficulty {
        println!("  difficulty {}: {count} tasks", f64::from_bits(bits));
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn initial_policy(
    policy_path: Option<&Path>,
    tasks: &[TaskRecord],
    temperature: f64,
) -> Result<SoftmaxPolicy> {
    let width = tasks
        .first()
        .map(TaskRecord::feature_width)
        .ok_or_else(|| CliError::config("cannot infer policy shape from an empty bank"))?;
    let policy = match policy_path {
        Some(path) => {
            let policy = load_policy(path)?;
            if policy.feature_width() != width {
                return Err(CliError::config(format!(
                    "checkpoint feature width {} does not match bank feature width {width}",
                    policy.feature_width()
                )));
            }
            policy
        }
        None => SoftmaxPolicy::new(width, width - HINT_SLOTS, temperature)?,
    };
    Ok(policy)
}

/// `curate`: estimate difficulty for every task with the base policy, emit
/// the annotated bank, stage partitions, and per-batch plus merged
/// histograms.
pub fn curate(
    experiment: &Experiment,
    bank_path: &Path,
    policy_path: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let bank = read_bank(bank_path)?;
    let base = initial_policy(policy_path, &bank, experiment.trainer.temperature)?;
    ensure_dir(out_dir)?;

    let cfg = &experiment.curation;
    let mut annotated = Vec::with_capacity(bank.len());
    let mut per_batch_accuracies: Vec<Vec<f64>> = vec![Vec::new(); cfg.sample_sizes.len()];
    for task in &bank {
        let profile = accuracy_profile(task, &base, cfg)?;
        for (slot, (k, hits)) in profile.per_batch.iter().enumerate() {
            per_batch_accuracies[slot].push(*hits as f64 / *k as f64);
        }
        let (estimate, total) = profile.merged();
        let mut task = task.clone();
        task.accuracy_estimate = Some(estimate);
        task.rollout_count = total;
        annotated.push(task);
    }

    write_bank(&annotated, &out_dir.join("annotated.txt"))?;

    for (slot, &k) in cfg.sample_sizes.iter().enumerate() {
        let bins = build_histogram(&per_batch_accuracies[slot], cfg.histogram_bins)?;
        emit_histogram(
            &bins,
            &format!("accuracy at k={k}"),
            out_dir,
            &format!("hist_k{k}"),
        )?;
    }
    let merged: Vec<f64> = annotated
        .iter()
        .map(|t| t.accuracy_estimate.expect("just annotated"))
        .collect();
    let bins = build_histogram(&merged, cfg.histogram_bins)?;
    emit_histogram(&bins, "merged empirical accuracy", out_dir, "hist_merged")?;

    let curated = filter_stages(&annotated, cfg)?;
    write_bank(&curated.d1, &out_dir.join("d1.txt"))?;
    write_bank(&curated.d2, &out_dir.join("d2.txt"))?;
    write_bank(&curated.removed_simple, &out_dir.join("removed_simple.txt"))?;
    write_bank(
        &curated.removed_unsolvable,
        &out_dir.join("removed_unsolvable.txt"),
    )?;

    println!(
        "curation leaves {} D1 tasks and {} D2 tasks ({} removed as too simple, {} as unsolvable)",
        curated.d1.len(),
        curated.d2.len(),
        curated.removed_simple.len(),
        curated.removed_unsolvable.len()
    );
    Ok(())
}

fn emit_histogram(bins: &[HistogramBin], title: &str, out_dir: &Path, stem: &str) -> Result<()> {
    write_histogram_csv(bins, &out_dir.join(format!("{stem}.csv")))?;
    write_histogram_svg(bins, title, &out_dir.join(format!("{stem}.svg")))
}

fn load_stage_datasets(
    d1_path: &Path,
    d2_path: &Path,
) -> Result<(Vec<TaskRecord>, Vec<TaskRecord>)> {
    let d1 = read_bank(d1_path)?;
    if d1.is_empty() {
        return Err(CliError::config(format!(
            "stage 1 dataset {} is empty",
            d1_path.display()
        )));
    }
    let d2 = read_bank(d2_path)?;
    if d2.is_empty() {
        return Err(CliError::config(format!(
            "stage 2 dataset {} is empty",
            d2_path.display()
        )));
    }
    Ok((d1, d2))
}

fn curated_from_files(
    experiment: &Experiment,
    d1: Vec<TaskRecord>,
    d2: Vec<TaskRecord>,
) -> CuratedDatasets {
    CuratedDatasets {
        d1,
        d2,
        removed_simple: Vec::new(),
        removed_unsolvable: Vec::new(),
        d1_band: experiment.curation.d1_band,
        d2_band: experiment.curation.d2_band,
    }
}

/// `train`: run the two-stage curriculum and write metrics plus stage
/// checkpoints.
pub fn train(
    experiment: &Experiment,
    d1_path: &Path,
    d2_path: &Path,
    policy_path: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let (d1, d2) = load_stage_datasets(d1_path, d2_path)?;
    let policy = initial_policy(policy_path, &d1, experiment.trainer.temperature)?;
    ensure_dir(out_dir)?;

    let curated = curated_from_files(experiment, d1, d2);
    let result = run_two_stage(&policy, &curated, &experiment.trainer)?;

    write_metrics(&result.metrics, &out_dir.join("metrics.csv"))?;
    save_policy(&result.stage1_policy, &out_dir.join("stage1.ckpt"))?;
    save_policy(&result.policy, &out_dir.join("stage2.ckpt"))?;

    let stage1_rows = result.metrics.iter().filter(|r| r.stage == 1).count();
    let stage2_rows = result.metrics.len() - stage1_rows;
    let final_reward = result.metrics.last().map_or(f64::NAN, |r| r.mean_reward);
    println!(
        "trained {stage1_rows} stage-1 and {stage2_rows} stage-2 steps; final mean reward {final_reward}"
    );
    println!("outputs in {}", out_dir.display());
    Ok(())
}

/// Stage-1 and stage-2 datasets merged by task id, in id order.
pub fn union_by_id(d1: &[TaskRecord], d2: &[TaskRecord]) -> Vec<TaskRecord> {
    let mut by_id: BTreeMap<u64, TaskRecord> = BTreeMap::new();
    for task in d1.iter().chain(d2) {
        by_id.entry(task.id).or_insert_with(|| task.clone());
    }
    by_id.into_values().collect()
}

const EVAL_HEADER: &str = "tier,count,accuracy";

pub fn write_eval_report(report: &EvalReport, path: &Path) -> Result<()> {
    let mut out = String::from(EVAL_HEADER);
    out.push('\n');
    for tier in Tier::ALL {
        out.push_str(&format!(
            "{},{},{}\n",
            tier.name(),
            report.count(tier),
            report.accuracy_or_nan(tier)
        ));
    }
    let total: usize = Tier::ALL.iter().map(|&t| report.count(t)).sum();
    out.push_str(&format!("overall,{},{}\n", total, report.overall()));
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// Parsed rows of an eval CSV: `(simple, moderate, hard, overall)` as
/// `(count, accuracy)` pairs.
pub fn read_eval_report(path: &Path) -> Result<[(usize, f64); 4]> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == EVAL_HEADER => {}
        _ => return Err(CliError::format(path, 1, "missing or wrong eval header")),
    }
    let mut rows = [(0usize, f64::NAN); 4];
    let expected = ["simple", "moderate", "hard", "overall"];
    for (slot, name) in expected.iter().enumerate() {
        let (index, line) = lines
            .next()
            .ok_or_else(|| CliError::format(path, slot + 2, "truncated eval file"))?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 || fields[0] != *name {
            return Err(CliError::format(
                path,
                index + 1,
                format!("expected `{name}` row"),
            ));
        }
        let count = fields[1]
            .parse()
            .map_err(|_| CliError::format(path, index + 1, "invalid count"))?;
        let accuracy = fields[2]
            .parse()
            .map_err(|_| CliError::format(path, index + 1, "invalid accuracy"))?;
        rows[slot] = (count, accuracy);
    }
    Ok(rows)
}

fn print_eval_report(report: &EvalReport) {
    for tier in Tier::ALL {
        println!(
            "  {:<8} {:>5} tasks  accuracy {}",
            tier.name(),
            report.count(tier),
            report.accuracy_or_nan(tier)
        );
    }
    println!("  overall accuracy {}", report.overall());
}

/// `eval`: greedy per-tier accuracy of a checkpoint on a bank.
pub fn eval_command(
    experiment: &Experiment,
    bank_path: &Path,
    policy_path: &Path,
    out: Option<&Path>,
) -> Result<()> {
    let bank = read_bank(bank_path)?;
    if bank.is_empty() {
        return Err(CliError::config(format!(
            "bank {} is empty",
            bank_path.display()
        )));
    }
    let policy = load_policy(policy_path)?;
    let report = evaluate(&policy, &bank, 1, experiment.seed)?;
    println!("evaluation of {}:", policy_path.display());
    print_eval_report(&report);
    if let Some(path) = out {
        write_eval_report(&report, path)?;
    }
    Ok(())
}

/// One cell of the ablation grid.
#[derive(Debug, Clone, Copy)]
pub struct SweepCell {
    pub family: WeightFamily,
    pub use_std_norm: bool,
    pub hint: bool,
}

impl SweepCell {
    pub fn label(&self) -> String {
        format!(
            "{}_std-{}_hint-{}",
            self.family.name(),
            if self.use_std_norm { "on" } else { "off" },
            if self.hint { "on" } else { "off" }
        )
    }
}

/// Full grid: every family crossed with std-norm and hint toggles.
pub fn sweep_grid(families: &[WeightFamily]) -> Vec<SweepCell> {
    let mut cells = Vec::new();
    for &family in families {
        for use_std_norm in [false, true] {
            for hint in [false, true] {
                cells.push(SweepCell {
                    family,
                    use_std_norm,
                    hint,
                });
            }
        }
    }
    cells
}

pub const SUMMARY_HEADER: &str = "family,std_norm,hint,acc_simple,acc_moderate,acc_hard,overall";

/// `sweep`: run every grid cell with shared seeds and emit per-cell metrics
/// plus a summary table assembled from the per-cell evaluation files.
pub fn sweep(
    experiment: &Experiment,
    d1_path: &Path,
    d2_path: &Path,
    policy_path: Option<&Path>,
    out_dir: &Path,
    families: &[WeightFamily],
) -> Result<()> {
    let (d1, d2) = load_stage_datasets(d1_path, d2_path)?;
    let base = initial_policy(policy_path, &d1, experiment.trainer.temperature)?;
    ensure_dir(out_dir)?;

    let eval_set = union_by_id(&d1, &d2);
    let curated = curated_from_files(experiment, d1, d2);
    let cells = sweep_grid(families);
    let mut cell_paths: Vec<(SweepCell, PathBuf)> = Vec::with_capacity(cells.len());

    for cell in cells {
        let label = cell.label();
        let cell_dir = out_dir.join(&label);
        ensure_dir(&cell_dir)?;

        let mut cfg: TrainerConfig = experiment.trainer.clone();
        cfg.scheme = AdvantageScheme {
            reweight: ReweightConfig::preset(cell.family),
            use_std_norm: cell.use_std_norm,
        };
        cfg.hint_stage2 = cell.hint;

        let outcome = (|| -> Result<()> {
            let result = run_two_stage(&base, &curated, &cfg)?;
            write_metrics(&result.metrics, &cell_dir.join("metrics.csv"))?;
            save_policy(&result.policy, &cell_dir.join("final.ckpt"))?;
            let report = evaluate(&result.policy, &eval_set, 1, experiment.seed)?;
            write_eval_report(&report, &cell_dir.join("eval.csv"))?;
            Ok(())
        })();
        outcome.map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("cell {label}: {msg}")),
            CliError::Numerical(msg) => CliError::Numerical(format!("cell {label}: {msg}")),
            other => other,
        })?;
        cell_paths.push((cell, cell_dir));
    }

    // The summary is reassembled from the emitted files so it can never
    // drift from them.
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for (cell, dir) in &cell_paths {
        let rows = read_eval_report(&dir.join("eval.csv"))?;
        summary.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            cell.family.name(),
            if cell.use_std_norm { "on" } else { "off" },
            if cell.hint { "on" } else { "off" },
            rows[0].1,
            rows[1].1,
            rows[2].1,
            rows[3].1
        ));
    }
    let summary_path = out_dir.join("summary.csv");
    std::fs::write(&summary_path, summary).map_err(|e| CliError::io(&summary_path, e))?;
    println!(
        "swept {} cells; summary in {}",
        cell_paths.len(),
        summary_path.display()
    );
    Ok(())
}

/// `hist`: accuracy histogram of an annotated bank.
pub fn hist(experiment: &Experiment, bank_path: &Path, out_dir: &Path) -> Result<()> {
    let bank = read_bank(bank_path)?;
    let mut accuracies = Vec::with_capacity(bank.len());
    for task in &bank {
        match task.accuracy_estimate {
            Some(value) => accuracies.push(value),
            None => {
                return Err(CliError::config(format!(
                    "task {} has no accuracy estimate; run `curate` first",
                    task.id
                )))
            }
        }
    }
    ensure_dir(out_dir)?;
    let bins = build_histogram(&accuracies, experiment.curation.histogram_bins)?;
    emit_histogram(&bins, "empirical accuracy", out_dir, "hist")?;
    for bin in &bins {
        println!("  [{:.3}, {:.3}] {}", bin.lower, bin.upper, bin.count);
    }
    Ok(())
}
