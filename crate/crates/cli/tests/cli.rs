//! Binary-level tests: exit codes, determinism, config strictness, seed
//! precedence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dgrpo() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dgrpo"));
    cmd.env_remove("DGRPO_SEED");
    cmd
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Small bank + tiny trainer so CLI runs finish instantly.
const SMALL_CONFIG: &str = r#"
seed = 4

[bank]
n = 24
mix = [[0.05, 0.5], [0.95, 0.5]]

[trainer]
stage1_steps = 3
stage2_steps = 2
global_batch = 24

[curation]
ks = [6, 12]
"#;

#[test]
fn genbank_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    for name in ["a.txt", "b.txt"] {
        let out = dgrpo()
            .args(["genbank", "-c"])
            .arg(&config)
            .arg("-o")
            .arg(dir.path().join(name))
            .output()
            .unwrap();
        assert_success(&out);
    }
    let a = std::fs::read(dir.path().join("a.txt")).unwrap();
    let b = std::fs::read(dir.path().join("b.txt")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn genbank_rejects_invalid_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);

    // n = 0 violates the bank invariant.
    let out = dgrpo()
        .args(["genbank", "-c"])
        .arg(&config)
        .arg("-o")
        .arg(dir.path().join("bank.txt"))
        .args(["--n", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Proportions that do not sum to 1.
    let bad = write_config(
        dir.path(),
        "seed = 1\n[bank]\nmix = [[0.0, 0.5], [0.9, 0.4]]\n",
    );
    let out = dgrpo()
        .args(["genbank", "-c"])
        .arg(&bad)
        .arg("-o")
        .arg(dir.path().join("bank.txt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "seed = 1\n[trainer]\nlearning_rte = 3.0\n");
    let out = dgrpo()
        .args(["genbank", "-c"])
        .arg(&config)
        .arg("-o")
        .arg(dir.path().join("bank.txt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rte"));
}

#[test]
fn missing_input_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let out = dgrpo()
        .args(["curate", "-c"])
        .arg(&config)
        .arg("--bank")
        .arg(dir.path().join("nope.txt"))
        .arg("-o")
        .arg(dir.path().join("curated"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_precedence_env_beats_file_flag_beats_env() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);

    let run = |name: &str, env: Option<&str>, flag: Option<&str>| {
        let mut cmd = dgrpo();
        cmd.args(["genbank", "-c"])
            .arg(&config)
            .arg("-o")
            .arg(dir.path().join(name));
        if let Some(seed) = env {
            cmd.env("DGRPO_SEED", seed);
        }
        if let Some(seed) = flag {
            cmd.args(["--seed", seed]);
        }
        assert_success(&cmd.output().unwrap());
        std::fs::read(dir.path().join(name)).unwrap()
    };

    let file_seed = run("file.txt", None, None);
    let env_seed = run("env.txt", Some("99"), None);
    let flag_beats_env = run("flag.txt", Some("99"), Some("4"));

    assert_ne!(file_seed, env_seed);
    assert_eq!(file_seed, flag_beats_env);

    // A non-numeric env seed is a configuration error.
    let mut cmd = dgrpo();
    cmd.args(["genbank", "-c"])
        .arg(&config)
        .arg("-o")
        .arg(dir.path().join("bad.txt"))
        .env("DGRPO_SEED", "not-a-number");
    assert_eq!(cmd.output().unwrap().status.code(), Some(1));
}

fn pipeline(dir: &Path) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let config = write_config(dir, SMALL_CONFIG);
    let bank = dir.join("bank.txt");
    assert_success(
        &dgrpo()
            .args(["genbank", "-c"])
            .arg(&config)
            .arg("-o")
            .arg(&bank)
            .output()
            .unwrap(),
    );
    let curated = dir.join("curated");
    assert_success(
        &dgrpo()
            .args(["curate", "-c"])
            .arg(&config)
            .arg("--bank")
            .arg(&bank)
            .arg("-o")
            .arg(&curated)
            .output()
            .unwrap(),
    );
    (config, bank, curated.join("annotated.txt"), curated)
}

#[test]
fn curate_emits_partitions_and_histograms() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, annotated, curated) = pipeline(dir.path());
    for file in [
        "d1.txt",
        "d2.txt",
        "removed_simple.txt",
        "removed_unsolvable.txt",
        "hist_merged.csv",
        "hist_merged.svg",
        "hist_k6.csv",
        "hist_k12.csv",
    ] {
        assert!(curated.join(file).exists(), "{file} missing");
    }
    // Every annotated task carries an estimate over 18 pooled rollouts.
    let text = std::fs::read_to_string(&annotated).unwrap();
    assert_eq!(text.lines().count(), 24);
    for line in text.lines() {
        assert!(line.ends_with("\t18"), "unexpected rollout count: {line}");
        assert!(!line.contains("\t-\t"), "missing estimate: {line}");
    }
}

#[test]
fn train_writes_metrics_and_checkpoints_with_correct_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (config, bank, _, _) = pipeline(dir.path());

    // Train directly on the bank as both stages (tiny step counts).
    let run_dir = dir.path().join("run");
    assert_success(
        &dgrpo()
            .args(["train", "-c"])
            .arg(&config)
            .arg("--d1")
            .arg(&bank)
            .arg("--d2")
            .arg(&bank)
            .arg("-o")
            .arg(&run_dir)
            .output()
            .unwrap(),
    );
    let metrics = std::fs::read_to_string(run_dir.join("metrics.csv")).unwrap();
    let rows: Vec<&str> = metrics.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows.iter().filter(|r| r.starts_with("1,")).count(), 3);
    assert_eq!(rows.iter().filter(|r| r.starts_with("2,")).count(), 2);
    assert!(run_dir.join("stage1.ckpt").exists());
    assert!(run_dir.join("stage2.ckpt").exists());

    // Stage-1-only run via override.
    let solo_dir = dir.path().join("solo");
    assert_success(
        &dgrpo()
            .args(["train", "-c"])
            .arg(&config)
            .arg("--d1")
            .arg(&bank)
            .arg("--d2")
            .arg(&bank)
            .arg("-o")
            .arg(&solo_dir)
            .args(["--stage2-steps", "0"])
            .output()
            .unwrap(),
    );
    let metrics = std::fs::read_to_string(solo_dir.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().skip(1).count(), 3);

    // Empty stage dataset: nonzero exit naming the stage.
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    let out = dgrpo()
        .args(["train", "-c"])
        .arg(&config)
        .arg("--d1")
        .arg(&bank)
        .arg("--d2")
        .arg(&empty)
        .arg("-o")
        .arg(dir.path().join("runx"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage 2"));
}

#[test]
fn eval_reports_per_tier_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let (config, bank, _, _) = pipeline(dir.path());
    let run_dir = dir.path().join("run");
    assert_success(
        &dgrpo()
            .args(["train", "-c"])
            .arg(&config)
            .arg("--d1")
            .arg(&bank)
            .arg("--d2")
            .arg(&bank)
            .arg("-o")
            .arg(&run_dir)
            .output()
            .unwrap(),
    );
    let eval_csv = dir.path().join("eval.csv");
    let out = dgrpo()
        .args(["eval", "-c"])
        .arg(&config)
        .arg("--bank")
        .arg(&bank)
        .arg("--policy")
        .arg(run_dir.join("stage2.ckpt"))
        .arg("-o")
        .arg(&eval_csv)
        .output()
        .unwrap();
    assert_success(&out);
    let text = std::fs::read_to_string(&eval_csv).unwrap();
    assert!(text.starts_with("tier,count,accuracy"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn hist_requires_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let (config, bank, annotated, _) = pipeline(dir.path());

    // Raw bank: no estimates, configuration error.
    let out = dgrpo()
        .args(["hist", "-c"])
        .arg(&config)
        .arg("--bank")
        .arg(&bank)
        .arg("-o")
        .arg(dir.path().join("h1"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Annotated bank: histogram files emitted.
    let out = dgrpo()
        .args(["hist", "-c"])
        .arg(&config)
        .arg("--bank")
        .arg(&annotated)
        .arg("-o")
        .arg(dir.path().join("h2"))
        .output()
        .unwrap();
    assert_success(&out);
    assert!(dir.path().join("h2/hist.csv").exists());
    assert!(dir.path().join("h2/hist.svg").exists());
}

#[test]
fn sweep_family_subset_produces_expected_cells() {
    let dir = tempfile::tempdir().unwrap();
    let (config, bank, _, _) = pipeline(dir.path());
    let sweep_dir = dir.path().join("sweep");
    let out = dgrpo()
        .args(["sweep", "-c"])
        .arg(&config)
        .arg("--d1")
        .arg(&bank)
        .arg("--d2")
        .arg(&bank)
        .arg("-o")
        .arg(&sweep_dir)
        .args(["--families", "none"])
        .output()
        .unwrap();
    assert_success(&out);
    let summary = std::fs::read_to_string(sweep_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5); // header + 1 family x 2 x 2
    for cell in [
        "none_std-off_hint-off",
        "none_std-off_hint-on",
        "none_std-on_hint-off",
        "none_std-on_hint-on",
    ] {
        assert!(sweep_dir.join(cell).join("metrics.csv").exists());
        assert!(sweep_dir.join(cell).join("eval.csv").exists());
    }
}

#[test]
fn sweep_hint_cells_match_when_stage_two_is_disabled() {
    // The hint only touches stage-2 data, so with stage2_steps = 0 the two
    // hint cells of a family must produce identical outputs.
    let dir = tempfile::tempdir().unwrap();
    let (config, bank, _, _) = pipeline(dir.path());
    let sweep_dir = dir.path().join("sweep");
    assert_success(
        &dgrpo()
            .args(["sweep", "-c"])
            .arg(&config)
            .arg("--d1")
            .arg(&bank)
            .arg("--d2")
            .arg(&bank)
            .arg("-o")
            .arg(&sweep_dir)
            .args(["--families", "exponential", "--stage2-steps", "0"])
            .output()
            .unwrap(),
    );
    for std_norm in ["off", "on"] {
        let read = |hint: &str, file: &str| {
            std::fs::read(
                sweep_dir
                    .join(format!("exponential_std-{std_norm}_hint-{hint}"))
                    .join(file),
            )
            .unwrap()
        };
        assert_eq!(read("off", "metrics.csv"), read("on", "metrics.csv"));
        assert_eq!(read("off", "eval.csv"), read("on", "eval.csv"));
        assert_eq!(read("off", "final.ckpt"), read("on", "final.ckpt"));
    }
}

#[test]
fn strong_base_policy_marks_clean_tasks_simple() {
    // A bank of difficulty-0 tasks under a near-perfect reader: every task
    // estimates near accuracy 1, so d1 is empty and all are removed simple.
    use dgrpo_core::matrix::Matrix;
    use dgrpo_core::policy::SoftmaxPolicy;
    use dgrpo_core::taskbank::HINT_SLOTS;

    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "seed = 4\n[bank]\nn = 10\nmix = [[0.0, 1.0]]\n[curation]\nks = [6, 12]\n",
    );
    let bank = dir.path().join("bank.txt");
    assert_success(
        &dgrpo()
            .args(["genbank", "-c"])
            .arg(&config)
            .arg("-o")
            .arg(&bank)
            .output()
            .unwrap(),
    );

    let mut weights = Matrix::zeros(8 + HINT_SLOTS, 9);
    for s in 0..8 {
        weights.set(s, s, 60.0);
    }
    let reader = SoftmaxPolicy::with_weights(weights, 1.0).unwrap();
    let ckpt = dir.path().join("reader.ckpt");
    dgrpo_cli::checkpoint::save_policy(&reader, &ckpt).unwrap();

    let curated = dir.path().join("curated");
    assert_success(
        &dgrpo()
            .args(["curate", "-c"])
            .arg(&config)
            .arg("--bank")
            .arg(&bank)
            .arg("--policy")
            .arg(&ckpt)
            .arg("-o")
            .arg(&curated)
            .output()
            .unwrap(),
    );
    let lines = |name: &str| {
        std::fs::read_to_string(curated.join(name))
            .unwrap()
            .lines()
            .count()
    };
    assert_eq!(lines("d1.txt"), 0);
    assert_eq!(lines("d2.txt"), 0);
    assert_eq!(lines("removed_simple.txt"), 10);
    assert_eq!(lines("removed_unsolvable.txt"), 0);
}

#[test]
fn scheme_override_produces_vanilla_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let (config, bank, _, _) = pipeline(dir.path());
    let run_dir = dir.path().join("vanilla");
    let out = dgrpo()
        .args(["train", "-c"])
        .arg(&config)
        .arg("--d1")
        .arg(&bank)
        .arg("--d2")
        .arg(&bank)
        .arg("-o")
        .arg(&run_dir)
        .args(["--scheme", "none", "--std-norm"])
        .output()
        .unwrap();
    assert_success(&out);
    assert!(run_dir.join("metrics.csv").exists());
}
