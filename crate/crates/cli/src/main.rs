//! `dgrpo`: difficulty-aware GRPO experiments on a synthetic task bank.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dgrpo_cli::commands;
use dgrpo_cli::config::{self, Overrides};
use dgrpo_cli::error::{CliError, Result, EXIT_CONFIG};
use dgrpo_core::reweight::WeightFamily;

#[derive(Parser)]
#[command(
    name = "dgrpo",
    version,
    about = "Difficulty-aware GRPO on a synthetic verifiable-reward task bank"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OverrideArgs {
    /// Override the configured seed (beats DGRPO_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Reweight family: linear, inverse, exponential, steep_exponential,
    /// quadratic or none.
    #[arg(long)]
    scheme: Option<String>,
    /// Divide centered rewards by the group standard deviation.
    #[arg(long, conflicts_with = "no_std_norm")]
    std_norm: bool,
    /// Disable the standard-deviation normalization.
    #[arg(long)]
    no_std_norm: bool,
    /// Inject the stage-2 accuracy band as a difficulty hint.
    #[arg(long, conflicts_with = "no_hint")]
    hint: bool,
    /// Disable the stage-2 difficulty hint.
    #[arg(long)]
    no_hint: bool,
    #[arg(long)]
    stage1_steps: Option<usize>,
    #[arg(long)]
    stage2_steps: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    group_size: Option<usize>,
    #[arg(long)]
    rollout_batch: Option<usize>,
    #[arg(long)]
    global_batch: Option<usize>,
    #[arg(long)]
    clip_eps: Option<f64>,
    #[arg(long)]
    kl_beta: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    /// Bank size override for `genbank`.
    #[arg(long)]
    n: Option<usize>,
}

impl OverrideArgs {
    fn to_overrides(&self) -> Overrides {
        let toggle = |on: bool, off: bool| match (on, off) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        };
        Overrides {
            seed: self.seed,
            scheme: self.scheme.clone(),
            std_norm: toggle(self.std_norm, self.no_std_norm),
            hint: toggle(self.hint, self.no_hint),
            stage1_steps: self.stage1_steps,
            stage2_steps: self.stage2_steps,
            learning_rate: self.learning_rate,
            group_size: self.group_size,
            rollout_batch: self.rollout_batch,
            global_batch: self.global_batch,
            clip_eps: self.clip_eps,
            kl_beta: self.kl_beta,
            temperature: self.temperature,
            task_count: self.n,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic task bank.
    Genbank {
        #[arg(short, long)]
        config: PathBuf,
        /// Output bank file.
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Estimate task difficulty with a base policy and split stage datasets.
    Curate {
        #[arg(short, long)]
        config: PathBuf,
        /// Input bank file.
        #[arg(long)]
        bank: PathBuf,
        /// Base-policy checkpoint (zero-initialized policy when omitted).
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Output directory for partitions and histograms.
        #[arg(short, long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run the two-stage curriculum on curated datasets.
    Train {
        #[arg(short, long)]
        config: PathBuf,
        /// Stage-1 dataset file.
        #[arg(long)]
        d1: PathBuf,
        /// Stage-2 dataset file.
        #[arg(long)]
        d2: PathBuf,
        /// Initial policy checkpoint (zero-initialized when omitted).
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Output directory for metrics and checkpoints.
        #[arg(short, long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Evaluate a checkpoint on a bank with greedy decoding.
    Eval {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        /// Optional CSV output path.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run the scheme ablation grid (family x std-norm x hint).
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        d1: PathBuf,
        #[arg(long)]
        d2: PathBuf,
        /// Shared starting checkpoint for every cell.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(short, long)]
        out_dir: PathBuf,
        /// Comma-separated family subset (defaults to all six).
        #[arg(long)]
        families: Option<String>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Emit accuracy histograms for an annotated bank.
    Hist {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        bank: PathBuf,
        #[arg(short, long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Genbank {
            config,
            out,
            overrides,
        } => {
            let experiment = config::load(&config, &overrides.to_overrides())?;
            commands::genbank(&experiment, &out)
        }
        Command::Curate {
            config,
            bank,
            policy,
            out_dir,
            overrides,
        } => {
            let experiment = config::load(&config, &overrides.to_overrides())?;
            commands::curate(&experiment, &bank, policy.as_deref(), &out_dir)
        }
        Command::Train {
            config,
            d1,
            d2,
            policy,
            out_dir,
            overrides,
        } => {
            let experiment = config::load(&config, &overrides.to_overrides())?;
            commands::train(&experiment, &d1, &d2, policy.as_deref(), &out_dir)
        }
        Command::Eval {
            config,
            bank,
            policy,
            out,
            overrides,
        } => {
            let experiment = config::load(&config, &overrides.to_overrides())?;
            commands::eval_command(&experiment, &bank, &policy, out.as_deref())
        }
        Command::Sweep {
            config,
            d1,
            d2,
            policy,
            out_dir,
            families,
            overrides,
        } => {
            let experiment = config::load(&config, &overrides.to_overrides())?;
            let families = parse_families(families.as_deref())?;
            commands::sweep(
                &experiment,
                &d1,
                &d2,
                policy.as_deref(),
                &out_dir,
                &families,
            )
        }
        Command::Hist {
            config,
            bank,
            out_dir,
            overrides,
        } => {
            let experiment = config::load(&config, &overrides.to_overrides())?;
            commands::hist(&experiment, &bank, &out_dir)
        }
    }
}

fn parse_families(spec: Option<&str>) -> Result<Vec<WeightFamily>> {
    match spec {
        None => Ok(WeightFamily::ALL.to_vec()),
        Some(text) => text
            .split(',')
            .map(|name| WeightFamily::parse(name.trim()).map_err(CliError::from))
            .collect(),
    }
}

fn main() -> ExitCode {
    // Die quietly when stdout is closed early (e.g. piped into `head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = err.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
