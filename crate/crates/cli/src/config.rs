//! Experiment configuration: one TOML file, strict keys, CLI overrides.
//!
//! Every field is optional except the top-level `seed`; omitted fields fall
//! back to the owning module's defaults. Unknown keys are rejected so typos
//! cannot silently become defaults. Precedence is file < `DGRPO_SEED`
//! environment variable (seed only) < command-line flags.

use std::path::Path;

use serde::Deserialize;

use dgrpo_core::advantage::AdvantageScheme;
use dgrpo_core::curation::{Band, CurationConfig};
use dgrpo_core::reweight::{ReweightConfig, WeightFamily};
use dgrpo_core::taskbank::BankConfig;
use dgrpo_core::trainer::TrainerConfig;

use crate::error::{CliError, Result};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV_VAR: &str = "DGRPO_SEED";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    #[serde(default)]
    pub bank: BankSection,
    #[serde(default)]
    pub reweight: ReweightSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub curation: CurationSection,
    #[serde(default)]
    pub trainer: TrainerSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankSection {
    pub n: Option<usize>,
    pub k_alpha: Option<usize>,
    pub l_min: Option<usize>,
    pub l_max: Option<usize>,
    /// `[[difficulty, proportion], ...]`
    pub mix: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReweightSection {
    pub family: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub x0: Option<f64>,
    pub xlow: Option<f64>,
    pub xhigh: Option<f64>,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub use_std_norm: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurationSection {
    pub ks: Option<Vec<u32>>,
    pub d1_band: Option<[f64; 2]>,
    pub d2_band: Option<[f64; 2]>,
    pub histogram_bins: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerSection {
    pub group_size: Option<usize>,
    pub rollout_batch: Option<usize>,
    pub global_batch: Option<usize>,
    pub learning_rate: Option<f64>,
    pub clip_eps: Option<f64>,
    pub kl_beta: Option<f64>,
    pub stage1_steps: Option<usize>,
    pub stage2_steps: Option<usize>,
    pub hint_stage2: Option<bool>,
    pub temperature: Option<f64>,
}

/// Command-line overrides; every field beats the config file when set.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub scheme: Option<String>,
    pub std_norm: Option<bool>,
    pub hint: Option<bool>,
    pub stage1_steps: Option<usize>,
    pub stage2_steps: Option<usize>,
    pub learning_rate: Option<f64>,
    pub group_size: Option<usize>,
    pub rollout_batch: Option<usize>,
    pub global_batch: Option<usize>,
    pub clip_eps: Option<f64>,
    pub kl_beta: Option<f64>,
    pub temperature: Option<f64>,
    pub task_count: Option<usize>,
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub seed: u64,
    pub bank: BankConfig,
    pub reweight: ReweightConfig,
    pub use_std_norm: bool,
    pub curation: CurationConfig,
    pub trainer: TrainerConfig,
}

impl Experiment {
    pub fn scheme(&self) -> AdvantageScheme {
        AdvantageScheme {
            reweight: self.reweight,
            use_std_norm: self.use_std_norm,
        }
    }
}

/// Loads, layers and validates an experiment configuration.
pub fn load(path: &Path, overrides: &Overrides) -> Result<Experiment> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ConfigFile =
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    resolve(file, overrides)
}

fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<Experiment> {
    let mut seed = file.seed;
    if let Ok(value) = std::env::var(SEED_ENV_VAR) {
        seed = value.parse().map_err(|_| {
            CliError::config(format!(
                "{SEED_ENV_VAR} must be an unsigned integer, got `{value}`"
            ))
        })?;
    }
    if let Some(value) = overrides.seed {
        seed = value;
    }

    let defaults = BankConfig::default();
    let bank = BankConfig {
        task_count: overrides
            .task_count
            .or(file.bank.n)
            .unwrap_or(defaults.task_count),
        difficulty_mix: file.bank.mix.unwrap_or(defaults.difficulty_mix),
        alphabet: file.bank.k_alpha.unwrap_or(defaults.alphabet),
        len_min: file.bank.l_min.unwrap_or(defaults.len_min),
        len_max: file.bank.l_max.unwrap_or(defaults.len_max),
    };
    bank.validate()?;

    let family_name = overrides
        .scheme
        .clone()
        .or(file.reweight.family.clone())
        .unwrap_or_else(|| WeightFamily::Exponential.name().to_string());
    let family = WeightFamily::parse(&family_name)?;
    let preset = ReweightConfig::preset(family);
    let reweight = ReweightConfig {
        family,
        min_weight: file.reweight.a.unwrap_or(preset.min_weight),
        max_weight: file.reweight.b.unwrap_or(preset.max_weight),
        midpoint: file.reweight.x0.unwrap_or(preset.midpoint),
        ramp_low: file.reweight.xlow.unwrap_or(preset.ramp_low),
        ramp_high: file.reweight.xhigh.unwrap_or(preset.ramp_high),
        steepness: file.reweight.k.unwrap_or(preset.steepness),
    };
    reweight.validate()?;

    let use_std_norm = overrides
        .std_norm
        .or(file.scheme.use_std_norm)
        .unwrap_or(false);

    let curation_defaults = CurationConfig::new(seed);
    let band = |pair: Option<[f64; 2]>, fallback: Band| -> Result<Band> {
        match pair {
            Some([lower, upper]) => Ok(Band::new(lower, upper)?),
            None => Ok(fallback),
        }
    };
    let curation = CurationConfig {
        sample_sizes: file.curation.ks.unwrap_or(curation_defaults.sample_sizes),
        d1_band: band(file.curation.d1_band, curation_defaults.d1_band)?,
        d2_band: band(file.curation.d2_band, curation_defaults.d2_band)?,
        histogram_bins: file
            .curation
            .histogram_bins
            .unwrap_or(curation_defaults.histogram_bins),
        seed,
    };
    curation.validate()?;

    let scheme = AdvantageScheme {
        reweight,
        use_std_norm,
    };
    let trainer_defaults = TrainerConfig::new(scheme, seed);
    let trainer = TrainerConfig {
        group_size: overrides
            .group_size
            .or(file.trainer.group_size)
            .unwrap_or(trainer_defaults.group_size),
        rollout_batch: overrides
            .rollout_batch
            .or(file.trainer.rollout_batch)
            .unwrap_or(trainer_defaults.rollout_batch),
        global_batch: overrides
            .global_batch
            .or(file.trainer.global_batch)
            .unwrap_or(trainer_defaults.global_batch),
        learning_rate: overrides
            .learning_rate
            .or(file.trainer.learning_rate)
            .unwrap_or(trainer_defaults.learning_rate),
        clip_eps: overrides
            .clip_eps
            .or(file.trainer.clip_eps)
            .unwrap_or(trainer_defaults.clip_eps),
        kl_beta: overrides
            .kl_beta
            .or(file.trainer.kl_beta)
            .unwrap_or(trainer_defaults.kl_beta),
        scheme,
        stage1_steps: overrides
            .stage1_steps
            .or(file.trainer.stage1_steps)
            .unwrap_or(trainer_defaults.stage1_steps),
        stage2_steps: overrides
            .stage2_steps
            .or(file.trainer.stage2_steps)
            .unwrap_or(trainer_defaults.stage2_steps),
        hint_stage2: overrides
            .hint
            .or(file.trainer.hint_stage2)
            .unwrap_or(trainer_defaults.hint_stage2),
        temperature: overrides
            .temperature
            .or(file.trainer.temperature)
            .unwrap_or(trainer_defaults.temperature),
        seed,
    };
    trainer.validate()?;

    Ok(Experiment {
        seed,
        bank,
        reweight,
        use_std_norm,
        curation,
        trainer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn load_str(text: &str, overrides: &Overrides) -> Result<Experiment> {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        load(file.path(), overrides)
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let experiment = load_str("seed = 7", &Overrides::default()).unwrap();
        assert_eq!(experiment.seed, 7);
        assert_eq!(experiment.bank.task_count, 200);
        assert_eq!(experiment.reweight.family, WeightFamily::Exponential);
        assert!(!experiment.use_std_norm);
        assert_eq!(experiment.trainer.stage1_steps, 60);
        assert_eq!(experiment.trainer.stage2_steps, 30);
        assert_eq!(experiment.curation.sample_sizes.len(), 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = load_str("seed = 1\nlearning_rate = 3.0", &Overrides::default()).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        let err = load_str("seed = 1\n[trainer]\nlr = 3.0", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("lr"));
    }

    #[test]
    fn missing_seed_is_rejected() {
        assert!(load_str("[trainer]\ngroup_size = 4", &Overrides::default()).is_err());
    }

    #[test]
    fn family_presets_flow_through() {
        let experiment = load_str(
            "seed = 1\n[reweight]\nfamily = \"steep_exponential\"",
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(experiment.reweight.min_weight, 0.3);
        assert_eq!(experiment.reweight.max_weight, 2.2);
        assert_eq!(experiment.reweight.midpoint, 0.65);

        let experiment = load_str(
            "seed = 1\n[reweight]\nfamily = \"quadratic\"\nb = 2.0",
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(experiment.reweight.max_weight, 2.0);
        assert_eq!(experiment.reweight.min_weight, 0.4);
    }

    #[test]
    fn overrides_beat_file_values() {
        let overrides = Overrides {
            scheme: Some("none".into()),
            std_norm: Some(true),
            stage2_steps: Some(0),
            ..Overrides::default()
        };
        let experiment = load_str(
            "seed = 1\n[reweight]\nfamily = \"linear\"\n[trainer]\nstage2_steps = 30",
            &overrides,
        )
        .unwrap();
        assert_eq!(experiment.reweight.family, WeightFamily::None);
        assert!(experiment.use_std_norm);
        assert_eq!(experiment.trainer.stage2_steps, 0);
    }

    #[test]
    fn invalid_mix_is_a_config_error() {
        let err = load_str(
            "seed = 1\n[bank]\nmix = [[0.0, 0.5], [0.9, 0.4]]",
            &Overrides::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);
    }
}
