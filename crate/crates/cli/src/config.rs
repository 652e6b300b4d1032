//! Config file loading and flag merging: flags win over the file, the file
//! wins over built-in defaults.

use std::fs;
use std::path::Path;

use heartid_core::classify::{KernelSpec, SvmConfig};
use heartid_core::embedding::TsneConfig;
use heartid_core::mfcc::FeatureConfig;
use heartid_core::radar::{EchoSearch, RadarConfig};
use heartid_core::synth::{
    hard_cohort, well_separated_cohort, CohortConfig, PersonProfile, Placement, RenderMode, Schedule,
    SessionVariation, DEFAULT_SNR_DB, HARD_COHORT_SNR_DB,
};
use serde::Deserialize;

use crate::args::{FeatureFlags, Preset, SvmFlags, SynthArgs};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub mode: Option<RenderMode>,
    pub duration: Option<f64>,
    pub fs: Option<f64>,
    pub snr_db: Option<f64>,
    pub days: Option<u32>,
    pub repetitions: Option<u32>,
    pub radar: Option<RadarConfig>,
    pub placement: Option<Placement>,
    pub variation: Option<SessionVariation>,
    /// Replaces the preset's participants.
    pub profiles: Option<Vec<PersonProfile>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub synth: SynthSection,
    pub features: FeatureConfig,
    pub echo: EchoSearch,
    pub svm: SvmConfig,
    pub tsne: TsneConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Everything `synth` needs after merging.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthPlan {
    pub dataset_id: String,
    pub preset: Preset,
    pub profiles: Vec<PersonProfile>,
    pub schedule: Schedule,
    pub cohort: CohortConfig,
}

pub fn resolve_synth(args: &SynthArgs, file: &SynthSection) -> SynthPlan {
    let preset = args.preset.or(file.preset).unwrap_or(Preset::Default);
    let (profiles, preset_snr) = match preset {
        Preset::Default => (well_separated_cohort(), DEFAULT_SNR_DB),
        Preset::Hard => (hard_cohort(), HARD_COHORT_SNR_DB),
    };
    let base = CohortConfig::default();
    let cohort = CohortConfig {
        duration: args.duration.or(file.duration).unwrap_or(base.duration),
        fs: args.fs.or(file.fs).unwrap_or(base.fs),
        snr_db: args.snr_db.or(file.snr_db).unwrap_or(preset_snr),
        seed: args.seed.or(file.seed).unwrap_or(base.seed),
        mode: args.mode.or(file.mode).unwrap_or(base.mode),
        radar: file.radar.unwrap_or(base.radar),
        placement: file.placement.unwrap_or(base.placement),
        variation: file.variation.unwrap_or(base.variation),
    };
    let base_schedule = Schedule::default();
    let schedule = Schedule::days(
        args.days.or(file.days).unwrap_or(base_schedule.sessions.len() as u32 / 2),
        args.repetitions.or(file.repetitions).unwrap_or(base_schedule.repetitions),
    );
    let preset_name = match preset {
        Preset::Default => "default",
        Preset::Hard => "hard",
    };
    let mode = match cohort.mode {
        RenderMode::Baseband => "baseband",
        RenderMode::Cube => "cube",
    };
    SynthPlan {
        dataset_id: format!("heartid-{preset_name}-{mode}-seed{}", cohort.seed),
        preset,
        profiles: file.profiles.clone().unwrap_or(profiles),
        schedule,
        cohort,
    }
}

pub fn resolve_features(flags: &FeatureFlags, file: &FeatureConfig) -> FeatureConfig {
    FeatureConfig {
        n_filters: flags.n_filters.unwrap_or(file.n_filters),
        f_ref: flags.f_ref.unwrap_or(file.f_ref),
        f_prime: flags.f_prime.unwrap_or(file.f_prime),
        k_prime: flags.k_prime.unwrap_or(file.k_prime),
        window_len: flags.window.unwrap_or(file.window_len),
        hop: flags.hop.unwrap_or(file.hop),
        log_energies: flags.log_energies || file.log_energies,
        ..*file
    }
}

pub fn resolve_svm(flags: &SvmFlags, file: &SvmConfig) -> CliResult<SvmConfig> {
    let mut kernel = flags.kernel.unwrap_or(file.kernel);
    if let Some(g) = flags.gamma {
        kernel = match kernel {
            KernelSpec::Rbf { .. } => KernelSpec::Rbf { gamma: Some(g) },
            KernelSpec::Linear => return Err(CliError::Usage("--gamma needs the rbf kernel".into())),
        };
    }
    Ok(SvmConfig {
        kernel,
        c: flags.c.unwrap_or(file.c),
        ..*file
    })
}

pub fn resolve_tsne(seed: Option<u64>, perplexity: Option<f64>, iterations: Option<usize>, file: &TsneConfig) -> TsneConfig {
    TsneConfig {
        seed: seed.unwrap_or(file.seed),
        perplexity: perplexity.unwrap_or(file.perplexity),
        iterations: iterations.unwrap_or(file.iterations),
        ..*file
    }
}
