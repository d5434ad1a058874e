use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kginfluence::baselines::{KlDirection, LdaConfig, DEFAULT_MIN_NGRAM};
use kginfluence::corpus::ScholarlyConfig;
use kginfluence::encoder::EncoderConfig;
use kginfluence::features::ServiceConfig;
use kginfluence::kgx::{LlmConfig, DEFAULT_CHUNK_SIZE, DEFAULT_OVERLAP};
use kginfluence::training::TrainConfig;
use serde::{Deserialize, Serialize};

pub const CONFIG_ECHO: &str = "config.toml";

/// Whole-pipeline configuration. Relative paths resolve against the
/// working directory. The master `seed` is copied into every seeded stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub ingest: IngestConfig,
    pub extract: ExtractConfig,
    pub features: FeaturesConfig,
    pub encoder: EncoderConfig,
    pub train: TrainConfig,
    pub sampling: SamplingConfig,
    pub baselines: BaselinesConfig,
    pub evaluate: EvaluateConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus_dir: PathBuf,
    pub graphs_file: PathBuf,
    pub pairs_file: PathBuf,
    pub cache_dir: PathBuf,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpus_dir: "data/corpus".into(),
            graphs_file: "data/graphs/graphs.jsonl".into(),
            pairs_file: "data/pairs/pairs.csv".into(),
            cache_dir: "data/cache".into(),
            output_dir: "out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub subjects: Vec<String>,
    pub limit_per_subject: usize,
    pub source: ScholarlyConfig,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            subjects: Vec::new(),
            limit_per_subject: 200,
            source: ScholarlyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    /// Read `<sidecar_dir>/<doc_id>.triples` instead of calling the LLM.
    pub mock: bool,
    pub sidecar_dir: PathBuf,
    pub chunk_size: usize,
    pub overlap: usize,
    pub template: Option<PathBuf>,
    pub llm: LlmConfig,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            mock: false,
            sidecar_dir: "data/sidecars".into(),
            chunk_size: DEFAULT_CHUNK_SIZE,
            overlap: DEFAULT_OVERLAP,
            template: None,
            llm: LlmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Hash,
    Service,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    pub provider: ProviderKind,
    pub dim: usize,
    pub service: ServiceConfig,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        FeaturesConfig {
            provider: ProviderKind::Hash,
            dim: kginfluence::features::DEFAULT_DIM,
            service: ServiceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub n_positive: usize,
    /// Defaults to the reference negative:positive ratio.
    pub n_negative: Option<usize>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n_positive: 8_500,
            n_negative: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselinesConfig {
    pub min_ngram: usize,
    /// Strip the title block and reference list before text reuse.
    pub trim: bool,
    pub kl_direction: KlDirection,
    pub lda: LdaConfig,
}

impl Default for BaselinesConfig {
    fn default() -> Self {
        BaselinesConfig {
            min_ngram: DEFAULT_MIN_NGRAM,
            trim: true,
            kl_direction: KlDirection::Symmetric,
            lda: LdaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub svg: bool,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig { svg: true }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Apply flag overrides and propagate the master seed.
    pub fn finalize(mut self, seed: Option<u64>, output: Option<PathBuf>, mock: bool) -> Result<Self> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(o) = output {
            self.paths.output_dir = o;
        }
        self.extract.mock |= mock;
        self.encoder.seed = self.seed;
        self.train.seed = self.seed;
        self.baselines.lda.seed = self.seed;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        self.train.validate()?;
        self.baselines.lda.validate()?;
        let dim = match self.features.provider {
            ProviderKind::Hash => self.features.dim,
            ProviderKind::Service => self.features.service.dim,
        };
        if dim != self.encoder.in_dim {
            bail!("feature dimension {dim} does not match encoder.in_dim {}", self.encoder.in_dim);
        }
        if self.baselines.min_ngram == 0 {
            bail!("baselines.min_ngram must be at least 1");
        }
        Ok(())
    }

    pub fn n_negative(&self) -> usize {
        self.sampling
            .n_negative
            .unwrap_or_else(|| kginfluence::training::negatives_for(self.sampling.n_positive))
    }

    /// Write the effective config into `dir`.
    pub fn echo_into(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let text = toml::to_string(self).context("serializing config")?;
        let path = dir.join(CONFIG_ECHO);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Directory holding `file`, or `.` for a bare file name.
pub fn parent_dir(file: &Path) -> PathBuf {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("sede = 3").is_err());
        assert!(toml::from_str::<RunConfig>("[train]\nlr = 0.1").is_err());
    }

    #[test]
    fn seed_propagates() {
        let cfg = RunConfig::default().finalize(Some(42), None, true).unwrap();
        assert_eq!((cfg.encoder.seed, cfg.train.seed, cfg.baselines.lda.seed), (42, 42, 42));
        assert!(cfg.extract.mock);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let mut cfg = RunConfig::default();
        cfg.features.dim = 64;
        assert!(cfg.finalize(None, None, false).is_err());
    }

    #[test]
    fn default_negative_ratio() {
        assert_eq!(RunConfig::default().n_negative(), 13_500);
    }
}
