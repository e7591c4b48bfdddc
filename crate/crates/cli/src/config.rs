//! Run configuration: one TOML file with a section per pipeline stage, plus
//! dotted-key overrides from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rlie_core::corpus::{shootings_schema, EntitySchema, EntitySpec};
use rlie_core::dqn::TrainConfig;
use rlie_core::eval::DEFAULT_TAU_GRID;
use rlie_core::extractor::{MaxentConfig, SgdConfig};
use rlie_core::mdp::EnvConfig;
use rlie_core::pipeline::{RetrievalConfig, Variant};
use rlie_core::util::fnv1a;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Every stage seed is derived from this one.
    pub seed: u64,
    pub schema: SchemaSection,
    pub data: DataSection,
    pub lexicons: LexiconSection,
    pub extractor: ExtractorSection,
    pub retrieval: RetrievalConfig,
    pub env: EnvConfig,
    pub agent: AgentSection,
    pub train: TrainConfig,
    pub meta: MetaSection,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            schema: SchemaSection::default(),
            data: DataSection::default(),
            lexicons: LexiconSection::default(),
            extractor: ExtractorSection::default(),
            retrieval: RetrievalConfig::default(),
            env: EnvConfig::default(),
            agent: AgentSection::default(),
            train: TrainConfig::default(),
            meta: MetaSection::default(),
            eval: EvalSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemaSection {
    pub entities: Vec<EntitySpec>,
}

impl Default for SchemaSection {
    fn default() -> Self {
        Self {
            entities: shootings_schema().entities().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// External corpus file. When absent, `gen-data` writes a synthetic one.
    pub corpus: Option<PathBuf>,
    pub n_events: usize,
    pub distractor_ratio: f64,
    pub noise: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            corpus: None,
            n_events: 300,
            distractor_ratio: 3.0,
            noise: 0.6,
            n_train: 200,
            n_test: 100,
        }
    }
}

/// Word-list files; bundled lists are used for any that are unset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconSection {
    pub male_names: Option<PathBuf>,
    pub female_names: Option<PathBuf>,
    pub cities: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractorSection {
    pub dimension: usize,
    pub hash_seed: u64,
    pub window: usize,
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for ExtractorSection {
    fn default() -> Self {
        let m = MaxentConfig::default();
        Self {
            dimension: m.dimension,
            hash_seed: m.hash_seed,
            window: m.window,
            l2: m.l2,
            learning_rate: m.learning_rate,
            epochs: m.epochs,
            batch_size: m.batch_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSection {
    pub variant: Variant,
}

impl Default for AgentSection {
    fn default() -> Self {
        Self {
            variant: Variant::Extract,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaSection {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for MetaSection {
    fn default() -> Self {
        let s = SgdConfig::default();
        Self {
            learning_rate: s.learning_rate,
            l2: s.l2,
            epochs: s.epochs,
            batch_size: s.batch_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub taus: Vec<f64>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            taus: DEFAULT_TAU_GRID.to_vec(),
        }
    }
}

/// Pipeline stages, in dependency order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    GenData,
    TrainExtractor,
    BuildPools,
    TrainAgent,
    Evaluate,
    Baselines,
}

impl Stage {
    pub fn command(self) -> &'static str {
        match self {
            Stage::GenData => "gen-data",
            Stage::TrainExtractor => "train-extractor",
            Stage::BuildPools => "build-pools",
            Stage::TrainAgent => "train-agent",
            Stage::Evaluate => "evaluate",
            Stage::Baselines => "baselines",
        }
    }

    /// Config sections whose values the stage's outputs depend on.
    fn sections(self) -> &'static [&'static str] {
        const DATA: &[&str] = &["seed", "schema", "data"];
        match self {
            Stage::GenData => DATA,
            Stage::TrainExtractor => &["seed", "schema", "data", "lexicons", "extractor"],
            Stage::BuildPools => &["seed", "schema", "data", "retrieval"],
            Stage::TrainAgent | Stage::Evaluate => &[
                "seed",
                "schema",
                "data",
                "lexicons",
                "extractor",
                "retrieval",
                "env",
                "agent",
                "train",
            ],
            Stage::Baselines => &[
                "seed",
                "schema",
                "data",
                "lexicons",
                "extractor",
                "retrieval",
                "env",
                "meta",
                "eval",
            ],
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunConfig {
    /// Reads `path` (or starts from defaults), applies `key=value` overrides
    /// and validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                text.parse()
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: RunConfig =
            toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| {
                    CliError::Usage(format!("invalid config: {}", e.message()))
                })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        self.schema()?;
        let d = &self.data;
        if d.n_train == 0 {
            return usage("data.n_train must be positive");
        }
        if d.n_events == 0 {
            return usage("data.n_events must be positive");
        }
        if !(0.0..=1.0).contains(&d.noise) {
            return usage("data.noise must lie in [0, 1]");
        }
        if d.distractor_ratio.is_nan() || d.distractor_ratio < 0.0 {
            return usage("data.distractor_ratio must be non-negative");
        }
        if self.corpus_is_synthetic() && d.n_train + d.n_test > d.n_events {
            return usage("data.n_train + data.n_test exceeds data.n_events");
        }
        if self.extractor.dimension == 0 {
            return usage("extractor.dimension must be positive");
        }
        if self.retrieval.k == 0 {
            return usage("retrieval.k must be positive");
        }
        if self.eval.taus.is_empty() || self.eval.taus.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return usage("eval.taus must be a non-empty list of values in [0, 1]");
        }
        self.env
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        self.train
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if self.train.allowed_decisions.is_some() {
            return usage("train.allowed_decisions is set by agent.variant");
        }
        Ok(())
    }

    pub fn schema(&self) -> Result<EntitySchema, CliError> {
        EntitySchema::new(self.schema.entities.clone()).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn corpus_is_synthetic(&self) -> bool {
        self.data.corpus.is_none()
    }

    /// Seed for one named stage, derived from the global seed.
    pub fn sub_seed(&self, name: &str) -> u64 {
        fnv1a(self.seed, name.as_bytes())
    }

    pub fn maxent(&self) -> MaxentConfig {
        let e = &self.extractor;
        MaxentConfig {
            dimension: e.dimension,
            hash_seed: e.hash_seed,
            window: e.window,
            l2: e.l2,
            learning_rate: e.learning_rate,
            epochs: e.epochs,
            batch_size: e.batch_size,
            seed: self.sub_seed("extractor"),
        }
    }

    pub fn meta_sgd(&self) -> SgdConfig {
        let m = &self.meta;
        SgdConfig {
            learning_rate: m.learning_rate,
            l2: m.l2,
            epochs: m.epochs,
            batch_size: m.batch_size,
            seed: self.sub_seed("meta"),
        }
    }

    /// Hash over the sections a stage depends on.
    pub fn stage_hash(&self, stage: Stage) -> String {
        let full = serde_json::to_value(self).expect("config serializes");
        let picked: serde_json::Map<String, serde_json::Value> = stage
            .sections()
            .iter()
            .map(|s| (s.to_string(), full[*s].clone()))
            .collect();
        sha256_hex(
            serde_json::to_string(&picked)
                .expect("config serializes")
                .as_bytes(),
        )
    }
}

/// Sets `a.b.c = value` in `table`. The value is parsed as TOML, or taken as
/// a bare string when it does not parse.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Usage(format!("bad override key `{key}`")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        node = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                CliError::Usage(format!("override `{key}`: `{part}` is not a section"))
            })?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
